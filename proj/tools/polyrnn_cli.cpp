// polyrnn: build, run and check the fixed-weight polynomial RNNs from the
// command line. Exit code is 0 iff every requested check passes.

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "polyrnn/polyrnn.hpp"
#include "polyrnn/serialize.hpp"

using namespace polyrnn;

namespace {

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

void print_vec(const Vector& v) {
  for (std::size_t i = 0; i < v.dim(); ++i) std::printf("%s%.17g", i ? " " : "", v[i]);
}

int cmd_build(const std::vector<double>& coeffs, double d, const std::string& out) {
  const PolynomialSpec spec(coeffs, d);
  const auto p = build_poly_rnn(spec);
  std::printf("m %zu\nB %.17g\nC1 %.17g\nC2 %.17g\nt_min %zu\n", p.net.weights.m, p.net.b,
              p.bound.c1, p.bound.c2, p.bound.t_min);
  if (p.bound.exact) std::printf("exact (degree <= 1, zero error at every t)\n");
  if (!out.empty()) {
    write_json_file(out, to_json(p, spec));
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

int cmd_run(const std::string& net, double x, std::size_t steps, bool trace) {
  const auto w = weights_from_json(read_json_file(net));
  if (w.d_in != 1) throw dimension_error("run: --x feeds a scalar, net has d_in = " + std::to_string(w.d_in));
  const auto tr = run_delta(w, Vector{x}, steps);
  for (std::size_t t = 0; t <= steps; ++t) {
    std::printf("%zu ", t);
    print_vec(tr.outputs[t]);
    if (trace) {
      std::printf(" | ");
      print_vec(tr.states[t]);
    }
    std::printf("\n");
  }
  return 0;
}

int cmd_verify(const std::vector<double>& coeffs, double d, std::size_t steps, std::size_t grid,
               const std::string& csv) {
  const PolynomialSpec spec(coeffs, d);
  const auto p = build_poly_rnn(spec);
  const auto curve = decay_curve(p, spec, steps, grid, workers());
  if (csv.empty()) {
    write_csv(std::cout, curve);
  } else {
    std::ofstream os(csv);
    if (!os) throw std::runtime_error("cannot write " + csv);
    write_csv(os, curve);
  }
  std::size_t checked = 0;
  for (const auto& r : curve.rows) checked += r.bound_valid;
  const auto bad = curve.violations();
  for (const auto& r : bad)
    std::fprintf(stderr, "violation t=%zu sup_error=%.6e bound=%.6e\n", r.t, r.sup_error, r.bound);
  std::fprintf(stderr, "bound check: %s (%zu rows checked, %zu violations)\n",
               bad.empty() ? "PASS" : "FAIL", checked, bad.size());
  return bad.empty() ? 0 : 1;
}

int cmd_powers(std::size_t levels, double d, std::size_t k, double x) {
  const auto p = powers_rnn(d, levels);
  if (k < p.min_k)
    throw std::invalid_argument("powers: k must be >= " + std::to_string(p.min_k) + " for L=" +
                                std::to_string(levels));
  const std::size_t t = dyadic_time(k);
  const auto y = run_outputs(p.weights(), Vector{x}, t)[t];
  std::printf("t = %zu, x = %.17g\n", t, x);
  std::printf("%-6s %-24s %-24s %s\n", "power", "readout", "x^n", "|err|");
  double xn = 1;
  for (std::size_t i = 0; i < y.dim(); ++i) {
    xn *= x;
    std::printf("%-6zu %-24.17g %-24.17g %.3e\n", i + 1, y[i], xn, std::fabs(y[i] - xn));
  }
  std::printf("\neps(l, k) = 8 2^l D^(2^l) 4^(-2^k / (2l))\n%-4s", "l\\k");
  for (std::size_t kk = p.min_k; kk <= k; ++kk) std::printf(" %-11zu", kk);
  std::printf("\n");
  for (std::size_t l = 1; l <= levels; ++l) {
    std::printf("%-4zu", l);
    for (std::size_t kk = p.min_k; kk <= k; ++kk) std::printf(" %-11.3e", epsilon(d, l, kk));
    std::printf("\n");
  }
  return 0;
}

int cmd_unfold(const std::string& net, std::size_t steps, const std::string& out, bool check,
               double domain) {
  const auto j = read_json_file(net);
  const auto w = weights_from_json(j);
  const auto f = unfold(w, steps);
  std::printf("layers %zu (first, %zu shared, last)\n", f.num_layers(), steps);
  if (!out.empty()) {
    write_json_file(out, to_json(f));
    std::printf("wrote %s\n", out.c_str());
  }
  if (!check) return 0;
  if (w.d_in != 1) throw dimension_error("unfold --check needs a scalar-input net");
  double d = domain;
  if (d <= 0) d = w.domain.value_or(1.0);
  std::size_t mismatches = 0;
  const std::size_t n = 101;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -d + 2 * d * double(i) / double(n - 1);
    if (eval_ffn(f, Vector{x}) != run_outputs(w, Vector{x}, steps)[steps]) {
      ++mismatches;
      std::fprintf(stderr, "mismatch at x=%.17g\n", x);
    }
  }
  std::printf("check: %s (%zu points on [-%g, %g], %zu mismatches)\n",
              mismatches ? "FAIL" : "PASS", n, d, d, mismatches);
  return mismatches ? 1 : 0;
}

// Long double holds the 2^-t coordinate far past where double flushes it.
int cmd_clock(std::size_t steps) {
  const auto tr = run_delta(clock_rnn<long double>(), BasicVector<long double>{}, steps);
  for (std::size_t t = 0; t <= steps; ++t)
    if (tr.states[t][0] == 1.0L) std::printf("%zu\n", t);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-weight ReLU RNNs that approximate polynomials by running longer"};
  app.require_subcommand(1);

  std::vector<double> coeffs;
  double domain = 1;
  std::string out, net, csv;
  double x = 0.5;
  std::size_t steps = 0, grid = 2000, levels = 1, k = 4;
  bool trace = false, check = false;

  auto* build = app.add_subcommand("build", "construct and serialize the polynomial RNN");
  build->add_option("--coeffs", coeffs, "a0,a1,...,aN")->required()->delimiter(',');
  build->add_option("--domain", domain, "half-width D of [-D, D], D >= 1")->required();
  build->add_option("--out", out, "write net JSON here");

  auto* run = app.add_subcommand("run", "feed x once and print the output per t");
  run->add_option("--net", net, "net JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--x", x, "input value")->required();
  run->add_option("--steps", steps, "last t")->required();
  run->add_flag("--trace", trace, "also print the hidden state");

  auto* verify = app.add_subcommand("verify", "grid sup error per t against the bound");
  verify->add_option("--coeffs", coeffs, "a0,a1,...,aN")->required()->delimiter(',');
  verify->add_option("--domain", domain, "half-width D")->required();
  verify->add_option("--steps", steps, "t_max")->required();
  verify->add_option("--grid", grid, "uniform grid intervals")->capture_default_str();
  verify->add_option("--csv", csv, "write the curve here instead of stdout");

  auto* powers = app.add_subcommand("powers", "monomial readout at t = 2^k - 2 and eps table");
  powers->add_option("--levels", levels, "L")->required();
  powers->add_option("--domain", domain, "half-width D")->required();
  powers->add_option("--k", k, "readout index")->required();
  powers->add_option("--x", x, "input value")->capture_default_str();

  auto* unf = app.add_subcommand("unfold", "export the weight-shared feed-forward net");
  unf->add_option("--net", net, "net JSON")->required()->check(CLI::ExistingFile);
  unf->add_option("--steps", steps, "T")->required();
  unf->add_option("--out", out, "write FFN JSON here");
  unf->add_flag("--check", check, "compare against the recurrent run on a 101-point grid");
  double check_domain = 0;
  unf->add_option("--domain", check_domain, "grid half-width for --check (default: net domain)");

  auto* clock = app.add_subcommand("clock", "print the pulse times up to --steps");
  clock->add_option("--steps", steps, "last t")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return cmd_build(coeffs, domain, out);
    if (*run) return cmd_run(net, x, steps, trace);
    if (*verify) return cmd_verify(coeffs, domain, steps, grid, csv);
    if (*powers) return cmd_powers(levels, domain, k, x);
    if (*unf) return cmd_unfold(net, steps, out, check, check_domain);
    if (*clock) return cmd_clock(steps);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
