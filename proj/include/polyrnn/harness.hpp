#pragma once

// Grid-based error measurement against a Horner oracle, and CSV I/O for the
// resulting error curves.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "polyrnn/polynomial.hpp"
#include "polyrnn/rnn.hpp"

namespace polyrnn {

inline double horner_eval(const std::vector<double>& coeffs, double x) {
  double r = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * x + *it;
  return r;
}

inline constexpr std::size_t kDyadicCap = 12;

// Dyadic level used to augment the grid at time t.
inline std::size_t dyadic_level(std::size_t t) {
  return std::min(t + 1, kDyadicCap);
}

struct GridPoint {
  double x = 0;
  std::size_t level = 0;  // smallest dyadic level containing x; 0 for uniform points
};

// grid_n + 1 uniform points of [-D, D] followed by j D / 2^max_level,
// |j| <= 2^max_level.
inline std::vector<GridPoint> sample_grid(double d, std::size_t grid_n,
                                          std::size_t max_level) {
  if (grid_n < 2) throw std::invalid_argument("grid_n must be >= 2");
  std::vector<GridPoint> pts;
  for (std::size_t i = 0; i <= grid_n; ++i) {
    pts.push_back({-d + 2.0 * d * static_cast<double>(i) /
                            static_cast<double>(grid_n), 0});
  }
  const long long half = 1LL << max_level;
  for (long long j = -half; j <= half; ++j) {
    const auto aj = static_cast<unsigned long long>(j < 0 ? -j : j);
    const std::size_t lvl =
        aj == 0 ? 0 : max_level - static_cast<std::size_t>(std::countr_zero(aj));
    pts.push_back({std::ldexp(static_cast<double>(j), -static_cast<int>(max_level)) * d,
                   lvl});
  }
  return pts;
}

namespace detail {

// Per-time max of |y[t] - p(x)| over pts, for t = 0..t_max. A dyadic point
// of level l only counts at times with dyadic_level(t) >= l.
inline std::vector<double> sweep(const RnnWeights& net,
                                 const std::vector<double>& coeffs,
                                 const std::vector<GridPoint>& pts,
                                 std::size_t t_max, std::size_t threads) {
  if (net.d_in != 1 || net.d_out != 1) {
    throw dimension_error("error sweep needs a scalar-in, scalar-out net");
  }
  threads = std::max<std::size_t>(1, std::min(threads, pts.size()));
  std::vector<std::vector<double>> partial(threads,
                                           std::vector<double>(t_max + 1, 0.0));
  auto work = [&](std::size_t w) {
    auto& acc = partial[w];
    for (std::size_t i = w; i < pts.size(); i += threads) {
      const auto& p = pts[i];
      const double truth = horner_eval(coeffs, p.x);
      const auto ys = run_scalar(net, p.x, t_max);
      for (std::size_t t = 0; t <= t_max; ++t) {
        if (p.level > dyadic_level(t)) continue;
        acc[t] = std::max(acc[t], std::abs(ys[t] - truth));
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  std::vector<double> out(t_max + 1, 0.0);
  for (const auto& part : partial)
    for (std::size_t t = 0; t <= t_max; ++t) out[t] = std::max(out[t], part[t]);
  return out;
}

}  // namespace detail

inline double sup_error(const RnnWeights& net, const PolynomialSpec& spec,
                        std::size_t t, std::size_t grid_n = 2000,
                        std::size_t threads = 1) {
  const auto pts = sample_grid(spec.d, grid_n, dyadic_level(t));
  return detail::sweep(net, spec.coeffs, pts, t, threads)[t];
}

struct ErrorRow {
  std::size_t t = 0;
  double sup_error = 0;
  double bound = 0;
  bool bound_valid = false;

  bool operator==(const ErrorRow&) const = default;
};

struct ErrorCurve {
  std::vector<ErrorRow> rows;

  bool operator==(const ErrorCurve&) const = default;

  // Rows where the bound applies and is exceeded.
  std::vector<ErrorRow> violations() const {
    std::vector<ErrorRow> out;
    for (const auto& r : rows)
      if (r.bound_valid && r.sup_error > r.bound) out.push_back(r);
    return out;
  }
};

inline ErrorCurve decay_curve(const RnnWeights& net, const PolynomialSpec& spec,
                              const PolyErrorBound& bound, std::size_t t_max,
                              std::size_t grid_n = 2000, std::size_t threads = 1) {
  const auto pts = sample_grid(spec.d, grid_n, dyadic_level(t_max));
  const auto errs = detail::sweep(net, spec.coeffs, pts, t_max, threads);
  ErrorCurve curve;
  for (std::size_t t = 0; t <= t_max; ++t) {
    ErrorRow r;
    r.t = t;
    r.sup_error = errs[t];
    r.bound_valid = bound.valid_at(t);
    r.bound = r.bound_valid ? bound.at(t) : 0.0;
    curve.rows.push_back(r);
  }
  return curve;
}

inline ErrorCurve decay_curve(const PolyRnn& built, const PolynomialSpec& spec,
                              std::size_t t_max, std::size_t grid_n = 2000,
                              std::size_t threads = 1) {
  return decay_curve(built.net.weights, spec, built.bound, t_max, grid_n, threads);
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class Num>
Num parse_num(std::string_view s, std::size_t line) {
  Num v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("CSV line " + std::to_string(line) +
                             ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

inline constexpr const char* kCurveHeader = "t,sup_error,bound,bound_valid";

inline void write_csv(std::ostream& os, const ErrorCurve& curve) {
  os << kCurveHeader << '\n';
  for (const auto& r : curve.rows) {
    os << r.t << ',' << detail::format_double(r.sup_error) << ','
       << detail::format_double(r.bound) << ',' << (r.bound_valid ? 1 : 0) << '\n';
  }
}

inline ErrorCurve read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCurveHeader) {
    throw std::runtime_error("CSV: expected header '" + std::string(kCurveHeader) + "'");
  }
  ErrorCurve curve;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      auto pos = rest.find(',');
      f.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (f.size() != 4) {
      throw std::runtime_error("CSV line " + std::to_string(lineno) +
                               ": expected 4 fields");
    }
    ErrorRow r;
    r.t = detail::parse_num<std::size_t>(f[0], lineno);
    r.sup_error = detail::parse_num<double>(f[1], lineno);
    r.bound = detail::parse_num<double>(f[2], lineno);
    r.bound_valid = detail::parse_num<int>(f[3], lineno) != 0;
    curve.rows.push_back(r);
  }
  return curve;
}

}  // namespace polyrnn
