#pragma once

// End-to-end polynomial network: coefficient readout over the monomial net,
// then hold-and-clip smoothing so every time step carries an approximation.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polyrnn/calculus.hpp"
#include "polyrnn/linalg.hpp"
#include "polyrnn/powers.hpp"
#include "polyrnn/primitives.hpp"
#include "polyrnn/rnn.hpp"

namespace polyrnn {

struct PolynomialSpec {
  std::vector<double> coeffs;  // a_0, ..., a_N
  double d = 1;

  PolynomialSpec() = default;
  PolynomialSpec(std::vector<double> a, double domain)
      : coeffs(std::move(a)), d(domain) {
    validate();
  }

  void validate() const {
    if (coeffs.empty()) throw std::invalid_argument("PolynomialSpec: no coefficients");
    for (double a : coeffs) {
      if (!std::isfinite(a)) {
        throw std::invalid_argument("PolynomialSpec: non-finite coefficient");
      }
    }
    detail::check_domain(d);
  }

  std::size_t degree() const { return coeffs.size() - 1; }

  double l1_norm() const {
    double s = 0;
    for (double a : coeffs) s += std::abs(a);
    return s;
  }
};

template <Scalar T>
T clip(T y, T lo, T hi) {
  return std::min(std::max(y, lo), hi);
}

struct SmoothedRnn {
  RnnWeights weights;
  double b = 1;            // clip bound
  std::size_t inner_m = 0;
  // False for the exact affine branch (degree <= 1), which is not wrapped.
  bool smoothed = true;
};

// Output at t = 2^k - 1 + l (k >= 2, 0 <= l < 2^k) is clip(y[2^k - 2], -B, B);
// output at t <= 2 is 0.
inline SmoothedRnn smooth_output(const RnnWeights& w, double b) {
  if (w.d_out != 1) {
    throw dimension_error("smooth_output: d_out must be 1, got " +
                          std::to_string(w.d_out));
  }
  if (!(b > 0) || !std::isfinite(b)) {
    throw std::invalid_argument("smooth_output: B must be positive and finite");
  }
  const std::size_t m = w.m;
  const auto clock = clock_rnn();
  const std::vector<std::size_t> sizes{m, 2, 2, 2, 5};

  Matrix pm(2, m);  // (A_o; -A_o)
  for (std::size_t c = 0; c < m; ++c) {
    pm(0, c) = w.a_o(0, c);
    pm(1, c) = -w.a_o(0, c);
  }
  auto pulse = [](double v) {
    Matrix c(2, 5);
    c(0, 0) = v;
    c(1, 0) = v;
    return c;
  };

  BlockLayout<double> ah(sizes, sizes);
  ah.set(0, 0, w.a_h);
  ah.set(1, 0, pm).set(1, 4, pulse(b));
  ah.set(2, 0, pm);
  ah.set(3, 1, Matrix::identity(2))
      .set(3, 2, scaled(Matrix::identity(2), -1.0))
      .set(3, 3, Matrix::identity(2))
      .set(3, 4, pulse(-b));
  ah.set(4, 4, clock.a_h);

  const double bo = w.b_o[0];
  std::vector<double> bh(w.b_h.begin(), w.b_h.end());
  for (double v : {bo - b, -bo - b, bo - b, -bo - b, 0.0, 0.0}) bh.push_back(v);
  bh.insert(bh.end(), clock.b_h.begin(), clock.b_h.end());

  BlockLayout<double> ax(sizes, {w.d_in});
  ax.set(0, 0, w.a_x);

  BlockLayout<double> ao({1}, sizes);
  ao.set(0, 1, Matrix{{1, -1}});
  ao.set(0, 2, Matrix{{-1, 1}});
  ao.set(0, 3, Matrix{{1, -1}});

  SmoothedRnn out;
  out.weights = RnnWeights(block_assemble(ah), block_assemble(ax),
                           Vector(std::move(bh)), block_assemble(ao), Vector(1),
                           w.domain);
  out.b = b;
  out.inner_m = m;
  return out;
}

struct TimeIndex {
  std::size_t t = 0;
  std::size_t k_tilde = 0;
  std::size_t ell_tilde = 0;
};

// t = 2^k~ - 1 + l~ with 0 <= l~ <= 2^k~ - 1.
inline TimeIndex time_decompose(std::size_t t) {
  if (t == 0) throw std::invalid_argument("time_decompose: t must be >= 1");
  const std::size_t k = static_cast<std::size_t>(std::bit_width(t + 1)) - 1;
  return {t, k, t + 1 - (std::size_t{1} << k)};
}

struct PolyErrorBound {
  double c1 = 0;
  double c2 = 0;
  std::size_t t_min = 0;
  double l1 = 0;
  bool exact = false;  // degree <= 1: zero error at every t

  double at(std::size_t t) const {
    if (exact) return 0;
    if (t < t_min) {
      throw std::domain_error("error bound only valid for t >= t_min = " +
                              std::to_string(t_min) + ", got t = " +
                              std::to_string(t));
    }
    return l1 * c1 * std::pow(4.0, -c2 * static_cast<double>(t));
  }

  bool valid_at(std::size_t t) const { return exact || t >= t_min; }
};

inline PolyErrorBound make_error_bound(const PolynomialSpec& spec) {
  spec.validate();
  PolyErrorBound e;
  e.l1 = spec.l1_norm();
  const std::size_t n = spec.degree();
  if (n <= 1) {
    e.exact = true;
    return e;
  }
  const double dn = std::pow(spec.d, 2.0 * static_cast<double>(n));
  if (!(dn <= kOverflowLimit)) {
    throw std::overflow_error("D^(2N) exceeds 1e300 for D=" +
                              std::to_string(spec.d) + ", N=" + std::to_string(n));
  }
  e.c1 = 16.0 * static_cast<double>(n) * dn;
  e.c2 = 1.0 / (4.0 * static_cast<double>(ceil_log2(n)));
  e.t_min = static_cast<std::size_t>(std::ceil(16.0 * std::log2(static_cast<double>(n))));
  return e;
}

inline double error_bound(const PolynomialSpec& spec, std::size_t t) {
  if (spec.degree() < 2) {
    throw std::invalid_argument("error_bound: degree must be >= 2");
  }
  return make_error_bound(spec).at(t);
}

// Sum |a_i| D^i, an upper bound for |p| on [-D, D].
inline double clip_bound(const PolynomialSpec& spec) {
  double s = 0, p = 1;
  for (double a : spec.coeffs) {
    s += std::abs(a) * p;
    p *= spec.d;
  }
  if (!(s <= kOverflowLimit)) {
    throw std::overflow_error("clip bound exceeds 1e300");
  }
  return s;
}

struct PolyRnn {
  SmoothedRnn net;
  PolyErrorBound bound;
  std::size_t levels = 0;  // monomial levels L; 0 for the exact branch
};

inline PolyRnn build_poly_rnn(const PolynomialSpec& spec) {
  spec.validate();
  PolyRnn out;
  out.bound = make_error_bound(spec);
  const std::size_t n = spec.degree();
  const double b_clip = clip_bound(spec);

  if (n <= 1) {
    const double a1 = n == 1 ? spec.coeffs[1] : 0.0;
    auto w = postcompose_affine(identity_rnn(), Matrix{{a1}}, Vector{spec.coeffs[0]});
    w.domain = spec.d;
    out.net.inner_m = w.m;
    out.net.weights = std::move(w);
    out.net.b = b_clip;
    out.net.smoothed = false;
    return out;
  }

  const std::size_t levels = ceil_log2(n);
  const auto powers = powers_rnn(spec.d, levels);
  const std::size_t width = std::size_t{1} << levels;
  Matrix a(1, width);
  for (std::size_t i = 1; i <= n; ++i) a(0, i - 1) = spec.coeffs[i];
  auto inner = postcompose_affine(powers.weights(), a, Vector{spec.coeffs[0]});
  // All-zero coefficients give B = 0; any positive B clips 0 to 0.
  out.net = smooth_output(inner, b_clip > 0 ? b_clip : 1.0);
  out.levels = levels;
  return out;
}

}  // namespace polyrnn
