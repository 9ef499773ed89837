#pragma once

// Primitive networks and the analytic maps that check them.
//
// F(x) = x - x^2 on [0, 1] is interpolated at the nodes k / 2^m by
// I_m = H_0 + ... + H_{m-1}, where H_0 = s_0, H_l = s_l o H_{l-1} and
// s_l(y) = y/2 - relu(y - 2^(-2l-1)). The square network outputs
// D^2 (z - I_t(z)) with z = |x| / D.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyrnn/calculus.hpp"
#include "polyrnn/linalg.hpp"
#include "polyrnn/rnn.hpp"

namespace polyrnn {

inline double interp_target(double x) { return x - x * x; }

inline double sawtooth(std::size_t level, double y) {
  const double knee = std::ldexp(1.0, -2 * static_cast<int>(level) - 1);
  return 0.5 * y - std::max(0.0, y - knee);
}

namespace detail {

inline void check_unit(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("interpolant argument outside [0, 1]: " +
                            std::to_string(x));
  }
}

}  // namespace detail

// H_level(x).
inline double sawtooth_composite(std::size_t level, double x) {
  detail::check_unit(x);
  double y = sawtooth(0, x);
  for (std::size_t l = 1; l <= level; ++l) y = sawtooth(l, y);
  return y;
}

inline double interp_Im(std::size_t m, double x) {
  if (m < 1) throw std::invalid_argument("interp_Im: m must be >= 1");
  detail::check_unit(x);
  double y = sawtooth(0, x);
  double sum = y;
  for (std::size_t l = 1; l < m; ++l) {
    y = sawtooth(l, y);
    sum += y;
  }
  return sum;
}

// Same interpolant, evaluated as a straight line between neighbouring nodes.
inline double interp_nodal(std::size_t m, double x) {
  if (m < 1) throw std::invalid_argument("interp_nodal: m must be >= 1");
  detail::check_unit(x);
  const double n = std::ldexp(1.0, static_cast<int>(m));
  const double k = std::min(std::floor(x * n), n - 1);
  const double x0 = k / n, x1 = (k + 1) / n;
  const double lam = (x - x0) * n;
  return (1 - lam) * interp_target(x0) + lam * interp_target(x1);
}

struct InterpolantOracle {
  std::size_t m_level = 1;
  double operator()(double x) const { return interp_Im(m_level, x); }
};

namespace detail {

inline void check_domain(double d) {
  if (!(d >= 1.0) || !std::isfinite(d)) {
    throw std::invalid_argument("domain bound D must be finite and >= 1, got " +
                                std::to_string(d));
  }
}

}  // namespace detail

template <Scalar T = double>
BasicRnnWeights<T> square_rnn(double d) {
  detail::check_domain(d);
  const T h = T(0.5), q = T(0.25);
  BasicMatrix<T> a_h{{0, 0, 0, 0, 0, 0, 0},
                     {0, 0, 0, 0, 0, 0, 0},
                     {1, 1, h, -1, 0, 0, 0},
                     {1, 1, h, -1, 0, -1, 0},
                     {1, 1, -h, 1, 1, 0, 0},
                     {0, 0, 0, 0, 0, q, -h},
                     {0, 0, 0, 0, 0, 0, 0}};
  const T inv = T(1) / static_cast<T>(d);
  BasicMatrix<T> a_x(7, 1);
  a_x(0, 0) = inv;
  a_x(1, 0) = -inv;
  BasicVector<T> b_h{0, 0, 0, 0, 0, h, 1};
  const T d2 = static_cast<T>(d) * static_cast<T>(d);
  BasicMatrix<T> a_o{{0, 0, -h * d2, d2, d2, 0, 0}};
  return BasicRnnWeights<T>(std::move(a_h), std::move(a_x), std::move(b_h),
                            std::move(a_o), BasicVector<T>(1), d);
}

// Polarization: x1 x2 = ((x1 + x2)/2)^2 - ((x1 - x2)/2)^2.
template <Scalar T = double>
BasicRnnWeights<T> mult_rnn(double d) {
  const auto sq = square_rnn<T>(d);
  auto w = parallel<T>({sq, sq});
  w = precompose_linear(std::move(w),
                        BasicMatrix<T>{{T(0.5), T(0.5)}, {T(0.5), T(-0.5)}});
  w = postcompose_affine(std::move(w), BasicMatrix<T>{{1, -1}}, BasicVector<T>(1));
  w.domain = d;
  return w;
}

template <Scalar T = double>
BasicRnnWeights<T> identity_rnn() {
  return BasicRnnWeights<T>(BasicMatrix<T>::identity(2), BasicMatrix<T>{{1}, {-1}},
                            BasicVector<T>(2), BasicMatrix<T>{{1, -1}},
                            BasicVector<T>(1));
}

// Output (approx x^2, x).
template <Scalar T = double>
BasicRnnWeights<T> square_and_identity_rnn(double d) {
  auto w = parallel<T>({square_rnn<T>(d), identity_rnn<T>()});
  w = precompose_linear(std::move(w), BasicMatrix<T>{{1}, {1}});
  w.domain = d;
  return w;
}

inline std::size_t polymap_in_dim(std::size_t level) {
  if (level < 1) throw std::invalid_argument("polymap level must be >= 1");
  return level == 1 ? 1 : (std::size_t{1} << (level - 2)) + 1;
}

inline std::size_t polymap_out_dim(std::size_t level) {
  if (level < 1) throw std::invalid_argument("polymap level must be >= 1");
  return level == 1 ? 2 : (std::size_t{1} << (level - 1)) + 1;
}

struct PolyMapLevel {
  std::size_t level = 1;
  std::size_t in_dim() const { return polymap_in_dim(level); }
  std::size_t out_dim() const { return polymap_out_dim(level); }
};

// f_1(x) = (x^2, x); for level >= 2 with n = 2^(level-2):
// (x_n x_{n+1}, x_1^2, x_1 x_2, x_2^2, ..., x_{n-1} x_n, x_n^2, x_{n+1}).
inline Vector polymap_eval(std::size_t level, const Vector& x) {
  if (x.dim() != polymap_in_dim(level)) {
    throw dimension_error("polymap_eval: level " + std::to_string(level) +
                          " expects dim " +
                          std::to_string(polymap_in_dim(level)));
  }
  if (level == 1) return Vector{x[0] * x[0], x[0]};
  const std::size_t n = x.dim() - 1;
  Vector out(2 * n + 1);
  out[0] = x[n - 1] * x[n];
  for (std::size_t k = 1; k <= n; ++k) {
    out[2 * k - 1] = x[k - 1] * x[k - 1];
    if (k < n) out[2 * k] = x[k - 1] * x[k];
  }
  out[2 * n] = x[n];
  return out;
}

// (x^(2^(level-1)+1), ..., x^(2^level), x).
inline Vector polymap_concat_eval(std::size_t level, double x) {
  if (level < 1) throw std::invalid_argument("polymap level must be >= 1");
  const std::size_t lo = (std::size_t{1} << (level - 1)) + 1;
  const std::size_t hi = std::size_t{1} << level;
  std::vector<double> out;
  double p = 1;
  for (std::size_t i = 1; i <= hi; ++i) {
    p *= x;
    if (i >= lo) out.push_back(p);
  }
  out.push_back(x);
  return Vector(std::move(out));
}

// Rows: the pair (x_n, x_{n+1}), the squares x_1..x_n, the pairs
// (x_k, x_{k+1}) for k < n, then x_{n+1}; n = 2^(level-2).
inline Matrix selector_matrix(std::size_t level) {
  if (level < 2) throw std::invalid_argument("selector_matrix: level must be >= 2");
  const std::size_t n = std::size_t{1} << (level - 2);
  Matrix a(3 * n + 1, n + 1);
  std::size_t r = 0;
  a(r++, n - 1) = 1;
  a(r++, n) = 1;
  for (std::size_t k = 0; k < n; ++k) a(r++, k) = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    a(r++, k) = 1;
    a(r++, k + 1) = 1;
  }
  a(r++, n) = 1;
  return a;
}

// Approximates f_level for inputs bounded by D^(2^(level-1)), which is the
// bound the inner square and product nets are built with.
template <Scalar T = double>
BasicRnnWeights<T> polymap_rnn(std::size_t level, double d) {
  if (level < 2) throw std::invalid_argument("polymap_rnn: level must be >= 2");
  detail::check_domain(d);
  const std::size_t n = std::size_t{1} << (level - 2);
  const double inner = std::pow(d, static_cast<double>(n * 2));
  if (!(inner <= 1e300)) {
    throw std::overflow_error("polymap_rnn: D^(2^(l-1)) overflows for D=" +
                              std::to_string(d) + ", l=" + std::to_string(level));
  }
  const auto sq = square_rnn<T>(inner);
  const auto mu = mult_rnn<T>(inner);
  std::vector<BasicRnnWeights<T>> parts;
  parts.push_back(mu);
  for (std::size_t k = 0; k < n; ++k) parts.push_back(sq);
  for (std::size_t k = 0; k + 1 < n; ++k) parts.push_back(mu);
  parts.push_back(identity_rnn<T>());
  auto w = parallel<T>(parts);
  w = precompose_linear(std::move(w), BasicMatrix<T>(selector_matrix(level)));

  // Reorder the grouped outputs into f_level order.
  BasicMatrix<T> perm(2 * n + 1, 2 * n + 1);
  perm(0, 0) = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    perm(2 * k - 1, k) = 1;
    if (k < n) perm(2 * k, n + k) = 1;
  }
  perm(2 * n, 2 * n) = 1;
  w = postcompose_affine(std::move(w), perm, BasicVector<T>(2 * n + 1));
  w.domain = inner;
  return w;
}

}  // namespace polyrnn
