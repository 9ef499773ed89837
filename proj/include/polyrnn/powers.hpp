#pragma once

// Monomial network: stacks the level readouts of the concatenation
// R^1_D, R^2_D, ..., R^L_D into (x, x^2, ..., x^(2^L)).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyrnn/calculus.hpp"
#include "polyrnn/linalg.hpp"
#include "polyrnn/primitives.hpp"
#include "polyrnn/rnn.hpp"

namespace polyrnn {

inline constexpr double kOverflowLimit = 1e300;

// D^(2^level), rejecting values above kOverflowLimit.
inline double tower_bound(double d, std::size_t level) {
  const double v = std::pow(d, std::ldexp(1.0, static_cast<int>(level)));
  if (!(v <= kOverflowLimit)) {
    throw std::overflow_error("D^(2^l) exceeds 1e300 for D=" +
                              std::to_string(d) + ", l=" + std::to_string(level));
  }
  return v;
}

// 8 * 2^l * D^(2^l) * 4^(-2^k / (2 l)).
inline double epsilon(double d, std::size_t level, std::size_t k) {
  if (level < 1) throw std::invalid_argument("epsilon: level must be >= 1");
  if (k < 2) throw std::invalid_argument("epsilon: k must be >= 2");
  const double expo = std::ldexp(1.0, static_cast<int>(k)) /
                      (2.0 * static_cast<double>(level));
  return 8.0 * std::ldexp(1.0, static_cast<int>(level)) * tower_bound(d, level) *
         std::pow(4.0, -expo);
}

struct EpsilonModel {
  double d = 1;
  double operator()(std::size_t level, std::size_t k) const {
    return epsilon(d, level, k);
  }
};

inline std::size_t ceil_log2(std::size_t n) {
  if (n == 0) throw std::invalid_argument("ceil_log2(0)");
  return static_cast<std::size_t>(std::bit_width(n - 1));
}

inline std::size_t dyadic_time(std::size_t k) { return (std::size_t{1} << k) - 2; }

// g_{l,k}(x): output of a net at t = 2^k - 2.
template <Scalar T>
BasicVector<T> g_map(const BasicRnnWeights<T>& net, std::size_t k,
                     const BasicVector<T>& x) {
  if (k < 2) throw std::invalid_argument("g_map: k must be >= 2");
  return output_of(net, run_delta_final(net, x, dyadic_time(k)));
}

template <Scalar T>
struct BasicPowersNet {
  BasicMulticoncatArtifacts<T> artifacts;
  BasicMatrix<T> q_a;  // 2^L x m
  BasicVector<T> q_b;
  std::size_t levels = 1;
  double d = 1;
  std::size_t m = 0;
  std::size_t min_k = 2;

  // Hidden operator with the stacked readout as its output map.
  BasicRnnWeights<T> weights() const {
    const auto& h = artifacts.hidden_weights;
    return BasicRnnWeights<T>(h.a_h, h.a_x, h.b_h, q_a, q_b, d);
  }

  std::size_t out_dim() const { return q_a.rows(); }

  // Readout times 2^k - 2 for k = min_k..k_max.
  std::vector<std::size_t> readout_times(std::size_t k_max) const {
    std::vector<std::size_t> out;
    for (std::size_t k = min_k; k <= k_max; ++k) out.push_back(dyadic_time(k));
    return out;
  }
};

using PowersNet = BasicPowersNet<double>;

template <Scalar T = double>
BasicPowersNet<T> powers_rnn(double d, std::size_t levels) {
  detail::check_domain(d);
  if (levels < 1) throw std::invalid_argument("powers_rnn: L must be >= 1");

  BoundsLedger ledger;
  ledger.d0 = d;
  std::vector<BasicRnnWeights<T>> nets;
  for (std::size_t l = 1; l <= levels; ++l) {
    ledger.d_ell.push_back(tower_bound(d, l));
    nets.push_back(l == 1 ? square_and_identity_rnn<T>(d) : polymap_rnn<T>(l, d));
  }
  ledger.d_h = std::max(2.0, ledger.d_ell.back());

  BasicPowersNet<T> out;
  out.artifacts = multiconcat<T>(nets, ledger);
  out.levels = levels;
  out.d = d;
  out.m = out.artifacts.hidden_weights.m;
  out.min_k = ceil_log2(levels) + 2;

  const std::size_t m = out.m;
  std::vector<T> rows, bias;
  std::size_t count = 0;
  for (std::size_t l = 1; l <= levels; ++l) {
    const auto& r = out.artifacts.level_readouts[l - 1];
    if (l == 1) {
      for (std::size_t row : {std::size_t{1}, std::size_t{0}}) {
        auto src = r.a.row(row);
        rows.insert(rows.end(), src.begin(), src.end());
        bias.push_back(r.b[row]);
      }
      count += 2;
    } else {
      const std::size_t take = std::size_t{1} << (l - 1);
      for (std::size_t row = 0; row < take; ++row) {
        auto src = r.a.row(row);
        rows.insert(rows.end(), src.begin(), src.end());
        bias.push_back(r.b[row]);
      }
      count += take;
    }
    if (count != (std::size_t{1} << l)) {
      throw std::logic_error("powers_rnn: stacked rows do not reach 2^l");
    }
  }
  out.q_a = BasicMatrix<T>(count, m, std::move(rows));
  out.q_b = BasicVector<T>(std::move(bias));
  return out;
}

}  // namespace polyrnn
