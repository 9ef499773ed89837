#pragma once

// Structural operations on RNNs: parallel runs, input/output absorption,
// the five-neuron clock, clocked concatenation and concatenation trees.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polyrnn/linalg.hpp"
#include "polyrnn/rnn.hpp"

namespace polyrnn {

template <Scalar T>
BasicRnnWeights<T> parallel(std::span<const BasicRnnWeights<T>> nets) {
  if (nets.empty()) throw std::invalid_argument("parallel: empty list");
  std::vector<BasicMatrix<T>> ah, ax, ao;
  std::vector<BasicVector<T>> bh, bo;
  for (const auto& n : nets) {
    ah.push_back(n.a_h);
    ax.push_back(n.a_x);
    ao.push_back(n.a_o);
    bh.push_back(n.b_h);
    bo.push_back(n.b_o);
  }
  return BasicRnnWeights<T>(block_diag<T>(ah), block_diag<T>(ax),
                            concat<T>(std::span<const BasicVector<T>>(bh)),
                            block_diag<T>(ao),
                            concat<T>(std::span<const BasicVector<T>>(bo)));
}

template <Scalar T>
BasicRnnWeights<T> parallel(std::initializer_list<BasicRnnWeights<T>> nets) {
  return parallel<T>(std::span<const BasicRnnWeights<T>>(nets.begin(), nets.size()));
}

// Input x is replaced by a·x.
template <Scalar T>
BasicRnnWeights<T> precompose_linear(BasicRnnWeights<T> w,
                                     const BasicMatrix<T>& a) {
  if (a.rows() != w.d_in) {
    throw dimension_error("precompose_linear: A has " +
                          std::to_string(a.rows()) + " rows, d_in is " +
                          std::to_string(w.d_in));
  }
  w.a_x = matmul(w.a_x, a);
  w.d_in = a.cols();
  return w;
}

// Output y is replaced by a·y + b.
template <Scalar T>
BasicRnnWeights<T> postcompose_affine(BasicRnnWeights<T> w,
                                      const BasicMatrix<T>& a,
                                      const BasicVector<T>& b) {
  if (a.cols() != w.d_out || b.dim() != a.rows()) {
    throw dimension_error("postcompose_affine: A is " +
                          detail::shape_str(a.rows(), a.cols()) +
                          " for d_out " + std::to_string(w.d_out));
  }
  w.a_o = matmul(a, w.a_o);
  w.b_o = affine(a, w.b_o, b);
  w.d_out = a.rows();
  return w;
}

// Autonomous pulse generator; h[t]_1 = 1 iff t = 2^k - 2 with k >= 2.
// The single output reads that coordinate.
template <Scalar T = double>
BasicRnnWeights<T> clock_rnn() {
  BasicMatrix<T> a_hat{{-4, 2, 0, 0, 0},
                       {-4, 2, 0, 2, T(-0.5)},
                       {0, 0, T(0.5), 0, -1},
                       {0, 1, 1, 0, 0},
                       {0, 0, 0, 0, 0}};
  BasicVector<T> b_hat{-1, T(0.5), 1, -2, 1};
  BasicMatrix<T> a_o{{1, 0, 0, 0, 0}};
  return BasicRnnWeights<T>(std::move(a_hat), BasicMatrix<T>(5, 0),
                            std::move(b_hat), std::move(a_o), BasicVector<T>(1));
}

// m = 1, everything zero; output 0 for every input.
template <Scalar T = double>
BasicRnnWeights<T> dummy_rnn(std::size_t d_in) {
  return BasicRnnWeights<T>(BasicMatrix<T>(1, 1), BasicMatrix<T>(1, d_in),
                            BasicVector<T>(1), BasicMatrix<T>(1, 1),
                            BasicVector<T>(1));
}

template <Scalar T>
struct BasicConcatArtifacts {
  BasicRnnWeights<T> weights;
  BasicMatrix<T> m_ring;  // m_f x m, picks the f block
  BasicMatrix<T> w_ring;  // m_g x m, picks the g block
  T b_f = 0;
  T b_hid_g = 0;
  // Block offsets inside the hidden state.
  std::size_t f_begin = 0, plus_begin = 0, minus_begin = 0, g_begin = 0,
              clock_begin = 0;
};

using ConcatArtifacts = BasicConcatArtifacts<double>;

// Runs f, and at every clock pulse restarts g on f's current output.
// At t = 2^k - 2 (k >= 3) the output equals g run for 2^(k-1) - 2 steps on
// f's output at 2^(k-1) - 2.
template <Scalar T>
BasicConcatArtifacts<T> concat(const BasicRnnWeights<T>& g,
                               const BasicRnnWeights<T>& f, T b_f, T b_hid_g) {
  if (g.d_in != f.d_out) {
    throw dimension_error("concat: g.d_in " + std::to_string(g.d_in) +
                          " != f.d_out " + std::to_string(f.d_out));
  }
  if (!(b_f > 0) || !(b_hid_g > 0)) {
    throw std::invalid_argument("concat: bounds must be positive");
  }
  const std::size_t mf = f.m, dp = f.d_out, mg = g.m;
  const auto clock = clock_rnn<T>();
  const std::vector<std::size_t> sizes{mf, dp, dp, mg, 5};

  auto clock_col = [](std::size_t rows, T v) {
    BasicMatrix<T> c(rows, 5);
    for (std::size_t i = 0; i < rows; ++i) c(i, 0) = v;
    return c;
  };

  BlockLayout<T> ah(sizes, sizes);
  ah.set(0, 0, f.a_h);
  ah.set(1, 0, f.a_o).set(1, 4, clock_col(dp, b_f));
  ah.set(2, 0, scaled(f.a_o, T(-1))).set(2, 4, clock_col(dp, b_f));
  ah.set(3, 1, g.a_x).set(3, 2, scaled(g.a_x, T(-1))).set(3, 3, g.a_h);
  ah.set(3, 4, clock_col(mg, -b_hid_g));
  ah.set(4, 4, clock.a_h);

  std::vector<T> bh;
  bh.insert(bh.end(), f.b_h.begin(), f.b_h.end());
  for (T v : f.b_o) bh.push_back(v - b_f);
  for (T v : f.b_o) bh.push_back(-v - b_f);
  bh.insert(bh.end(), g.b_h.begin(), g.b_h.end());
  bh.insert(bh.end(), clock.b_h.begin(), clock.b_h.end());

  BlockLayout<T> ax(sizes, {f.d_in});
  ax.set(0, 0, f.a_x);

  BlockLayout<T> ao({g.d_out}, sizes);
  ao.set(0, 3, g.a_o);

  BlockLayout<T> mr({mf}, sizes);
  mr.set(0, 0, BasicMatrix<T>::identity(mf));
  BlockLayout<T> wr({mg}, sizes);
  wr.set(0, 3, BasicMatrix<T>::identity(mg));

  BasicConcatArtifacts<T> out;
  out.weights = BasicRnnWeights<T>(block_assemble(ah), block_assemble(ax),
                                   BasicVector<T>(std::move(bh)),
                                   block_assemble(ao), g.b_o, f.domain);
  out.m_ring = block_assemble(mr);
  out.w_ring = block_assemble(wr);
  out.b_f = b_f;
  out.b_hid_g = b_hid_g;
  out.f_begin = 0;
  out.plus_begin = mf;
  out.minus_begin = mf + dp;
  out.g_begin = mf + 2 * dp;
  out.clock_begin = mf + 2 * dp + mg;
  return out;
}

struct BoundsLedger {
  double d0 = 1;               // input bound D
  std::vector<double> d_ell;   // output bounds D_1, D_2, ...
  double d_h = 2;              // uniform hidden bound

  void validate() const {
    if (!(d0 >= 0)) throw std::invalid_argument("BoundsLedger: D0 < 0");
    double mx = 2;
    for (double d : d_ell) {
      if (!(d >= 0)) throw std::invalid_argument("BoundsLedger: D_l < 0");
      mx = std::max(mx, d);
    }
    if (!(d_h >= mx)) {
      throw std::invalid_argument("BoundsLedger: D_h must be >= max(2, D_l)");
    }
  }
};

template <Scalar T>
struct BasicLevelReadout {
  BasicMatrix<T> a;
  BasicVector<T> b;
  // Level i of the composition is evaluated at dyadic index k - offsets[i].
  std::vector<std::size_t> offsets;

  BasicVector<T> apply(const BasicVector<T>& h) const { return affine(a, h, b); }
};

template <Scalar T>
struct BasicMulticoncatArtifacts {
  BasicRnnWeights<T> hidden_weights;
  std::vector<BasicLevelReadout<T>> level_readouts;
  std::size_t depth = 0;      // tree depth after padding
  std::size_t num_levels = 0; // nets supplied by the caller (before padding)
  double final_bound = 0;
};

using LevelReadout = BasicLevelReadout<double>;
using MulticoncatArtifacts = BasicMulticoncatArtifacts<double>;

namespace detail {

template <Scalar T>
BasicMulticoncatArtifacts<T> tree(std::span<const BasicRnnWeights<T>> nets,
                                  T d_h) {
  BasicMulticoncatArtifacts<T> out;
  if (nets.size() == 1) {
    out.hidden_weights = nets[0];
    out.level_readouts.push_back({nets[0].a_o, nets[0].b_o, {0}});
    return out;
  }
  const std::size_t half = nets.size() / 2;
  auto a = tree<T>(nets.first(half), d_h);
  auto b = tree<T>(nets.subspan(half), d_h);
  auto c = concat(b.hidden_weights, a.hidden_weights, d_h, d_h);

  out.depth = a.depth + 1;
  for (auto& r : a.level_readouts) {
    out.level_readouts.push_back({matmul(r.a, c.m_ring), r.b, r.offsets});
  }
  for (auto& r : b.level_readouts) {
    std::vector<std::size_t> offs(half, a.depth + 1);
    for (auto o : r.offsets) offs.push_back(o + 1);
    out.level_readouts.push_back({matmul(r.a, c.w_ring), r.b, std::move(offs)});
  }
  out.hidden_weights = std::move(c.weights);
  return out;
}

template <Scalar T>
void check_chain(std::span<const BasicRnnWeights<T>> nets) {
  for (std::size_t i = 1; i < nets.size(); ++i) {
    if (nets[i].d_in != nets[i - 1].d_out) {
      throw dimension_error("multiconcat: net " + std::to_string(i + 1) +
                            " has d_in " + std::to_string(nets[i].d_in) +
                            ", previous d_out is " +
                            std::to_string(nets[i - 1].d_out));
    }
  }
}

}  // namespace detail

// Power-of-two count only; the level readouts satisfy the composition
// identity at t = 2^k - 2 for k >= depth + 2.
template <Scalar T>
BasicMulticoncatArtifacts<T> multiconcat_tree(
    std::span<const BasicRnnWeights<T>> nets, const BoundsLedger& ledger) {
  if (nets.empty() || !std::has_single_bit(nets.size())) {
    throw std::invalid_argument("multiconcat_tree: need 2^L nets, got " +
                                std::to_string(nets.size()));
  }
  detail::check_chain(nets);
  ledger.validate();
  auto out = detail::tree<T>(nets, static_cast<T>(ledger.d_h));
  out.num_levels = nets.size();
  out.final_bound = ledger.d_ell.empty() ? ledger.d_h : ledger.d_ell.back();
  return out;
}

// Any positive count: pads with dummy nets up to max(2, next power of two).
template <Scalar T>
BasicMulticoncatArtifacts<T> multiconcat(
    std::span<const BasicRnnWeights<T>> nets, const BoundsLedger& ledger) {
  if (nets.empty()) throw std::invalid_argument("multiconcat: empty list");
  detail::check_chain(nets);
  const std::size_t padded = std::max<std::size_t>(2, std::bit_ceil(nets.size()));
  std::vector<BasicRnnWeights<T>> all(nets.begin(), nets.end());
  BoundsLedger led = ledger;
  for (std::size_t i = nets.size(); i < padded; ++i) {
    all.push_back(dummy_rnn<T>(i == nets.size() ? nets.back().d_out : 1));
    led.d_ell.push_back(0);
  }
  auto out = multiconcat_tree<T>(all, led);
  out.num_levels = nets.size();
  out.level_readouts.resize(nets.size());
  out.final_bound = ledger.d_ell.empty() ? ledger.d_h : ledger.d_ell.back();
  return out;
}

}  // namespace polyrnn
