#pragma once

// Elman-type ReLU RNN driven by a one-shot input:
//   h[0] = relu(A_x x + b_h),  h[t] = relu(A_h h[t-1] + b_h),  y[t] = A_o h[t] + b_o.

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polyrnn/linalg.hpp"

namespace polyrnn {

template <Scalar T>
struct BasicRnnWeights {
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  std::size_t m = 0;
  BasicMatrix<T> a_h;
  BasicMatrix<T> a_x;
  BasicVector<T> b_h;
  BasicMatrix<T> a_o;
  BasicVector<T> b_o;
  // Input box [-D, D] the construction is certified on, if any.
  std::optional<double> domain;

  BasicRnnWeights() = default;

  BasicRnnWeights(BasicMatrix<T> a_h_, BasicMatrix<T> a_x_, BasicVector<T> b_h_,
                  BasicMatrix<T> a_o_, BasicVector<T> b_o_,
                  std::optional<double> domain_ = std::nullopt)
      : d_in(a_x_.cols()), d_out(a_o_.rows()), m(a_h_.rows()),
        a_h(std::move(a_h_)), a_x(std::move(a_x_)), b_h(std::move(b_h_)),
        a_o(std::move(a_o_)), b_o(std::move(b_o_)), domain(domain_) {
    validate();
  }

  template <Scalar U>
  explicit BasicRnnWeights(const BasicRnnWeights<U>& o)
      : d_in(o.d_in), d_out(o.d_out), m(o.m), a_h(o.a_h), a_x(o.a_x),
        b_h(o.b_h), a_o(o.a_o), b_o(o.b_o), domain(o.domain) {}

  void validate() const {
    auto bad = [](const std::string& what) {
      throw dimension_error("RnnWeights: " + what);
    };
    if (a_h.rows() != m || a_h.cols() != m) bad("A_h must be m x m");
    if (a_x.rows() != m || a_x.cols() != d_in) bad("A_x must be m x d_in");
    if (b_h.dim() != m) bad("b_h must have dim m");
    if (a_o.rows() != d_out || a_o.cols() != m) bad("A_o must be d_out x m");
    if (b_o.dim() != d_out) bad("b_o must have dim d_out");
  }

  bool operator==(const BasicRnnWeights&) const = default;
};

using RnnWeights = BasicRnnWeights<double>;

template <Scalar T>
struct BasicHiddenTrace {
  std::vector<BasicVector<T>> states;
  std::vector<BasicVector<T>> outputs;
};

using HiddenTrace = BasicHiddenTrace<double>;

template <Scalar T>
BasicVector<T> output_of(const BasicRnnWeights<T>& w, const BasicVector<T>& h) {
  return affine(w.a_o, h, w.b_o);
}

template <Scalar T>
BasicVector<T> step(const BasicRnnWeights<T>& w, const BasicVector<T>& h_prev,
                    const BasicVector<T>& x_t) {
  if (h_prev.dim() != w.m) throw dimension_error("step: state dim != m");
  if (x_t.dim() != w.d_in) throw dimension_error("step: input dim != d_in");
  BasicVector<T> pre(w.m);
  for (std::size_t i = 0; i < w.m; ++i) {
    detail::CompensatedSum<T> acc;
    detail::accumulate_row(acc, w.a_h.row(i), h_prev);
    detail::accumulate_row(acc, w.a_x.row(i), x_t);
    acc.add(w.b_h[i]);
    pre[i] = acc.value();
  }
  return relu(std::move(pre));
}

namespace detail {

template <Scalar T>
void check_input(const BasicRnnWeights<T>& w, const BasicVector<T>& x) {
  if (x.dim() != w.d_in) {
    throw dimension_error("input dim " + std::to_string(x.dim()) +
                          " != d_in " + std::to_string(w.d_in));
  }
}

}  // namespace detail

// Calls visit(t, h[t]) for t = 0..T and returns h[T]. Memory is O(m).
template <Scalar T, class Visitor>
BasicVector<T> run_delta_visit(const BasicRnnWeights<T>& w,
                               const BasicVector<T>& x, std::size_t steps,
                               Visitor&& visit) {
  detail::check_input(w, x);
  BasicVector<T> h = relu(affine(w.a_x, x, w.b_h));
  visit(std::size_t{0}, static_cast<const BasicVector<T>&>(h));
  const SparseAffine<T> recur(w.a_h, w.b_h);
  for (std::size_t t = 1; t <= steps; ++t) {
    h = relu(recur.apply(h));
    visit(t, static_cast<const BasicVector<T>&>(h));
  }
  return h;
}

template <Scalar T>
BasicVector<T> run_delta_final(const BasicRnnWeights<T>& w,
                               const BasicVector<T>& x, std::size_t steps) {
  return run_delta_visit(w, x, steps, [](std::size_t, const BasicVector<T>&) {});
}

template <Scalar T>
BasicHiddenTrace<T> run_delta(const BasicRnnWeights<T>& w,
                              const BasicVector<T>& x, std::size_t steps) {
  BasicHiddenTrace<T> trace;
  trace.states.reserve(steps + 1);
  trace.outputs.reserve(steps + 1);
  run_delta_visit(w, x, steps, [&](std::size_t, const BasicVector<T>& h) {
    trace.states.push_back(h);
    trace.outputs.push_back(output_of(w, h));
  });
  return trace;
}

// Output sequence y[0..T] only.
template <Scalar T>
std::vector<BasicVector<T>> run_outputs(const BasicRnnWeights<T>& w,
                                        const BasicVector<T>& x,
                                        std::size_t steps) {
  std::vector<BasicVector<T>> out;
  out.reserve(steps + 1);
  run_delta_visit(w, x, steps, [&](std::size_t, const BasicVector<T>& h) {
    out.push_back(output_of(w, h));
  });
  return out;
}

// Scalar-in, scalar-out convenience.
template <Scalar T>
std::vector<T> run_scalar(const BasicRnnWeights<T>& w, T x, std::size_t steps) {
  if (w.d_out != 1) throw dimension_error("run_scalar: d_out != 1");
  std::vector<T> out;
  out.reserve(steps + 1);
  run_delta_visit(w, BasicVector<T>{x}, steps,
                  [&](std::size_t, const BasicVector<T>& h) {
                    out.push_back(output_of(w, h)[0]);
                  });
  return out;
}

template <Scalar T>
struct BasicAffineLayer {
  BasicMatrix<T> a;
  BasicVector<T> b;

  BasicVector<T> apply(const BasicVector<T>& v) const { return affine(a, v, b); }
};

template <Scalar T>
struct BasicFeedForwardNet {
  // Layers 2..T+1 hold the same pointer.
  std::vector<std::shared_ptr<const BasicAffineLayer<T>>> layers;

  std::size_t num_layers() const noexcept { return layers.size(); }
};

using AffineLayer = BasicAffineLayer<double>;
using FeedForwardNet = BasicFeedForwardNet<double>;

template <Scalar T>
BasicFeedForwardNet<T> unfold(const BasicRnnWeights<T>& w, std::size_t steps) {
  if (steps < 1) throw std::invalid_argument("unfold: T must be >= 1");
  using Layer = BasicAffineLayer<T>;
  auto first = std::make_shared<const Layer>(Layer{w.a_x, w.b_h});
  auto shared = std::make_shared<const Layer>(Layer{w.a_h, w.b_h});
  auto last = std::make_shared<const Layer>(Layer{w.a_o, w.b_o});
  BasicFeedForwardNet<T> net;
  net.layers.reserve(steps + 2);
  net.layers.push_back(first);
  for (std::size_t i = 0; i < steps; ++i) net.layers.push_back(shared);
  net.layers.push_back(last);
  return net;
}

template <Scalar T>
BasicVector<T> eval_ffn(const BasicFeedForwardNet<T>& net, BasicVector<T> x) {
  if (net.layers.empty()) throw std::invalid_argument("eval_ffn: no layers");
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    x = net.layers[i]->apply(x);
    if (i + 1 < net.layers.size()) x = relu(std::move(x));
  }
  return x;
}

}  // namespace polyrnn
