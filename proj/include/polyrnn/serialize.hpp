#pragma once

// JSON forms of networks and their artifacts. Matrices are flat row-major
// arrays; doubles print with round-trip precision.

#include <cstddef>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyrnn/calculus.hpp"
#include "polyrnn/polynomial.hpp"
#include "polyrnn/powers.hpp"
#include "polyrnn/rnn.hpp"

namespace polyrnn {

using json = nlohmann::json;

namespace detail {

inline std::vector<double> flat_array(const json& j, const char* key,
                                      std::size_t expected) {
  if (!j.contains(key)) throw std::runtime_error(std::string("missing field ") + key);
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != expected) {
    throw std::runtime_error(std::string("field ") + key + " has " +
                             std::to_string(v.size()) + " entries, expected " +
                             std::to_string(expected));
  }
  return v;
}

}  // namespace detail

inline json to_json(const Matrix& a) { return a.values(); }
inline json to_json(const Vector& v) { return v.values(); }

inline json to_json(const RnnWeights& w) {
  json j{{"d_in", w.d_in},       {"d_out", w.d_out},    {"m", w.m},
         {"a_h", to_json(w.a_h)}, {"a_x", to_json(w.a_x)}, {"b_h", to_json(w.b_h)},
         {"a_o", to_json(w.a_o)}, {"b_o", to_json(w.b_o)}};
  if (w.domain) j["domain"] = *w.domain;
  return j;
}

// Accepts the weights object itself or an envelope holding it under "weights".
inline RnnWeights weights_from_json(const json& in) {
  const json& j = in.contains("weights") ? in.at("weights") : in;
  const auto d_in = j.at("d_in").get<std::size_t>();
  const auto d_out = j.at("d_out").get<std::size_t>();
  const auto m = j.at("m").get<std::size_t>();
  RnnWeights w(Matrix(m, m, detail::flat_array(j, "a_h", m * m)),
               Matrix(m, d_in, detail::flat_array(j, "a_x", m * d_in)),
               Vector(detail::flat_array(j, "b_h", m)),
               Matrix(d_out, m, detail::flat_array(j, "a_o", d_out * m)),
               Vector(detail::flat_array(j, "b_o", d_out)));
  if (j.contains("domain")) w.domain = j.at("domain").get<double>();
  return w;
}

inline json to_json(const ConcatArtifacts& c) {
  return {{"weights", to_json(c.weights)},
          {"m_ring", {{"rows", c.m_ring.rows()}, {"cols", c.m_ring.cols()},
                      {"data", to_json(c.m_ring)}}},
          {"w_ring", {{"rows", c.w_ring.rows()}, {"cols", c.w_ring.cols()},
                      {"data", to_json(c.w_ring)}}},
          {"b_f", c.b_f},
          {"b_hid_g", c.b_hid_g}};
}

inline json to_json(const MulticoncatArtifacts& a) {
  json levels = json::array();
  for (const auto& r : a.level_readouts) {
    levels.push_back({{"rows", r.a.rows()},
                      {"a", to_json(r.a)},
                      {"b", to_json(r.b)},
                      {"offsets", r.offsets}});
  }
  return {{"weights", to_json(a.hidden_weights)},
          {"levels", levels},
          {"depth", a.depth},
          {"num_levels", a.num_levels},
          {"final_bound", a.final_bound}};
}

inline json to_json(const PowersNet& p) {
  json j = to_json(p.artifacts);
  j["q_a"] = to_json(p.q_a);
  j["q_b"] = to_json(p.q_b);
  j["metadata"] = {{"D", p.d}, {"L", p.levels}, {"min_k", p.min_k}};
  return j;
}

inline json to_json(const PolyRnn& p, const PolynomialSpec& spec) {
  return {{"weights", to_json(p.net.weights)},
          {"metadata",
           {{"coeffs", spec.coeffs},
            {"D", spec.d},
            {"B", p.net.b},
            {"C1", p.bound.c1},
            {"C2", p.bound.c2},
            {"t_min", p.bound.t_min},
            {"smoothed", p.net.smoothed},
            {"inner_m", p.net.inner_m}}}};
}

inline json to_json(const FeedForwardNet& f) {
  if (f.layers.size() < 3) throw std::invalid_argument("FFN JSON needs >= 3 layers");
  auto layer = [](const AffineLayer& l) {
    return json{{"rows", l.a.rows()}, {"cols", l.a.cols()},
                {"a", to_json(l.a)}, {"b", to_json(l.b)}};
  };
  return {{"num_layers", f.layers.size()},
          {"first", layer(*f.layers.front())},
          {"shared", layer(*f.layers[1])},
          {"last", layer(*f.layers.back())}};
}

inline FeedForwardNet ffn_from_json(const json& j) {
  auto layer = [](const json& l) {
    const auto r = l.at("rows").get<std::size_t>();
    const auto c = l.at("cols").get<std::size_t>();
    return std::make_shared<const AffineLayer>(
        AffineLayer{Matrix(r, c, detail::flat_array(l, "a", r * c)),
                    Vector(detail::flat_array(l, "b", r))});
  };
  const auto n = j.at("num_layers").get<std::size_t>();
  if (n < 3) throw std::runtime_error("FFN JSON: num_layers must be >= 3");
  FeedForwardNet f;
  f.layers.push_back(layer(j.at("first")));
  auto shared = layer(j.at("shared"));
  for (std::size_t i = 0; i + 2 < n; ++i) f.layers.push_back(shared);
  f.layers.push_back(layer(j.at("last")));
  return f;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << '\n';
}

}  // namespace polyrnn
