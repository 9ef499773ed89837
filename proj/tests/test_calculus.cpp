#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <random>

#include "polyrnn/polyrnn.hpp"
#include "test_support.hpp"

using namespace polyrnn;
using testsupport::linspace;
using testsupport::ref_square;

using testsupport::clog2;
using testsupport::compose_oracle;

TEST(Parallel, TwoIdentities) {
  const auto w = parallel<double>({identity_rnn(), identity_rnn()});
  for (const auto& y : run_delta(w, Vector{1, -2}, 20).outputs) EXPECT_EQ(y, (Vector{1, -2}));
}

TEST(Parallel, SingleNetIsUnchanged) {
  const auto sq = square_rnn(1.5);
  const auto w = parallel<double>({sq});
  for (double x : linspace(-1.5, 1.5, 13))
    EXPECT_EQ(run_delta(w, Vector{x}, 9).outputs, run_delta(sq, Vector{x}, 9).outputs);
}

TEST(Parallel, SizesAdd) {
  EXPECT_EQ(parallel<double>({square_rnn(1), square_rnn(1)}).m, 14u);
  EXPECT_THROW(parallel<double>(std::span<const RnnWeights>{}), std::invalid_argument);
}

TEST(PrecomposeLinear, IdentityLeavesWeights) {
  const auto sq = square_rnn(2);
  EXPECT_EQ(precompose_linear(sq, Matrix::identity(1)), sq);
}

TEST(PrecomposeLinear, DuplicationFeedsPair) {
  const auto pair = parallel<double>({square_rnn(1), square_rnn(1)});
  const auto dup = precompose_linear(pair, Matrix{{1}, {1}});
  for (double x : linspace(-1, 1, 21)) {
    const auto a = run_delta(dup, Vector{x}, 12);
    const auto b = run_delta(pair, Vector{x, x}, 12);
    for (std::size_t t = 0; t <= 12; ++t)
      ASSERT_LE(testsupport::max_abs_diff(a.states[t], b.states[t]), 1e-12);
  }
}

TEST(PrecomposeLinear, ZeroMatrixMeansZeroInput) {
  const auto w = precompose_linear(square_and_identity_rnn(1), Matrix(1, 1));
  EXPECT_EQ(run_delta(w, Vector{0.8}, 10).states,
            run_delta(square_and_identity_rnn(1), Vector{0}, 10).states);
  EXPECT_THROW(precompose_linear(square_rnn(1), Matrix(2, 1)), dimension_error);
}

TEST(PostcomposeAffine, IdentityLeavesOutputs) {
  const auto w = square_rnn(1);
  const auto v = postcompose_affine(w, Matrix::identity(1), Vector(1));
  EXPECT_EQ(run_delta(v, Vector{0.3}, 8).outputs, run_delta(w, Vector{0.3}, 8).outputs);
}

TEST(PostcomposeAffine, PolarizationDifference) {
  const auto pair = parallel<double>({square_rnn(1), square_rnn(1)});
  const auto diff = postcompose_affine(pair, Matrix{{1, -1}}, Vector(1));
  for (double x : linspace(-1, 1, 9)) {
    const Vector in{x, 0.5 * x};
    const auto a = run_delta(diff, in, 8).outputs;
    const auto b = run_delta(pair, in, 8).outputs;
    for (std::size_t t = 0; t <= 8; ++t)
      ASSERT_NEAR(a[t][0], b[t][0] - b[t][1], 1e-12 * std::max(1.0, std::fabs(b[t][0])));
  }
}

TEST(PostcomposeAffine, ZeroMapGivesConstant) {
  const auto w = postcompose_affine(square_rnn(1), Matrix(1, 1), Vector{5});
  for (const auto& y : run_delta(w, Vector{0.4}, 10).outputs) EXPECT_EQ(y[0], 5);
  EXPECT_THROW(postcompose_affine(square_rnn(1), Matrix(1, 2), Vector(1)), dimension_error);
}

TEST(Clock, PulsesWithinHundredSteps) {
  const auto tr = run_delta(clock_rnn(), Vector{}, 100);
  std::vector<std::size_t> pulses;
  for (std::size_t t = 0; t <= 100; ++t) {
    const double c = tr.states[t][0];
    ASSERT_TRUE(c == 0.0 || c == 1.0) << "t=" << t << " value " << c;
    if (c == 1.0) pulses.push_back(t);
  }
  EXPECT_EQ(pulses, (std::vector<std::size_t>{2, 6, 14, 30, 62}));
}

TEST(Clock, StateAtFirstPulse) {
  EXPECT_EQ(run_delta(clock_rnn(), Vector{}, 2).states[2], (Vector{1, 2, 0.25, 0, 1}));
}

TEST(Clock, HiddenNormIsTwo) {
  double mx = 0;
  for (const auto& h : run_delta(clock_rnn(), Vector{}, 1024).states) mx = std::max(mx, max_abs(h));
  EXPECT_EQ(mx, 2.0);
}

// The third coordinate is exactly 2^-t. In double it underflows after
// t = 1074; the counter still fires at 2046 and then the clock dies.
TEST(Clock, DoublePrecisionHorizon) {
  const auto tr = run_delta(clock_rnn(), Vector{}, 4100);
  for (std::size_t t = 0; t <= 2046; ++t) {
    const bool pulse = std::has_single_bit(t + 2) && t >= 2;
    ASSERT_EQ(tr.states[t][0], pulse ? 1.0 : 0.0) << "t=" << t;
  }
  EXPECT_EQ(tr.states[1074][2], std::ldexp(1.0, -1074));
  EXPECT_EQ(tr.states[4094][0], 0.0);
}

TEST(Clock, LongDoubleReachesFourThousand) {
  const auto tr = run_delta(clock_rnn<long double>(), BasicVector<long double>{}, 4096);
  for (std::size_t t = 0; t <= 4096; ++t) {
    const bool pulse = std::has_single_bit(t + 2) && t >= 2;
    ASSERT_EQ(tr.states[t][0], pulse ? 1.0L : 0.0L) << "t=" << t;
  }
}

TEST(Concat, SizeOfSquareSquare) {
  const auto sq = square_rnn(1);
  const auto c = concat(sq, sq, 1.0, 1.0);
  EXPECT_EQ(c.weights.m, 21u);
  EXPECT_EQ(c.m_ring.rows(), 7u);
  EXPECT_EQ(c.w_ring.rows(), 7u);
  EXPECT_EQ(c.clock_begin, 16u);
}

TEST(Concat, TwoStageSquareOfHalf) {
  const auto sq = square_rnn(1);
  const auto c = concat(sq, sq, 1.0, 1.0);
  EXPECT_NEAR(run_delta(c.weights, Vector{0.5}, 6).outputs[6][0], 0.0625, 1e-12);
  const double inner = ref_square(1, 0.5, 2);
  EXPECT_NEAR(run_delta(c.weights, Vector{0.5}, 6).outputs[6][0], ref_square(1, inner, 2), 1e-12);
}

TEST(Concat, FirstBlockIsFTrace) {
  const auto sq = square_rnn(1);
  const auto c = concat(sq, sq, 1.0, 1.0);
  for (double x : linspace(-1, 1, 21)) {
    const auto comp = run_delta(c.weights, Vector{x}, 128);
    const auto f = run_delta(sq, Vector{x}, 128);
    for (std::size_t t = 0; t <= 128; ++t) ASSERT_EQ(matvec(c.m_ring, comp.states[t]), f.states[t]);
  }
}

TEST(Concat, RejectsMismatch) {
  EXPECT_THROW(concat(mult_rnn(1), square_rnn(1), 1.0, 1.0), dimension_error);
  EXPECT_THROW(concat(square_rnn(1), square_rnn(1), 0.0, 1.0), std::invalid_argument);
}

TEST(ConcatProperty, ReadoutIdentity) {
  const auto sq = square_rnn(1);
  const double b_f = 1.0;
  const auto c = concat(sq, sq, b_f, 1.0);
  for (double x : linspace(-1, 1, 21)) {
    const auto ys = run_outputs(c.weights, Vector{x}, 62);
    for (std::size_t k = 3; k <= 6; ++k) {
      const std::size_t half = (std::size_t{1} << (k - 1)) - 2;
      const auto mid = run_outputs(sq, Vector{x}, half)[half];
      const auto want = run_outputs(sq, mid, half)[half];
      ASSERT_NEAR(ys[(std::size_t{1} << k) - 2][0], want[0], 1e-9 * std::max(1.0, b_f));
    }
  }
}

TEST(ConcatProperty, GeneralPairReadout) {
  // f = mult (D=2), g = square with D = 4 covering f's output range.
  const auto f = mult_rnn(2), g = square_rnn(4);
  const auto c = concat(g, f, 4.0, 2.0);
  for (double a : linspace(-2, 2, 7)) {
    for (double b : linspace(-2, 2, 7)) {
      const auto ys = run_outputs(c.weights, Vector{a, b}, 62);
      for (std::size_t k = 3; k <= 6; ++k) {
        const std::size_t half = (std::size_t{1} << (k - 1)) - 2;
        const auto mid = run_outputs(f, Vector{a, b}, half)[half];
        const auto want = run_outputs(g, mid, half)[half];
        ASSERT_NEAR(ys[(std::size_t{1} << k) - 2][0], want[0], 1e-9 * 4.0);
      }
    }
  }
}

TEST(ConcatProperty, HiddenNormBound) {
  const auto sq = square_rnn(1);
  const auto c = concat(sq, sq, 1.0, 1.0);
  for (double x : linspace(-1, 1, 41))
    for (const auto& h : run_delta(c.weights, Vector{x}, 256).states) ASSERT_LE(max_abs(h), 2.0);
}

TEST(ParallelProperty, StackedTracesExact) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RnnWeights> nets;
    std::vector<Vector> inputs;
    for (int i = 0; i < 3; ++i) {
      const std::size_t m = dim(rng), d = dim(rng), o = dim(rng);
      // Scale A_h by 1/4 so traces stay bounded and exactly representable.
      Matrix ah = scaled(testsupport::dyadic_matrix(rng, m, m), 0.25);
      nets.emplace_back(ah, testsupport::dyadic_matrix(rng, m, d),
                        testsupport::dyadic_vector(rng, m),
                        testsupport::dyadic_matrix(rng, o, m), testsupport::dyadic_vector(rng, o));
      inputs.push_back(testsupport::dyadic_vector(rng, d));
    }
    const auto p = parallel<double>(nets);
    const auto tr = run_delta(p, concat<double>(inputs), 10);
    std::vector<HiddenTrace> parts;
    for (std::size_t i = 0; i < nets.size(); ++i) parts.push_back(run_delta(nets[i], inputs[i], 10));
    for (std::size_t t = 0; t <= 10; ++t) {
      std::vector<Vector> hs, ys;
      for (const auto& pt : parts) {
        hs.push_back(pt.states[t]);
        ys.push_back(pt.outputs[t]);
      }
      ASSERT_EQ(tr.states[t], concat<double>(hs));
      ASSERT_EQ(tr.outputs[t], concat<double>(ys));
    }
  }
}

TEST(MulticoncatTree, SizeFormulas) {
  const auto sq = square_rnn(1);
  BoundsLedger ledger{1, {1, 1, 1, 1}, 2};
  const std::vector<RnnWeights> two{sq, sq}, four{sq, sq, sq, sq};
  EXPECT_EQ(multiconcat_tree<double>(two, ledger).hidden_weights.m, 21u);
  EXPECT_EQ(multiconcat_tree<double>(four, ledger).hidden_weights.m, 4u * 7 + 2 * 3 * 1 + 5 * 3);
  EXPECT_EQ(multiconcat_tree<double>(four, ledger).hidden_weights.m, 49u);
  std::vector<RnnWeights> eight(8, sq);
  EXPECT_EQ(multiconcat_tree<double>(eight, ledger).hidden_weights.m, 8u * 7 + 2 * 7 + 5 * 7);
}

TEST(MulticoncatTree, RejectsNonPowerOfTwo) {
  const auto sq = square_rnn(1);
  const std::vector<RnnWeights> three{sq, sq, sq};
  EXPECT_THROW(multiconcat_tree<double>(three, BoundsLedger{1, {1, 1, 1}, 2}),
               std::invalid_argument);
}

TEST(MulticoncatTree, OffsetsOfFourLevels) {
  const auto sq = square_rnn(1);
  const std::vector<RnnWeights> four{sq, sq, sq, sq};
  const auto a = multiconcat_tree<double>(four, BoundsLedger{1, {1, 1, 1, 1}, 2});
  ASSERT_EQ(a.level_readouts.size(), 4u);
  EXPECT_EQ(a.level_readouts[0].offsets, (std::vector<std::size_t>{0}));
  EXPECT_EQ(a.level_readouts[1].offsets, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(a.level_readouts[2].offsets, (std::vector<std::size_t>{2, 2, 1}));
  EXPECT_EQ(a.level_readouts[3].offsets, (std::vector<std::size_t>{2, 2, 2, 2}));
  EXPECT_EQ(a.depth, 2u);
}

TEST(MulticoncatTree, SixteenthPowerAtHalf) {
  const auto sq = square_rnn(1);
  const std::vector<RnnWeights> four{sq, sq, sq, sq};
  const auto a = multiconcat_tree<double>(four, BoundsLedger{1, {1, 1, 1, 1}, 2});
  const std::size_t k = 6, t = 62;
  const auto h = run_delta_final(a.hidden_weights, Vector{0.5}, t);
  double want = 0.5;
  for (int i = 0; i < 4; ++i) want = ref_square(1, want, (std::size_t{1} << (k - 2)) - 2);
  EXPECT_NEAR(a.level_readouts[3].apply(h)[0], want, 1e-12);
}

TEST(Multiconcat, SingleNetPadded) {
  const auto r1 = square_and_identity_rnn(1);
  const std::vector<RnnWeights> one{r1};
  const auto a = multiconcat<double>(one, BoundsLedger{1, {1}, 2});
  EXPECT_EQ(a.level_readouts.size(), 1u);
  EXPECT_EQ(a.hidden_weights.m, 9u + 1 + 2 * 2 + 5);
  for (double x : linspace(-1, 1, 11)) {
    const auto tr = run_delta(a.hidden_weights, Vector{x}, 126);
    const auto lone = run_outputs(r1, Vector{x}, 126);
    for (std::size_t k = 2; k <= 6; ++k) {
      const std::size_t t = (std::size_t{1} << k) - 2;
      ASSERT_EQ(a.level_readouts[0].apply(tr.states[t]), lone[t]);
    }
  }
}

TEST(Multiconcat, ThreeSquaresWithinBound) {
  const auto sq = square_rnn(1);
  const std::vector<RnnWeights> three{sq, sq, sq};
  const auto a = multiconcat<double>(three, BoundsLedger{1, {1, 1, 1}, 2});
  EXPECT_LE(a.hidden_weights.m, 3u * 7 + 2 * 3 + 13 * 3);
  // Exact value: 3 squares, one dummy of width 1, buffers for three outputs, three clocks.
  EXPECT_EQ(a.hidden_weights.m, 3u * 7 + 1 + 2 * 3 + 5 * 3);
  EXPECT_THROW(multiconcat<double>(std::span<const RnnWeights>{}, BoundsLedger{}),
               std::invalid_argument);
}

TEST(Multiconcat, DummyOutputsZero) {
  for (std::size_t d : {1u, 2u, 5u}) {
    const auto w = dummy_rnn(d);
    EXPECT_EQ(w.m, 1u);
    std::mt19937_64 rng(d);
    for (int trial = 0; trial < 10; ++trial)
      for (const auto& y : run_delta(w, testsupport::dyadic_vector(rng, d), 20).outputs)
        ASSERT_EQ(y, Vector(1));
  }
}

TEST(BoundsLedger, Validation) {
  EXPECT_THROW((BoundsLedger{1, {3}, 2}).validate(), std::invalid_argument);
  EXPECT_THROW((BoundsLedger{1, {1}, 1.5}).validate(), std::invalid_argument);
  EXPECT_NO_THROW((BoundsLedger{1, {3}, 3}).validate());
}

TEST(MulticoncatProperty, ReadoutsMatchComposedRuns) {
  const auto sq = square_rnn(1);
  struct Setup {
    std::vector<RnnWeights> nets;
    BoundsLedger ledger;
    double d;
  };
  std::vector<Setup> setups;
  setups.push_back({{sq, sq, sq, sq}, {1, {1, 1, 1, 1}, 2}, 1});
  setups.push_back({{sq, sq, sq}, {1, {1, 1, 1}, 2}, 1});
  setups.push_back({{square_and_identity_rnn(1), polymap_rnn(2, 1)}, {1, {1, 1}, 2}, 1});
  setups.push_back({{square_and_identity_rnn(1.25), polymap_rnn(2, 1.25), polymap_rnn(3, 1.25)},
                    {1.25, {std::pow(1.25, 2), std::pow(1.25, 4), std::pow(1.25, 8)},
                     std::max(2.0, std::pow(1.25, 8))},
                    1.25});
  for (const auto& s : setups) {
    const auto a = multiconcat<double>(s.nets, s.ledger);
    for (std::size_t l = 0; l < s.nets.size(); ++l) {
      for (auto o : a.level_readouts[l].offsets) ASSERT_LE(o, clog2(l + 1));
      ASSERT_EQ(a.level_readouts[l].offsets.size(), l + 1);
    }
    const std::size_t k_min = clog2(s.nets.size()) + 2;
    for (double x : linspace(-s.d, s.d, 21)) {
      const auto tr = run_delta(a.hidden_weights, Vector{x}, 126);
      for (std::size_t k = k_min; k <= 7; ++k) {
        const auto& h = tr.states[(std::size_t{1} << k) - 2];
        for (std::size_t l = 0; l < s.nets.size(); ++l) {
          const auto& r = a.level_readouts[l];
          const auto got = r.apply(h);
          const auto want = compose_oracle(s.nets, r, k, Vector{x});
          ASSERT_LE(testsupport::max_abs_diff(got, want), 1e-9)
              << "level " << l + 1 << " k=" << k << " x=" << x;
        }
      }
    }
  }
}

TEST(MulticoncatProperty, SizeFormulaExact) {
  for (std::size_t n : {2u, 4u, 8u}) {
    std::vector<RnnWeights> nets(n, square_rnn(1));
    const auto a = multiconcat_tree<double>(nets, BoundsLedger{1, std::vector<double>(n, 1), 2});
    std::size_t want = 0;
    for (const auto& w : nets) want += w.m;
    for (std::size_t i = 0; i + 1 < n; ++i) want += 2 * nets[i].d_out;
    want += 5 * (n - 1);
    EXPECT_EQ(a.hidden_weights.m, want);
  }
}
