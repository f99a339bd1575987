#include <gtest/gtest.h>

#include "peersplit/fixed_point.hpp"
#include "test_support.hpp"

using namespace peersplit;

namespace {

using Cols = std::vector<std::vector<double>>;

const Cols kPair{{0.5, 0.5}, {0.7, 0.3}};

WeightMatrix random_square(testkit::Rng& rng, std::size_t n) { return WeightMatrix(testkit::random_columns(rng, n, n)); }

SolverConfig aaip_config() {
  SolverConfig cfg;
  cfg.aggregation_mode = AggregationMode::AAIP;
  return cfg;
}

}  // namespace

TEST(ResidualG, UnanimityIsZero) {
  const std::vector<double> v{0.2, 0.3, 0.5};
  EXPECT_NEAR(residual_g(WeightMatrix(Cols(3, v)), v), 0.0, 1e-30);
}

TEST(ResidualG, IdenticalUniformColumns) {
  EXPECT_NEAR(residual_g(WeightMatrix(Cols{{0.5, 0.5}, {0.5, 0.5}}), std::vector<double>{0.9, 0.1}), 0.32, 1e-15);
}

TEST(ResidualG, MatchesStraightLineEvaluation) {
  testkit::Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto cols = testkit::random_columns(rng, 3, 3);
    const std::vector<double> y{1.0 / 3, 1.0 / 3, 1.0 / 3};
    const auto g = testkit::gaip_reference(cols, y);
    double expected = 0.0;
    for (std::size_t i = 0; i < 3; ++i) expected += (g[i] - y[i]) * (g[i] - y[i]);
    EXPECT_NEAR(residual_g(WeightMatrix(cols), y), expected, 1e-15);
  }
}

TEST(ResidualG, RejectsNonPositive) {
  try {
    residual_g(WeightMatrix(kPair), std::vector<double>{0.5, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveEntry);
  }
}

TEST(ResidualH, Examples) {
  const WeightMatrix w(kPair);
  EXPECT_LE(residual_h(w, std::vector<double>{7.0 / 12, 5.0 / 12}), 1e-24);
  EXPECT_NEAR(residual_h(w, std::vector<double>{0.5, 0.5}), 0.02, 1e-15);
  const std::vector<double> v{0.1, 0.6, 0.3};
  EXPECT_NEAR(residual_h(WeightMatrix(Cols(3, v)), v), 0.0, 1e-30);
}

TEST(Dia, UnanimityConvergesInOneIteration) {
  const std::vector<double> v{0.1, 0.2, 0.3, 0.4};
  for (auto mode : {AggregationMode::GAIP, AggregationMode::AAIP}) {
    SolverConfig cfg;
    cfg.aggregation_mode = mode;
    const auto r = dia_solve(WeightMatrix(Cols(4, v)), cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1u);
    EXPECT_LE(r.residual, 1e-28);
    EXPECT_LE(testkit::max_abs_diff(v, r.shares.values()), 1e-14);
  }
}

TEST(Dia, AaipTwoByTwo) {
  const auto r = dia_solve(WeightMatrix(kPair), aaip_config());
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.shares[0], 7.0 / 12, 1e-10);
  EXPECT_NEAR(r.shares[1], 5.0 / 12, 1e-10);
}

TEST(Dia, GaipTwoByTwoMatchesGridOracle) {
  const Cols cols{{0.5, 0.5}, {0.8, 0.2}};
  const auto minima = testkit::gaip_grid_minima(cols, 1'000'000);
  ASSERT_EQ(minima.size(), 1u);
  const auto r = dia_solve(WeightMatrix(cols), SolverConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.shares[0], minima.front().p1, 1e-4);
  EXPECT_LE(r.residual, 1e-8);
}

TEST(Dia, ReportedResidualIsResidualAtReportedPoint) {
  testkit::Rng rng(32);
  for (int t = 0; t < 100; ++t) {
    const auto w = random_square(rng, 2 + t % 8);
    for (auto mode : {AggregationMode::GAIP, AggregationMode::AAIP}) {
      SolverConfig cfg;
      cfg.aggregation_mode = mode;
      const auto r = dia_solve(w, cfg);
      EXPECT_EQ(r.residual, residual(mode, w, r.point));
      if (r.converged) {
        EXPECT_LE(r.residual, cfg.epsilon);
      }
      const auto p = normalize(r.point);
      EXPECT_EQ(p, r.shares);
    }
  }
}

TEST(Dia, IteratesStayOnSimplex) {
  testkit::Rng rng(33);
  SolverConfig cfg;
  cfg.trace = true;
  for (int t = 0; t < 50; ++t) {
    const auto r = dia_solve(random_square(rng, 2 + t % 6), cfg);
    ASSERT_EQ(r.trace.size(), r.iterations + 1);
    for (const auto& it : r.trace) {
      double s = 0.0;
      for (double v : it) {
        EXPECT_GT(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Dia, ExhaustedIterationsAreReportedNotThrown) {
  SolverConfig cfg;
  cfg.gamma = 1;
  cfg.delta = 1e-300;
  const auto r = dia_solve(WeightMatrix(Cols{{0.5, 0.5}, {0.8, 0.2}}), cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_GT(r.residual, 0.0);
}

TEST(Dia, RejectsBadConfig) {
  SolverConfig cfg;
  cfg.gamma = 0;
  EXPECT_THROW(dia_solve(WeightMatrix(kPair), cfg), Error);
  cfg = SolverConfig{};
  cfg.delta = 0.0;
  EXPECT_THROW(dia_solve(WeightMatrix(kPair), cfg), Error);
}

TEST(AaipExact, TwoByTwo) {
  const auto p = aaip_exact(WeightMatrix(kPair));
  EXPECT_NEAR(p[0], 7.0 / 12, 1e-15);
  EXPECT_NEAR(p[1], 5.0 / 12, 1e-15);
}

TEST(AaipExact, Unanimity) {
  const std::vector<double> v{0.15, 0.25, 0.6};
  const auto p = aaip_exact(WeightMatrix(Cols(3, v)));
  EXPECT_LE(testkit::max_abs_diff(v, p.values()), 1e-14);
}

TEST(AaipExact, AgreesWithDiaAndHasTinyResidual) {
  testkit::Rng rng(34);
  for (int t = 0; t < 200; ++t) {
    const auto w = random_square(rng, 2 + t % 11);
    const auto exact = aaip_exact(w);
    const auto dia = dia_solve(w, aaip_config());
    EXPECT_TRUE(dia.converged);
    EXPECT_LE(detail::max_abs_diff(exact.values(), dia.shares.values()), 1e-8);
    EXPECT_LE(residual_h(w, exact.values()), 1e-20);
  }
}

TEST(FixedPointProperties, ParetoAtConvergedSolution) {
  testkit::Rng rng(35);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + t % 6;
    auto cols = testkit::random_columns(rng, n, n);
    const std::size_t i = static_cast<std::size_t>(t) % n, j = (i + 1) % n;
    for (auto& c : cols)
      if (c[i] < c[j]) std::swap(c[i], c[j]);
    const WeightMatrix w(cols);
    for (auto mode : {AggregationMode::GAIP, AggregationMode::AAIP}) {
      SolverConfig cfg;
      cfg.aggregation_mode = mode;
      const auto r = dia_solve(w, cfg);
      if (r.converged) {
        EXPECT_GE(r.shares[i], r.shares[j]);
      }
    }
  }
}

TEST(FixedPointProperties, PermutationEquivariance) {
  testkit::Rng rng(36);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 7;
    const auto cols = testkit::random_columns(rng, n, n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    // Relabel peers: peer perm[a] becomes a, both as expert and as alternative.
    Cols permuted(n, std::vector<double>(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) permuted[a][b] = cols[perm[a]][perm[b]];
    for (auto mode : {AggregationMode::GAIP, AggregationMode::AAIP}) {
      SolverConfig cfg;
      cfg.aggregation_mode = mode;
      const auto r = dia_solve(WeightMatrix(cols), cfg);
      const auto rp = dia_solve(WeightMatrix(permuted), cfg);
      ASSERT_EQ(r.converged, rp.converged);
      for (std::size_t a = 0; a < n; ++a) EXPECT_NEAR(rp.shares[a], r.shares[perm[a]], 1e-9);
    }
  }
}
