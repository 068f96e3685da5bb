// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/ensemble.hpp"
#include "kle/error.hpp"

#include "support/oracle.hpp"

#include <gtest/gtest.h>

namespace kle {
namespace {

using testing::Generator;

SpaceSpec identity2() { return make_space(2, GramSpec::identity()); }
SpaceSpec diag41() { return make_space(2, GramSpec::diagonal(Eigen::Vector2d(4, 1))); }

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> data) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : data) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

Ensemble toy() { return Ensemble(identity2(), rows({{1, 0}, {-1, 0}, {0, 0}})); }

TEST(Ensemble, Validation) {
  EXPECT_THROW(Ensemble(identity2(), Eigen::MatrixXd(0, 2)), Error);
  EXPECT_THROW(Ensemble(identity2(), rows({{1, 2, 3}})), Error);
  EXPECT_THROW(Ensemble(identity2(), rows({{1, 2}, {3, 4}}), Eigen::Vector2d(1.0, 0.0)), Error);
  EXPECT_THROW(Ensemble(identity2(), rows({{1, 2}, {3, 4}}), Eigen::Vector2d(0.5, 0.6)), Error);
  try {
    Ensemble(identity2(), rows({{1, 2}, {3, 4}}), Eigen::Vector2d(1.5, -0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidEnsemble);
  }
  try {
    Ensemble(identity2(), rows({{1, std::numeric_limits<double>::infinity()}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteInput);
  }
}

TEST(Expectation, PointMass) {
  const Ensemble e(identity2(), rows({{2.5, -1}}));
  EXPECT_EQ(expectation(e).coeffs(), Eigen::Vector2d(2.5, -1));
}

TEST(Expectation, SymmetricPair) {
  const Ensemble e(identity2(), rows({{1, 0}, {-1, 0}}));
  EXPECT_EQ(expectation(e).coeffs(), Eigen::Vector2d(0, 0));
}

TEST(Expectation, ThreeSamples) {
  EXPECT_LE(expectation(toy()).coeffs().norm(), 1e-16);
}

TEST(Expectation, UsesWeights) {
  const Ensemble e(identity2(), rows({{1, 0}, {0, 1}}), Eigen::Vector2d(0.25, 0.75));
  EXPECT_DOUBLE_EQ(expectation(e)[0], 0.25);
  EXPECT_DOUBLE_EQ(expectation(e)[1], 0.75);
}

TEST(Center, AlreadyCenteredIsUnchanged) {
  const Ensemble c = center(toy());
  EXPECT_LE((c.samples() - toy().samples()).norm(), 1e-12);
}

TEST(Center, SingleSampleBecomesZero) {
  const Ensemble c = center(Ensemble(identity2(), rows({{3, 4}})));
  EXPECT_EQ(c.samples().norm(), 0.0);
}

TEST(Center, ResultHasZeroMean) {
  Generator gen(5);
  const Ensemble e = gen.ensemble(gen.space(GramKind::Dense, 7), 9);
  const double scale = e.samples().cwiseAbs().maxCoeff();
  EXPECT_LE(expectation(center(e)).coeffs().cwiseAbs().maxCoeff(), 1e-12 * scale);
}

TEST(HApply, ZeroProbe) {
  EXPECT_EQ(h_apply(center(toy()), HPoint::zero(2)).norm(), 0.0);
}

TEST(HApply, IdentityGram) {
  const Ensemble e(identity2(), rows({{1, 0}, {-1, 0}}));
  const Eigen::VectorXd h = h_apply(e, HPoint(Eigen::Vector2d(1, 0)));
  EXPECT_EQ(h, Eigen::Vector2d(1, -1));
}

TEST(HApply, WeightedGram) {
  const Ensemble e(diag41(), rows({{1, 0}, {-1, 0}}));
  const Eigen::VectorXd h = h_apply(e, HPoint(Eigen::Vector2d(0.5, 0)));
  EXPECT_DOUBLE_EQ(h[0], 2.0);
  EXPECT_DOUBLE_EQ(h[1], -2.0);
}

TEST(HApply, DimensionMismatch) {
  EXPECT_THROW(h_apply(toy(), HPoint(Eigen::Vector3d(1, 0, 0))), Error);
}

TEST(CovApply, ConstantEnsembleIsZero) {
  const Ensemble e(identity2(), rows({{0.1, 0.7}, {0.1, 0.7}, {0.1, 0.7}}));
  EXPECT_LE(cov_apply(e, HPoint(Eigen::Vector2d(1, 2))).coeffs().norm(), 1e-16);
}

TEST(CovApply, ToyCovariance) {
  const HPoint c = cov_apply(toy(), HPoint(Eigen::Vector2d(1, 0)));
  EXPECT_NEAR(c[0], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(c[1], 0.0);
}

TEST(CovApply, OrthogonalProbe) {
  const HPoint c = cov_apply(toy(), HPoint(Eigen::Vector2d(0, 1)));
  EXPECT_EQ(c.coeffs().norm(), 0.0);
}

TEST(BochnerNorm, ZeroEnsemble) {
  EXPECT_EQ(bochner_norm_sq(Ensemble(identity2(), Eigen::MatrixXd::Zero(4, 2))), 0.0);
}

TEST(BochnerNorm, ToyEnsemble) {
  EXPECT_NEAR(bochner_norm_sq(center(toy())), 2.0 / 3.0, 1e-15);
}

TEST(BochnerNorm, WeightedGram) {
  EXPECT_DOUBLE_EQ(bochner_norm_sq(Ensemble(diag41(), rows({{1, 0}, {-1, 0}}))), 4.0);
}

// ---------------------------------------------------------------------------
// Properties

TEST(EnsembleProperties, ExpectationMinimizesMeanSquaredDistance) {
  Generator gen(41);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = gen.index(1, 12);
    const Ensemble e = gen.ensemble(gen.space(gen.kind(static_cast<std::size_t>(trial)), d), gen.index(1, 20));
    const HPoint mu = expectation(e);
    auto objective = [&e](const Eigen::VectorXd& m) {
      return bochner_norm_sq(Ensemble(e.space(), e.samples().rowwise() - m.transpose(), e.weights()));
    };
    const double best = objective(mu.coeffs());
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd delta = gen.normal_vector(static_cast<Eigen::Index>(d));
      delta *= gen.uniform(1e-4, 1.0) / delta.norm();
      EXPECT_GT(objective(mu.coeffs() + delta), best);
    }
  }
}

TEST(EnsembleProperties, CovarianceSelfAdjointAndPositive) {
  Generator gen(42);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = gen.index(1, 40);
    const Ensemble e = gen.ensemble(gen.space(gen.kind(static_cast<std::size_t>(trial)), d), gen.index(1, 50));
    const SpaceSpec& s = e.space();
    const HPoint x(gen.normal_vector(static_cast<Eigen::Index>(d)));
    const HPoint y(gen.normal_vector(static_cast<Eigen::Index>(d)));
    const double a = inner(s, cov_apply(e, x), y);
    const double b = inner(s, x, cov_apply(e, y));
    const double scale = std::sqrt(norm_sq(s, x) * norm_sq(s, y)) * bochner_norm_sq(center(e));
    EXPECT_LE(std::abs(a - b), 1e-9 * scale);
    EXPECT_GE(inner(s, cov_apply(e, x), x), -1e-9 * norm_sq(s, x) * bochner_norm_sq(center(e)));
  }
}

TEST(EnsembleProperties, AdjointOfHReproducesCovariance) {
  Generator gen(43);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = gen.index(1, 20);
    const Ensemble e = gen.ensemble(gen.space(gen.kind(static_cast<std::size_t>(trial)), d), gen.index(1, 30));
    const Ensemble c = center(e);
    const HPoint x(gen.normal_vector(static_cast<Eigen::Index>(d)));
    const Eigen::VectorXd h = h_apply(c, x);
    Eigen::VectorXd adj = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < c.samples().rows(); ++i) adj += c.weights()[i] * h[i] * c.samples().row(i).transpose();
    EXPECT_LE((adj - cov_apply(e, x).coeffs()).norm(), 1e-10 * std::max(1.0, adj.norm()));
  }
}

}  // namespace
}  // namespace kle
