// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/kle_engine.hpp"

#include "kle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kle {

namespace {

// Singular values this close to zero (relative to the uncentered data
// scale) are centering roundoff, e.g. from a constant ensemble whose mean
// is not exactly representable.
double roundoff_floor(const Ensemble& ens) {
  const double n = static_cast<double>(std::max(ens.size(), ens.dim()));
  return 16.0 * std::numeric_limits<double>::epsilon() * std::sqrt(n) * std::sqrt(bochner_norm_sq(ens));
}

void fix_signs(Eigen::MatrixXd& phis, Eigen::MatrixXd& scores) {
  for (Eigen::Index r = 0; r < phis.rows(); ++r) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < phis.cols(); ++j) {
      const double a = std::abs(phis(r, j));
      if (a > best) {
        best = a;
        arg = j;
      }
    }
    if (phis(r, arg) < 0.0) {
      phis.row(r) *= -1.0;
      scores.col(r) *= -1.0;
    }
  }
}

}  // namespace

KleDecomposition decompose(const Ensemble& ens, double rank_tol) {
  if (!ens.samples().allFinite()) throw Error(ErrorKind::NonFiniteInput, "samples contain NaN or Inf");
  if (!(rank_tol >= 0.0) || !std::isfinite(rank_tol)) {
    throw Error(ErrorKind::NonFiniteInput, "rank_tol must be a finite nonnegative number");
  }

  const SpaceSpec& space = ens.space();
  const HPoint mean = expectation(ens);
  const Eigen::MatrixXd centered = ens.samples().rowwise() - mean.coeffs().transpose();
  const Eigen::VectorXd sqrt_w = ens.weights().cwiseSqrt();
  const Eigen::MatrixXd whitened = sqrt_w.asDiagonal() * space.factor().whiten_rows(centered);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();

  Eigen::Index rank = 0;
  if (sigma.size() > 0) {
    const double cutoff = std::max(rank_tol * sigma[0], roundoff_floor(ens));
    while (rank < sigma.size() && sigma[rank] > cutoff) ++rank;
  }

  KleDecomposition out{space, mean, ens.weights(), {}, {}, {}, rank_tol};
  out.lambdas = sigma.head(rank).cwiseAbs2();
  out.phis = space.factor().solve_transposed(svd.matrixV().leftCols(rank)).transpose();
  out.scores = sqrt_w.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(rank);
  fix_signs(out.phis, out.scores);
  return out;
}

Truncation truncate(const KleDecomposition& kle, std::size_t m) {
  if (m > kle.rank()) {
    throw Error(ErrorKind::MOutOfRange,
                "M = " + std::to_string(m) + " exceeds rank " + std::to_string(kle.rank()));
  }
  Truncation out;
  out.basis.reserve(m);
  for (std::size_t r = 0; r < m; ++r) out.basis.push_back(kle.phi(r));
  // smallest first
  for (std::size_t r = kle.rank(); r > m; --r) out.tail += kle.lambdas[static_cast<Eigen::Index>(r - 1)];
  return out;
}

double truncation_error(const Ensemble& ens, std::span<const HPoint> basis) {
  const SpaceSpec& space = ens.space();
  const std::vector<HPoint> onb = orthonormalize(space, basis);
  const Ensemble centered = center(ens);

  const auto d = static_cast<Eigen::Index>(space.dim());
  Eigen::MatrixXd q(d, static_cast<Eigen::Index>(onb.size()));
  for (std::size_t k = 0; k < onb.size(); ++k) q.col(static_cast<Eigen::Index>(k)) = onb[k].coeffs();

  const Eigen::MatrixXd coeffs = space.apply_gram_rows(centered.samples()) * q;
  const Eigen::MatrixXd residual = centered.samples() - coeffs * q.transpose();
  const Eigen::VectorXd per_sample =
      space.apply_gram_rows(residual).cwiseProduct(residual).rowwise().sum();
  return ens.weights().dot(per_sample);
}

Ensemble reconstruct(const KleDecomposition& kle, std::size_t m) {
  if (m > kle.rank()) {
    throw Error(ErrorKind::MOutOfRange,
                "M = " + std::to_string(m) + " exceeds rank " + std::to_string(kle.rank()));
  }
  const auto mm = static_cast<Eigen::Index>(m);
  const Eigen::VectorXd amp = kle.lambdas.head(mm).cwiseSqrt();
  Eigen::MatrixXd rows = kle.scores.leftCols(mm) * amp.asDiagonal() * kle.phis.topRows(mm);
  rows.rowwise() += kle.mean.coeffs().transpose();
  return Ensemble(kle.space, std::move(rows), kle.weights);
}

double naturality_gap(const Ensemble& ens, const Eigen::MatrixXd& op, const SpaceSpec& target) {
  const Ensemble pushed = push_forward(ens, op, target);
  const SpaceSpec& source = ens.space();
  const auto dt = static_cast<Eigen::Index>(target.dim());

  double gap = 0.0;
  for (Eigen::Index k = 0; k < dt; ++k) {
    const HPoint probe(Eigen::VectorXd::Unit(dt, k));
    const Eigen::VectorXd lhs = h_apply(pushed, probe);

    const HPoint adjoint_probe(source.solve_gram(op.transpose() * target.apply_gram(probe.coeffs())));
    const Eigen::VectorXd rhs = h_apply(ens, adjoint_probe);

    const Eigen::VectorXd diff = lhs - rhs;
    gap = std::max(gap, std::sqrt(ens.weights().dot(diff.cwiseAbs2())));
  }
  return gap;
}

}  // namespace kle
