// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/ensemble.hpp"

#include "kle/error.hpp"

#include <cmath>
#include <string>

namespace kle {

namespace {

constexpr double kWeightSumTol = 1e-12;

void require_point(const SpaceSpec& space, const HPoint& x) {
  if (x.size() != space.dim()) {
    throw Error(ErrorKind::DimMismatch, "point of dimension " + std::to_string(x.size()) +
                                            " in space of dimension " + std::to_string(space.dim()));
  }
}

}  // namespace

Ensemble::Ensemble(SpaceSpec space, Eigen::MatrixXd samples, Eigen::VectorXd weights)
    : space_(std::move(space)), samples_(std::move(samples)), weights_(std::move(weights)) {
  if (samples_.rows() < 1) throw Error(ErrorKind::InvalidEnsemble, "ensemble needs at least one sample");
  if (static_cast<std::size_t>(samples_.cols()) != space_.dim()) {
    throw Error(ErrorKind::DimMismatch, "sample rows have length " + std::to_string(samples_.cols()) +
                                            ", space dimension is " + std::to_string(space_.dim()));
  }
  if (weights_.size() != samples_.rows()) {
    throw Error(ErrorKind::InvalidEnsemble, "weight count does not match sample count");
  }
  if (!samples_.allFinite()) throw Error(ErrorKind::NonFiniteInput, "samples contain NaN or Inf");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] <= 0.0) {
      throw Error(ErrorKind::InvalidEnsemble, "weight " + std::to_string(i) + " is not strictly positive");
    }
  }
  if (std::abs(weights_.sum() - 1.0) > kWeightSumTol) {
    throw Error(ErrorKind::InvalidEnsemble, "weights do not sum to 1");
  }
}

Ensemble::Ensemble(SpaceSpec space, Eigen::MatrixXd samples)
    : Ensemble(std::move(space), samples,
               Eigen::VectorXd::Constant(samples.rows(), 1.0 / static_cast<double>(std::max<Eigen::Index>(samples.rows(), 1)))) {}

HPoint Ensemble::sample(std::size_t i) const {
  return HPoint(samples_.row(static_cast<Eigen::Index>(i)).transpose());
}

HPoint expectation(const Ensemble& ens) {
  return HPoint(ens.samples().transpose() * ens.weights());
}

Ensemble center(const Ensemble& ens) {
  const Eigen::RowVectorXd mean = expectation(ens).coeffs().transpose();
  Eigen::MatrixXd centered = ens.samples().rowwise() - mean;
  return Ensemble(ens.space(), std::move(centered), ens.weights());
}

Eigen::VectorXd h_apply(const Ensemble& ens, const HPoint& x) {
  require_point(ens.space(), x);
  return ens.samples() * ens.space().apply_gram(x.coeffs());
}

HPoint cov_apply(const Ensemble& ens, const HPoint& x) {
  require_point(ens.space(), x);
  const Ensemble centered = center(ens);
  const Eigen::VectorXd scores = h_apply(centered, x);
  return HPoint(centered.samples().transpose() * ens.weights().cwiseProduct(scores));
}

double bochner_norm_sq(const Ensemble& ens) {
  const Eigen::MatrixXd g_rows = ens.space().apply_gram_rows(ens.samples());
  const Eigen::VectorXd per_sample = g_rows.cwiseProduct(ens.samples()).rowwise().sum();
  return ens.weights().dot(per_sample);
}

Ensemble push_forward(const Ensemble& ens, const Eigen::MatrixXd& op, const SpaceSpec& target) {
  if (static_cast<std::size_t>(op.cols()) != ens.dim() || static_cast<std::size_t>(op.rows()) != target.dim()) {
    throw Error(ErrorKind::DimMismatch, "operator shape does not match source and target spaces");
  }
  return Ensemble(target, ens.samples() * op.transpose(), ens.weights());
}

}  // namespace kle
