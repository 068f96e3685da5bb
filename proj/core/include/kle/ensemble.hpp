// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

// Empirical random elements v in L2(Omega, H): N samples v(omega_i) with
// probability weights w_i = P({omega_i}).

#pragma once

#include "kle/hilbert_space.hpp"

#include <Eigen/Dense>

namespace kle {

class Ensemble {
 public:
  /// Samples are rows of an N x dim matrix. Weights must be strictly
  /// positive and sum to one within 1e-12. Throws InvalidEnsemble,
  /// DimMismatch or NonFiniteInput.
  Ensemble(SpaceSpec space, Eigen::MatrixXd samples, Eigen::VectorXd weights);

  /// Uniform weights 1/N.
  Ensemble(SpaceSpec space, Eigen::MatrixXd samples);

  const SpaceSpec& space() const noexcept { return space_; }
  const Eigen::MatrixXd& samples() const noexcept { return samples_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(samples_.rows()); }
  std::size_t dim() const noexcept { return space_.dim(); }

  HPoint sample(std::size_t i) const;

 private:
  SpaceSpec space_;
  Eigen::MatrixXd samples_;
  Eigen::VectorXd weights_;
};

/// E(v) = sum_i w_i v_i, the Bochner integral against the empirical measure.
HPoint expectation(const Ensemble& ens);

/// v_0 = v - E(v).
Ensemble center(const Ensemble& ens);

/// (H_v x)(omega_i) = <v(omega_i), x>_H. Pass a centered ensemble to get H_{v_0}.
Eigen::VectorXd h_apply(const Ensemble& ens, const HPoint& x);

/// Cov(v) x = E(<v_0, x> v_0). Centers internally.
HPoint cov_apply(const Ensemble& ens, const HPoint& x);

/// ||v||^2 in L2(Omega, H) = sum_i w_i <v_i, v_i>_H (uncentered).
double bochner_norm_sq(const Ensemble& ens);

/// The same ensemble with every sample mapped through x -> T x, living in
/// `target` (T is target.dim() x ens.dim()).
Ensemble push_forward(const Ensemble& ens, const Eigen::MatrixXd& op, const SpaceSpec& target);

}  // namespace kle
