// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

// Karhunen-Loeve decomposition of an empirical random element
//
//   v(omega_i) = E(v) + sum_r lambda_r^{1/2} Y_r(omega_i) phi_r
//
// computed as the SVD of the Hilbert-Schmidt operator H_{v_0}. With
// W = diag(w), G = L L^T and D_0 the centered N x d sample matrix, the
// matrix W^{1/2} D_0 L is an ordinary Euclidean representation of H_{v_0},
// so a plain SVD U S V^T of it yields
//
//   lambda_r = s_r^2,   phi_r = L^{-T} v_r,   Y_r = W^{-1/2} u_r,
//
// with phi_r orthonormal in <.,.>_H and Y_r orthonormal in L2(Omega).

#pragma once

#include "kle/ensemble.hpp"
#include "kle/hilbert_space.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace kle {

inline constexpr double kDefaultRankTol = 1e-12;

struct KleDecomposition {
  SpaceSpec space;
  HPoint mean;
  Eigen::VectorXd weights;  // empirical measure, needed to rebuild ensembles
  Eigen::VectorXd lambdas;  // R, nonincreasing, > 0
  Eigen::MatrixXd phis;     // R x d, rows G-orthonormal
  Eigen::MatrixXd scores;   // N x R, columns w-orthonormal with zero w-mean
  double rank_tol = kDefaultRankTol;

  std::size_t rank() const noexcept { return static_cast<std::size_t>(lambdas.size()); }
  HPoint phi(std::size_t r) const { return HPoint(phis.row(static_cast<Eigen::Index>(r)).transpose()); }
};

/// Singular values s_r <= rank_tol * s_1 are dropped. Sign convention: each
/// (Y_r, phi_r) pair is flipped so that the largest-magnitude coefficient
/// of phi_r is positive, ties going to the lowest index.
KleDecomposition decompose(const Ensemble& ens, double rank_tol = kDefaultRankTol);

struct Truncation {
  std::vector<HPoint> basis;  // phi_1..phi_M
  double tail = 0.0;          // sum_{r > M} lambda_r
};

/// Throws MOutOfRange unless m <= rank.
Truncation truncate(const KleDecomposition& kle, std::size_t m);

/// Mean squared residual ||(id - P_S) v_0||^2 of the centered ensemble
/// against S = span(basis). Throws DegenerateBasis.
double truncation_error(const Ensemble& ens, std::span<const HPoint> basis);

/// Rows E(v) + sum_{r <= m} lambda_r^{1/2} Y_r(omega_i) phi_r.
Ensemble reconstruct(const KleDecomposition& kle, std::size_t m);

/// Largest w-norm discrepancy, over the canonical basis k of the target,
/// between H_{T v} k and H_v (T^* k), where T^* = G_src^{-1} T^T G_tgt is
/// the Hilbert adjoint. Zero up to roundoff for every T.
double naturality_gap(const Ensemble& ens, const Eigen::MatrixXd& op, const SpaceSpec& target);

}  // namespace kle
