// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

// Component-wise versus vector-field truncation on a blocked space.
//
// Component-wise: each component v^q gets its own KLE in the base space and
// is cut at R0 terms; the pieces are stitched back together. The modes
// phi_{qr} e_q are orthonormal, so this is a projection of v_0 onto an
// (at most) R0*Q dimensional subspace.
//
// Vector-field: one KLE on the whole product space, cut at R0*Q terms.
// By optimality of the KL subspace its error is never larger.

#pragma once

#include "kle/ensemble.hpp"
#include "kle/kle_engine.hpp"

#include <span>
#include <vector>

namespace kle {

/// Samples restricted to component q, in the base space carrying the q-th
/// diagonal block of G.
Ensemble restrict_component(const Ensemble& ens, std::size_t q);

/// Per-component decompositions, index q. Components are independent and
/// are decomposed concurrently when `parallel` is set; the result does not
/// depend on scheduling. Throws NoBlocks or CrossBlockGram.
std::vector<KleDecomposition> decompose_components(const Ensemble& ens, double rank_tol = kDefaultRankTol,
                                                   bool parallel = true);

/// Stitches per-component truncations at min(r0, rank_q) terms each.
Ensemble assemble_componentwise(const Ensemble& ens, std::span<const KleDecomposition> components,
                                std::size_t r0);

/// The orthonormal family {phi_{qr} e_q : r <= min(r0, rank_q)} embedded in
/// the product space.
std::vector<HPoint> componentwise_basis(const Ensemble& ens, std::span<const KleDecomposition> components,
                                        std::size_t r0);

/// Throws NoBlocks, CrossBlockGram, or R0OutOfRange when r0 exceeds the
/// component dimension. Components of rank below r0 keep all their modes.
Ensemble componentwise_truncate(const Ensemble& ens, std::size_t r0, double rank_tol = kDefaultRankTol,
                                bool parallel = true);

/// reconstruct(decompose(ens), m). Throws MOutOfRange.
Ensemble vectorfield_truncate(const Ensemble& ens, std::size_t m, double rank_tol = kDefaultRankTol);

struct TruncationReport {
  std::size_t q = 0;
  std::size_t full_rank = 0;
  std::vector<std::size_t> component_ranks;
  double norm_sq = 0.0;           // ||v||^2, denominator of the reported quotients
  double centered_norm_sq = 0.0;  // ||v_0||^2

  std::vector<std::size_t> r0_values;
  std::vector<std::size_t> total_terms;          // R0 * Q
  std::vector<std::size_t> componentwise_terms;  // sum_q min(R0, rank_q)
  std::vector<std::size_t> vectorfield_terms;    // min(R0 * Q, full_rank)
  std::vector<double> componentwise_rel_err;     // ||v - v_R0||^2 / ||v||^2
  std::vector<double> vectorfield_rel_err;       // ||v - v~_R0||^2 / ||v||^2
  std::vector<double> componentwise_rel_err_centered;  // same numerators over ||v_0||^2
  std::vector<double> vectorfield_rel_err_centered;

  std::size_t rows() const noexcept { return r0_values.size(); }
};

/// Both relative squared errors for every R0 in r0_list. The vector-field
/// budget is R0 * Q terms, clamped to the full rank.
TruncationReport compare(const Ensemble& ens, std::span<const std::size_t> r0_list,
                         double rank_tol = kDefaultRankTol, bool parallel = true);

}  // namespace kle
