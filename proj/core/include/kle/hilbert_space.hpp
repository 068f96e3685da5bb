// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

// Finite-dimensional realizations of a Hilbert space H.
//
// An element of H is stored by its coefficients x in a fixed canonical
// basis; the inner product is <x, y>_H = x^T G y for an SPD Gram matrix G.
// Three Gram shapes are supported: the identity (plain l2), a positive
// diagonal (quadrature or cell-area weights), and a dense SPD matrix.
// A space can also carry a block layout (Q components of base_dim
// coefficients each), which models l2(I, R^Q) style vector fields with
// component q stored in the coefficient slice [q*base_dim, (q+1)*base_dim).

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace kle {

enum class GramKind { Identity, Diagonal, Dense };

/// Description of a Gram matrix before validation.
struct GramSpec {
  GramKind kind = GramKind::Identity;
  Eigen::VectorXd weights;  // Diagonal only
  Eigen::MatrixXd matrix;   // Dense only

  static GramSpec identity() { return {}; }
  static GramSpec diagonal(Eigen::VectorXd w) { return {GramKind::Diagonal, std::move(w), {}}; }
  static GramSpec dense(Eigen::MatrixXd g) { return {GramKind::Dense, {}, std::move(g)}; }
};

/// Vector-field layout: q components of base_dim coefficients each.
struct Blocks {
  std::size_t q = 1;
  std::size_t base_dim = 1;

  friend bool operator==(const Blocks&, const Blocks&) = default;
};

/// Cholesky-type factor G = L L^T. Identity and Diagonal Grams keep only
/// the diagonal of L.
class GramFactor {
 public:
  GramFactor() = default;
  GramFactor(GramKind kind, Eigen::VectorXd diag, Eigen::MatrixXd lower);

  GramKind kind() const noexcept { return kind_; }

  /// rows * L, applied to every row of an N x d matrix.
  Eigen::MatrixXd whiten_rows(const Eigen::MatrixXd& rows) const;

  /// Solves L^T x = y column by column.
  Eigen::MatrixXd solve_transposed(const Eigen::MatrixXd& y) const;

  /// Materialized lower-triangular L.
  Eigen::MatrixXd lower() const;

 private:
  GramKind kind_ = GramKind::Identity;
  std::size_t dim_ = 0;
  Eigen::VectorXd diag_;
  Eigen::MatrixXd lower_;
};

/// A validated, immutable space realization. Copies share storage.
class SpaceSpec {
 public:
  std::size_t dim() const noexcept;
  GramKind gram_kind() const noexcept;
  /// Diagonal weights; empty unless gram_kind() == Diagonal.
  const Eigen::VectorXd& gram_weights() const noexcept;
  /// Symmetrized dense Gram; empty unless gram_kind() == Dense.
  const Eigen::MatrixXd& gram_matrix() const noexcept;
  const std::optional<Blocks>& blocks() const noexcept;
  const GramFactor& factor() const noexcept;

  /// G materialized as a dense d x d matrix (any kind).
  Eigen::MatrixXd gram_dense() const;

  /// G x.
  Eigen::VectorXd apply_gram(const Eigen::VectorXd& x) const;
  /// rows * G for an N x d matrix (G is symmetric).
  Eigen::MatrixXd apply_gram_rows(const Eigen::MatrixXd& rows) const;
  /// G^{-1} x.
  Eigen::VectorXd solve_gram(const Eigen::VectorXd& x) const;

  /// x^T G y without dimension checks; callers guarantee sizes.
  double raw_inner(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) const;

  /// True when G has a nonzero entry coupling two different blocks.
  bool has_cross_block_coupling() const;

  /// The base space of component q, carrying the q-th diagonal block of G.
  /// Throws NoBlocks when the space has no block layout.
  SpaceSpec component(std::size_t q) const;

  friend bool operator==(const SpaceSpec& a, const SpaceSpec& b);

 private:
  struct Data;
  explicit SpaceSpec(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  friend SpaceSpec make_space(std::size_t, GramSpec, std::optional<Blocks>);

  std::shared_ptr<const Data> data_;
};

/// Validates the Gram matrix and block layout and caches the factor.
/// Throws NonSPDGram or BlockMismatch.
SpaceSpec make_space(std::size_t dim, GramSpec gram, std::optional<Blocks> blocks = std::nullopt);

/// L2([0,1]^2, R^channels) restricted to piecewise-constant images on an
/// m x n grid: every coefficient (one pixel of one channel) carries weight
/// 1/(m n), the area of its cell.
SpaceSpec grid_l2_space(std::size_t m, std::size_t n, std::size_t channels);

/// An element of H by its canonical coefficients. All entries finite.
class HPoint {
 public:
  HPoint() = default;
  explicit HPoint(Eigen::VectorXd coeffs);

  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(coeffs_.size()); }
  double operator[](std::size_t i) const { return coeffs_[static_cast<Eigen::Index>(i)]; }

  static HPoint zero(std::size_t dim) { return HPoint(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))); }

 private:
  Eigen::VectorXd coeffs_;
};

/// <x, y>_H. Throws DimMismatch.
double inner(const SpaceSpec& space, const HPoint& x, const HPoint& y);

/// ||x||_H^2.
double norm_sq(const SpaceSpec& space, const HPoint& x);

/// Modified Gram-Schmidt in the G-inner product. Throws DegenerateBasis
/// when a pivot drops below 1e-10 times the largest squared input norm.
std::vector<HPoint> orthonormalize(const SpaceSpec& space, std::span<const HPoint> basis);

/// G-orthogonal projection of x onto span(basis).
HPoint project(const SpaceSpec& space, const HPoint& x, std::span<const HPoint> basis);

}  // namespace kle
