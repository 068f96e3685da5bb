// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/hilbert_space.hpp"

#include "kle/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kle {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kDegeneratePivot = 1e-10;

void require_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw Error(ErrorKind::DimMismatch, std::string(what) + ": expected dimension " +
                                            std::to_string(expected) + ", got " + std::to_string(got));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// GramFactor

GramFactor::GramFactor(GramKind kind, Eigen::VectorXd diag, Eigen::MatrixXd lower)
    : kind_(kind), diag_(std::move(diag)), lower_(std::move(lower)) {
  dim_ = static_cast<std::size_t>(kind_ == GramKind::Dense ? lower_.rows() : diag_.size());
}

Eigen::MatrixXd GramFactor::whiten_rows(const Eigen::MatrixXd& rows) const {
  switch (kind_) {
    case GramKind::Identity: return rows;
    case GramKind::Diagonal: return rows * diag_.asDiagonal();
    case GramKind::Dense: return rows * lower_.triangularView<Eigen::Lower>();
  }
  return rows;
}

Eigen::MatrixXd GramFactor::solve_transposed(const Eigen::MatrixXd& y) const {
  switch (kind_) {
    case GramKind::Identity: return y;
    case GramKind::Diagonal: return diag_.cwiseInverse().asDiagonal() * y;
    case GramKind::Dense: return lower_.triangularView<Eigen::Lower>().transpose().solve(y);
  }
  return y;
}

Eigen::MatrixXd GramFactor::lower() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  switch (kind_) {
    case GramKind::Identity: return Eigen::MatrixXd::Identity(d, d);
    case GramKind::Diagonal: return diag_.asDiagonal();
    case GramKind::Dense: return lower_;
  }
  return {};
}

// ---------------------------------------------------------------------------
// SpaceSpec

struct SpaceSpec::Data {
  std::size_t dim = 0;
  GramKind kind = GramKind::Identity;
  Eigen::VectorXd weights;
  Eigen::MatrixXd matrix;
  std::optional<Blocks> blocks;
  GramFactor factor;
  Eigen::LLT<Eigen::MatrixXd> llt;
};

std::size_t SpaceSpec::dim() const noexcept { return data_->dim; }
GramKind SpaceSpec::gram_kind() const noexcept { return data_->kind; }
const Eigen::VectorXd& SpaceSpec::gram_weights() const noexcept { return data_->weights; }
const Eigen::MatrixXd& SpaceSpec::gram_matrix() const noexcept { return data_->matrix; }
const std::optional<Blocks>& SpaceSpec::blocks() const noexcept { return data_->blocks; }
const GramFactor& SpaceSpec::factor() const noexcept { return data_->factor; }

Eigen::MatrixXd SpaceSpec::gram_dense() const {
  const auto d = static_cast<Eigen::Index>(dim());
  switch (gram_kind()) {
    case GramKind::Identity: return Eigen::MatrixXd::Identity(d, d);
    case GramKind::Diagonal: return data_->weights.asDiagonal();
    case GramKind::Dense: return data_->matrix;
  }
  return {};
}

Eigen::VectorXd SpaceSpec::apply_gram(const Eigen::VectorXd& x) const {
  switch (gram_kind()) {
    case GramKind::Identity: return x;
    case GramKind::Diagonal: return data_->weights.cwiseProduct(x);
    case GramKind::Dense: return data_->matrix * x;
  }
  return x;
}

Eigen::MatrixXd SpaceSpec::apply_gram_rows(const Eigen::MatrixXd& rows) const {
  switch (gram_kind()) {
    case GramKind::Identity: return rows;
    case GramKind::Diagonal: return rows * data_->weights.asDiagonal();
    case GramKind::Dense: return rows * data_->matrix;
  }
  return rows;
}

Eigen::VectorXd SpaceSpec::solve_gram(const Eigen::VectorXd& x) const {
  switch (gram_kind()) {
    case GramKind::Identity: return x;
    case GramKind::Diagonal: return x.cwiseQuotient(data_->weights);
    case GramKind::Dense: return data_->llt.solve(x);
  }
  return x;
}

double SpaceSpec::raw_inner(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y) const {
  switch (gram_kind()) {
    case GramKind::Identity: return x.dot(y);
    case GramKind::Diagonal: return x.cwiseProduct(data_->weights).dot(y);
    case GramKind::Dense: return x.dot(data_->matrix * y);
  }
  return 0.0;
}

bool SpaceSpec::has_cross_block_coupling() const {
  if (gram_kind() != GramKind::Dense || !blocks()) return false;
  const auto b = static_cast<Eigen::Index>(blocks()->base_dim);
  const Eigen::MatrixXd& g = data_->matrix;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (i / b != j / b && g(i, j) != 0.0) return true;
    }
  }
  return false;
}

SpaceSpec SpaceSpec::component(std::size_t q) const {
  if (!blocks()) throw Error(ErrorKind::NoBlocks, "space has no block layout");
  if (q >= blocks()->q) {
    throw Error(ErrorKind::DimMismatch, "component index " + std::to_string(q) + " out of range");
  }
  const std::size_t base = blocks()->base_dim;
  const auto off = static_cast<Eigen::Index>(q * base);
  const auto b = static_cast<Eigen::Index>(base);
  switch (gram_kind()) {
    case GramKind::Identity: return make_space(base, GramSpec::identity());
    case GramKind::Diagonal: return make_space(base, GramSpec::diagonal(data_->weights.segment(off, b)));
    case GramKind::Dense: return make_space(base, GramSpec::dense(data_->matrix.block(off, off, b, b)));
  }
  return make_space(base, GramSpec::identity());
}

bool operator==(const SpaceSpec& a, const SpaceSpec& b) {
  if (a.data_ == b.data_) return true;
  if (a.dim() != b.dim() || a.gram_kind() != b.gram_kind() || a.blocks() != b.blocks()) return false;
  switch (a.gram_kind()) {
    case GramKind::Identity: return true;
    case GramKind::Diagonal: return a.gram_weights() == b.gram_weights();
    case GramKind::Dense: return a.gram_matrix() == b.gram_matrix();
  }
  return false;
}

SpaceSpec make_space(std::size_t dim, GramSpec gram, std::optional<Blocks> blocks) {
  if (dim == 0) throw Error(ErrorKind::DimMismatch, "space dimension must be at least 1");
  const auto d = static_cast<Eigen::Index>(dim);

  auto data = std::make_shared<SpaceSpec::Data>();
  data->dim = dim;
  data->kind = gram.kind;

  switch (gram.kind) {
    case GramKind::Identity:
      data->factor = GramFactor(GramKind::Identity, Eigen::VectorXd::Ones(d), {});
      break;

    case GramKind::Diagonal: {
      require_dim(dim, static_cast<std::size_t>(gram.weights.size()), "diagonal Gram");
      for (Eigen::Index i = 0; i < d; ++i) {
        const double w = gram.weights[i];
        if (!std::isfinite(w) || w <= 0.0) {
          throw Error(ErrorKind::NonSPDGram,
                      "diagonal weight " + std::to_string(i) + " is not strictly positive");
        }
      }
      data->factor = GramFactor(GramKind::Diagonal, gram.weights.cwiseSqrt(), {});
      data->weights = std::move(gram.weights);
      break;
    }

    case GramKind::Dense: {
      const Eigen::MatrixXd& g = gram.matrix;
      if (g.rows() != d || g.cols() != d) {
        throw Error(ErrorKind::DimMismatch, "dense Gram must be " + std::to_string(dim) + "x" +
                                                std::to_string(dim));
      }
      if (!g.allFinite()) throw Error(ErrorKind::NonSPDGram, "dense Gram has non-finite entries");
      const double scale = g.cwiseAbs().maxCoeff();
      const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
      if (asym > kSymmetryTol * scale) {
        throw Error(ErrorKind::NonSPDGram, "dense Gram is not symmetric (max |G - G^T| = " +
                                               std::to_string(asym) + ")");
      }
      Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
      Eigen::LLT<Eigen::MatrixXd> llt(sym);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NonSPDGram, "dense Gram is not positive definite");
      }
      data->factor = GramFactor(GramKind::Dense, {}, llt.matrixL());
      data->llt = std::move(llt);
      data->matrix = std::move(sym);
      break;
    }
  }

  if (blocks) {
    if (blocks->q == 0 || blocks->base_dim == 0 || blocks->q * blocks->base_dim != dim) {
      throw Error(ErrorKind::BlockMismatch, "blocks " + std::to_string(blocks->q) + "x" +
                                                std::to_string(blocks->base_dim) +
                                                " do not tile dimension " + std::to_string(dim));
    }
  }
  data->blocks = blocks;
  return SpaceSpec(std::move(data));
}

SpaceSpec grid_l2_space(std::size_t m, std::size_t n, std::size_t channels) {
  if (m == 0 || n == 0 || channels == 0) {
    throw Error(ErrorKind::DimMismatch, "grid dimensions and channel count must be positive");
  }
  const std::size_t cells = m * n;
  const std::size_t dim = cells * channels;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), 1.0 / static_cast<double>(cells));
  return make_space(dim, GramSpec::diagonal(std::move(w)), Blocks{channels, cells});
}

// ---------------------------------------------------------------------------
// HPoint and free operations

HPoint::HPoint(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {
  if (!coeffs_.allFinite()) throw Error(ErrorKind::NonFiniteInput, "HPoint has non-finite coefficients");
}

double inner(const SpaceSpec& space, const HPoint& x, const HPoint& y) {
  require_dim(space.dim(), x.size(), "inner(x)");
  require_dim(space.dim(), y.size(), "inner(y)");
  return space.raw_inner(x.coeffs(), y.coeffs());
}

double norm_sq(const SpaceSpec& space, const HPoint& x) { return inner(space, x, x); }

std::vector<HPoint> orthonormalize(const SpaceSpec& space, std::span<const HPoint> basis) {
  double max_norm_sq = 0.0;
  for (const HPoint& b : basis) {
    require_dim(space.dim(), b.size(), "basis vector");
    max_norm_sq = std::max(max_norm_sq, space.raw_inner(b.coeffs(), b.coeffs()));
  }

  std::vector<Eigen::VectorXd> q;
  std::vector<Eigen::VectorXd> gq;  // G q_k, reused for every projection coefficient
  q.reserve(basis.size());
  gq.reserve(basis.size());

  for (std::size_t j = 0; j < basis.size(); ++j) {
    Eigen::VectorXd v = basis[j].coeffs();
    // Two MGS sweeps; the pivot is taken after the first.
    double pivot = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < q.size(); ++k) v -= gq[k].dot(v) * q[k];
      if (pass == 0) pivot = space.raw_inner(v, v);
    }
    if (!(pivot > kDegeneratePivot * max_norm_sq) || max_norm_sq == 0.0) {
      throw Error(ErrorKind::DegenerateBasis,
                  "basis vector " + std::to_string(j) + " is numerically dependent on its predecessors");
    }
    v /= std::sqrt(space.raw_inner(v, v));
    gq.push_back(space.apply_gram(v));
    q.push_back(std::move(v));
  }

  std::vector<HPoint> out;
  out.reserve(q.size());
  for (auto& v : q) out.emplace_back(std::move(v));
  return out;
}

HPoint project(const SpaceSpec& space, const HPoint& x, std::span<const HPoint> basis) {
  require_dim(space.dim(), x.size(), "project(x)");
  const std::vector<HPoint> onb = orthonormalize(space, basis);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.coeffs().size());
  for (const HPoint& e : onb) out += space.raw_inner(e.coeffs(), x.coeffs()) * e.coeffs();
  return HPoint(std::move(out));
}

}  // namespace kle
