// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/vector_field.hpp"

#include "kle/error.hpp"

#include <algorithm>
#include <future>
#include <string>

namespace kle {

namespace {

const Blocks& require_blocks(const Ensemble& ens) {
  if (!ens.space().blocks()) throw Error(ErrorKind::NoBlocks, "component-wise truncation needs a blocked space");
  return *ens.space().blocks();
}

double squared_distance(const Ensemble& a, const Ensemble& b) {
  return bochner_norm_sq(Ensemble(a.space(), a.samples() - b.samples(), a.weights()));
}

double quotient(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

Ensemble restrict_component(const Ensemble& ens, std::size_t q) {
  const Blocks& blocks = require_blocks(ens);
  SpaceSpec sub = ens.space().component(q);
  const auto base = static_cast<Eigen::Index>(blocks.base_dim);
  return Ensemble(std::move(sub), ens.samples().middleCols(static_cast<Eigen::Index>(q) * base, base),
                  ens.weights());
}

std::vector<KleDecomposition> decompose_components(const Ensemble& ens, double rank_tol, bool parallel) {
  const Blocks& blocks = require_blocks(ens);
  if (ens.space().has_cross_block_coupling()) {
    throw Error(ErrorKind::CrossBlockGram, "Gram matrix couples different components");
  }

  auto one = [&ens, rank_tol](std::size_t q) { return decompose(restrict_component(ens, q), rank_tol); };

  std::vector<KleDecomposition> out;
  out.reserve(blocks.q);
  if (parallel && blocks.q > 1) {
    std::vector<std::future<KleDecomposition>> jobs;
    jobs.reserve(blocks.q);
    for (std::size_t q = 0; q < blocks.q; ++q) jobs.push_back(std::async(std::launch::async, one, q));
    for (auto& job : jobs) out.push_back(job.get());
  } else {
    for (std::size_t q = 0; q < blocks.q; ++q) out.push_back(one(q));
  }
  return out;
}

Ensemble assemble_componentwise(const Ensemble& ens, std::span<const KleDecomposition> components,
                                std::size_t r0) {
  const Blocks& blocks = require_blocks(ens);
  if (components.size() != blocks.q) {
    throw Error(ErrorKind::DimMismatch, "expected one decomposition per component");
  }
  const auto base = static_cast<Eigen::Index>(blocks.base_dim);
  Eigen::MatrixXd rows(ens.samples().rows(), ens.samples().cols());
  for (std::size_t q = 0; q < blocks.q; ++q) {
    const KleDecomposition& kle = components[q];
    const Ensemble part = reconstruct(kle, std::min(r0, kle.rank()));
    rows.middleCols(static_cast<Eigen::Index>(q) * base, base) = part.samples();
  }
  return Ensemble(ens.space(), std::move(rows), ens.weights());
}

std::vector<HPoint> componentwise_basis(const Ensemble& ens, std::span<const KleDecomposition> components,
                                        std::size_t r0) {
  const Blocks& blocks = require_blocks(ens);
  const auto base = static_cast<Eigen::Index>(blocks.base_dim);
  std::vector<HPoint> out;
  for (std::size_t q = 0; q < components.size(); ++q) {
    const KleDecomposition& kle = components[q];
    for (std::size_t r = 0; r < std::min(r0, kle.rank()); ++r) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ens.dim()));
      v.segment(static_cast<Eigen::Index>(q) * base, base) = kle.phis.row(static_cast<Eigen::Index>(r)).transpose();
      out.emplace_back(std::move(v));
    }
  }
  return out;
}

Ensemble componentwise_truncate(const Ensemble& ens, std::size_t r0, double rank_tol, bool parallel) {
  const Blocks& blocks = require_blocks(ens);
  if (r0 > blocks.base_dim) {
    throw Error(ErrorKind::R0OutOfRange, "R0 = " + std::to_string(r0) + " exceeds component dimension " +
                                             std::to_string(blocks.base_dim));
  }
  const auto components = decompose_components(ens, rank_tol, parallel);
  return assemble_componentwise(ens, components, r0);
}

Ensemble vectorfield_truncate(const Ensemble& ens, std::size_t m, double rank_tol) {
  return reconstruct(decompose(ens, rank_tol), m);
}

TruncationReport compare(const Ensemble& ens, std::span<const std::size_t> r0_list, double rank_tol,
                         bool parallel) {
  const Blocks& blocks = require_blocks(ens);
  for (std::size_t r0 : r0_list) {
    if (r0 > blocks.base_dim) {
      throw Error(ErrorKind::R0OutOfRange, "R0 = " + std::to_string(r0) + " exceeds component dimension " +
                                               std::to_string(blocks.base_dim));
    }
  }

  const auto components = decompose_components(ens, rank_tol, parallel);
  const KleDecomposition full = decompose(ens, rank_tol);

  TruncationReport report;
  report.q = blocks.q;
  report.full_rank = full.rank();
  for (const auto& c : components) report.component_ranks.push_back(c.rank());
  report.norm_sq = bochner_norm_sq(ens);
  report.centered_norm_sq = bochner_norm_sq(center(ens));

  for (std::size_t r0 : r0_list) {
    std::size_t cw_terms = 0;
    for (const auto& c : components) cw_terms += std::min(r0, c.rank());
    const std::size_t vf_terms = std::min(r0 * blocks.q, full.rank());

    const double cw_err = squared_distance(ens, assemble_componentwise(ens, components, r0));
    const double vf_err = squared_distance(ens, reconstruct(full, vf_terms));

    report.r0_values.push_back(r0);
    report.total_terms.push_back(r0 * blocks.q);
    report.componentwise_terms.push_back(cw_terms);
    report.vectorfield_terms.push_back(vf_terms);
    report.componentwise_rel_err.push_back(quotient(cw_err, report.norm_sq));
    report.vectorfield_rel_err.push_back(quotient(vf_err, report.norm_sq));
    report.componentwise_rel_err_centered.push_back(quotient(cw_err, report.centered_norm_sq));
    report.vectorfield_rel_err_centered.push_back(quotient(vf_err, report.centered_norm_sq));
  }
  return report;
}

}  // namespace kle
