// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

// On-disk formats.
//
//   SpaceSpec          JSON {"dim", "gram": {"kind", "values"}, "blocks": {"q", "base_dim"} | null}
//   Ensemble           CSV  sample_id,w,c0,...,c{d-1}   (+ SpaceSpec JSON sidecar)
//   KleDecomposition   JSON {"mean", "lambdas", "phis", "scores", "rank_tol", "weights", "space"}
//   spectrum           CSV  r,lambda,cumulative_fraction
//   TruncationReport   CSV  r0,total_terms,componentwise_rel_err,vectorfield_rel_err  and JSON
//
// Matrices are row-major nested arrays. CSV numbers carry 17 significant
// digits so that text round trips are exact.

#pragma once

#include "kle/ensemble.hpp"
#include "kle/kle_engine.hpp"
#include "kle/vector_field.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kle {

std::string format_double(double x);

nlohmann::json space_to_json(const SpaceSpec& space);
/// Throws ParseError on schema violations, plus make_space errors.
SpaceSpec space_from_json(const nlohmann::json& j);

std::string write_ensemble_csv(const Ensemble& ens, std::span<const std::string> sample_ids = {});

struct EnsembleCsv {
  Ensemble ensemble;
  std::vector<std::string> sample_ids;
};
/// Throws MalformedRow (with line number) or the Ensemble validation errors.
EnsembleCsv read_ensemble_csv(std::string_view text, const SpaceSpec& space);

nlohmann::json kle_to_json(const KleDecomposition& kle);
KleDecomposition kle_from_json(const nlohmann::json& j);

std::string spectrum_csv(const KleDecomposition& kle);

std::string report_csv(const TruncationReport& report);
nlohmann::json report_to_json(const TruncationReport& report);

}  // namespace kle
