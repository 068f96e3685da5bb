// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "kle/ensemble.hpp"
#include "kle/hilbert_space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kle {

// ---------------------------------------------------------------------------
// Mortality tables

enum class Transform { Identity, Log1p };

std::string_view to_string(Transform t) noexcept;
/// "identity" or "log1p"; throws ParseError otherwise.
Transform parse_transform(std::string_view name);

struct YearRange {
  int first = 0;
  int last = 0;
};

/// Deaths by (year, age, region). `values` is years x (regions * ages) with
/// region-major blocks: column q * ages.size() + a holds region q, age a.
struct MortalityTable {
  std::vector<int> years;
  std::vector<int> ages;
  std::vector<std::string> regions;
  Eigen::MatrixXd values;
  Transform transform = Transform::Identity;

  friend bool operator==(const MortalityTable&, const MortalityTable&) = default;
};

/// Long-format CSV with header `year,age,region,value`. Lines starting with
/// '#' are ignored. Age "110+" is read as 110. Every (year, age, region)
/// with age in 0..max_age must be present exactly once.
///
/// Without a region filter, regions are ordered lexicographically; with a
/// filter, in filter order. Throws MalformedRow, MissingCell, DuplicateCell,
/// NegativeValue.
MortalityTable parse_mortality_csv(std::string_view text,
                                   const std::optional<std::vector<std::string>>& region_filter = std::nullopt,
                                   Transform transform = Transform::Identity,
                                   const std::optional<YearRange>& years = std::nullopt);

/// One sample per year, uniform weights, Identity Gram on
/// l2({0..A}, R^Q) with blocks (Q = regions, base_dim = ages).
Ensemble table_to_ensemble(const MortalityTable& table);

// ---------------------------------------------------------------------------
// Synthetic ensembles

inline constexpr std::string_view kSynthPrngId = "mt19937_64+box-muller";

struct SynthEnsemble {
  Ensemble ensemble;
  Eigen::MatrixXd xi;     // N x len(spectrum) normal draws, centered and whitened
  Eigen::MatrixXd modes;  // len(spectrum) x d, Euclidean-orthonormal rows
  Eigen::VectorXd mean;
};

/// Samples mean + sum_r sigma_r xi_{ir} psi_r in Identity-Gram space with
/// blocks (q, base_dim). Mode r is seeded on block r mod q and blended
/// with a dense direction by `cross_coupling`; at 0 every psi_r lives on a
/// single block. The score columns are whitened against the uniform sample
/// measure, so the fitted spectrum is sigma_r^2 and, at coupling 0, the
/// cross-component sample covariance vanishes. Bit-identical output for
/// equal arguments.
/// Throws SpectrumTooLong, InvalidEnsemble.
SynthEnsemble synth_ensemble(std::uint64_t seed, std::size_t n, std::size_t q, std::size_t base_dim,
                             std::span<const double> spectrum, double cross_coupling);

// ---------------------------------------------------------------------------
// Grid images (PGM P2 / PPM P3)

/// Coefficients a_jk / maxval, row-major within a channel, channels as
/// consecutive blocks; an element of grid_l2_space(m, n, channels) where
/// m is the row count and n the column count. Throws BadMagic,
/// DimensionMismatch, MaxvalZero, ParseError.
HPoint parse_grid_image(std::string_view text, std::size_t m, std::size_t n, std::size_t channels);
HPoint load_grid_image(const std::filesystem::path& path, std::size_t m, std::size_t n, std::size_t channels);

struct ImageHeader {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 0;
};
ImageHeader peek_image_header(std::string_view text);

/// Whole file into a string; throws Io.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace kle
