// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "kle/data_io.hpp"
#include "kle/error.hpp"
#include "kle/kle_engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kle::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericError = 3, kInfeasible = 4 };

int exit_code_for(ErrorKind kind) noexcept;

struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string space_path;                 // SpaceSpec JSON sidecar
  std::string gram = "identity";          // identity | diag:w0,w1,...
  std::string blocks;                     // Q:BASE
  bool uniform_weights = false;
  std::string transform = "identity";
  double rank_tol = kDefaultRankTol;
  std::vector<std::size_t> r0_list;
  std::optional<std::size_t> m;
  std::uint64_t seed = 0;
  std::string out;                        // output path prefix
  std::string format = "csv";
  std::string years;                      // A:B
  std::vector<std::string> regions;
  // synth
  std::size_t n = 0;
  std::vector<double> spectrum;
  double coupling = 0.0;
  // image-embed
  std::optional<std::size_t> channels;
  bool serial = false;
};

/// Parses argv (CLI11) and dispatches. All output goes to the two streams
/// and to files under config.out.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_decompose(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_truncate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_image_embed(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace kle::cli
