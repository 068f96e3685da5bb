// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include "kle/data_io.hpp"
#include "kle/ensemble.hpp"
#include "kle/serialize.hpp"
#include "kle/vector_field.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <ostream>

namespace kle::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonSPDGram:
    case ErrorKind::DegenerateBasis:
    case ErrorKind::CrossBlockGram:
      return kNumericError;
    case ErrorKind::MOutOfRange:
    case ErrorKind::R0OutOfRange:
    case ErrorKind::SpectrumTooLong:
      return kInfeasible;
    default:
      return kInputError;
  }
}

namespace {

std::size_t parse_size(std::string_view tok, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw Error(ErrorKind::ParseError, std::string("bad ") + what + " '" + std::string(tok) + "'");
  }
  return v;
}

Blocks parse_blocks(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::ParseError, "--blocks expects Q:BASE");
  return Blocks{parse_size(std::string_view(spec).substr(0, colon), "block count"),
                parse_size(std::string_view(spec).substr(colon + 1), "block size")};
}

YearRange parse_years(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::ParseError, "--years expects A:B");
  return YearRange{static_cast<int>(parse_size(std::string_view(spec).substr(0, colon), "first year")),
                   static_cast<int>(parse_size(std::string_view(spec).substr(colon + 1), "last year"))};
}

SpaceSpec space_from_flags(const RunConfig& c, std::size_t dim) {
  std::optional<Blocks> blocks;
  if (!c.blocks.empty()) blocks = parse_blocks(c.blocks);
  if (c.gram == "identity") return make_space(dim, GramSpec::identity(), blocks);
  if (c.gram.rfind("diag:", 0) == 0) {
    std::vector<double> w;
    std::string_view rest = std::string_view(c.gram).substr(5);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view tok = rest.substr(0, comma);
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw Error(ErrorKind::ParseError, "bad diagonal weight '" + std::string(tok) + "'");
      }
      w.push_back(x);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return make_space(dim, GramSpec::diagonal(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()))),
                      blocks);
  }
  throw Error(ErrorKind::ParseError, "--gram must be 'identity' or 'diag:w0,w1,...' (dense Grams go through --space)");
}

std::string first_content_line(std::string_view text) {
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') return std::string(line);
    start = end + 1;
  }
  return {};
}

fs::path sidecar_space_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".space.json");
  return p;
}

struct LoadedInput {
  Ensemble ensemble;
  std::vector<std::string> ids;
  bool mortality = false;
};

LoadedInput load_input(const RunConfig& c) {
  if (c.inputs.size() != 1) throw Error(ErrorKind::ParseError, "exactly one --input is required");
  const fs::path path = c.inputs.front();
  const std::string text = read_file(path);
  const std::string header = first_content_line(text);

  if (header == "year,age,region,value") {
    std::optional<std::vector<std::string>> filter;
    if (!c.regions.empty()) filter = c.regions;
    std::optional<YearRange> years;
    if (!c.years.empty()) years = parse_years(c.years);
    const MortalityTable table = parse_mortality_csv(text, filter, parse_transform(c.transform), years);
    std::vector<std::string> ids;
    for (int y : table.years) ids.push_back(std::to_string(y));
    return {table_to_ensemble(table), std::move(ids), true};
  }

  std::optional<SpaceSpec> space;
  if (!c.space_path.empty()) {
    space = space_from_json(json::parse(read_file(c.space_path), nullptr, false));
  } else if (fs::exists(sidecar_space_path(path))) {
    space = space_from_json(json::parse(read_file(sidecar_space_path(path)), nullptr, false));
  } else {
    const auto columns = std::count(header.begin(), header.end(), ',') + 1;
    if (columns < 3) throw Error(ErrorKind::MalformedRow, "line 1: expected header sample_id,w,c0,...");
    space = space_from_flags(c, static_cast<std::size_t>(columns - 2));
  }
  EnsembleCsv parsed = read_ensemble_csv(text, *space);
  if (c.uniform_weights) {
    return {Ensemble(parsed.ensemble.space(), parsed.ensemble.samples()), std::move(parsed.sample_ids), false};
  }
  return {std::move(parsed.ensemble), std::move(parsed.sample_ids), false};
}

json metadata(const RunConfig& c, bool mortality) {
  json m = {{"tool", "kle"},
            {"version", kToolVersion},
            {"command", c.subcommand},
            {"inputs", c.inputs},
            {"rank_tol", c.rank_tol},
            {"transform", c.transform},
            {"prng", kSynthPrngId},
            {"seed", c.seed}};
  if (mortality) {
    m["weights"] = "uniform over years (inferred default)";
  } else if (c.uniform_weights) {
    m["weights"] = "uniform (forced)";
  } else {
    m["weights"] = "from input";
  }
  if (!c.years.empty()) m["years"] = c.years;
  if (!c.regions.empty()) m["regions"] = c.regions;
  return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path with_suffix(const std::string& prefix, const char* suffix) { return fs::path(prefix + suffix); }

void require_out(const RunConfig& c) {
  if (c.out.empty()) throw Error(ErrorKind::ParseError, "--out is required");
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace

int cmd_decompose(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_out(c);
    const LoadedInput in = load_input(c);
    const KleDecomposition kle = decompose(in.ensemble, c.rank_tol);

    json j = kle_to_json(kle);
    j["metadata"] = metadata(c, in.mortality);
    write_file(with_suffix(c.out, ".kle.json"), dump(j));
    write_file(with_suffix(c.out, ".spectrum.csv"), spectrum_csv(kle));

    if (kle.rank() == 0) err << "warning: ensemble is constant, the expansion has rank 0\n";
    out << "samples " << in.ensemble.size() << ", dim " << in.ensemble.dim() << ", rank " << kle.rank() << '\n';
    out << "total variance " << format_double(kle.lambdas.sum()) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_truncate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_out(c);
    if (!c.m) throw Error(ErrorKind::ParseError, "--m is required");
    const LoadedInput in = load_input(c);
    const KleDecomposition kle = decompose(in.ensemble, c.rank_tol);
    const Truncation trunc = truncate(kle, *c.m);
    const Ensemble recon = reconstruct(kle, *c.m);
    const double residual_sq = bochner_norm_sq(
        Ensemble(in.ensemble.space(), in.ensemble.samples() - recon.samples(), in.ensemble.weights()));

    json j = {{"m", *c.m},
              {"rank", kle.rank()},
              {"residual_sq", residual_sq},
              {"spectrum_tail", trunc.tail},
              {"centered_norm_sq", kle.lambdas.sum()},
              {"metadata", metadata(c, in.mortality)}};
    write_file(with_suffix(c.out, ".truncate.json"), dump(j));
    write_file(with_suffix(c.out, ".recon.csv"), write_ensemble_csv(recon, in.ids));
    write_file(with_suffix(c.out, ".recon.space.json"), dump(space_to_json(recon.space())));

    out << "M " << *c.m << " of rank " << kle.rank() << '\n';
    out << "residual_sq " << format_double(residual_sq) << '\n';
    out << "spectrum_tail " << format_double(trunc.tail) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_out(c);
    if (c.r0_list.empty()) throw Error(ErrorKind::ParseError, "--r0 is required");
    for (std::size_t k = 0; k < c.r0_list.size(); ++k) {
      if (c.r0_list[k] == 0 || (k > 0 && c.r0_list[k] <= c.r0_list[k - 1])) {
        throw Error(ErrorKind::ParseError, "--r0 must be strictly increasing positive integers");
      }
    }
    const LoadedInput in = load_input(c);
    const TruncationReport report = compare(in.ensemble, c.r0_list, c.rank_tol, !c.serial);

    if (c.format == "json") {
      json j = report_to_json(report);
      j["metadata"] = metadata(c, in.mortality);
      write_file(with_suffix(c.out, ".report.json"), dump(j));
    } else {
      write_file(with_suffix(c.out, ".report.csv"), report_csv(report));
      write_file(with_suffix(c.out, ".meta.json"), dump(metadata(c, in.mortality)));
    }

    char line[128];
    std::snprintf(line, sizeof line, "%4s %11s %24s %24s\n", "r0", "total_terms", "componentwise_rel_err",
                  "vectorfield_rel_err");
    out << line;
    for (std::size_t k = 0; k < report.rows(); ++k) {
      std::snprintf(line, sizeof line, "%4zu %11zu %24.17g %24.17g\n", report.r0_values[k], report.total_terms[k],
                    report.componentwise_rel_err[k], report.vectorfield_rel_err[k]);
      out << line;
      if (report.componentwise_terms[k] < report.total_terms[k] || report.vectorfield_terms[k] < report.total_terms[k]) {
        out << "     realized terms: componentwise " << report.componentwise_terms[k] << ", vectorfield "
            << report.vectorfield_terms[k] << '\n';
      }
    }
    return static_cast<int>(kOk);
  });
}

int cmd_synth(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_out(c);
    if (c.blocks.empty()) throw Error(ErrorKind::ParseError, "--blocks Q:BASE is required");
    const Blocks b = parse_blocks(c.blocks);
    const SynthEnsemble s = synth_ensemble(c.seed, c.n, b.q, b.base_dim, c.spectrum, c.coupling);

    json meta = metadata(c, false);
    meta["n"] = c.n;
    meta["blocks"] = c.blocks;
    meta["spectrum"] = c.spectrum;
    meta["coupling"] = c.coupling;
    write_file(with_suffix(c.out, ".csv"), write_ensemble_csv(s.ensemble));
    write_file(with_suffix(c.out, ".space.json"), dump(space_to_json(s.ensemble.space())));
    write_file(with_suffix(c.out, ".meta.json"), dump(meta));
    out << "wrote " << s.ensemble.size() << " samples of dimension " << s.ensemble.dim() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_image_embed(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_out(c);
    if (c.inputs.empty()) throw Error(ErrorKind::ParseError, "at least one --input image is required");
    const ImageHeader first = peek_image_header(read_file(c.inputs.front()));
    const std::size_t channels = c.channels.value_or(first.channels);
    const SpaceSpec space = grid_l2_space(first.rows, first.cols, channels);

    Eigen::MatrixXd rows(static_cast<Eigen::Index>(c.inputs.size()), static_cast<Eigen::Index>(space.dim()));
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < c.inputs.size(); ++i) {
      const HPoint img = load_grid_image(c.inputs[i], first.rows, first.cols, channels);
      rows.row(static_cast<Eigen::Index>(i)) = img.coeffs().transpose();
      ids.push_back(fs::path(c.inputs[i]).stem().string());
      out << ids.back() << " norm_sq " << format_double(norm_sq(space, img)) << '\n';
    }
    const Ensemble ens(space, std::move(rows));
    write_file(with_suffix(c.out, ".csv"), write_ensemble_csv(ens, ids));
    write_file(with_suffix(c.out, ".space.json"), dump(space_to_json(space)));
    write_file(with_suffix(c.out, ".meta.json"), dump(metadata(c, false)));
    return static_cast<int>(kOk);
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Karhunen-Loeve expansions in weighted and vector-field Hilbert spaces", "kle"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  auto add_data_options = [&c](CLI::App* sub) {
    sub->add_option("--input", c.inputs, "ensemble CSV or mortality CSV")->required()->delimiter(',');
    sub->add_option("--space", c.space_path, "SpaceSpec JSON (default: <input>.space.json if present)");
    sub->add_option("--gram", c.gram, "identity | diag:w0,w1,... when no space JSON is given");
    sub->add_option("--blocks", c.blocks, "vector-field layout Q:BASE");
    sub->add_flag("--uniform-weights", c.uniform_weights, "ignore the w column and use 1/N");
    sub->add_option("--transform", c.transform, "mortality transform")
        ->check(CLI::IsMember({"identity", "log1p"}));
    sub->add_option("--rank-tol", c.rank_tol, "drop singular values below rank_tol * sigma_1");
    sub->add_option("--years", c.years, "mortality year range A:B");
    sub->add_option("--regions", c.regions, "mortality regions, in block order")->delimiter(',');
    sub->add_option("--seed", c.seed, "recorded in metadata");
    sub->add_option("--out", c.out, "output path prefix")->required();
  };

  auto* decompose_cmd = app.add_subcommand("decompose", "KLE of an ensemble: <out>.kle.json, <out>.spectrum.csv");
  add_data_options(decompose_cmd);

  auto* truncate_cmd = app.add_subcommand("truncate", "M-term reconstruction and residual");
  add_data_options(truncate_cmd);
  truncate_cmd->add_option("--m", c.m, "number of retained terms")->required();

  auto* compare_cmd = app.add_subcommand("compare", "component-wise vs vector-field truncation errors");
  add_data_options(compare_cmd);
  compare_cmd->add_option("--r0", c.r0_list, "per-component truncation levels, e.g. 1,2,3")->required()->delimiter(',');
  compare_cmd->add_option("--format", c.format, "report format")->check(CLI::IsMember({"csv", "json"}));
  compare_cmd->add_flag("--serial", c.serial, "decompose components sequentially");

  auto* synth_cmd = app.add_subcommand("synth", "seeded synthetic blocked ensemble");
  synth_cmd->add_option("--seed", c.seed, "PRNG seed");
  synth_cmd->add_option("--n", c.n, "sample count")->required();
  synth_cmd->add_option("--blocks", c.blocks, "Q:BASE")->required();
  synth_cmd->add_option("--spectrum", c.spectrum, "mode amplitudes, nonincreasing")->delimiter(',');
  synth_cmd->add_option("--coupling", c.coupling, "cross-component coupling in [0,1]");
  synth_cmd->add_option("--out", c.out, "output path prefix")->required();

  auto* image_cmd = app.add_subcommand("image-embed", "embed PGM/PPM images in a grid L2 space");
  image_cmd->add_option("--input", c.inputs, "P2/P3 images of equal size")->required()->delimiter(',');
  image_cmd->add_option("--channels", c.channels, "expected channel count");
  image_cmd->add_option("--out", c.out, "output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kOk) : static_cast<int>(kInputError);
  }

  c.subcommand = app.get_subcommands().front()->get_name();
  if (c.subcommand == "decompose") return cmd_decompose(c, out, err);
  if (c.subcommand == "truncate") return cmd_truncate(c, out, err);
  if (c.subcommand == "compare") return cmd_compare(c, out, err);
  if (c.subcommand == "synth") return cmd_synth(c, out, err);
  return cmd_image_embed(c, out, err);
}

}  // namespace kle::cli
