// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/serialize.hpp"

#include "kle/error.hpp"
#include "text_util.hpp"

#include <string>

namespace kle {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

Eigen::VectorXd vector_from(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::ParseError, std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::ParseError, std::string(what) + " must hold numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index cols, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::ParseError, std::string(what) + " must be an array of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Eigen::VectorXd row = vector_from(j[i], what);
    if (row.size() != cols) throw Error(ErrorKind::ParseError, std::string(what) + " has a ragged row");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

template <typename T>
json list_json(const std::vector<T>& v) {
  json out = json::array();
  for (const T& x : v) out.push_back(x);
  return out;
}

}  // namespace

std::string format_double(double x) { return detail::format_double(x); }

// ---------------------------------------------------------------------------
// SpaceSpec

json space_to_json(const SpaceSpec& space) {
  json gram;
  switch (space.gram_kind()) {
    case GramKind::Identity:
      gram = {{"kind", "identity"}, {"values", json::array()}};
      break;
    case GramKind::Diagonal:
      gram = {{"kind", "diagonal"}, {"values", vector_json(space.gram_weights())}};
      break;
    case GramKind::Dense: {
      json values = json::array();
      const Eigen::MatrixXd& g = space.gram_matrix();
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index k = 0; k < g.cols(); ++k) values.push_back(g(i, k));
      }
      gram = {{"kind", "dense"}, {"values", std::move(values)}};
      break;
    }
  }
  json blocks = nullptr;
  if (space.blocks()) blocks = {{"q", space.blocks()->q}, {"base_dim", space.blocks()->base_dim}};
  return {{"dim", space.dim()}, {"gram", std::move(gram)}, {"blocks", std::move(blocks)}};
}

SpaceSpec space_from_json(const json& j) {
  try {
    const auto dim = j.at("dim").get<std::size_t>();
    const json& gram = j.at("gram");
    const auto kind = gram.at("kind").get<std::string>();
    const json values = gram.contains("values") ? gram.at("values") : json::array();

    std::optional<Blocks> blocks;
    if (j.contains("blocks") && !j.at("blocks").is_null()) {
      blocks = Blocks{j.at("blocks").at("q").get<std::size_t>(), j.at("blocks").at("base_dim").get<std::size_t>()};
    }

    if (kind == "identity") return make_space(dim, GramSpec::identity(), blocks);
    if (kind == "diagonal") return make_space(dim, GramSpec::diagonal(vector_from(values, "gram.values")), blocks);
    if (kind == "dense") {
      const Eigen::VectorXd flat = vector_from(values, "gram.values");
      const auto d = static_cast<Eigen::Index>(dim);
      if (flat.size() != d * d) throw Error(ErrorKind::ParseError, "dense gram.values must have dim*dim entries");
      Eigen::MatrixXd g(d, d);
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) g(i, k) = flat[i * d + k];
      }
      return make_space(dim, GramSpec::dense(std::move(g)), blocks);
    }
    throw Error(ErrorKind::ParseError, "unknown gram kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("space JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Ensemble CSV

std::string write_ensemble_csv(const Ensemble& ens, std::span<const std::string> sample_ids) {
  std::string out = "sample_id,w";
  for (std::size_t c = 0; c < ens.dim(); ++c) out += ",c" + std::to_string(c);
  out += '\n';
  const Eigen::MatrixXd& s = ens.samples();
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out += idx < sample_ids.size() ? sample_ids[idx] : std::to_string(idx);
    out += ',';
    out += detail::format_double(ens.weights()[i]);
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      out += ',';
      out += detail::format_double(s(i, c));
    }
    out += '\n';
  }
  return out;
}

EnsembleCsv read_ensemble_csv(std::string_view text, const SpaceSpec& space) {
  const std::size_t d = space.dim();
  std::vector<std::string> ids;
  std::vector<double> weights;
  std::vector<double> values;
  bool header_seen = false;

  detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
    if (line.empty() || line.front() == '#') return;
    const auto fields = detail::split(line, ',');
    if (!header_seen) {
      if (fields.size() != d + 2 || detail::trim(fields[0]) != "sample_id" || detail::trim(fields[1]) != "w") {
        throw Error(ErrorKind::MalformedRow, "line " + std::to_string(lineno) + ": expected header sample_id,w,c0..c" +
                                                 std::to_string(d - 1));
      }
      for (std::size_t c = 0; c < d; ++c) {
        if (detail::trim(fields[c + 2]) != "c" + std::to_string(c)) {
          throw Error(ErrorKind::MalformedRow, "line " + std::to_string(lineno) + ": bad column name '" +
                                                   std::string(fields[c + 2]) + "'");
        }
      }
      header_seen = true;
      return;
    }
    if (fields.size() != d + 2) {
      throw Error(ErrorKind::MalformedRow, "line " + std::to_string(lineno) + ": expected " + std::to_string(d + 2) +
                                               " fields, got " + std::to_string(fields.size()));
    }
    ids.emplace_back(detail::trim(fields[0]));
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto v = detail::parse_double(detail::trim(fields[k]));
      if (!v) {
        throw Error(ErrorKind::MalformedRow, "line " + std::to_string(lineno) + ": bad number '" +
                                                 std::string(fields[k]) + "'");
      }
      (k == 1 ? weights : values).push_back(*v);
    }
  });
  if (!header_seen) throw Error(ErrorKind::MalformedRow, "line 1: missing header");

  const auto n = static_cast<Eigen::Index>(weights.size());
  Eigen::MatrixXd samples(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < samples.cols(); ++c) samples(i, c) = values[static_cast<std::size_t>(i * samples.cols() + c)];
  }
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), n);
  return EnsembleCsv{Ensemble(space, std::move(samples), std::move(w)), std::move(ids)};
}

// ---------------------------------------------------------------------------
// KleDecomposition

json kle_to_json(const KleDecomposition& kle) {
  return {{"mean", vector_json(kle.mean.coeffs())},
          {"lambdas", vector_json(kle.lambdas)},
          {"phis", matrix_json(kle.phis)},
          {"scores", matrix_json(kle.scores)},
          {"rank_tol", kle.rank_tol},
          {"weights", vector_json(kle.weights)},
          {"space", space_to_json(kle.space)}};
}

KleDecomposition kle_from_json(const json& j) {
  try {
    SpaceSpec space = space_from_json(j.at("space"));
    const auto d = static_cast<Eigen::Index>(space.dim());
    Eigen::VectorXd lambdas = vector_from(j.at("lambdas"), "lambdas");
    const Eigen::Index r = lambdas.size();
    KleDecomposition kle{space,
                         HPoint(vector_from(j.at("mean"), "mean")),
                         vector_from(j.at("weights"), "weights"),
                         std::move(lambdas),
                         matrix_from(j.at("phis"), d, "phis"),
                         matrix_from(j.at("scores"), r, "scores"),
                         j.at("rank_tol").get<double>()};
    if (kle.mean.size() != space.dim() || kle.phis.rows() != r || kle.scores.rows() != kle.weights.size()) {
      throw Error(ErrorKind::ParseError, "decomposition JSON has inconsistent shapes");
    }
    return kle;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("decomposition JSON: ") + e.what());
  }
}

std::string spectrum_csv(const KleDecomposition& kle) {
  std::string out = "r,lambda,cumulative_fraction\n";
  const double total = kle.lambdas.sum();
  double running = 0.0;
  for (Eigen::Index r = 0; r < kle.lambdas.size(); ++r) {
    running += kle.lambdas[r];
    // the last row is exactly 1 by definition
    const double frac = (r + 1 == kle.lambdas.size()) ? 1.0 : running / total;
    out += std::to_string(r + 1) + ',' + detail::format_double(kle.lambdas[r]) + ',' + detail::format_double(frac) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// TruncationReport

std::string report_csv(const TruncationReport& report) {
  std::string out = "r0,total_terms,componentwise_rel_err,vectorfield_rel_err\n";
  for (std::size_t k = 0; k < report.rows(); ++k) {
    out += std::to_string(report.r0_values[k]) + ',' + std::to_string(report.total_terms[k]) + ',' +
           detail::format_double(report.componentwise_rel_err[k]) + ',' +
           detail::format_double(report.vectorfield_rel_err[k]) + '\n';
  }
  return out;
}

json report_to_json(const TruncationReport& report) {
  json rows = json::array();
  for (std::size_t k = 0; k < report.rows(); ++k) {
    json row = {{"r0", report.r0_values[k]},
                {"total_terms", report.total_terms[k]},
                {"componentwise_terms", report.componentwise_terms[k]},
                {"vectorfield_terms", report.vectorfield_terms[k]},
                {"componentwise_rel_err", report.componentwise_rel_err[k]},
                {"vectorfield_rel_err", report.vectorfield_rel_err[k]},
                {"componentwise_rel_err_centered", report.componentwise_rel_err_centered[k]},
                {"vectorfield_rel_err_centered", report.vectorfield_rel_err_centered[k]}};
    if (report.componentwise_terms[k] < report.total_terms[k] || report.vectorfield_terms[k] < report.total_terms[k]) {
      row["note"] = "realized dimension below R0*Q: some components (or the full space) have fewer modes than requested";
    }
    rows.push_back(std::move(row));
  }
  return {{"q", report.q},
          {"full_rank", report.full_rank},
          {"component_ranks", list_json(report.component_ranks)},
          {"norm_sq", report.norm_sq},
          {"centered_norm_sq", report.centered_norm_sq},
          {"quotient", "rel_err = ||v - trunc||^2 / ||v||^2 (uncentered); *_centered divide by ||v - E(v)||^2"},
          {"rows", std::move(rows)}};
}

}  // namespace kle
