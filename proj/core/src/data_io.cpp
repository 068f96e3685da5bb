// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/data_io.hpp"

#include "kle/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

namespace kle {

std::string_view to_string(Transform t) noexcept {
  return t == Transform::Log1p ? "log1p" : "identity";
}

Transform parse_transform(std::string_view name) {
  if (name == "identity") return Transform::Identity;
  if (name == "log1p") return Transform::Log1p;
  throw Error(ErrorKind::ParseError, "unknown transform '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Mortality

namespace {

constexpr int kOpenAgeGroup = 110;

struct Cell {
  int year;
  int age;
  std::string region;
  auto operator<=>(const Cell&) const = default;
};

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line) + ": " + why);
}

std::string describe(const Cell& c) {
  return "(" + std::to_string(c.year) + ", " + std::to_string(c.age) + ", \"" + c.region + "\")";
}

}  // namespace

MortalityTable parse_mortality_csv(std::string_view text, const std::optional<std::vector<std::string>>& region_filter,
                                   Transform transform, const std::optional<YearRange>& years) {
  std::map<Cell, double> cells;
  bool header_seen = false;

  detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
    if (line.empty() || line.front() == '#') return;
    if (!header_seen) {
      if (detail::trim(line) != "year,age,region,value") malformed(lineno, "expected header year,age,region,value");
      header_seen = true;
      return;
    }
    const auto fields = detail::split(line, ',');
    if (fields.size() != 4) malformed(lineno, "expected 4 fields, got " + std::to_string(fields.size()));

    const auto year = detail::parse_int(detail::trim(fields[0]));
    if (!year) malformed(lineno, "bad year '" + std::string(fields[0]) + "'");

    std::string_view age_tok = detail::trim(fields[1]);
    std::optional<int> age;
    if (age_tok == "110+") {
      age = kOpenAgeGroup;
    } else {
      age = detail::parse_int(age_tok);
    }
    if (!age || *age < 0 || *age > kOpenAgeGroup) malformed(lineno, "bad age '" + std::string(age_tok) + "'");

    std::string region(detail::trim(fields[2]));
    if (region.empty()) malformed(lineno, "empty region");

    const auto value = detail::parse_double(detail::trim(fields[3]));
    if (!value || !std::isfinite(*value)) malformed(lineno, "bad value '" + std::string(fields[3]) + "'");

    if (years && (*year < years->first || *year > years->last)) return;
    if (region_filter &&
        std::find(region_filter->begin(), region_filter->end(), region) == region_filter->end()) {
      return;
    }
    if (*value < 0.0) {
      throw Error(ErrorKind::NegativeValue, "line " + std::to_string(lineno) + ": negative value");
    }
    Cell key{*year, *age, std::move(region)};
    if (!cells.emplace(key, *value).second) {
      throw Error(ErrorKind::DuplicateCell, "line " + std::to_string(lineno) + ": duplicate cell " + describe(key));
    }
  });

  if (!header_seen) malformed(1, "missing header");
  if (cells.empty()) throw Error(ErrorKind::MissingCell, "no data rows after filtering");

  std::set<int> year_set;
  int max_age = 0;
  std::set<std::string> region_set;
  for (const auto& [cell, v] : cells) {
    year_set.insert(cell.year);
    max_age = std::max(max_age, cell.age);
    region_set.insert(cell.region);
  }

  MortalityTable table;
  table.transform = transform;
  table.years.assign(year_set.begin(), year_set.end());
  for (int a = 0; a <= max_age; ++a) table.ages.push_back(a);
  table.regions = region_filter ? *region_filter : std::vector<std::string>(region_set.begin(), region_set.end());

  const auto n_ages = static_cast<Eigen::Index>(table.ages.size());
  table.values.resize(static_cast<Eigen::Index>(table.years.size()),
                      static_cast<Eigen::Index>(table.regions.size()) * n_ages);

  for (std::size_t y = 0; y < table.years.size(); ++y) {
    for (int age : table.ages) {
      for (std::size_t q = 0; q < table.regions.size(); ++q) {
        const Cell key{table.years[y], age, table.regions[q]};
        auto it = cells.find(key);
        if (it == cells.end()) throw Error(ErrorKind::MissingCell, "missing cell " + describe(key));
        double v = it->second;
        if (transform == Transform::Log1p) v = std::log1p(v);
        table.values(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(q) * n_ages + age) = v;
      }
    }
  }
  return table;
}

Ensemble table_to_ensemble(const MortalityTable& table) {
  const std::size_t q = table.regions.size();
  const std::size_t base = table.ages.size();
  return Ensemble(make_space(q * base, GramSpec::identity(), Blocks{q, base}), table.values);
}

// ---------------------------------------------------------------------------
// Synthetic ensembles

namespace {

// std::normal_distribution is implementation-defined; this is not.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 == 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

SynthEnsemble synth_ensemble(std::uint64_t seed, std::size_t n, std::size_t q, std::size_t base_dim,
                             std::span<const double> spectrum, double cross_coupling) {
  if (n == 0 || q == 0 || base_dim == 0) throw Error(ErrorKind::InvalidEnsemble, "N, Q and base_dim must be positive");
  if (!(cross_coupling >= 0.0 && cross_coupling <= 1.0)) {
    throw Error(ErrorKind::InvalidEnsemble, "cross_coupling must lie in [0, 1]");
  }
  for (std::size_t r = 0; r < spectrum.size(); ++r) {
    if (!(spectrum[r] > 0.0) || !std::isfinite(spectrum[r]) || (r > 0 && spectrum[r] > spectrum[r - 1])) {
      throw Error(ErrorKind::InvalidEnsemble, "spectrum must be positive and nonincreasing");
    }
  }
  const std::size_t dim = q * base_dim;
  const std::size_t len = spectrum.size();
  const std::size_t per_block = (len + q - 1) / q;
  if (len >= n || len > dim || (cross_coupling == 0.0 && per_block > base_dim)) {
    throw Error(ErrorKind::SpectrumTooLong, "spectrum of length " + std::to_string(len) +
                                                " does not fit N = " + std::to_string(n) +
                                                ", Q = " + std::to_string(q) +
                                                ", base_dim = " + std::to_string(base_dim));
  }

  NormalStream rng(seed);
  const auto d = static_cast<Eigen::Index>(dim);
  const auto base = static_cast<Eigen::Index>(base_dim);
  const auto rlen = static_cast<Eigen::Index>(len);

  Eigen::VectorXd mean(d);
  for (Eigen::Index i = 0; i < d; ++i) mean[i] = rng.next();

  Eigen::MatrixXd modes(rlen, d);
  for (Eigen::Index r = 0; r < rlen; ++r) {
    Eigen::VectorXd block_part = Eigen::VectorXd::Zero(d);
    const Eigen::Index off = (r % static_cast<Eigen::Index>(q)) * base;
    for (Eigen::Index i = 0; i < base; ++i) block_part[off + i] = rng.next();
    Eigen::VectorXd dense_part(d);
    for (Eigen::Index i = 0; i < d; ++i) dense_part[i] = rng.next();

    Eigen::VectorXd v = (1.0 - cross_coupling) * block_part + cross_coupling * dense_part;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < r; ++k) v -= modes.row(k).dot(v) * modes.row(k).transpose();
    }
    const double norm = v.norm();
    if (!(norm > 1e-8)) throw Error(ErrorKind::SpectrumTooLong, "could not draw independent modes");
    modes.row(r) = (v / norm).transpose();
  }

  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd xi(rows, rlen);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index r = 0; r < rlen; ++r) xi(i, r) = rng.next();
  }
  // Empirical whitening: zero sample mean, (1/N) xi^T xi = I.
  const double inv_n = 1.0 / static_cast<double>(n);
  xi.rowwise() -= xi.colwise().mean();
  for (Eigen::Index r = 0; r < rlen; ++r) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < r; ++k) xi.col(r) -= inv_n * xi.col(k).dot(xi.col(r)) * xi.col(k);
    }
    const double norm = std::sqrt(inv_n * xi.col(r).squaredNorm());
    if (!(norm > 1e-8)) throw Error(ErrorKind::SpectrumTooLong, "could not draw independent scores");
    xi.col(r) /= norm;
  }

  Eigen::VectorXd sigma(rlen);
  for (Eigen::Index r = 0; r < rlen; ++r) sigma[r] = spectrum[static_cast<std::size_t>(r)];

  Eigen::MatrixXd samples = xi * sigma.asDiagonal() * modes;
  samples.rowwise() += mean.transpose();

  SpaceSpec space = make_space(dim, GramSpec::identity(), Blocks{q, base_dim});
  return SynthEnsemble{Ensemble(std::move(space), std::move(samples)), std::move(xi), std::move(modes),
                       std::move(mean)};
}

// ---------------------------------------------------------------------------
// Images

namespace {

class TokenReader {
 public:
  explicit TokenReader(std::string_view text) : text_(text) {}

  std::optional<std::string_view> next() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ >= text_.size()) return std::nullopt;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '#') ++pos_;
    return text_.substr(start, pos_ - start);
  }

  long long next_int(const char* what) {
    const auto tok = next();
    if (!tok) throw Error(ErrorKind::ParseError, std::string("unexpected end of image data reading ") + what);
    const auto v = detail::parse_int64(*tok);
    if (!v || *v < 0) throw Error(ErrorKind::ParseError, std::string("bad ") + what + " '" + std::string(*tok) + "'");
    return *v;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

struct ParsedHeader {
  ImageHeader dims;
  long long maxval = 0;
};

ParsedHeader read_header(TokenReader& in) {
  const auto magic = in.next();
  ParsedHeader h;
  if (magic && *magic == "P2") {
    h.dims.channels = 1;
  } else if (magic && *magic == "P3") {
    h.dims.channels = 3;
  } else {
    throw Error(ErrorKind::BadMagic, "expected P2 or P3, got '" + std::string(magic.value_or("")) + "'");
  }
  h.dims.cols = static_cast<std::size_t>(in.next_int("width"));
  h.dims.rows = static_cast<std::size_t>(in.next_int("height"));
  h.maxval = in.next_int("maxval");
  if (h.maxval == 0) throw Error(ErrorKind::MaxvalZero, "maxval must be positive");
  return h;
}

}  // namespace

ImageHeader peek_image_header(std::string_view text) {
  TokenReader in(text);
  return read_header(in).dims;
}

HPoint parse_grid_image(std::string_view text, std::size_t m, std::size_t n, std::size_t channels) {
  TokenReader in(text);
  const ParsedHeader h = read_header(in);
  if (h.dims.channels != channels) {
    throw Error(ErrorKind::DimensionMismatch, "image has " + std::to_string(h.dims.channels) +
                                                  " channel(s), requested " + std::to_string(channels));
  }
  if (h.dims.rows != m || h.dims.cols != n) {
    throw Error(ErrorKind::DimensionMismatch, "image is " + std::to_string(h.dims.rows) + "x" +
                                                  std::to_string(h.dims.cols) + ", requested " +
                                                  std::to_string(m) + "x" + std::to_string(n));
  }

  const std::size_t cells = m * n;
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(cells * channels));
  const auto maxval = static_cast<double>(h.maxval);
  // Samples are interleaved per pixel (r g b r g b ...).
  for (std::size_t p = 0; p < cells; ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      const long long raw = in.next_int("sample");
      if (raw > h.maxval) throw Error(ErrorKind::ParseError, "sample exceeds maxval");
      coeffs[static_cast<Eigen::Index>(c * cells + p)] = static_cast<double>(raw) / maxval;
    }
  }
  if (in.next()) throw Error(ErrorKind::ParseError, "trailing data after image samples");
  return HPoint(std::move(coeffs));
}

HPoint load_grid_image(const std::filesystem::path& path, std::size_t m, std::size_t n, std::size_t channels) {
  return parse_grid_image(read_file(path), m, n, channels);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace kle
