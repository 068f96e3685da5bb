// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/data_io.hpp"
#include "kle/error.hpp"
#include "kle/kle_engine.hpp"
#include "kle/serialize.hpp"

#include "support/oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace kle {
namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected kle::Error";
  return ErrorKind::Io;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// Full grid, value = year * 1000 + age * 10 + region index.
std::string grid_csv(std::vector<int> years, int max_age, std::vector<std::string> regions) {
  std::ostringstream out;
  out << "year,age,region,value\n";
  for (int y : years) {
    for (int a = 0; a <= max_age; ++a) {
      for (std::size_t q = 0; q < regions.size(); ++q) {
        out << y << ',' << a << ',' << regions[q] << ',' << (y * 1000 + a * 10 + static_cast<int>(q)) << '\n';
      }
    }
  }
  return out.str();
}

TEST(MortalityCsv, MinimalTable) {
  const MortalityTable t = parse_mortality_csv("year,age,region,value\n2000,0,Aomori,10\n2000,1,Aomori,20\n");
  EXPECT_EQ(t.years, (std::vector<int>{2000}));
  EXPECT_EQ(t.ages, (std::vector<int>{0, 1}));
  EXPECT_EQ(t.regions, (std::vector<std::string>{"Aomori"}));
  ASSERT_EQ(t.values.rows(), 1);
  ASSERT_EQ(t.values.cols(), 2);
  EXPECT_EQ(t.values(0, 0), 10.0);
  EXPECT_EQ(t.values(0, 1), 20.0);
}

TEST(MortalityCsv, OpenAgeGroup) {
  std::string text = grid_csv({2000}, 109, {"Akita"});
  text += "2000,110+,Akita,7\n";
  const MortalityTable t = parse_mortality_csv(text);
  ASSERT_EQ(t.ages.size(), 111u);
  EXPECT_EQ(t.ages.back(), 110);
  EXPECT_EQ(t.values(0, 110), 7.0);
}

TEST(MortalityCsv, MissingCellNamesFirstGap) {
  std::string text = grid_csv({1950}, 4, {"Aomori", "Iwate"});
  const std::string gap = "1950,3,Iwate,";
  const auto pos = text.find(gap);
  ASSERT_NE(pos, std::string::npos);
  text.erase(pos, text.find('\n', pos) - pos + 1);
  EXPECT_EQ(kind_of([&] { parse_mortality_csv(text); }), ErrorKind::MissingCell);
  EXPECT_NE(message_of([&] { parse_mortality_csv(text); }).find("(1950, 3, \"Iwate\")"), std::string::npos);
}

TEST(MortalityCsv, RowErrors) {
  const std::string head = "year,age,region,value\n";
  EXPECT_EQ(kind_of([&] { parse_mortality_csv(head + "2000,0,A,1\n2000,0,A,2\n"); }), ErrorKind::DuplicateCell);
  EXPECT_EQ(kind_of([&] { parse_mortality_csv(head + "2000,0,A,-1\n"); }), ErrorKind::NegativeValue);
  EXPECT_EQ(kind_of([&] { parse_mortality_csv(head + "2000,0,A\n"); }), ErrorKind::MalformedRow);
  EXPECT_EQ(kind_of([&] { parse_mortality_csv(head + "2000,x,A,1\n"); }), ErrorKind::MalformedRow);
  EXPECT_EQ(kind_of([&] { parse_mortality_csv(head + "2000,0,A,nan\n"); }), ErrorKind::MalformedRow);
  EXPECT_EQ(kind_of([&] { parse_mortality_csv("year,age,value\n"); }), ErrorKind::MalformedRow);
  EXPECT_NE(message_of([&] { parse_mortality_csv(head + "2000,0,A,1\n2000,1,A,oops\n"); }).find("line 3"),
            std::string::npos);
}

TEST(MortalityCsv, CommentsAndCrLf) {
  const MortalityTable t = parse_mortality_csv("# source: test\r\nyear,age,region,value\r\n# mid\r\n2000,0,A,5\r\n");
  EXPECT_EQ(t.values(0, 0), 5.0);
}

TEST(MortalityCsv, RegionFilterAndOrder) {
  const std::string text = grid_csv({2000, 2001}, 2, {"Miyagi", "Aomori", "Iwate"});
  const MortalityTable all = parse_mortality_csv(text);
  EXPECT_EQ(all.regions, (std::vector<std::string>{"Aomori", "Iwate", "Miyagi"}));
  const MortalityTable two = parse_mortality_csv(text, std::vector<std::string>{"Miyagi", "Iwate"});
  EXPECT_EQ(two.regions, (std::vector<std::string>{"Miyagi", "Iwate"}));
  // column q * ages + a holds region q, age a
  EXPECT_EQ(two.values(1, 3 + 2), 2001 * 1000 + 2 * 10 + 2);
  EXPECT_EQ(kind_of([&] { parse_mortality_csv(text, std::vector<std::string>{"Akita"}); }), ErrorKind::MissingCell);
}

TEST(MortalityCsv, YearRangeAndTransform) {
  const std::string text = grid_csv({1999, 2000, 2001}, 1, {"A"});
  const MortalityTable t = parse_mortality_csv(text, std::nullopt, Transform::Log1p, YearRange{2000, 2001});
  EXPECT_EQ(t.years, (std::vector<int>{2000, 2001}));
  EXPECT_DOUBLE_EQ(t.values(0, 1), std::log1p(2000 * 1000 + 10));
  EXPECT_EQ(t.transform, Transform::Log1p);
  EXPECT_EQ(parse_transform("log1p"), Transform::Log1p);
  EXPECT_EQ(kind_of([] { parse_transform("log"); }), ErrorKind::ParseError);
}

TEST(MortalityCsv, OrderInsensitive) {
  const std::string text = grid_csv({2000, 2001, 2002}, 5, {"Hokkaido", "Aomori"});
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string header, line;
  std::getline(in, header);
  while (std::getline(in, line)) lines.push_back(line);
  const MortalityTable want = parse_mortality_csv(text);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string shuffled = header + "\n";
    for (const auto& l : lines) shuffled += l + "\n";
    EXPECT_EQ(parse_mortality_csv(shuffled), want);
  }
}

TEST(TableToEnsemble, LayoutAndWeights) {
  const MortalityTable t = parse_mortality_csv(grid_csv({2000, 2001}, 3, {"A", "B"}));
  const Ensemble e = table_to_ensemble(t);
  EXPECT_EQ(e.dim(), 8u);
  EXPECT_EQ(*e.space().blocks(), (Blocks{2, 4}));
  EXPECT_EQ(e.space().gram_kind(), GramKind::Identity);
  EXPECT_EQ(e.weights(), Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(e.samples(), t.values);
}

TEST(TableToEnsemble, SingleYearHasRankZero) {
  EXPECT_EQ(decompose(table_to_ensemble(parse_mortality_csv(grid_csv({2000}, 3, {"A"})))).rank(), 0u);
}

TEST(TableToEnsemble, IdenticalYearsCenterToZero) {
  const MortalityTable t = parse_mortality_csv("year,age,region,value\n1,0,A,4\n2,0,A,4\n");
  EXPECT_EQ(center(table_to_ensemble(t)).samples().norm(), 0.0);
}

TEST(TableToEnsemble, ReproducesThreeSampleToy) {
  MortalityTable t = parse_mortality_csv("year,age,region,value\n1,0,A,1\n2,0,A,0\n3,0,A,0\n");
  t.values << 1, -1, 0;  // pre-centered synthetic values
  const KleDecomposition k = decompose(table_to_ensemble(t));
  ASSERT_EQ(k.rank(), 1u);
  EXPECT_NEAR(k.lambdas[0], 2.0 / 3.0, 1e-15);
}

TEST(TableToEnsemble, CsvRoundTripIsExact) {
  testing::Generator gen(12);
  MortalityTable t = parse_mortality_csv(grid_csv({1, 2, 3, 4}, 6, {"A", "B", "C"}));
  for (Eigen::Index i = 0; i < t.values.size(); ++i) t.values.data()[i] = std::exp(gen.uniform(-20, 20)) / 3.0;
  const Ensemble e = table_to_ensemble(t);
  const EnsembleCsv back = read_ensemble_csv(write_ensemble_csv(e), e.space());
  EXPECT_EQ(back.ensemble.samples(), e.samples());
  EXPECT_EQ(back.ensemble.weights(), e.weights());
}

TEST(Synth, DeterministicForEqualArguments) {
  const std::vector<double> spec{2.0, 1.0, 0.5};
  const SynthEnsemble a = synth_ensemble(42, 20, 3, 4, spec, 0.3);
  const SynthEnsemble b = synth_ensemble(42, 20, 3, 4, spec, 0.3);
  EXPECT_EQ(a.ensemble.samples(), b.ensemble.samples());
  EXPECT_EQ(a.xi, b.xi);
  EXPECT_EQ(write_ensemble_csv(a.ensemble), write_ensemble_csv(b.ensemble));
}

TEST(Synth, EveryParameterMatters) {
  const std::vector<double> spec{2.0, 1.0, 0.5};
  const std::vector<double> spec2{2.0, 1.0, 0.4};
  const Eigen::MatrixXd base = synth_ensemble(42, 20, 3, 4, spec, 0.3).ensemble.samples();
  EXPECT_NE(synth_ensemble(43, 20, 3, 4, spec, 0.3).ensemble.samples(), base);
  EXPECT_NE(synth_ensemble(42, 20, 3, 4, spec2, 0.3).ensemble.samples(), base);
  EXPECT_NE(synth_ensemble(42, 20, 3, 4, spec, 0.31).ensemble.samples(), base);
  EXPECT_NE(synth_ensemble(42, 21, 3, 4, spec, 0.3).ensemble.samples().topRows(20), base);
  EXPECT_NE(synth_ensemble(42, 20, 4, 3, spec, 0.3).ensemble.samples(), base);
  EXPECT_NE(synth_ensemble(42, 20, 2, 6, spec, 0.3).ensemble.samples(), base);
}

TEST(Synth, SingleModeSpectrum) {
  const std::vector<double> spec{1.0};
  for (std::size_t q : {1u, 2u, 5u}) {
    const SynthEnsemble s = synth_ensemble(7, 25, q, 3, spec, 0.0);
    const KleDecomposition k = decompose(s.ensemble);
    ASSERT_EQ(k.rank(), 1u);
    const Eigen::VectorXd xi = s.xi.col(0);
    const double mean = s.ensemble.weights().dot(xi);
    const double want = s.ensemble.weights().dot((xi.array() - mean).square().matrix());
    EXPECT_NEAR(k.lambdas[0], want, 1e-12);
  }
}

TEST(Synth, FittedSpectrumIsSigmaSquared) {
  const std::vector<double> spec{3.0, 2.0, 1.0, 0.5};
  const SynthEnsemble s = synth_ensemble(99, 15, 2, 5, spec, 0.7);
  const KleDecomposition k = decompose(s.ensemble);
  ASSERT_EQ(k.rank(), 4u);
  for (Eigen::Index r = 0; r < 4; ++r) EXPECT_NEAR(k.lambdas[r], spec[static_cast<std::size_t>(r)] * spec[static_cast<std::size_t>(r)], 1e-11);
}

TEST(Synth, ZeroCouplingKeepsModesOnOneBlock) {
  const std::vector<double> spec{3.0, 2.0, 1.0, 0.5, 0.2};
  const SynthEnsemble s = synth_ensemble(5, 12, 3, 4, spec, 0.0);
  for (Eigen::Index r = 0; r < s.modes.rows(); ++r) {
    int nonzero_blocks = 0;
    for (Eigen::Index q = 0; q < 3; ++q) nonzero_blocks += s.modes.row(r).segment(q * 4, 4).norm() > 0.0 ? 1 : 0;
    EXPECT_EQ(nonzero_blocks, 1);
  }
}

TEST(Synth, Errors) {
  const std::vector<double> three{1.0, 0.5, 0.2};
  EXPECT_EQ(kind_of([&] { synth_ensemble(1, 3, 2, 4, three, 0.5); }), ErrorKind::SpectrumTooLong);
  EXPECT_EQ(kind_of([&] { synth_ensemble(1, 10, 1, 2, three, 0.5); }), ErrorKind::SpectrumTooLong);
  EXPECT_EQ(kind_of([&] { synth_ensemble(1, 10, 1, 2, three, 0.0); }), ErrorKind::SpectrumTooLong);
  const std::vector<double> rising{0.5, 1.0};
  EXPECT_EQ(kind_of([&] { synth_ensemble(1, 10, 2, 2, rising, 0.5); }), ErrorKind::InvalidEnsemble);
  EXPECT_EQ(kind_of([&] { synth_ensemble(1, 10, 2, 2, three, 1.5); }), ErrorKind::InvalidEnsemble);
}

TEST(GridImage, SingleWhitePixel) {
  const HPoint p = parse_grid_image("P2\n1 1\n255\n255\n", 1, 1, 1);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(norm_sq(grid_l2_space(1, 1, 1), p), 1.0);
}

TEST(GridImage, ConstantGray) {
  const HPoint p = parse_grid_image("P2\n# comment\n2 2\n255\n128 128\n128 128\n", 2, 2, 1);
  EXPECT_NEAR(norm_sq(grid_l2_space(2, 2, 1), p), (128.0 / 255.0) * (128.0 / 255.0), 1e-15);
}

TEST(GridImage, RowMajorAndChannelBlocks) {
  // 2 rows x 3 cols
  const HPoint g = parse_grid_image("P2 3 2 10\n1 2 3\n4 5 6\n", 2, 3, 1);
  EXPECT_EQ(g.coeffs(), (Eigen::VectorXd(6) << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6).finished());
  const HPoint c = parse_grid_image("P3 2 1 4\n1 2 3  4 0 4\n", 1, 2, 3);
  EXPECT_EQ(c.coeffs(), (Eigen::VectorXd(6) << 0.25, 1.0, 0.5, 0.0, 0.75, 1.0).finished());
}

TEST(GridImage, Errors) {
  EXPECT_EQ(kind_of([] { parse_grid_image("P3 1 1 255\n1 2 3\n", 1, 1, 1); }), ErrorKind::DimensionMismatch);
  EXPECT_EQ(kind_of([] { parse_grid_image("P2 2 1 255\n1 2\n", 2, 2, 1); }), ErrorKind::DimensionMismatch);
  EXPECT_EQ(kind_of([] { parse_grid_image("P5 1 1 255\n1\n", 1, 1, 1); }), ErrorKind::BadMagic);
  EXPECT_EQ(kind_of([] { parse_grid_image("P2 1 1 0\n0\n", 1, 1, 1); }), ErrorKind::MaxvalZero);
  EXPECT_EQ(kind_of([] { parse_grid_image("P2 2 1 255\n1\n", 1, 2, 1); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse_grid_image("P2 1 1 255\n256\n", 1, 1, 1); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { load_grid_image("/nonexistent/image.pgm", 1, 1, 1); }), ErrorKind::Io);
}

TEST(GridImage, Header) {
  const ImageHeader h = peek_image_header("P3\n4 2\n255\n");
  EXPECT_EQ(h.rows, 2u);
  EXPECT_EQ(h.cols, 4u);
  EXPECT_EQ(h.channels, 3u);
}

}  // namespace
}  // namespace kle
