// Copyright 2026 The prefiqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "prefiqa/codec.hpp"
#include "prefiqa/dataset.hpp"
#include "prefiqa/error.hpp"
#include "prefiqa/synthetic.hpp"

namespace prefiqa {
namespace {

std::string ErrorMessage(const std::function<void()>& fn, ErrorCode expect) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), expect) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "no error";
  return "";
}

TEST(GeneratePairsTest, FullScaleCounts) {
  const DatasetManifest m = GeneratePairs(6667, 267.0 / 6667.0, 1);
  const DatasetStats s = ComputeStats(m);
  EXPECT_EQ(s.reference_images, 6667);
  EXPECT_EQ(s.train_refs, 6400);
  EXPECT_EQ(s.test_refs, 267);
  EXPECT_EQ(s.compressed_images, 13868);
  EXPECT_EQ(s.train_pairs, 6400);
  EXPECT_EQ(s.test_pairs, 267 * 6);
  EXPECT_EQ(s.ratings, s.pairs * 32);
}

TEST(GeneratePairsTest, DeskScaleCounts) {
  const DatasetManifest m = GeneratePairs(100, 0.04, 2);
  const DatasetStats s = ComputeStats(m);
  EXPECT_EQ(s.train_refs, 96);
  EXPECT_EQ(s.test_refs, 4);
  EXPECT_EQ(s.compressed_images, 208);
  EXPECT_EQ(s.pairs, 120);
}

TEST(GeneratePairsTest, RecordInvariants) {
  const DatasetManifest m = GeneratePairs(300, 0.1, 3);
  std::set<std::tuple<std::string, int, int>> keys;
  std::map<std::string, std::set<int>> versions;
  for (const auto& r : m.records) {
    EXPECT_NE(r.q_a, r.q_b);
    for (int q : {r.q_a, r.q_b}) {
      EXPECT_GE(q, 10);
      EXPECT_LE(q, 100);
      versions[r.ref_id].insert(q);
    }
    EXPECT_TRUE(keys.emplace(r.ref_id, r.q_a, r.q_b).second);
    EXPECT_FALSE(r.label.has_value());
    EXPECT_EQ(r.path_a, CompressedPath(r.ref_id, r.q_a));
    EXPECT_EQ(r.path_ref, ReferencePath(r.ref_id));
  }
  for (const auto& r : m.records) {
    EXPECT_EQ(versions[r.ref_id].size(), r.split == Split::kTrain ? 2u : 4u);
  }
}

TEST(GeneratePairsTest, DeterministicPerSeed) {
  EXPECT_EQ(ManifestToCsv(GeneratePairs(50, 0.2, 9)), ManifestToCsv(GeneratePairs(50, 0.2, 9)));
  EXPECT_NE(ManifestToCsv(GeneratePairs(50, 0.2, 9)), ManifestToCsv(GeneratePairs(50, 0.2, 10)));
  EXPECT_EQ(GeneratePairs(50, 0.2, 9).Provenance("seed"), "9");
}

TEST(GeneratePairsTest, QualitiesCoverRange) {
  const DatasetManifest m = GeneratePairs(2000, 0.05, 4);
  std::set<int> seen;
  for (const auto& r : m.records) {
    seen.insert(r.q_a);
    seen.insert(r.q_b);
  }
  EXPECT_EQ(seen.size(), 91u);
}

TEST(GeneratePairsTest, Errors) {
  EXPECT_THROW(GeneratePairs(0, 0.1, 0), Error);
  EXPECT_THROW(GeneratePairs(10, 0.0, 0), Error);
  EXPECT_THROW(GeneratePairs(10, 1.0, 0), Error);
  EXPECT_THROW(GeneratePairs(std::vector<std::string>{}, 0.5, 0), Error);
  EXPECT_THROW(GeneratePairs(std::vector<std::string>{"a", "a"}, 0.5, 0), Error);
  EXPECT_THROW(GeneratePairs(std::vector<std::string>{"a,b", "c"}, 0.5, 0), Error);
}

TEST(StatsTest, TruncatedManifestRatings) {
  DatasetManifest m = GeneratePairs(6667, 267.0 / 6667.0, 1);
  m.records.resize(7808);
  EXPECT_EQ(ComputeStats(m).ratings, 249856);
}

TEST(RaterOracleTest, PreferenceProbability) {
  EXPECT_EQ(PreferenceProbability(0.0, 0.3), 0.5);
  EXPECT_EQ(PreferenceProbability(0.0, 0.0), 0.5);
  EXPECT_EQ(PreferenceProbability(1e-9, 0.0), 1.0);
  EXPECT_EQ(PreferenceProbability(-1e-9, 0.0), 0.0);
  EXPECT_NEAR(PreferenceProbability(0.2, 0.2), 0.7310585786300049, 1e-15);
  EXPECT_THROW(PreferenceProbability(0.1, -1.0), Error);
}

TEST(RaterOracleTest, TauZeroLabelsAreAllB) {
  DatasetManifest m = GeneratePairs(20, 0.2, 5);
  std::vector<double> deltas(m.records.size(), 0.01);
  LabelFromDeltas(m, deltas, RaterOracle{.temperature = 0.0}, 5);
  for (const auto& r : m.records) EXPECT_EQ(r.label, 1.0);
}

TEST(RaterOracleTest, MatchesDirectBernoulliDraws) {
  DatasetManifest m = GeneratePairs(10, 0.2, 6);
  const double tau = 0.05;
  std::vector<double> deltas(m.records.size(), tau);
  const uint64_t seed = 1234;
  LabelFromDeltas(m, deltas, RaterOracle{.temperature = tau, .votes = 32}, seed);
  const double p = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(p, 0.7311, 1e-4);
  for (const auto& r : m.records) {
    oracle::SplitMix g{PairSeed(seed, r)};
    int count = 0;
    for (int i = 0; i < 32; ++i) count += g.uniform() < p;
    EXPECT_EQ(*r.label, count / 32.0) << r.ref_id;
    EXPECT_EQ(r.votes, 32);
  }
}

TEST(RaterOracleTest, LabelsOnVoteGrid) {
  DatasetManifest m = GeneratePairs(40, 0.25, 7);
  std::vector<double> deltas;
  for (size_t i = 0; i < m.records.size(); ++i) deltas.push_back(std::sin(i * 1.7) * 0.02);
  LabelFromDeltas(m, deltas, RaterOracle{}, 8);
  for (const auto& r : m.records) {
    const double k = *r.label * 32;
    EXPECT_EQ(k, std::round(k));
  }
  EXPECT_EQ(m.Provenance("oracle.temperature_mode"), "median_ln3");
}

TEST(RaterOracleTest, MeanLabelMonotoneInDelta) {
  double prev = 0.0;
  for (double d : {-0.5, 0.25, 1.0}) {
    double sum = 0.0;
    for (uint64_t seed = 0; seed < 200; ++seed) {
      DatasetManifest m = GeneratePairs(1, 0.5, seed);
      m.records.resize(1);
      const double delta[] = {d};
      LabelFromDeltas(m, delta, RaterOracle{.temperature = 1.0}, seed);
      sum += *m.records[0].label;
    }
    const double mean = sum / 200;
    EXPECT_GT(mean, prev) << d;
    EXPECT_NEAR(mean, 1.0 / (1.0 + std::exp(-d)), 0.03);
    prev = mean;
  }
}

TEST(RaterOracleTest, CalibrateTemperature) {
  const double deltas[] = {-0.3, 0.1, 0.2, std::nan(""), 0.4};
  EXPECT_DOUBLE_EQ(CalibrateTemperature(deltas), 0.25 / std::log(3.0));
  // median |d| maps to a 3:1 preference
  EXPECT_NEAR(PreferenceProbability(0.25, CalibrateTemperature(deltas)), 0.75, 1e-12);
  const double zeros[] = {0.0, 0.0, 1.0};
  EXPECT_THROW(CalibrateTemperature(zeros), Error);
}

TEST(ManifestCsvTest, RoundTrip) {
  DatasetManifest m;
  m.SetProvenance("seed", "42");
  m.SetProvenance("generator", "unit");
  m.records.push_back({"r1", 10, 100, 0.28125, 32, Split::kTrain, "r1/q10.ppm", "r1/q100.ppm",
                       "r1/ref.ppm", ""});
  m.records.push_back({"r2", 55, 12, std::nullopt, 32, Split::kTest, "a.ppm", "b.ppm", "r.ppm", ""});
  m.records.push_back({"r2", 12, 55, 0.1 + 0.2, 7, Split::kTest, "b.ppm", "a.ppm", "r.ppm", ""});
  const std::string csv = ManifestToCsv(m);
  EXPECT_EQ(csv.substr(csv.find("ref_id"), std::string_view(kManifestHeader).size()), kManifestHeader);
  const DatasetManifest back = ManifestFromCsv(csv);
  EXPECT_EQ(back.provenance, m.provenance);
  ASSERT_EQ(back.records.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    const auto& a = m.records[i];
    const auto& b = back.records[i];
    EXPECT_EQ(a.ref_id, b.ref_id);
    EXPECT_EQ(a.q_a, b.q_a);
    EXPECT_EQ(a.q_b, b.q_b);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.votes, b.votes);
    EXPECT_EQ(a.split, b.split);
    EXPECT_EQ(a.path_a, b.path_a);
    EXPECT_EQ(a.path_b, b.path_b);
    EXPECT_EQ(a.path_ref, b.path_ref);
  }
  EXPECT_EQ(ManifestToCsv(back), csv);

  test::TempDir dir("csv");
  SaveManifest(m, dir.path() / "m.csv");
  EXPECT_EQ(ManifestToCsv(LoadManifest(dir.path() / "m.csv")), csv);
}

TEST(ManifestCsvTest, CategoryColumn) {
  DatasetManifest m;
  m.records.push_back({"r1", 20, 30, 0.5, 32, Split::kTrain, "a", "b", "c", "portrait"});
  const std::string csv = ManifestToCsv(m);
  EXPECT_NE(csv.find(std::string(kManifestHeader) + ",category"), std::string::npos);
  EXPECT_EQ(ManifestFromCsv(csv).records[0].category, "portrait");
}

TEST(ManifestCsvTest, ErrorsNameTheRow) {
  const std::string header = std::string(kManifestHeader) + "\n";
  const std::string good = "r1,20,30,0.5,32,train,a,b,c\n";
  auto parse = [&](const std::string& body) {
    return [body, &header] { ManifestFromCsv(header + body, "m.csv"); };
  };
  const std::string msg =
      ErrorMessage(parse(good + "r2,20,30,1.2,32,train,a,b,c\n"), ErrorCode::kMalformedManifest);
  EXPECT_NE(msg.find("m.csv:3:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("1.2"), std::string::npos) << msg;
  EXPECT_NE(ErrorMessage(parse(good + good), ErrorCode::kMalformedManifest).find("duplicate"),
            std::string::npos);
  for (const char* row : {"r,20,30,0.5,32,train,a,b\n", "r,9,30,0.5,32,train,a,b,c\n",
                          "r,20,20,0.5,32,train,a,b,c\n", "r,20,30,x,32,train,a,b,c\n",
                          "r,20,30,0.5,0,train,a,b,c\n", "r,20,30,0.5,32,val,a,b,c\n",
                          "r,20,30,0.5,32,train,,b,c\n", "r,20,30,-0.1,32,train,a,b,c\n"}) {
    ErrorMessage(parse(row), ErrorCode::kMalformedManifest);
  }
  ErrorMessage([] { ManifestFromCsv("a,b,c\n"); }, ErrorCode::kMalformedManifest);
  ErrorMessage([] { ManifestFromCsv(""); }, ErrorCode::kMalformedManifest);
}

class MaterializedDataset : public ::testing::Test {
 protected:
  void SetUp() override {
    manifest_ = GeneratePairs(6, 0.34, 12);
    for (const auto& r : manifest_.records) {
      if (!refs_.count(r.ref_id)) {
        refs_.emplace(r.ref_id, MakeNaturalImage(48, 40, HashString(r.ref_id)));
      }
    }
    MaterializeImages(manifest_, refs_, dir_.path());
  }
  test::TempDir dir_{"ds"};
  DatasetManifest manifest_;
  std::map<std::string, RasterImage> refs_;
};

TEST_F(MaterializedDataset, FilesMatchCodec) {
  for (const auto& r : manifest_.records) {
    const RasterImage& ref = refs_.at(r.ref_id);
    EXPECT_EQ(LoadImage(dir_.path() / r.path_ref), ref);
    EXPECT_EQ(LoadImage(dir_.path() / r.path_a), Compress(ref, QualityFactor(r.q_a)));
    EXPECT_EQ(LoadImage(dir_.path() / r.path_b), Compress(ref, QualityFactor(r.q_b)));
  }
}

TEST_F(MaterializedDataset, RegenerationIsBitIdentical) {
  test::TempDir again("ds2");
  MaterializeImages(GeneratePairs(6, 0.34, 12), refs_, again.path(), 3);
  for (const auto& r : manifest_.records) {
    EXPECT_EQ(test::ReadBytes(dir_.path() / r.path_a), test::ReadBytes(again.path() / r.path_a));
  }
}

TEST_F(MaterializedDataset, SynthLabelsEqualsDeltaPath) {
  DatasetManifest via_files = manifest_;
  const RaterOracle oracle{.quality = Metric::kPsnr, .temperature = std::nullopt};
  const double tau = SynthLabels(via_files, dir_.path(), oracle, 99, 2);

  DatasetManifest via_deltas = manifest_;
  std::vector<double> deltas;
  for (const auto& r : manifest_.records) {
    const RasterImage& ref = refs_.at(r.ref_id);
    deltas.push_back(MetricDelta(Metric::kPsnr, Compress(ref, QualityFactor(r.q_a)),
                                 Compress(ref, QualityFactor(r.q_b)), ref));
  }
  EXPECT_EQ(LabelFromDeltas(via_deltas, deltas, oracle, 99), tau);
  EXPECT_EQ(ManifestToCsv(via_files), ManifestToCsv(via_deltas));
}

TEST_F(MaterializedDataset, LoadPairImagesBySplit) {
  const auto test_pairs = LoadPairImages(manifest_, dir_.path(), Split::kTest);
  const auto all = LoadPairImages(manifest_, dir_.path());
  EXPECT_EQ(all.size(), manifest_.records.size());
  EXPECT_EQ(test_pairs.size(), static_cast<size_t>(ComputeStats(manifest_).test_pairs));
  for (const auto& p : all) EXPECT_EQ(*p.ref, refs_.at(p.record->ref_id));
}

TEST_F(MaterializedDataset, MissingImagesReported) {
  std::filesystem::remove(dir_.path() / manifest_.records[0].path_b);
  DatasetManifest m = manifest_;
  ErrorMessage([&] { SynthLabels(m, dir_.path(), RaterOracle{.quality = Metric::kPsnr, .temperature = std::nullopt}, 1); },
               ErrorCode::kMissingData);
}

}  // namespace
}  // namespace prefiqa
