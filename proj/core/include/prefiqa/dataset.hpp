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

#ifndef PREFIQA_DATASET_HPP_
#define PREFIQA_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prefiqa/image.hpp"
#include "prefiqa/quality.hpp"
#include "prefiqa/rng.hpp"

namespace prefiqa {

enum class Split { kTrain, kTest };
std::string_view SplitName(Split s);

inline constexpr int kMinPairQuality = 10;
inline constexpr int kMaxPairQuality = 100;
inline constexpr int kDefaultVotes = 32;
inline constexpr int kTrainVersionsPerRef = 2;  // -> 1 pair
inline constexpr int kTestVersionsPerRef = 4;   // -> all 6 unordered pairs

// One forced-choice comparison: two compressed versions of one reference.
struct PairRecord {
  std::string ref_id;
  int q_a = 0;
  int q_b = 0;
  std::optional<double> label;  // share of votes for B, in [0, 1]
  int votes = kDefaultVotes;
  Split split = Split::kTrain;
  // Relative to the manifest's directory.
  std::string path_a;
  std::string path_b;
  std::string path_ref;
  std::string category;  // optional semantic tag, may be empty
};

struct DatasetManifest {
  std::vector<PairRecord> records;
  // Ordered key/value provenance (seed, generator, oracle settings, ...).
  std::vector<std::pair<std::string, std::string>> provenance;

  void SetProvenance(const std::string& key, const std::string& value);
  std::optional<std::string> Provenance(const std::string& key) const;
};

// Layout of materialised images inside a dataset directory.
std::string ReferencePath(const std::string& ref_id);                // <id>/ref.ppm
std::string CompressedPath(const std::string& ref_id, int q);        // <id>/q<Q>.ppm
std::string ReferenceId(int index);                                  // ref00042

// Assigns round(test_fraction * N) references (a seeded permutation) to the
// test split. Train references get 2 distinct Q values forming one pair,
// test references 4 distinct values forming all 6 pairs. Q values are
// uniform on [10, 100], redrawn on collision within a reference, from a
// per-reference stream so the result does not depend on processing order.
// kInvalidArgument for an empty list or a fraction outside (0, 1).
DatasetManifest GeneratePairs(std::span<const std::string> ref_ids, double test_fraction,
                              uint64_t seed);
DatasetManifest GeneratePairs(int num_refs, double test_fraction, uint64_t seed);

struct DatasetStats {
  int64_t reference_images = 0;
  int64_t compressed_images = 0;  // distinct (ref, Q)
  int64_t pairs = 0;
  int64_t ratings = 0;            // sum of votes
  int64_t train_refs = 0;
  int64_t test_refs = 0;
  int64_t train_pairs = 0;
  int64_t test_pairs = 0;
};
DatasetStats ComputeStats(const DatasetManifest& manifest);

// Writes every reference and compressed version named by the manifest
// under `dir`. `references` maps ref_id to the pristine image.
void MaterializeImages(const DatasetManifest& manifest,
                       const std::map<std::string, RasterImage>& references,
                       const std::filesystem::path& dir, int threads = 0);

// Simulated forced-choice raters standing in for human labels: each rater
// independently prefers B with probability sigmoid(d / tau), where
// d = quality(B, ref) - quality(A, ref).
struct RaterOracle {
  Metric quality = Metric::kMsSsim;
  std::optional<double> temperature;  // calibrated from the data when unset
  int votes = kDefaultVotes;
};

// sigmoid(d / tau); the tau -> 0 limit gives a step with 0.5 at d == 0.
double PreferenceProbability(double delta, double temperature);

// Number of `votes` raters choosing B, one UniformDouble() draw per rater
// (a rater prefers B when the draw is below `probability`).
int SimulateVotes(double probability, int votes, SplitMix64& rng);

// median(|d|) / ln 3: a pair at the median quality gap gets a 3:1 split
// while near-identical versions (e.g. adjacent Q) stay close to 0.5.
double CalibrateTemperature(std::span<const double> deltas);

// Per-pair stream seed derived from the pair's key, not its position.
uint64_t PairSeed(uint64_t seed, const PairRecord& record);

// Labels records from precomputed quality deltas (one per record).
// Returns the temperature used.
double LabelFromDeltas(DatasetManifest& manifest, std::span<const double> deltas,
                       const RaterOracle& oracle, uint64_t seed);

// Computes quality deltas from the images under `dir`, then labels.
// kMissingData if an image is absent. Returns the temperature used.
double SynthLabels(DatasetManifest& manifest, const std::filesystem::path& dir,
                   const RaterOracle& oracle, uint64_t seed, int threads = 0,
                   const PristineModel* pristine = nullptr);

// CSV with the fixed header
//   ref_id,qA,qB,label,votes,split,pathA,pathB,pathRef[,category]
// preceded by "# key=value" provenance lines. Unlabeled records leave the
// label field empty.
inline constexpr const char* kManifestHeader =
    "ref_id,qA,qB,label,votes,split,pathA,pathB,pathRef";

void SaveManifest(const DatasetManifest& manifest, const std::filesystem::path& path);
// kMalformedManifest naming the offending line for bad rows, duplicate
// (ref_id, qA, qB) keys or labels outside [0, 1].
DatasetManifest LoadManifest(const std::filesystem::path& path);
std::string ManifestToCsv(const DatasetManifest& manifest);
DatasetManifest ManifestFromCsv(const std::string& csv, const std::string& source = "manifest");

// Images of one record, shared between records that use the same file.
struct PairImages {
  const PairRecord* record = nullptr;
  std::shared_ptr<const RasterImage> a;
  std::shared_ptr<const RasterImage> b;
  std::shared_ptr<const RasterImage> ref;
};

// Loads the images of the selected records (all when split is unset).
// Records must outlive the result. kMissingData for absent files.
std::vector<PairImages> LoadPairImages(const DatasetManifest& manifest,
                                       const std::filesystem::path& dir,
                                       std::optional<Split> split = std::nullopt);

}  // namespace prefiqa

#endif  // PREFIQA_DATASET_HPP_
