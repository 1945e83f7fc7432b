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

#include "prefiqa/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "prefiqa/codec.hpp"
#include "prefiqa/error.hpp"
#include "prefiqa/parallel.hpp"

namespace prefiqa {
namespace {

constexpr uint64_t kSplitStream = 0x5B17;
constexpr uint64_t kQualityStream = 0x9A1E;
constexpr uint64_t kVoteStream = 0x1AB3;

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<int> DrawDistinctQualities(SplitMix64& rng, int count) {
  std::vector<int> qs;
  while (static_cast<int>(qs.size()) < count) {
    const int q = static_cast<int>(rng.UniformInt(kMinPairQuality, kMaxPairQuality));
    if (std::find(qs.begin(), qs.end(), q) == qs.end()) qs.push_back(q);
  }
  return qs;
}

void CheckCsvSafe(const std::string& field, const char* what) {
  if (field.find_first_of(",\r\n") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " contains a comma or newline: '" + field + "'");
  }
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
bool ParseNumber(const std::string& s, T* out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), *out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::string_view SplitName(Split s) { return s == Split::kTrain ? "train" : "test"; }

void DatasetManifest::SetProvenance(const std::string& key, const std::string& value) {
  for (auto& kv : provenance) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  provenance.emplace_back(key, value);
}

std::optional<std::string> DatasetManifest::Provenance(const std::string& key) const {
  for (const auto& kv : provenance) {
    if (kv.first == key) return kv.second;
  }
  return std::nullopt;
}

std::string ReferencePath(const std::string& ref_id) { return ref_id + "/ref.ppm"; }

std::string CompressedPath(const std::string& ref_id, int q) {
  return ref_id + "/q" + std::to_string(q) + ".ppm";
}

std::string ReferenceId(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ref%05d", index);
  return buf;
}

DatasetManifest GeneratePairs(std::span<const std::string> ref_ids, double test_fraction,
                              uint64_t seed) {
  if (ref_ids.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "generate_pairs: no reference images");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "generate_pairs: split fraction must lie in (0, 1)");
  }
  std::set<std::string> seen;
  for (const auto& id : ref_ids) {
    CheckCsvSafe(id, "reference id");
    if (id.empty() || !seen.insert(id).second) {
      throw Error(ErrorCode::kInvalidArgument, "generate_pairs: duplicate or empty id '" + id + "'");
    }
  }

  const size_t n = ref_ids.size();
  const size_t test_count =
      static_cast<size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  SplitMix64 split_rng(MixSeed(seed, {kSplitStream}));
  for (size_t i = n; i > 1; --i) {
    const size_t j = static_cast<size_t>(split_rng.UniformInt(0, static_cast<int64_t>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<bool> is_test(n, false);
  for (size_t i = 0; i < test_count; ++i) is_test[order[i]] = true;

  DatasetManifest manifest;
  for (size_t r = 0; r < n; ++r) {
    const std::string& id = ref_ids[r];
    SplitMix64 rng(MixSeed(seed, {kQualityStream, HashString(id)}));
    const Split split = is_test[r] ? Split::kTest : Split::kTrain;
    const auto qs = DrawDistinctQualities(
        rng, split == Split::kTest ? kTestVersionsPerRef : kTrainVersionsPerRef);
    for (size_t i = 0; i < qs.size(); ++i) {
      for (size_t j = i + 1; j < qs.size(); ++j) {
        PairRecord rec;
        rec.ref_id = id;
        rec.q_a = qs[i];
        rec.q_b = qs[j];
        rec.split = split;
        rec.path_a = CompressedPath(id, qs[i]);
        rec.path_b = CompressedPath(id, qs[j]);
        rec.path_ref = ReferencePath(id);
        manifest.records.push_back(std::move(rec));
      }
    }
  }
  manifest.SetProvenance("generator", "prefiqa-pairs/1");
  manifest.SetProvenance("seed", std::to_string(seed));
  manifest.SetProvenance("test_fraction", FormatDouble(test_fraction));
  manifest.SetProvenance("references", std::to_string(n));
  return manifest;
}

DatasetManifest GeneratePairs(int num_refs, double test_fraction, uint64_t seed) {
  if (num_refs <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "generate_pairs: no reference images");
  }
  std::vector<std::string> ids;
  ids.reserve(num_refs);
  for (int i = 0; i < num_refs; ++i) ids.push_back(ReferenceId(i));
  return GeneratePairs(ids, test_fraction, seed);
}

DatasetStats ComputeStats(const DatasetManifest& manifest) {
  DatasetStats s;
  std::set<std::string> refs, train_refs, test_refs;
  std::set<std::pair<std::string, int>> versions;
  for (const auto& r : manifest.records) {
    refs.insert(r.ref_id);
    (r.split == Split::kTrain ? train_refs : test_refs).insert(r.ref_id);
    versions.emplace(r.ref_id, r.q_a);
    versions.emplace(r.ref_id, r.q_b);
    s.ratings += r.votes;
    ++(r.split == Split::kTrain ? s.train_pairs : s.test_pairs);
  }
  s.reference_images = static_cast<int64_t>(refs.size());
  s.compressed_images = static_cast<int64_t>(versions.size());
  s.pairs = static_cast<int64_t>(manifest.records.size());
  s.train_refs = static_cast<int64_t>(train_refs.size());
  s.test_refs = static_cast<int64_t>(test_refs.size());
  return s;
}

void MaterializeImages(const DatasetManifest& manifest,
                       const std::map<std::string, RasterImage>& references,
                       const std::filesystem::path& dir, int threads) {
  // ref id -> (ref path, {q -> path})
  std::map<std::string, std::pair<std::string, std::map<int, std::string>>> jobs;
  for (const auto& r : manifest.records) {
    auto& job = jobs[r.ref_id];
    job.first = r.path_ref;
    job.second[r.q_a] = r.path_a;
    job.second[r.q_b] = r.path_b;
  }
  std::vector<const decltype(jobs)::value_type*> list;
  for (const auto& kv : jobs) {
    if (references.find(kv.first) == references.end()) {
      throw Error(ErrorCode::kMissingData, "no reference image for '" + kv.first + "'");
    }
    list.push_back(&kv);
  }
  ParallelFor(list.size(), threads, [&](size_t i) {
    const auto& [id, job] = *list[i];
    const RasterImage& ref = references.at(id);
    const auto ref_path = dir / job.first;
    std::filesystem::create_directories(ref_path.parent_path());
    SaveImage(ref, ref_path);
    for (const auto& [q, path] : job.second) {
      const auto out = dir / path;
      std::filesystem::create_directories(out.parent_path());
      SaveImage(Compress(ref, QualityFactor(q)), out);
    }
  });
}

double PreferenceProbability(double delta, double temperature) {
  if (std::isnan(delta) || std::isnan(temperature) || temperature < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "preference: invalid delta or temperature");
  }
  if (delta == 0.0) return 0.5;
  if (temperature == 0.0) return delta > 0.0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-delta / temperature));
}

int SimulateVotes(double probability, int votes, SplitMix64& rng) {
  int count = 0;
  for (int i = 0; i < votes; ++i) {
    if (rng.UniformDouble() < probability) ++count;
  }
  return count;
}

double CalibrateTemperature(std::span<const double> deltas) {
  std::vector<double> mags;
  mags.reserve(deltas.size());
  for (double d : deltas) {
    if (std::isfinite(d)) mags.push_back(std::fabs(d));
  }
  if (mags.empty()) {
    throw Error(ErrorCode::kDegenerateInput, "temperature calibration: no finite deltas");
  }
  std::sort(mags.begin(), mags.end());
  const size_t m = mags.size();
  const double median = m % 2 ? mags[m / 2] : 0.5 * (mags[m / 2 - 1] + mags[m / 2]);
  if (!(median > 0.0)) {
    throw Error(ErrorCode::kDegenerateInput, "temperature calibration: median |delta| is zero");
  }
  return median / std::log(3.0);
}

uint64_t PairSeed(uint64_t seed, const PairRecord& record) {
  return MixSeed(seed, {kVoteStream, HashString(record.ref_id),
                        static_cast<uint64_t>(record.q_a), static_cast<uint64_t>(record.q_b)});
}

double LabelFromDeltas(DatasetManifest& manifest, std::span<const double> deltas,
                       const RaterOracle& oracle, uint64_t seed) {
  if (deltas.size() != manifest.records.size()) {
    throw Error(ErrorCode::kInvalidArgument, "synth_labels: one delta per record required");
  }
  if (oracle.votes <= 0) throw Error(ErrorCode::kInvalidArgument, "synth_labels: votes must be positive");
  const double tau = oracle.temperature ? *oracle.temperature : CalibrateTemperature(deltas);
  for (size_t i = 0; i < deltas.size(); ++i) {
    PairRecord& rec = manifest.records[i];
    SplitMix64 rng(PairSeed(seed, rec));
    const int count = SimulateVotes(PreferenceProbability(deltas[i], tau), oracle.votes, rng);
    rec.votes = oracle.votes;
    rec.label = static_cast<double>(count) / oracle.votes;
  }
  manifest.SetProvenance("oracle.quality", std::string(MetricName(oracle.quality)));
  manifest.SetProvenance("oracle.temperature", FormatDouble(tau));
  manifest.SetProvenance("oracle.temperature_mode", oracle.temperature ? "fixed" : "median_ln3");
  manifest.SetProvenance("oracle.votes", std::to_string(oracle.votes));
  manifest.SetProvenance("oracle.seed", std::to_string(seed));
  return tau;
}

double SynthLabels(DatasetManifest& manifest, const std::filesystem::path& dir,
                   const RaterOracle& oracle, uint64_t seed, int threads,
                   const PristineModel* pristine) {
  if (manifest.records.empty()) throw Error(ErrorCode::kInvalidArgument, "synth_labels: empty manifest");
  if (NeedsPristineModel(oracle.quality) && pristine == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "synth_labels: metric '" + std::string(MetricName(oracle.quality)) +
                    "' needs a pristine model");
  }
  // Every (reference, version) is scored once, then reduced in record order.
  std::map<std::pair<std::string, std::string>, size_t> index;
  std::vector<std::pair<std::string, std::string>> jobs;
  auto key = [&](const std::string& ref, const std::string& img) {
    auto [it, inserted] = index.emplace(std::make_pair(ref, img), jobs.size());
    if (inserted) jobs.emplace_back(ref, img);
    return it->second;
  };
  std::vector<std::pair<size_t, size_t>> rec_jobs;
  for (const auto& r : manifest.records) {
    rec_jobs.emplace_back(key(r.path_ref, r.path_a), key(r.path_ref, r.path_b));
  }
  auto load = [&](const std::string& rel) {
    const auto p = dir / rel;
    if (!std::filesystem::exists(p)) {
      throw Error(ErrorCode::kMissingData, "missing image '" + p.string() + "'");
    }
    return LoadImage(p);
  };
  std::vector<double> values(jobs.size());
  ParallelFor(jobs.size(), threads, [&](size_t i) {
    const RasterImage ref = load(jobs[i].first);
    const RasterImage test = load(jobs[i].second);
    values[i] = ComputeMetric(oracle.quality, test, ref, pristine).value;
  });
  std::vector<double> deltas(manifest.records.size());
  for (size_t i = 0; i < deltas.size(); ++i) {
    const double va = values[rec_jobs[i].first];
    const double vb = values[rec_jobs[i].second];
    deltas[i] = va == vb ? 0.0 : vb - va;
  }
  return LabelFromDeltas(manifest, deltas, oracle, seed);
}

std::string ManifestToCsv(const DatasetManifest& manifest) {
  const bool with_category =
      std::any_of(manifest.records.begin(), manifest.records.end(),
                  [](const PairRecord& r) { return !r.category.empty(); });
  std::ostringstream out;
  for (const auto& [k, v] : manifest.provenance) {
    if (k.find_first_of("=\r\n") != std::string::npos || v.find_first_of("\r\n") != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "provenance entry '" + k + "' is not a single line");
    }
    out << "# " << k << '=' << v << '\n';
  }
  out << kManifestHeader << (with_category ? ",category" : "") << '\n';
  for (const auto& r : manifest.records) {
    CheckCsvSafe(r.ref_id, "ref_id");
    CheckCsvSafe(r.path_a, "pathA");
    CheckCsvSafe(r.path_b, "pathB");
    CheckCsvSafe(r.path_ref, "pathRef");
    CheckCsvSafe(r.category, "category");
    out << r.ref_id << ',' << r.q_a << ',' << r.q_b << ','
        << (r.label ? FormatDouble(*r.label) : std::string()) << ',' << r.votes << ','
        << SplitName(r.split) << ',' << r.path_a << ',' << r.path_b << ',' << r.path_ref;
    if (with_category) out << ',' << r.category;
    out << '\n';
  }
  return out.str();
}

DatasetManifest ManifestFromCsv(const std::string& csv, const std::string& source) {
  DatasetManifest manifest;
  std::istringstream in(csv);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  bool with_category = false;
  std::set<std::tuple<std::string, int, int>> keys;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kMalformedManifest,
                source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line[0] == '#') {
        std::string body = line.substr(1);
        if (!body.empty() && body[0] == ' ') body.erase(0, 1);
        const size_t eq = body.find('=');
        if (eq == std::string::npos) fail("provenance line without '='");
        manifest.SetProvenance(body.substr(0, eq), body.substr(eq + 1));
        continue;
      }
      if (line == kManifestHeader) {
        with_category = false;
      } else if (line == std::string(kManifestHeader) + ",category") {
        with_category = true;
      } else {
        fail("expected header '" + std::string(kManifestHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = SplitFields(line);
    const size_t expected = with_category ? 10 : 9;
    if (f.size() != expected) {
      fail("expected " + std::to_string(expected) + " fields, found " + std::to_string(f.size()));
    }
    PairRecord r;
    r.ref_id = f[0];
    if (r.ref_id.empty()) fail("empty ref_id");
    if (!ParseNumber(f[1], &r.q_a) || !ParseNumber(f[2], &r.q_b)) fail("qA/qB must be integers");
    if (r.q_a < kMinPairQuality || r.q_a > kMaxPairQuality || r.q_b < kMinPairQuality ||
        r.q_b > kMaxPairQuality) {
      fail("qA/qB outside [10, 100]");
    }
    if (r.q_a == r.q_b) fail("qA equals qB");
    if (!f[3].empty()) {
      double label = 0.0;
      if (!ParseNumber(f[3], &label)) fail("label '" + f[3] + "' is not a number");
      if (!(label >= 0.0 && label <= 1.0)) fail("label " + f[3] + " outside [0, 1]");
      r.label = label;
    }
    if (!ParseNumber(f[4], &r.votes) || r.votes <= 0) fail("votes must be a positive integer");
    if (f[5] == "train") {
      r.split = Split::kTrain;
    } else if (f[5] == "test") {
      r.split = Split::kTest;
    } else {
      fail("split must be 'train' or 'test'");
    }
    r.path_a = f[6];
    r.path_b = f[7];
    r.path_ref = f[8];
    if (r.path_a.empty() || r.path_b.empty() || r.path_ref.empty()) fail("empty image path");
    if (with_category) r.category = f[9];
    if (!keys.emplace(r.ref_id, r.q_a, r.q_b).second) {
      fail("duplicate record (" + r.ref_id + ", " + f[1] + ", " + f[2] + ")");
    }
    manifest.records.push_back(std::move(r));
  }
  if (!header_seen) {
    line_no = std::max(line_no, 1);
    fail("missing header");
  }
  return manifest;
}

void SaveManifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const std::string csv = ManifestToCsv(manifest);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << csv;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

DatasetManifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ManifestFromCsv(ss.str(), path.string());
}

std::vector<PairImages> LoadPairImages(const DatasetManifest& manifest,
                                       const std::filesystem::path& dir,
                                       std::optional<Split> split) {
  std::vector<const PairRecord*> selected;
  std::map<std::string, size_t> index;
  std::vector<std::string> paths;
  auto add = [&](const std::string& p) {
    if (index.emplace(p, paths.size()).second) paths.push_back(p);
  };
  for (const auto& r : manifest.records) {
    if (split && r.split != *split) continue;
    selected.push_back(&r);
    add(r.path_a);
    add(r.path_b);
    add(r.path_ref);
  }
  std::vector<std::shared_ptr<const RasterImage>> images(paths.size());
  ParallelFor(paths.size(), 0, [&](size_t i) {
    const auto p = dir / paths[i];
    if (!std::filesystem::exists(p)) {
      throw Error(ErrorCode::kMissingData, "missing image '" + p.string() + "'");
    }
    images[i] = std::make_shared<const RasterImage>(LoadImage(p));
  });
  std::vector<PairImages> out;
  out.reserve(selected.size());
  for (const PairRecord* r : selected) {
    out.push_back({r, images[index.at(r->path_a)], images[index.at(r->path_b)],
                   images[index.at(r->path_ref)]});
  }
  return out;
}

}  // namespace prefiqa
