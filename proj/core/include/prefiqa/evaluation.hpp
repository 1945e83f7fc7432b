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

#ifndef PREFIQA_EVALUATION_HPP_
#define PREFIQA_EVALUATION_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prefiqa/comparator.hpp"
#include "prefiqa/dataset.hpp"
#include "prefiqa/quality.hpp"

namespace prefiqa {

// Sample Pearson correlation. Needs n >= 3 and non-constant inputs
// (kUndefinedCorrelation otherwise). The result depends only on the multiset
// of (x, y) pairs and flips sign exactly when x is negated.
double Pearson(std::span<const double> x, std::span<const double> y);

// Ranks starting at 1; tied values share the average of their ranks.
std::vector<double> AverageRanks(std::span<const double> v);

// Pearson correlation of average ranks, evaluated in exact integer
// arithmetic on the doubled, centered ranks.
double Spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationReport {
  std::string metric;
  std::string dataset;
  int64_t pair_count = 0;
  double pearson = 0.0;
  double spearman = 0.0;
  // Correlations of the negated prediction.
  double pearson_negated = 0.0;
  double spearman_negated = 0.0;
};

// kUndefinedCorrelation naming `metric` for constant predictions or labels.
CorrelationReport Correlate(const std::string& metric, std::span<const double> predictions,
                            std::span<const double> labels, const std::string& dataset = "");

// label - 0.5 per pair; kMissingData for unlabeled records.
std::vector<double> PairwiseLabels(std::span<const PairImages> pairs);

// metric(B, ref) - metric(A, ref) per pair; each (ref, image) is scored once.
std::vector<double> MetricPredictions(Metric metric, std::span<const PairImages> pairs,
                                      const PristineModel* pristine = nullptr, int threads = 0);

// p_sym(A, B) - 0.5 per pair (raw forward when not symmetrized). Both images
// of a pair share the crop drawn from PairSeed(seed, record).
std::vector<double> ComparatorPredictions(const ComparatorModel& model,
                                          std::span<const PairImages> pairs, uint64_t seed,
                                          bool symmetrized = true, int threads = 0);

CorrelationReport EvaluateMetric(Metric metric, std::span<const PairImages> pairs,
                                 const PristineModel* pristine = nullptr,
                                 const std::string& dataset = "", int threads = 0);
CorrelationReport EvaluateComparator(const ComparatorModel& model,
                                     std::span<const PairImages> pairs, uint64_t seed,
                                     const std::string& dataset = "", int threads = 0);

// Single-stimulus scores keyed by image path as written in the manifest.
using MosTable = std::map<std::string, double>;
// CSV "image,mos" with an optional header line.
MosTable LoadMosTable(const std::filesystem::path& path);

// MOS(B) - MOS(A) per pair; kMissingData naming the absent image.
std::vector<double> DmosLabels(std::span<const PairImages> pairs, const MosTable& mos);

CorrelationReport DmosDeltaEval(const std::string& metric, std::span<const double> predictions,
                                std::span<const PairImages> pairs, const MosTable& mos,
                                const std::string& dataset = "");

// Per-pair predictions of every evaluated metric plus the correlations.
struct MetricReport {
  struct Row {
    std::string ref_id;
    int q_a = 0;
    int q_b = 0;
    std::string split;
    double label = 0.0;  // target the predictions were correlated with
  };
  std::string dataset;
  std::string label_mode;  // "pairwise" or "dmos"
  std::vector<std::pair<std::string, std::string>> provenance;
  std::vector<Row> rows;
  std::vector<std::pair<std::string, std::vector<double>>> predictions;
  std::vector<CorrelationReport> correlations;
};

std::string ReportToJson(const MetricReport& report, bool include_pairs = true);
MetricReport ReportFromJson(const std::string& json);

// Metrics as rows, one Spearman/Pearson column pair per report.
std::string RenderMarkdown(std::span<const MetricReport> reports);
std::string RenderText(std::span<const MetricReport> reports);

}  // namespace prefiqa

#endif  // PREFIQA_EVALUATION_HPP_
