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

#include "prefiqa/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "prefiqa/error.hpp"
#include "prefiqa/parallel.hpp"

namespace prefiqa {
namespace {

using Json = nlohmann::ordered_json;

void CheckInputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "correlation: length mismatch");
  }
  if (x.size() < 3) {
    throw Error(ErrorCode::kUndefinedCorrelation, "correlation: need at least 3 samples");
  }
  for (size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::kUndefinedCorrelation, "correlation: non-finite value");
    }
  }
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v[0]; });
  };
  if (constant(x) || constant(y)) {
    throw Error(ErrorCode::kUndefinedCorrelation, "correlation: constant input");
  }
}

double PearsonSorted(const std::vector<std::pair<double, double>>& p) {
  const double n = static_cast<double>(p.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : p) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& [x, y] : p) {
    const double dx = x - mx;
    const double dy = y - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw Error(ErrorCode::kUndefinedCorrelation, "correlation: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json NumberJson(double v) {
  if (std::isfinite(v)) return v;
  return FormatNumber(v);
}

double NumberFromJson(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
  }
  throw Error(ErrorCode::kInvalidArgument, "report: expected a number");
}

}  // namespace

double Pearson(std::span<const double> x, std::span<const double> y) {
  CheckInputs(x, y);
  std::vector<std::pair<double, double>> pos(x.size()), neg(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    pos[i] = {x[i], y[i]};
    neg[i] = {-x[i], y[i]};
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  // Evaluate on whichever of (x, y) and (-x, y) sorts first.
  if (pos < neg) return PearsonSorted(pos);
  if (neg < pos) return -PearsonSorted(neg);
  return 0.0;  // distribution symmetric under x -> -x
}

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<size_t> order(v.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double Spearman(std::span<const double> x, std::span<const double> y) {
  CheckInputs(x, y);
  const auto rx = AverageRanks(x);
  const auto ry = AverageRanks(y);
  // |centered doubled rank| <= n, so the sums stay below n^3.
  if (x.size() > 2'000'000) {
    throw Error(ErrorCode::kInvalidArgument, "spearman: more than 2e6 samples");
  }
  const auto n1 = static_cast<int64_t>(x.size()) + 1;
  int64_t sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const int64_t cx = std::llround(2.0 * rx[i]) - n1;
    const int64_t cy = std::llround(2.0 * ry[i]) - n1;
    sxy += cx * cy;
    sxx += cx * cx;
    syy += cy * cy;
  }
  const long double r = static_cast<long double>(sxy) /
                        std::sqrt(static_cast<long double>(sxx) * static_cast<long double>(syy));
  return std::clamp(static_cast<double>(r), -1.0, 1.0);
}

CorrelationReport Correlate(const std::string& metric, std::span<const double> predictions,
                            std::span<const double> labels, const std::string& dataset) {
  CorrelationReport r;
  r.metric = metric;
  r.dataset = dataset;
  r.pair_count = static_cast<int64_t>(predictions.size());
  try {
    r.pearson = Pearson(predictions, labels);
    r.spearman = Spearman(predictions, labels);
  } catch (const Error& e) {
    throw Error(e.code(), "metric '" + metric + "': " + e.what());
  }
  r.pearson_negated = -r.pearson;
  r.spearman_negated = -r.spearman;
  return r;
}

std::vector<double> PairwiseLabels(std::span<const PairImages> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.record->label) {
      throw Error(ErrorCode::kMissingData, "unlabeled pair (" + p.record->ref_id + ", " +
                                               std::to_string(p.record->q_a) + ", " +
                                               std::to_string(p.record->q_b) + ")");
    }
    out.push_back(*p.record->label - 0.5);
  }
  return out;
}

std::vector<double> MetricPredictions(Metric metric, std::span<const PairImages> pairs,
                                      const PristineModel* pristine, int threads) {
  if (NeedsPristineModel(metric) && pristine == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "metric '" + std::string(MetricName(metric)) + "' needs a pristine model");
  }
  std::map<std::pair<const RasterImage*, const RasterImage*>, size_t> index;
  std::vector<std::pair<const RasterImage*, const RasterImage*>> jobs;
  auto key = [&](const RasterImage* ref, const RasterImage* img) {
    auto [it, inserted] = index.emplace(std::make_pair(ref, img), jobs.size());
    if (inserted) jobs.emplace_back(ref, img);
    return it->second;
  };
  std::vector<std::pair<size_t, size_t>> slots;
  slots.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.a->SameShape(*p.ref) || !p.b->SameShape(*p.ref)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "pair images of '" + p.record->ref_id + "' differ in size");
    }
    slots.emplace_back(key(p.ref.get(), p.a.get()), key(p.ref.get(), p.b.get()));
  }
  std::vector<double> values(jobs.size());
  ParallelFor(jobs.size(), threads, [&](size_t i) {
    values[i] = ComputeMetric(metric, *jobs[i].second, *jobs[i].first, pristine).value;
  });
  std::vector<double> out(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    const double va = values[slots[i].first];
    const double vb = values[slots[i].second];
    out[i] = va == vb ? 0.0 : vb - va;
  }
  return out;
}

std::vector<double> ComparatorPredictions(const ComparatorModel& model,
                                          std::span<const PairImages> pairs, uint64_t seed,
                                          bool symmetrized, int threads) {
  std::vector<double> out(pairs.size());
  ParallelFor(pairs.size(), threads, [&](size_t i) {
    out[i] = ComparePair(model, *pairs[i].a, *pairs[i].b, PairSeed(seed, *pairs[i].record),
                         symmetrized) -
             0.5;
  });
  return out;
}

CorrelationReport EvaluateMetric(Metric metric, std::span<const PairImages> pairs,
                                 const PristineModel* pristine, const std::string& dataset,
                                 int threads) {
  const auto labels = PairwiseLabels(pairs);
  const auto preds = MetricPredictions(metric, pairs, pristine, threads);
  return Correlate(std::string(MetricName(metric)), preds, labels, dataset);
}

CorrelationReport EvaluateComparator(const ComparatorModel& model,
                                     std::span<const PairImages> pairs, uint64_t seed,
                                     const std::string& dataset, int threads) {
  const auto labels = PairwiseLabels(pairs);
  const auto preds = ComparatorPredictions(model, pairs, seed, true, threads);
  return Correlate("comparator", preds, labels, dataset);
}

MosTable LoadMosTable(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  MosTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw Error(ErrorCode::kMalformedManifest,
                  path.string() + ":" + std::to_string(line_no) + ": expected 'image,mos'");
    }
    const std::string image = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    double mos = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), mos);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(mos)) {
      if (line_no == 1 && table.empty()) continue;  // header
      throw Error(ErrorCode::kMalformedManifest,
                  path.string() + ":" + std::to_string(line_no) + ": bad MOS value");
    }
    if (!table.emplace(image, mos).second) {
      throw Error(ErrorCode::kMalformedManifest,
                  path.string() + ":" + std::to_string(line_no) + ": duplicate image '" + image + "'");
    }
  }
  return table;
}

std::vector<double> DmosLabels(std::span<const PairImages> pairs, const MosTable& mos) {
  auto lookup = [&](const std::string& image) {
    const auto it = mos.find(image);
    if (it == mos.end()) throw Error(ErrorCode::kMissingData, "no MOS entry for '" + image + "'");
    return it->second;
  };
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back(lookup(p.record->path_b) - lookup(p.record->path_a));
  }
  return out;
}

CorrelationReport DmosDeltaEval(const std::string& metric, std::span<const double> predictions,
                                std::span<const PairImages> pairs, const MosTable& mos,
                                const std::string& dataset) {
  if (predictions.size() != pairs.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "dmos: one prediction per pair required");
  }
  const auto labels = DmosLabels(pairs, mos);
  return Correlate(metric, predictions, labels, dataset);
}

std::string ReportToJson(const MetricReport& report, bool include_pairs) {
  Json j;
  j["format"] = "prefiqa-report";
  j["version"] = 1;
  j["dataset"] = report.dataset;
  j["label_mode"] = report.label_mode;
  Json prov = Json::object();
  for (const auto& [k, v] : report.provenance) prov[k] = v;
  j["provenance"] = prov;
  j["pair_count"] = report.rows.size();
  Json corr = Json::array();
  for (const auto& c : report.correlations) {
    corr.push_back({{"metric", c.metric},
                    {"pairs", c.pair_count},
                    {"pearson", NumberJson(c.pearson)},
                    {"spearman", NumberJson(c.spearman)},
                    {"pearson_negated", NumberJson(c.pearson_negated)},
                    {"spearman_negated", NumberJson(c.spearman_negated)}});
  }
  j["correlations"] = corr;
  if (include_pairs) {
    Json rows = Json::array();
    for (size_t i = 0; i < report.rows.size(); ++i) {
      const auto& r = report.rows[i];
      Json preds = Json::object();
      for (const auto& [name, values] : report.predictions) preds[name] = NumberJson(values.at(i));
      rows.push_back({{"ref_id", r.ref_id},
                      {"qA", r.q_a},
                      {"qB", r.q_b},
                      {"split", r.split},
                      {"label", NumberJson(r.label)},
                      {"predictions", preds}});
    }
    j["pairs"] = rows;
  }
  return j.dump(2) + "\n";
}

MetricReport ReportFromJson(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("report: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "prefiqa-report") {
    throw Error(ErrorCode::kInvalidArgument, "report: not a prefiqa report");
  }
  MetricReport r;
  try {
    r.dataset = j.value("dataset", "");
    r.label_mode = j.value("label_mode", "");
    if (j.contains("provenance")) {
      for (const auto& [k, v] : j["provenance"].items()) {
        r.provenance.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
    for (const auto& c : j.at("correlations")) {
      CorrelationReport cr;
      cr.metric = c.at("metric").get<std::string>();
      cr.dataset = r.dataset;
      cr.pair_count = c.at("pairs").get<int64_t>();
      cr.pearson = NumberFromJson(c.at("pearson"));
      cr.spearman = NumberFromJson(c.at("spearman"));
      cr.pearson_negated = NumberFromJson(c.at("pearson_negated"));
      cr.spearman_negated = NumberFromJson(c.at("spearman_negated"));
      r.correlations.push_back(cr);
    }
    if (j.contains("pairs")) {
      for (const auto& p : j["pairs"]) {
        MetricReport::Row row;
        row.ref_id = p.at("ref_id").get<std::string>();
        row.q_a = p.at("qA").get<int>();
        row.q_b = p.at("qB").get<int>();
        row.split = p.at("split").get<std::string>();
        row.label = NumberFromJson(p.at("label"));
        const size_t i = r.rows.size();
        for (const auto& [name, v] : p.at("predictions").items()) {
          auto it = std::find_if(r.predictions.begin(), r.predictions.end(),
                                 [&](const auto& e) { return e.first == name; });
          if (it == r.predictions.end()) {
            r.predictions.emplace_back(name, std::vector<double>(i, std::nan("")));
            it = std::prev(r.predictions.end());
          }
          it->second.resize(i);
          it->second.push_back(NumberFromJson(v));
        }
        r.rows.push_back(row);
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("report: ") + e.what());
  }
  return r;
}

namespace {

std::vector<std::string> MetricOrder(std::span<const MetricReport> reports) {
  std::vector<std::string> names;
  for (const auto& r : reports) {
    for (const auto& c : r.correlations) {
      if (std::find(names.begin(), names.end(), c.metric) == names.end()) names.push_back(c.metric);
    }
  }
  return names;
}

const CorrelationReport* Find(const MetricReport& r, const std::string& metric) {
  for (const auto& c : r.correlations) {
    if (c.metric == metric) return &c;
  }
  return nullptr;
}

std::string Fixed(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

std::string Tag(const MetricReport& r, size_t i) {
  return r.dataset.empty() ? "dataset" + std::to_string(i + 1) : r.dataset;
}

}  // namespace

std::string RenderMarkdown(std::span<const MetricReport> reports) {
  std::ostringstream os;
  os << "| Metric |";
  for (size_t i = 0; i < reports.size(); ++i) {
    os << ' ' << Tag(reports[i], i) << " SROCC | " << Tag(reports[i], i) << " PLCC |";
  }
  os << "\n|---|";
  for (size_t i = 0; i < reports.size(); ++i) os << "---:|---:|";
  os << '\n';
  for (const auto& m : MetricOrder(reports)) {
    os << "| " << m << " |";
    for (const auto& r : reports) {
      const auto* c = Find(r, m);
      if (c) {
        os << ' ' << Fixed(c->spearman) << " | " << Fixed(c->pearson) << " |";
      } else {
        os << " - | - |";
      }
    }
    os << '\n';
  }
  os << "\nPairs:";
  for (size_t i = 0; i < reports.size(); ++i) {
    os << (i ? ", " : " ") << Tag(reports[i], i) << " = " << reports[i].rows.size();
  }
  os << ".\n";
  return os.str();
}

std::string RenderText(std::span<const MetricReport> reports) {
  std::ostringstream os;
  for (size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    os << Tag(r, i) << " (" << r.rows.size() << " pairs, " << r.label_mode << " labels)\n";
    os << std::left << std::setw(12) << "metric" << std::right << std::setw(10) << "spearman"
       << std::setw(10) << "pearson" << std::setw(12) << "-spearman" << std::setw(12)
       << "-pearson" << '\n';
    for (const auto& c : r.correlations) {
      os << std::left << std::setw(12) << c.metric << std::right << std::setw(10)
         << Fixed(c.spearman) << std::setw(10) << Fixed(c.pearson) << std::setw(12)
         << Fixed(c.spearman_negated) << std::setw(12) << Fixed(c.pearson_negated) << '\n';
    }
  }
  return os.str();
}

}  // namespace prefiqa
