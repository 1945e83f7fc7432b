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

// Command-line front end: compress, metrics, dataset generation and
// labelling, comparator training/inference, evaluation and reports.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "prefiqa/codec.hpp"
#include "prefiqa/comparator.hpp"
#include "prefiqa/dataset.hpp"
#include "prefiqa/error.hpp"
#include "prefiqa/evaluation.hpp"
#include "prefiqa/metrics.hpp"
#include "prefiqa/niqe.hpp"
#include "prefiqa/quality.hpp"
#include "prefiqa/synthetic.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace prefiqa {
namespace {

constexpr const char* kVersion = "0.1.0";

enum class Format { kJson, kText, kMarkdown };

struct GlobalOptions {
  int threads = 0;
  std::string format;
  bool verbose = false;
};

GlobalOptions g_opts;

void Log(const std::string& msg) {
  if (g_opts.verbose) std::cerr << "prefiqa: " << msg << '\n';
}

Format ResolveFormat(Format fallback) {
  if (g_opts.format.empty()) return fallback;
  if (g_opts.format == "json") return Format::kJson;
  if (g_opts.format == "text") return Format::kText;
  if (g_opts.format == "md" || g_opts.format == "markdown") return Format::kMarkdown;
  throw Error(ErrorCode::kInvalidArgument, "unknown --format '" + g_opts.format + "'");
}

// Seeds never come from entropy; an omitted --seed is announced.
uint64_t ResolveSeed(const CLI::Option* opt, uint64_t value) {
  if (opt->count() == 0) std::cerr << "prefiqa: --seed not given, using default 0\n";
  return value;
}

Json Number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::string Digest(const fs::path& path) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(HashString(ReadFile(path))));
  return buf;
}

void Emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    WriteFile(out_path, text);
  }
}

std::string TextLines(const Json& j, const std::string& prefix = "") {
  std::ostringstream os;
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      os << TextLines(v, prefix + k + ".");
    } else {
      os << prefix << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    }
  }
  return os.str();
}

std::string Render(const Json& j, Format fmt) {
  if (fmt == Format::kJson) return j.dump(2) + "\n";
  return TextLines(j);
}

std::optional<PristineModel> MaybePristine(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return LoadPristineModel(path);
}

PristineModel FitOnReferences(const DatasetManifest& manifest, const fs::path& dir) {
  std::vector<std::string> refs;
  for (const auto& r : manifest.records) {
    if (std::find(refs.begin(), refs.end(), r.path_ref) == refs.end()) refs.push_back(r.path_ref);
  }
  std::vector<PlaneF32> planes;
  planes.reserve(refs.size());
  for (const auto& p : refs) planes.push_back(ToGrayscale(LoadImage(dir / p)));
  Log("fitted pristine model on " + std::to_string(planes.size()) + " reference images");
  return FitPristine(planes);
}

// ---------------------------------------------------------------------------

struct CompressArgs {
  std::string in, out;
  int q = 0;
};

int RunCompress(const CompressArgs& a) {
  const RasterImage img = LoadImage(a.in);
  const CompressResult res = CompressWithStats(img, QualityFactor(a.q));
  SaveImage(res.image, a.out);
  Json j;
  j["q"] = a.q;
  j["width"] = img.width();
  j["height"] = img.height();
  j["nonzero_coefficients"] = res.nonzero_coefficients;
  std::cout << Render(j, ResolveFormat(Format::kJson));
  return 0;
}

struct MetricsArgs {
  std::string ref, test, pristine;
};

int RunMetrics(const MetricsArgs& a) {
  const RasterImage ref = LoadImage(a.ref);
  const RasterImage test = LoadImage(a.test);
  if (!ref.SameShape(test)) {
    throw Error(ErrorCode::kDimensionMismatch, "reference and test images differ in size");
  }
  const auto pristine = MaybePristine(a.pristine);
  const PlaneF32 pr = ToGrayscale(ref);
  const PlaneF32 pt = ToGrayscale(test);
  Json j;
  j["mse"] = Mse(pr, pt);
  j["psnr"] = Number(Psnr(pr, pt));
  j["ssim"] = Ssim(pr, pt);
  const bool multiscale = pr.width() >= kMsSsimMinSide && pr.height() >= kMsSsimMinSide;
  j["msssim"] = multiscale ? Json(MsSsim(pr, pt)) : Json(nullptr);
  if (pristine) {
    const double niqe = NiqeLite(pt, *pristine);
    j["niqe"] = niqe;
    j["q2stepqa"] = multiscale ? Json(TwoStepQa(MsSsim(pr, pt), niqe)) : Json(nullptr);
  }
  std::cout << Render(j, ResolveFormat(Format::kJson));
  return 0;
}

struct FitPristineArgs {
  std::vector<std::string> images;
  std::string manifest, out;
};

int RunFitPristine(const FitPristineArgs& a) {
  PristineModel model;
  if (!a.manifest.empty()) {
    const auto m = LoadManifest(a.manifest);
    model = FitOnReferences(m, fs::path(a.manifest).parent_path());
  } else {
    std::vector<PlaneF32> planes;
    for (const auto& p : a.images) planes.push_back(ToGrayscale(LoadImage(p)));
    model = FitPristine(planes);
  }
  SavePristineModel(model, a.out);
  Json j;
  j["patches"] = model.patch_count;
  j["dim"] = model.dim;
  std::cout << Render(j, ResolveFormat(Format::kJson));
  return 0;
}

struct GenDatasetArgs {
  std::string out, ref_dir, manifest_name = "manifest.csv";
  int refs = 100;
  int width = 192, height = 192;
  double test_fraction = 0.04;
  bool no_images = false;
  uint64_t seed = 0;
};

Json StatsJson(const DatasetStats& s) {
  Json j;
  j["reference_images"] = s.reference_images;
  j["compressed_images"] = s.compressed_images;
  j["pairs"] = s.pairs;
  j["ratings"] = s.ratings;
  j["train_refs"] = s.train_refs;
  j["test_refs"] = s.test_refs;
  j["train_pairs"] = s.train_pairs;
  j["test_pairs"] = s.test_pairs;
  return j;
}

int RunGenDataset(const GenDatasetArgs& a) {
  const fs::path dir = a.out;
  fs::create_directories(dir);
  std::vector<std::string> ids;
  std::map<std::string, RasterImage> refs;
  if (!a.ref_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.ref_dir)) {
      const auto ext = e.path().extension().string();
      if (e.is_regular_file() && (ext == ".ppm" || ext == ".pgm")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw Error(ErrorCode::kMissingData, "no .ppm files in '" + a.ref_dir + "'");
    }
    for (const auto& f : files) {
      ids.push_back(f.stem().string());
      if (!a.no_images) {
        RasterImage img = LoadImage(f);
        if (img.channels() != 3) {
          throw Error(ErrorCode::kUnsupportedFormat, f.string() + ": reference must be RGB");
        }
        refs.emplace(ids.back(), std::move(img));
      }
    }
  } else {
    if (a.refs <= 0) throw Error(ErrorCode::kInvalidArgument, "--refs must be positive");
    for (int i = 0; i < a.refs; ++i) ids.push_back(ReferenceId(i));
  }
  DatasetManifest m = GeneratePairs(ids, a.test_fraction, a.seed);
  if (a.ref_dir.empty()) {
    m.SetProvenance("reference_source", "synthetic");
    m.SetProvenance("reference_size", std::to_string(a.width) + "x" + std::to_string(a.height));
    if (!a.no_images) {
      for (size_t i = 0; i < ids.size(); ++i) {
        refs.emplace(ids[i], MakeNaturalImage(a.width, a.height, MixSeed(a.seed, {0x5EED, i})));
      }
    }
  } else {
    m.SetProvenance("reference_source", "directory");
  }
  m.SetProvenance("images", a.no_images ? "none" : "materialized");
  if (!a.no_images) {
    MaterializeImages(m, refs, dir, g_opts.threads);
    Log("wrote images under " + dir.string());
  }
  SaveManifest(m, dir / a.manifest_name);
  Json j;
  j["manifest"] = (dir / a.manifest_name).string();
  j["stats"] = StatsJson(ComputeStats(m));
  std::cout << Render(j, ResolveFormat(Format::kJson));
  return 0;
}

struct SynthLabelsArgs {
  std::string manifest, out, metric = "msssim", pristine;
  std::optional<double> tau;
  int votes = kDefaultVotes;
  uint64_t seed = 0;
};

int RunSynthLabels(const SynthLabelsArgs& a) {
  DatasetManifest m = LoadManifest(a.manifest);
  const fs::path in_dir = fs::absolute(a.manifest).parent_path();
  const fs::path out_dir = fs::absolute(a.out).parent_path();
  RaterOracle oracle;
  oracle.quality = ParseMetric(a.metric);
  oracle.temperature = a.tau;
  oracle.votes = a.votes;
  if (a.tau && *a.tau < 0.0) throw Error(ErrorCode::kInvalidArgument, "--tau must be >= 0");
  std::optional<PristineModel> pristine = MaybePristine(a.pristine);
  if (!pristine && NeedsPristineModel(oracle.quality)) pristine = FitOnReferences(m, in_dir);
  const double tau =
      SynthLabels(m, in_dir, oracle, a.seed, g_opts.threads, pristine ? &*pristine : nullptr);
  if (in_dir.lexically_normal() != out_dir.lexically_normal()) {
    for (auto& r : m.records) {
      for (std::string* p : {&r.path_a, &r.path_b, &r.path_ref}) {
        *p = (in_dir / *p).lexically_normal().lexically_relative(out_dir).generic_string();
      }
    }
  }
  SaveManifest(m, a.out);
  Json j;
  j["manifest"] = a.out;
  j["temperature"] = tau;
  j["votes"] = a.votes;
  j["quality"] = std::string(MetricName(oracle.quality));
  std::cout << Render(j, ResolveFormat(Format::kJson));
  return 0;
}

struct TrainArgs {
  std::string manifest, out, split = "train", loss_log;
  TrainOptions opt;
  ComparatorConfig config;
  uint64_t seed = 0;
};

std::optional<Split> ParseSplit(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  if (s == "all") return std::nullopt;
  throw Error(ErrorCode::kInvalidArgument, "--split must be train, test or all");
}

int RunTrain(TrainArgs a) {
  const DatasetManifest m = LoadManifest(a.manifest);
  const auto images = LoadPairImages(m, fs::path(a.manifest).parent_path(), ParseSplit(a.split));
  const auto pairs = MakeTrainingPairs(images);
  a.config.seed = a.seed;
  ComparatorModel model(a.config);
  a.opt.seed = a.seed;
  a.opt.threads = g_opts.threads;
  a.opt.on_epoch = [](int epoch, double loss) {
    Log("epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(loss));
  };
  Log("training on " + std::to_string(pairs.size()) + " pairs");
  const TrainResult res = Train(model, pairs, a.opt);

  Json prov;
  prov["tool"] = std::string("prefiqa ") + kVersion;
  prov["manifest_digest"] = Digest(a.manifest);
  prov["split"] = a.split;
  prov["pairs"] = pairs.size();
  prov["epochs"] = a.opt.epochs;
  prov["steps_per_epoch"] = a.opt.steps_per_epoch;
  prov["batch_size"] = a.opt.batch_size;
  prov["learning_rate"] = a.opt.learning_rate;
  prov["optimizer"] = "adam(0.9,0.999,1e-8)";
  prov["seed"] = a.seed;
  Json losses = Json::array();
  for (double l : res.epoch_loss) losses.push_back(Number(l));
  prov["epoch_loss"] = losses;
  SaveComparator(model, a.out, prov.dump());

  Json j;
  j["checkpoint"] = a.out;
  j["pairs"] = pairs.size();
  j["epoch_loss"] = losses;
  if (!a.loss_log.empty()) WriteFile(a.loss_log, j.dump(2) + "\n");
  std::cout << Render(j, ResolveFormat(Format::kJson));
  return 0;
}

RasterImage FitToModel(const RasterImage& img, const ComparatorModel& model, uint64_t seed) {
  const int s = model.config().input_size;
  if (img.width() == s && img.height() == s) return img;
  return CropOrPad(img, s, seed);
}

struct CompareArgs {
  std::string model, ref, a, b;
  bool symmetrized = false;
  uint64_t seed = 0;
};

int RunCompare(const CompareArgs& c) {
  const ComparatorModel model = LoadComparator(c.model);
  const RasterImage ref = LoadImage(c.ref);
  const RasterImage a = LoadImage(c.a);
  const RasterImage b = LoadImage(c.b);
  if (!a.SameShape(ref) || !b.SameShape(ref)) {
    throw Error(ErrorCode::kDimensionMismatch, "--a, --b and --ref must have equal sizes");
  }
  const RasterImage ca = FitToModel(a, model, c.seed);
  const RasterImage cb = FitToModel(b, model, c.seed);
  Json j;
  j["p"] = Forward(model, ca, cb);
  j["p_sym"] = ForwardSymmetrized(model, ca, cb);
  j["preferred"] = c.symmetrized ? "p_sym" : "p";
  std::cout << Render(j, ResolveFormat(Format::kJson));
  return 0;
}

struct RdTuneArgs {
  std::string model, in;
  double tol = 0.05;
  int q_hi = 99;
  uint64_t seed = 0;
};

int RunRdTune(const RdTuneArgs& a) {
  const ComparatorModel model = LoadComparator(a.model);
  const RasterImage img = LoadImage(a.in);
  const RdTuneResult r = RdTune(model, img, a.tol, a.q_hi, a.seed);
  Json j;
  j["q"] = r.q;
  j["preference"] = r.preference;
  j["flag"] = r.no_indistinguishable_point ? "no-indistinguishable-point" : "ok";
  j["probes"] = r.probes;
  Json log = Json::array();
  for (const auto& [q, g] : r.probe_log) log.push_back({{"q", q}, {"g", g}});
  j["probe_log"] = log;
  std::cout << Render(j, ResolveFormat(Format::kJson));
  return 0;
}

struct EvalArgs {
  std::string manifest, metrics = "psnr,ssim,msssim", model, pristine, mos, split = "test",
                        dataset, out;
  int limit = 0;
  bool no_pairs = false;
  uint64_t seed = 0;
};

int RunEval(const EvalArgs& a) {
  const DatasetManifest m = LoadManifest(a.manifest);
  const fs::path dir = fs::path(a.manifest).parent_path();
  auto pairs = LoadPairImages(m, dir, ParseSplit(a.split));
  if (a.limit < 0) throw Error(ErrorCode::kInvalidArgument, "--limit must be >= 0");
  if (a.limit > 0 && static_cast<size_t>(a.limit) < pairs.size()) pairs.resize(a.limit);
  if (pairs.empty()) throw Error(ErrorCode::kMissingData, "no pairs to evaluate");

  std::vector<Metric> metrics;
  if (!a.metrics.empty()) metrics = ParseMetricList(a.metrics);
  if (metrics.empty() && a.model.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "nothing to evaluate: give --metrics or --model");
  }
  std::optional<PristineModel> pristine = MaybePristine(a.pristine);
  const bool needs_pristine =
      std::any_of(metrics.begin(), metrics.end(), [](Metric x) { return NeedsPristineModel(x); });
  if (needs_pristine && !pristine) pristine = FitOnReferences(m, dir);

  MetricReport report;
  report.dataset = a.dataset.empty() ? fs::path(a.manifest).stem().string() : a.dataset;
  std::vector<double> labels;
  std::optional<MosTable> mos;
  if (!a.mos.empty()) {
    mos = LoadMosTable(a.mos);
    labels = DmosLabels(pairs, *mos);
    report.label_mode = "dmos";
  } else {
    labels = PairwiseLabels(pairs);
    report.label_mode = "pairwise";
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    const PairRecord& r = *pairs[i].record;
    report.rows.push_back({r.ref_id, r.q_a, r.q_b, std::string(SplitName(r.split)), labels[i]});
  }
  auto add = [&](const std::string& name, std::vector<double> preds) {
    report.correlations.push_back(Correlate(name, preds, labels, report.dataset));
    report.predictions.emplace_back(name, std::move(preds));
  };
  for (Metric x : metrics) {
    Log("scoring " + std::string(MetricName(x)));
    add(std::string(MetricName(x)),
        MetricPredictions(x, pairs, pristine ? &*pristine : nullptr, g_opts.threads));
  }
  if (!a.model.empty()) {
    const ComparatorModel model = LoadComparator(a.model);
    Log("scoring comparator");
    add("comparator", ComparatorPredictions(model, pairs, a.seed, true, g_opts.threads));
  }

  report.provenance.emplace_back("tool", std::string("prefiqa ") + kVersion);
  report.provenance.emplace_back("manifest_digest", Digest(a.manifest));
  if (!a.model.empty()) report.provenance.emplace_back("model_digest", Digest(a.model));
  if (!a.mos.empty()) report.provenance.emplace_back("mos_digest", Digest(a.mos));
  report.provenance.emplace_back("split", a.split);
  report.provenance.emplace_back("limit", std::to_string(a.limit));
  report.provenance.emplace_back("seed", std::to_string(a.seed));
  report.provenance.emplace_back("metrics", a.metrics);

  const Format fmt = ResolveFormat(Format::kJson);
  std::string text;
  if (fmt == Format::kJson) {
    text = ReportToJson(report, !a.no_pairs);
  } else if (fmt == Format::kMarkdown) {
    text = RenderMarkdown(std::span<const MetricReport>(&report, 1));
  } else {
    text = RenderText(std::span<const MetricReport>(&report, 1));
  }
  Emit(text, a.out);
  return 0;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

int RunReport(const ReportArgs& a) {
  std::vector<MetricReport> reports;
  for (const auto& p : a.inputs) reports.push_back(ReportFromJson(ReadFile(p)));
  const Format fmt = ResolveFormat(Format::kMarkdown);
  std::string text;
  if (fmt == Format::kMarkdown) {
    text = RenderMarkdown(reports);
  } else if (fmt == Format::kText) {
    text = RenderText(reports);
  } else {
    Json j = Json::array();
    for (const auto& r : reports) {
      Json e = Json::parse(ReportToJson(r, false));
      j.push_back(e);
    }
    text = j.dump(2) + "\n";
  }
  Emit(text, a.out);
  return 0;
}

void PrintError(const std::string& code, const std::string& message) {
  Json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

int Main(int argc, char** argv) {
  CLI::App app{"Perceptual quality toolkit for lossy image compression", "prefiqa"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.add_option("--threads", g_opts.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--format", g_opts.format, "Output format: json, text or md");
  app.add_flag("-v,--verbose", g_opts.verbose, "Progress messages on stderr");

  CompressArgs compress;
  auto* c = app.add_subcommand("compress", "JPEG-style degradation at a quality factor");
  c->add_option("--in", compress.in, "Input PPM")->required();
  c->add_option("--out", compress.out, "Output PPM")->required();
  c->add_option("--q", compress.q, "Quality factor 1..100")->required();

  MetricsArgs metrics;
  auto* me = app.add_subcommand("metrics", "All metrics of a test image against its reference");
  me->add_option("--ref", metrics.ref, "Reference PPM")->required();
  me->add_option("--test", metrics.test, "Test PPM")->required();
  me->add_option("--pristine", metrics.pristine, "Pristine model (enables niqe, q2stepqa)");

  FitPristineArgs fit;
  auto* fp = app.add_subcommand("fit-pristine", "Fit the NIQE-lite pristine model");
  auto* fp_images = fp->add_option("--images", fit.images, "Pristine PPM files");
  auto* fp_manifest = fp->add_option("--manifest", fit.manifest, "Use the manifest's references");
  fp_images->excludes(fp_manifest);
  fp->add_option("--out", fit.out, "Model JSON")->required();

  GenDatasetArgs gen;
  auto* gd = app.add_subcommand("gen-dataset", "Generate pairs and compressed images");
  gd->add_option("--out", gen.out, "Dataset directory")->required();
  auto* gd_refs = gd->add_option("--refs", gen.refs, "Number of synthetic references")
                      ->capture_default_str();
  auto* gd_dir = gd->add_option("--ref-dir", gen.ref_dir, "Directory of reference PPMs");
  gd_refs->excludes(gd_dir);
  gd->add_option("--width", gen.width, "Synthetic reference width")->capture_default_str();
  gd->add_option("--height", gen.height, "Synthetic reference height")->capture_default_str();
  gd->add_option("--test-fraction", gen.test_fraction, "Share of test references")
      ->capture_default_str();
  gd->add_option("--manifest-name", gen.manifest_name, "Manifest file name")
      ->capture_default_str();
  gd->add_flag("--no-images", gen.no_images, "Write the manifest only");
  auto* gd_seed = gd->add_option("--seed", gen.seed, "Random seed");

  SynthLabelsArgs sl;
  auto* sy = app.add_subcommand("synth-labels", "Label pairs with the simulated rater oracle");
  sy->add_option("--manifest", sl.manifest, "Input manifest")->required();
  sy->add_option("--out", sl.out, "Output manifest")->required();
  sy->add_option("--metric", sl.metric, "Oracle quality metric")->capture_default_str();
  sy->add_option("--tau", sl.tau, "Logistic temperature (default: median |d| / ln 3)");
  sy->add_option("--votes", sl.votes, "Raters per pair")->capture_default_str();
  sy->add_option("--pristine", sl.pristine, "Pristine model for niqe/q2stepqa");
  auto* sy_seed = sy->add_option("--seed", sl.seed, "Random seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the pairwise comparator");
  t->add_option("--manifest", tr.manifest, "Labeled manifest")->required();
  t->add_option("--out", tr.out, "Checkpoint path")->required();
  t->add_option("--split", tr.split, "Records to train on: train, test, all")
      ->capture_default_str();
  t->add_option("--epochs", tr.opt.epochs)->capture_default_str();
  t->add_option("--steps", tr.opt.steps_per_epoch, "Steps per epoch")->capture_default_str();
  t->add_option("--batch", tr.opt.batch_size)->capture_default_str();
  t->add_option("--lr", tr.opt.learning_rate)->capture_default_str();
  t->add_option("--input-size", tr.config.input_size)->capture_default_str();
  t->add_option("--blocks", tr.config.backbone_blocks, "Backbone blocks")->capture_default_str();
  t->add_option("--base-channels", tr.config.backbone_base_channels)->capture_default_str();
  t->add_option("--bottleneck", tr.config.bottleneck_maps)->capture_default_str();
  t->add_option("--hidden", tr.config.comparator_hidden_maps)->capture_default_str();
  t->add_option("--loss-log", tr.loss_log, "Also write the loss history here");
  auto* t_seed = t->add_option("--seed", tr.seed, "Random seed");

  CompareArgs cmp;
  auto* co = app.add_subcommand("compare", "Preference for --b over --a");
  co->add_option("--model", cmp.model)->required();
  co->add_option("--ref", cmp.ref)->required();
  co->add_option("--a", cmp.a)->required();
  co->add_option("--b", cmp.b)->required();
  co->add_flag("--symmetrized", cmp.symmetrized, "Mark p_sym as the preferred output");
  auto* co_seed = co->add_option("--seed", cmp.seed, "Crop seed for oversized inputs");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Correlate metrics and the comparator with labels");
  e->add_option("--manifest", ev.manifest)->required();
  e->add_option("--metrics", ev.metrics, "Comma-separated metrics ('' for none)")
      ->capture_default_str();
  e->add_option("--model", ev.model, "Comparator checkpoint");
  e->add_option("--pristine", ev.pristine, "Pristine model for niqe/q2stepqa");
  e->add_option("--mos", ev.mos, "Per-image MOS table; switches to DMOS labels");
  e->add_option("--split", ev.split, "train, test or all")->capture_default_str();
  e->add_option("--limit", ev.limit, "Use only the first N selected pairs");
  e->add_option("--dataset", ev.dataset, "Dataset tag in the report");
  e->add_option("--out", ev.out, "Write the report here instead of stdout");
  e->add_flag("--no-pairs", ev.no_pairs, "Omit per-pair predictions");
  auto* e_seed = e->add_option("--seed", ev.seed, "Crop seed for the comparator");

  RdTuneArgs rd;
  auto* r = app.add_subcommand("rd-tune", "Lowest Q indistinguishable from the q_hi anchor");
  r->add_option("--model", rd.model)->required();
  r->add_option("--in", rd.in)->required();
  r->add_option("--tol", rd.tol)->capture_default_str();
  r->add_option("--q-hi", rd.q_hi)->capture_default_str();
  auto* r_seed = r->add_option("--seed", rd.seed, "Crop seed");

  ReportArgs rep;
  auto* rp = app.add_subcommand("report", "Render eval reports as a comparison grid");
  rp->add_option("--in", rep.inputs, "Report JSON files")->required()->delimiter(',');
  rp->add_option("--out", rep.out, "Write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << app.help();
    PrintError("usage", ex.what());
    return 2;
  }

  if (*c) return RunCompress(compress);
  if (*me) return RunMetrics(metrics);
  if (*fp) {
    if (fit.images.empty() && fit.manifest.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "fit-pristine needs --images or --manifest");
    }
    return RunFitPristine(fit);
  }
  if (*gd) {
    gen.seed = ResolveSeed(gd_seed, gen.seed);
    return RunGenDataset(gen);
  }
  if (*sy) {
    sl.seed = ResolveSeed(sy_seed, sl.seed);
    return RunSynthLabels(sl);
  }
  if (*t) {
    tr.seed = ResolveSeed(t_seed, tr.seed);
    return RunTrain(tr);
  }
  if (*co) {
    cmp.seed = ResolveSeed(co_seed, cmp.seed);
    return RunCompare(cmp);
  }
  if (*e) {
    ev.seed = ResolveSeed(e_seed, ev.seed);
    return RunEval(ev);
  }
  if (*r) {
    rd.seed = ResolveSeed(r_seed, rd.seed);
    return RunRdTune(rd);
  }
  if (*rp) return RunReport(rep);
  return 2;
}

}  // namespace
}  // namespace prefiqa

int main(int argc, char** argv) {
  try {
    return prefiqa::Main(argc, argv);
  } catch (const prefiqa::Error& e) {
    prefiqa::PrintError(std::string(prefiqa::ErrorCodeName(e.code())), e.what());
  } catch (const std::exception& e) {
    prefiqa::PrintError("internal", e.what());
  }
  return 1;
}
