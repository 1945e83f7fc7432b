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

#include "prefiqa/niqe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include "prefiqa/error.hpp"
#include "prefiqa/metrics.hpp"

namespace prefiqa {

namespace {

constexpr double kShapeMin = 0.2;
constexpr double kShapeStep = 0.001;
constexpr int kShapeSteps = 9800;  // 0.2 .. 10.0

// r(a) = Gamma(1/a) Gamma(3/a) / Gamma(2/a)^2, decreasing in a.
const std::vector<double>& GammaRatioTable() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kShapeSteps);
    for (int i = 0; i < kShapeSteps; ++i) {
      const double a = kShapeMin + kShapeStep * i;
      t[i] = std::exp(std::lgamma(1.0 / a) + std::lgamma(3.0 / a) -
                      2.0 * std::lgamma(2.0 / a));
    }
    return t;
  }();
  return table;
}

double ShapeForRatio(double ratio) {
  const auto& t = GammaRatioTable();
  int best = 0;
  double best_diff = std::abs(t[0] - ratio);
  for (int i = 1; i < kShapeSteps; ++i) {
    const double d = std::abs(t[i] - ratio);
    if (d < best_diff) {
      best_diff = d;
      best = i;
    }
  }
  return kShapeMin + kShapeStep * best;
}

std::vector<double> GaussianBlurReplicate(const std::vector<double>& in, int w,
                                          int h) {
  constexpr int k = 7;
  constexpr int r = k / 2;
  constexpr double sigma = 7.0 / 6.0;
  std::array<double, k> g{};
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    const double x = i - r;
    g[i] = std::exp(-x * x / (2 * sigma * sigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  std::vector<double> tmp(in.size()), out(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) {
        const int sx = std::clamp(x + i - r, 0, w - 1);
        s += g[i] * in[static_cast<size_t>(y) * w + sx];
      }
      tmp[static_cast<size_t>(y) * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) {
        const int sy = std::clamp(y + i - r, 0, h - 1);
        s += g[i] * tmp[static_cast<size_t>(sy) * w + x];
      }
      out[static_cast<size_t>(y) * w + x] = s;
    }
  }
  return out;
}

bool Finite(const NssFeatures& f) {
  return std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); });
}

// Returns false when the patch statistics are degenerate.
bool PatchFeatures(const std::vector<double>& mscn, int w, int x0, int y0,
                   NssFeatures* out) {
  constexpr int p = kNiqePatchSize;
  std::vector<double> values;
  values.reserve(static_cast<size_t>(p) * p);
  for (int y = y0; y < y0 + p; ++y) {
    for (int x = x0; x < x0 + p; ++x) {
      values.push_back(mscn[static_cast<size_t>(y) * w + x]);
    }
  }
  const GgdFit ggd = FitGgd(values);
  if (!(ggd.variance > 0.0)) return false;
  (*out)[0] = ggd.shape;
  (*out)[1] = ggd.variance;

  // H, V, D1 (down-right), D2 (down-left) neighbours inside the patch.
  constexpr int kShifts[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
  for (int o = 0; o < 4; ++o) {
    const int dx = kShifts[o][0];
    const int dy = kShifts[o][1];
    std::vector<double> prod;
    prod.reserve(values.size());
    for (int y = y0; y < y0 + p - dy; ++y) {
      for (int x = std::max(x0, x0 - dx); x < std::min(x0 + p, x0 + p - dx); ++x) {
        prod.push_back(mscn[static_cast<size_t>(y) * w + x] *
                       mscn[static_cast<size_t>(y + dy) * w + x + dx]);
      }
    }
    const AggdFit a = FitAggd(prod);
    if (!(a.left_variance > 0.0) || !(a.right_variance > 0.0)) return false;
    (*out)[2 + 4 * o] = a.shape;
    (*out)[3 + 4 * o] = a.mean;
    (*out)[4 + 4 * o] = a.left_variance;
    (*out)[5 + 4 * o] = a.right_variance;
  }
  return Finite(*out);
}

struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Gaussian FitGaussian(const std::vector<NssFeatures>& feats) {
  const int d = kNiqeFeatureDim;
  const double n = static_cast<double>(feats.size());
  Gaussian g{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  for (const auto& f : feats) {
    for (int i = 0; i < d; ++i) g.mean[i] += f[i];
  }
  g.mean /= n;
  if (feats.size() < 2) return g;
  for (const auto& f : feats) {
    Eigen::VectorXd c(d);
    for (int i = 0; i < d; ++i) c[i] = f[i] - g.mean[i];
    g.cov += c * c.transpose();
  }
  g.cov /= (n - 1.0);
  return g;
}

}  // namespace

GgdFit FitGgd(std::span<const double> values) {
  double sum_sq = 0.0, sum_abs = 0.0;
  for (double v : values) {
    sum_sq += v * v;
    sum_abs += std::abs(v);
  }
  const double n = static_cast<double>(values.size());
  GgdFit fit;
  fit.variance = n > 0 ? sum_sq / n : 0.0;
  if (sum_abs == 0.0) return fit;
  const double mean_abs = sum_abs / n;
  fit.shape = ShapeForRatio(fit.variance / (mean_abs * mean_abs));
  return fit;
}

AggdFit FitAggd(std::span<const double> values) {
  double pos_sq = 0.0, neg_sq = 0.0, abs_sum = 0.0;
  long pos = 0, neg = 0;
  for (double v : values) {
    if (v > 0) {
      ++pos;
      pos_sq += v * v;
      abs_sum += v;
    } else if (v < 0) {
      ++neg;
      neg_sq += v * v;
      abs_sum -= v;
    }
  }
  AggdFit fit;
  if (pos == 0 || neg == 0) return fit;
  const double n = static_cast<double>(values.size());
  const double left = std::sqrt(neg_sq / neg);
  const double right = std::sqrt(pos_sq / pos);
  const double gamma_hat = left / right;
  const double r_hat = (abs_sum / n) * (abs_sum / n) / ((neg_sq + pos_sq) / n);
  const double r_norm = r_hat * (gamma_hat * gamma_hat * gamma_hat + 1) *
                        (gamma_hat + 1) /
                        ((gamma_hat * gamma_hat + 1) * (gamma_hat * gamma_hat + 1));
  // r_norm estimates Gamma(2/a)^2 / (Gamma(1/a) Gamma(3/a)), the inverse of
  // the tabulated ratio.
  fit.shape = ShapeForRatio(1.0 / r_norm);
  fit.left_variance = left * left;
  fit.right_variance = right * right;
  const double a = fit.shape;
  fit.mean = (right - left) *
             std::exp(std::lgamma(2.0 / a) - std::lgamma(1.0 / a)) *
             std::sqrt(std::exp(std::lgamma(1.0 / a) - std::lgamma(3.0 / a)));
  return fit;
}

std::vector<double> ComputeMscn(const PlaneF32& plane) {
  const int w = plane.width();
  const int h = plane.height();
  const auto src = plane.data();
  std::vector<double> x(src.begin(), src.end());
  std::vector<double> xx(x.size());
  for (size_t i = 0; i < x.size(); ++i) xx[i] = x[i] * x[i];
  const auto mu = GaussianBlurReplicate(x, w, h);
  const auto e_xx = GaussianBlurReplicate(xx, w, h);
  std::vector<double> mscn(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double sigma = std::sqrt(std::max(e_xx[i] - mu[i] * mu[i], 0.0));
    mscn[i] = (x[i] - mu[i]) / (sigma + 1.0);
  }
  return mscn;
}

std::vector<NssFeatures> ExtractPatchFeatures(const PlaneF32& plane) {
  const int w = plane.width();
  const int h = plane.height();
  if (w < kNiqePatchSize || h < kNiqePatchSize) {
    throw Error(ErrorCode::kImageTooSmall,
                "niqe: image must be at least 96x96, got " + std::to_string(w) +
                    "x" + std::to_string(h));
  }
  const auto data = plane.data();
  const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  if (*lo == *hi) {
    throw Error(ErrorCode::kDegenerateInput,
                "niqe: constant image has zero MSCN variance");
  }
  const auto mscn = ComputeMscn(plane);
  std::vector<NssFeatures> feats;
  for (int y = 0; y + kNiqePatchSize <= h; y += kNiqePatchSize) {
    for (int x = 0; x + kNiqePatchSize <= w; x += kNiqePatchSize) {
      NssFeatures f{};
      if (PatchFeatures(mscn, w, x, y, &f)) feats.push_back(f);
    }
  }
  if (feats.empty()) {
    throw Error(ErrorCode::kDegenerateInput,
                "niqe: no patch has non-degenerate statistics");
  }
  return feats;
}

PristineModel FitPristine(std::span<const PlaneF32> corpus) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "fit_pristine: empty corpus");
  }
  std::vector<NssFeatures> all;
  for (const auto& plane : corpus) {
    auto f = ExtractPatchFeatures(plane);
    all.insert(all.end(), f.begin(), f.end());
  }
  const Gaussian g = FitGaussian(all);
  PristineModel m;
  m.dim = kNiqeFeatureDim;
  m.patch_count = static_cast<int>(all.size());
  m.mean.assign(g.mean.data(), g.mean.data() + m.dim);
  m.covariance.resize(static_cast<size_t>(m.dim) * m.dim);
  for (int i = 0; i < m.dim; ++i) {
    for (int j = 0; j < m.dim; ++j) {
      // Symmetrize exactly.
      m.covariance[static_cast<size_t>(i) * m.dim + j] = 0.5 * (g.cov(i, j) + g.cov(j, i));
    }
  }
  return m;
}

double NiqeLite(const PlaneF32& plane, const PristineModel& model) {
  if (model.dim != kNiqeFeatureDim ||
      model.mean.size() != static_cast<size_t>(model.dim) ||
      model.covariance.size() != static_cast<size_t>(model.dim) * model.dim) {
    throw Error(ErrorCode::kInvalidArgument,
                "niqe: pristine model dimension does not match the feature extractor");
  }
  const Gaussian test = FitGaussian(ExtractPatchFeatures(plane));
  const int d = model.dim;
  Eigen::VectorXd mu(d);
  Eigen::MatrixXd cov(d, d);
  for (int i = 0; i < d; ++i) {
    mu[i] = model.mean[i];
    for (int j = 0; j < d; ++j) cov(i, j) = model.covariance[static_cast<size_t>(i) * d + j];
  }
  Eigen::MatrixXd pooled = 0.5 * (cov + test.cov);
  // Ridge proportional to the mean variance keeps the solve well posed when
  // either side has fewer patches than feature dimensions.
  const double ridge = 1e-3 * pooled.trace() / d + 1e-12;
  pooled.diagonal().array() += ridge;
  const Eigen::VectorXd diff = mu - test.mean;
  const Eigen::VectorXd sol = pooled.ldlt().solve(diff);
  return std::sqrt(std::max(diff.dot(sol), 0.0));
}

double TwoStepQa(double ms_ssim, double niqe) {
  if (niqe == 0.0) {
    throw Error(ErrorCode::kDegenerateInput,
                "q2stepqa: niqe is zero, the inverse is undefined");
  }
  return ms_ssim * (-1.0 / niqe);
}

double TwoStepQa(const PlaneF32& ref, const PlaneF32& test,
                 const PristineModel& model) {
  return TwoStepQa(MsSsim(ref, test), NiqeLite(test, model));
}

void SavePristineModel(const PristineModel& model,
                       const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "prefiqa-pristine";
  j["version"] = 1;
  j["dim"] = model.dim;
  j["patch_count"] = model.patch_count;
  j["mean"] = model.mean;
  j["covariance"] = model.covariance;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

PristineModel LoadPristineModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  PristineModel m;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format") != "prefiqa-pristine" || j.at("version") != 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  path.string() + ": not a version-1 pristine model");
    }
    m.dim = j.at("dim").get<int>();
    m.patch_count = j.at("patch_count").get<int>();
    m.mean = j.at("mean").get<std::vector<double>>();
    m.covariance = j.at("covariance").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + ": malformed pristine model: " + e.what());
  }
  if (m.dim != kNiqeFeatureDim || m.mean.size() != static_cast<size_t>(m.dim) ||
      m.covariance.size() != static_cast<size_t>(m.dim) * m.dim) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + ": pristine model dimension mismatch");
  }
  return m;
}

}  // namespace prefiqa
