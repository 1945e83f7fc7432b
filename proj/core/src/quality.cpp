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

#include "prefiqa/quality.hpp"

#include "prefiqa/error.hpp"
#include "prefiqa/metrics.hpp"

namespace prefiqa {

std::string_view MetricName(Metric m) {
  switch (m) {
    case Metric::kMse: return "mse";
    case Metric::kPsnr: return "psnr";
    case Metric::kSsim: return "ssim";
    case Metric::kMsSsim: return "msssim";
    case Metric::kNiqe: return "niqe";
    case Metric::kQ2StepQa: return "q2stepqa";
  }
  return "unknown";
}

Metric ParseMetric(std::string_view name) {
  if (name == "mse") return Metric::kMse;
  if (name == "psnr") return Metric::kPsnr;
  if (name == "ssim") return Metric::kSsim;
  if (name == "msssim" || name == "ms_ssim" || name == "ms-ssim") return Metric::kMsSsim;
  if (name == "niqe") return Metric::kNiqe;
  if (name == "q2stepqa") return Metric::kQ2StepQa;
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::vector<Metric> ParseMetricList(std::string_view list) {
  std::vector<Metric> out;
  size_t start = 0;
  while (start <= list.size()) {
    const size_t comma = list.find(',', start);
    const auto item = list.substr(start, comma == std::string_view::npos
                                             ? std::string_view::npos
                                             : comma - start);
    if (!item.empty()) out.push_back(ParseMetric(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "empty metric list");
  return out;
}

bool HigherIsBetter(Metric m) {
  return m != Metric::kMse && m != Metric::kNiqe;
}

bool NeedsPristineModel(Metric m) {
  return m == Metric::kNiqe || m == Metric::kQ2StepQa;
}

MetricValue ComputeMetric(Metric m, const RasterImage& test,
                          const RasterImage& ref, const PristineModel* pristine) {
  if (NeedsPristineModel(m) && pristine == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(MetricName(m)) + " requires a pristine model");
  }
  const PlaneF32 t = ToGrayscale(test);
  MetricValue v{std::string(MetricName(m)), 0.0, HigherIsBetter(m)};
  if (m == Metric::kNiqe) {
    v.value = NiqeLite(t, *pristine);
    return v;
  }
  const PlaneF32 r = ToGrayscale(ref);
  switch (m) {
    case Metric::kMse: v.value = Mse(t, r); break;
    case Metric::kPsnr: v.value = Psnr(t, r); break;
    case Metric::kSsim: v.value = Ssim(t, r); break;
    case Metric::kMsSsim: v.value = MsSsim(t, r); break;
    case Metric::kQ2StepQa: v.value = TwoStepQa(r, t, *pristine); break;
    case Metric::kNiqe: break;
  }
  return v;
}

double MetricDelta(Metric m, const RasterImage& img1, const RasterImage& img2,
                   const RasterImage& ref, const PristineModel* pristine) {
  auto same = [](const RasterImage& a, const RasterImage& b) {
    return a.width() == b.width() && a.height() == b.height();
  };
  if (!same(img1, ref) || !same(img2, ref)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "metric delta: images must share the reference's dimensions");
  }
  const double v2 = ComputeMetric(m, img2, ref, pristine).value;
  const double v1 = ComputeMetric(m, img1, ref, pristine).value;
  // Equal values (including two infinite PSNRs) give an exact zero.
  if (v2 == v1) return 0.0;
  return v2 - v1;
}

}  // namespace prefiqa
