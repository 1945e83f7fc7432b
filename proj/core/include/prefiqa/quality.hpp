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

#ifndef PREFIQA_QUALITY_HPP_
#define PREFIQA_QUALITY_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefiqa/image.hpp"
#include "prefiqa/niqe.hpp"

namespace prefiqa {

enum class Metric { kMse, kPsnr, kSsim, kMsSsim, kNiqe, kQ2StepQa };

std::string_view MetricName(Metric m);
// Accepts the names produced by MetricName ("psnr", "msssim", "q2stepqa", ...)
// plus "ms_ssim" and "ms-ssim". Throws kInvalidArgument otherwise.
Metric ParseMetric(std::string_view name);
std::vector<Metric> ParseMetricList(std::string_view comma_separated);
bool HigherIsBetter(Metric m);
bool NeedsPristineModel(Metric m);

struct MetricValue {
  std::string name;
  double value = 0.0;
  bool higher_is_better = true;
};

// Scores `test` against `ref` on the luma planes. NIQE ignores `ref`.
// kInvalidArgument when the metric needs a pristine model and none is given.
MetricValue ComputeMetric(Metric m, const RasterImage& test,
                          const RasterImage& ref,
                          const PristineModel* pristine = nullptr);

// metric(img2, ref) - metric(img1, ref). kDimensionMismatch unless all three
// images have the same width and height.
double MetricDelta(Metric m, const RasterImage& img1, const RasterImage& img2,
                   const RasterImage& ref,
                   const PristineModel* pristine = nullptr);

}  // namespace prefiqa

#endif  // PREFIQA_QUALITY_HPP_
