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

#ifndef PREFIQA_NIQE_HPP_
#define PREFIQA_NIQE_HPP_

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "prefiqa/image.hpp"

namespace prefiqa {

// NIQE-lite: a single-scale variant of the natural-image-quality evaluator.
// Each 96x96 patch of the MSCN image contributes 18 features: the GGD shape
// and variance of the MSCN coefficients and, for the H, V, D1 and D2
// neighbour products, the AGGD shape, mean, left and right variances.
// The score is the Mahalanobis-style distance between the test image's
// patch-feature Gaussian and a pristine Gaussian fit on a reference corpus.

inline constexpr int kNiqePatchSize = 96;
inline constexpr int kNiqeFeatureDim = 18;

using NssFeatures = std::array<double, kNiqeFeatureDim>;

struct PristineModel {
  int dim = kNiqeFeatureDim;
  std::vector<double> mean;        // dim
  std::vector<double> covariance;  // dim x dim, row-major, symmetric PSD
  int patch_count = 0;
};

// Mean-subtracted contrast-normalized coefficients: (x - mu) / (sigma + 1)
// with a 7x7 Gaussian (sigma 7/6) local window and replicated borders.
std::vector<double> ComputeMscn(const PlaneF32& plane);

// Features of every usable 96x96 patch (non-overlapping, from the top-left).
// Patches whose statistics are degenerate (e.g. flat regions) are skipped.
// Throws kImageTooSmall below 96x96 and kDegenerateInput for constant planes
// or when no patch is usable.
std::vector<NssFeatures> ExtractPatchFeatures(const PlaneF32& plane);

// Fits the pristine Gaussian to all patches of all corpus images.
PristineModel FitPristine(std::span<const PlaneF32> corpus);

// Distance of `plane`'s patch Gaussian from the pristine model, >= 0.
double NiqeLite(const PlaneF32& plane, const PristineModel& model);

// Q2StepQA as defined for the baseline table: MS-SSIM times the negative
// inverse of NIQE. kDegenerateInput when niqe == 0.
double TwoStepQa(double ms_ssim, double niqe);
double TwoStepQa(const PlaneF32& ref, const PlaneF32& test,
                 const PristineModel& model);

void SavePristineModel(const PristineModel& model,
                       const std::filesystem::path& path);
PristineModel LoadPristineModel(const std::filesystem::path& path);

// Moment-matching fits, exposed for testing.
struct GgdFit {
  double shape = 0.0;
  double variance = 0.0;
};
struct AggdFit {
  double shape = 0.0;
  double mean = 0.0;
  double left_variance = 0.0;
  double right_variance = 0.0;
};
GgdFit FitGgd(std::span<const double> values);
AggdFit FitAggd(std::span<const double> values);

}  // namespace prefiqa

#endif  // PREFIQA_NIQE_HPP_
