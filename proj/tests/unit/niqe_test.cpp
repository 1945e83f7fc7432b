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
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "prefiqa/codec.hpp"
#include "prefiqa/error.hpp"
#include "prefiqa/niqe.hpp"
#include "prefiqa/rng.hpp"
#include "prefiqa/synthetic.hpp"

namespace prefiqa {
namespace {

std::vector<PlaneF32> Planes(const std::vector<RasterImage>& images, int q = 0) {
  std::vector<PlaneF32> out;
  for (const auto& img : images) {
    out.push_back(ToGrayscale(q > 0 ? Compress(img, QualityFactor(q)) : img));
  }
  return out;
}

TEST(NiqeTest, ConstantImageIsDegenerate) {
  try {
    ExtractPatchFeatures(test::ConstantPlane(128, 128, 90.0f));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateInput);
  }
}

TEST(NiqeTest, TooSmall) {
  try {
    ExtractPatchFeatures(test::RandomPlane(95, 200, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kImageTooSmall);
  }
}

TEST(NiqeTest, FeaturesPerPatch) {
  const auto feats = ExtractPatchFeatures(ToGrayscale(MakeNaturalImage(200, 100, 3)));
  EXPECT_EQ(feats.size(), 2u);
  for (const auto& f : feats) {
    for (double v : f) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(NiqeTest, PristineCorpusScoresBetterThanQ10) {
  const auto corpus = MakeNaturalCorpus(6, 192, 192, 17);
  const auto pristine = Planes(corpus);
  const PristineModel model = FitPristine(pristine);
  double clean = 0.0, degraded = 0.0;
  for (const auto& p : pristine) clean += NiqeLite(p, model);
  for (const auto& p : Planes(corpus, 10)) degraded += NiqeLite(p, model);
  EXPECT_LT(clean, degraded);
}

TEST(NiqeTest, FitOnOneImage) {
  const RasterImage img = MakeNaturalImage(192, 192, 23);
  const PlaneF32 plane = ToGrayscale(img);
  const PristineModel model = FitPristine(std::vector<PlaneF32>{plane});
  const double self = NiqeLite(plane, model);
  EXPECT_GE(self, 0.0);
  EXPECT_LE(self, NiqeLite(ToGrayscale(Compress(img, QualityFactor(10))), model));
}

TEST(NiqeTest, ModelIsSymmetric) {
  const PristineModel m = FitPristine(Planes(MakeNaturalCorpus(2, 192, 192, 5)));
  ASSERT_EQ(m.covariance.size(), 18u * 18u);
  for (int i = 0; i < 18; ++i) {
    EXPECT_GE(m.covariance[i * 18 + i], 0.0);
    for (int j = 0; j < 18; ++j) EXPECT_EQ(m.covariance[i * 18 + j], m.covariance[j * 18 + i]);
  }
  EXPECT_EQ(m.patch_count, 8);
}

TEST(NiqeTest, SaveLoadRoundTrip) {
  test::TempDir dir("niqe");
  const PristineModel m = FitPristine(Planes(MakeNaturalCorpus(2, 96, 96, 6)));
  SavePristineModel(m, dir.path() / "p.json");
  const PristineModel back = LoadPristineModel(dir.path() / "p.json");
  EXPECT_EQ(back.mean, m.mean);
  EXPECT_EQ(back.covariance, m.covariance);
  EXPECT_EQ(back.patch_count, m.patch_count);
  std::ofstream(dir.path() / "bad.json") << "{\"format\":\"other\"}";
  EXPECT_THROW(LoadPristineModel(dir.path() / "bad.json"), Error);
  EXPECT_THROW(LoadPristineModel(dir.path() / "none.json"), Error);
}

TEST(NiqeTest, EmptyCorpus) {
  EXPECT_THROW(FitPristine(std::vector<PlaneF32>{}), Error);
}

TEST(TwoStepQaTest, Substitution) {
  EXPECT_DOUBLE_EQ(TwoStepQa(1.0, 4.0), -0.25);
  EXPECT_DOUBLE_EQ(TwoStepQa(0.9, 2.0), -0.45);
  EXPECT_THROW(TwoStepQa(0.9, 0.0), Error);
}

TEST(TwoStepQaTest, NegativeForPositiveMsSsim) {
  const auto corpus = MakeNaturalCorpus(3, 192, 192, 8);
  const PristineModel m = FitPristine(Planes(corpus));
  for (const auto& img : corpus) {
    const PlaneF32 ref = ToGrayscale(img);
    EXPECT_LT(TwoStepQa(ref, ToGrayscale(Compress(img, QualityFactor(30))), m), 0.0);
  }
}

TEST(GgdTest, GaussianSamplesGiveShapeNearTwo) {
  SplitMix64 rng(77);
  std::vector<double> v(20000);
  for (size_t i = 0; i < v.size(); i += 2) {
    // Box-Muller
    const double u1 = 1.0 - rng.UniformDouble(), u2 = rng.UniformDouble();
    const double r = std::sqrt(-2.0 * std::log(u1)) * 3.0;
    v[i] = r * std::cos(2 * std::numbers::pi * u2);
    v[i + 1] = r * std::sin(2 * std::numbers::pi * u2);
  }
  const GgdFit g = FitGgd(v);
  EXPECT_NEAR(g.shape, 2.0, 0.1);
  EXPECT_NEAR(g.variance, 9.0, 0.4);
  const AggdFit a = FitAggd(v);
  EXPECT_NEAR(a.shape, 2.0, 0.15);
  EXPECT_NEAR(a.left_variance, 9.0, 0.6);
  EXPECT_NEAR(a.right_variance, 9.0, 0.6);
}

TEST(GgdTest, LaplacianSamplesGiveShapeNearOne) {
  SplitMix64 rng(78);
  std::vector<double> v(20000);
  for (double& x : v) {
    const double u = rng.UniformDouble() - 0.5;
    x = (u < 0 ? 1 : -1) * std::log(1 - 2 * std::abs(u));
  }
  EXPECT_NEAR(FitGgd(v).shape, 1.0, 0.1);
}

}  // namespace
}  // namespace prefiqa
