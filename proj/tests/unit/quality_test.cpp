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

#include <gtest/gtest.h>

#include "prefiqa/codec.hpp"
#include "prefiqa/error.hpp"
#include "prefiqa/niqe.hpp"
#include "prefiqa/quality.hpp"
#include "prefiqa/synthetic.hpp"

namespace prefiqa {
namespace {

class MetricDeltaTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ref_ = new RasterImage(MakeNaturalImage(192, 192, 61));
    a_ = new RasterImage(Compress(*ref_, QualityFactor(65)));
    b_ = new RasterImage(Compress(*ref_, QualityFactor(99)));
    std::vector<PlaneF32> pristine;
    for (const auto& img : MakeNaturalCorpus(4, 192, 192, 5)) pristine.push_back(ToGrayscale(img));
    model_ = new PristineModel(FitPristine(pristine));
  }
  static void TearDownTestSuite() {
    delete ref_;
    delete a_;
    delete b_;
    delete model_;
  }
  static RasterImage* ref_;
  static RasterImage* a_;
  static RasterImage* b_;
  static PristineModel* model_;
};

RasterImage* MetricDeltaTest::ref_ = nullptr;
RasterImage* MetricDeltaTest::a_ = nullptr;
RasterImage* MetricDeltaTest::b_ = nullptr;
PristineModel* MetricDeltaTest::model_ = nullptr;

constexpr Metric kAll[] = {Metric::kMse,     Metric::kPsnr, Metric::kSsim,
                           Metric::kMsSsim,  Metric::kNiqe, Metric::kQ2StepQa};

TEST_F(MetricDeltaTest, EqualImagesGiveZero) {
  for (Metric m : kAll) {
    EXPECT_EQ(MetricDelta(m, *a_, *a_, *ref_, model_), 0.0) << MetricName(m);
    EXPECT_EQ(MetricDelta(m, *ref_, *ref_, *ref_, model_), 0.0) << MetricName(m);
  }
}

TEST_F(MetricDeltaTest, SwapNegatesExactly) {
  for (Metric m : kAll) {
    const double d = MetricDelta(m, *a_, *b_, *ref_, model_);
    EXPECT_EQ(MetricDelta(m, *b_, *a_, *ref_, model_), -d) << MetricName(m);
  }
}

TEST_F(MetricDeltaTest, PsnrSignFlipsWithOrder) {
  const double forward = MetricDelta(Metric::kPsnr, *a_, *b_, *ref_);
  const double back = MetricDelta(Metric::kPsnr, *b_, *a_, *ref_);
  EXPECT_GT(forward, 0.0);
  EXPECT_LT(back, 0.0);
}

TEST_F(MetricDeltaTest, DeltaIsImage2MinusImage1) {
  const double v2 = ComputeMetric(Metric::kSsim, *b_, *ref_).value;
  const double v1 = ComputeMetric(Metric::kSsim, *a_, *ref_).value;
  EXPECT_EQ(MetricDelta(Metric::kSsim, *a_, *b_, *ref_), v2 - v1);
}

TEST_F(MetricDeltaTest, Errors) {
  EXPECT_THROW(MetricDelta(Metric::kNiqe, *a_, *b_, *ref_), Error);
  const RasterImage small(100, 100, 3);
  try {
    MetricDelta(Metric::kPsnr, small, *b_, *ref_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(MetricNamesTest, ParseRoundTrip) {
  for (Metric m : kAll) EXPECT_EQ(ParseMetric(MetricName(m)), m);
  EXPECT_THROW(ParseMetric("lpips"), Error);
  const auto list = ParseMetricList("psnr,ssim,msssim");
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list[2], Metric::kMsSsim);
  EXPECT_FALSE(HigherIsBetter(Metric::kNiqe));
  EXPECT_TRUE(HigherIsBetter(Metric::kQ2StepQa));
}

}  // namespace
}  // namespace prefiqa
