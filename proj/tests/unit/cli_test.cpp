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

#include <sys/wait.h>

#include <cstdio>
#include <string>

#include <gtest/gtest.h>
#include "json.hpp"

#include "fixtures.hpp"
#include "prefiqa/codec.hpp"
#include "prefiqa/dataset.hpp"
#include "prefiqa/image.hpp"
#include "prefiqa/synthetic.hpp"

namespace prefiqa {
namespace {

using nlohmann::json;

struct RunResult {
  int status = -1;
  std::string out;
};

// Captures stdout, or stderr alone when `errors` is set.
RunResult RunCli(const std::string& args, bool errors = false) {
  const std::string cmd =
      std::string(PREFIQA_CLI_PATH) + " " + args + (errors ? " 2>&1 >/dev/null" : " 2>/dev/null");
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

json RunJson(const std::string& args) {
  const RunResult r = RunCli(args);
  EXPECT_EQ(r.status, 0) << args << "\n" << r.out;
  return json::parse(r.out);
}

class CliTest : public ::testing::Test {
 protected:
  std::string P(const std::string& name) const { return (dir_.path() / name).string(); }
  test::TempDir dir_{"cli"};
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(RunCli("").status, 2);
  EXPECT_EQ(RunCli("bogus").status, 2);
  const RunResult r = RunCli("compress --in x.ppm", true);
  EXPECT_EQ(r.status, 2);
  const std::string last = r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1);
  EXPECT_EQ(json::parse(last)["error"]["code"], "usage");
}

TEST_F(CliTest, RuntimeErrorsCarryCodes) {
  const RunResult missing = RunCli("compress --in " + P("none.ppm") + " --out " + P("o.ppm") + " --q 50", true);
  EXPECT_EQ(missing.status, 1);
  EXPECT_EQ(json::parse(missing.out)["error"]["code"], "io");
  SaveImage(RasterImage(8, 8, 3), P("a.ppm"));
  const RunResult bad_q = RunCli("compress --in " + P("a.ppm") + " --out " + P("o.ppm") + " --q 0", true);
  EXPECT_EQ(bad_q.status, 1);
  EXPECT_EQ(json::parse(bad_q.out)["error"]["code"], "invalid_argument");
}

TEST_F(CliTest, CompressMatchesLibrary) {
  const RasterImage img = MakeNaturalImage(30, 20, 1);
  SaveImage(img, P("in.ppm"));
  const json j = RunJson("compress --in " + P("in.ppm") + " --out " + P("out.ppm") + " --q 37");
  EXPECT_EQ(j["q"], 37);
  EXPECT_EQ(j["width"], 30);
  const CompressResult expect = CompressWithStats(img, QualityFactor(37));
  EXPECT_EQ(LoadImage(P("out.ppm")), expect.image);
  EXPECT_EQ(j["nonzero_coefficients"], expect.nonzero_coefficients);
}

TEST_F(CliTest, MetricsJson) {
  const RasterImage img = MakeNaturalImage(176, 176, 2);
  SaveImage(img, P("ref.ppm"));
  SaveImage(Compress(img, QualityFactor(20)), P("t.ppm"));
  const json same = RunJson("metrics --ref " + P("ref.ppm") + " --test " + P("ref.ppm"));
  EXPECT_EQ(same["psnr"], "inf");
  EXPECT_EQ(same["mse"], 0.0);
  const json j = RunJson("metrics --ref " + P("ref.ppm") + " --test " + P("t.ppm"));
  EXPECT_GT(j["psnr"].get<double>(), 20.0);
  EXPECT_LT(j["msssim"].get<double>(), 1.0);
  EXPECT_FALSE(j.contains("niqe"));

  RunJson("fit-pristine --images " + P("ref.ppm") + " --out " + P("p.json"));
  const json k = RunJson("metrics --ref " + P("ref.ppm") + " --test " + P("t.ppm") +
                         " --pristine " + P("p.json"));
  EXPECT_LT(k["q2stepqa"].get<double>(), 0.0);
}

TEST_F(CliTest, PipelineProducesReports) {
  const json stats = RunJson("gen-dataset --out " + P("ds") +
                             " --refs 6 --width 48 --height 48 --test-fraction 0.34 --seed 5");
  EXPECT_EQ(stats["stats"]["pairs"], 4 + 2 * 6);
  const DatasetManifest gen = LoadManifest(P("ds/manifest.csv"));
  EXPECT_EQ(gen.records.size(), 16u);
  EXPECT_TRUE(std::filesystem::exists(P("ds/" + gen.records[0].path_a)));

  RunJson("synth-labels --manifest " + P("ds/manifest.csv") + " --out " + P("ds/labeled.csv") +
          " --metric psnr --seed 5");
  const DatasetManifest labeled = LoadManifest(P("ds/labeled.csv"));
  for (const auto& r : labeled.records) ASSERT_TRUE(r.label.has_value());
  EXPECT_EQ(labeled.Provenance("oracle.quality"), "psnr");

  RunJson("train --manifest " + P("ds/labeled.csv") + " --out " + P("m.ckpt") +
          " --epochs 1 --steps 2 --batch 2 --input-size 32 --blocks 2 --base-channels 4"
          " --hidden 8 --seed 5");
  EXPECT_TRUE(std::filesystem::exists(P("m.ckpt")));

  EXPECT_EQ(RunCli("eval --manifest " + P("ds/labeled.csv") + " --metrics psnr,ssim --model " +
                   P("m.ckpt") + " --dataset desk --seed 5 --out " + P("r.json"))
                .status,
            0);
  const json report = json::parse(test::ReadBytes(P("r.json")));
  EXPECT_EQ(report["format"], "prefiqa-report");
  EXPECT_EQ(report["pair_count"], 12);
  EXPECT_EQ(report["correlations"].size(), 3u);

  const RunResult md = RunCli("report --in " + P("r.json") + "," + P("r.json"));
  EXPECT_EQ(md.status, 0);
  EXPECT_NE(md.out.find("desk SROCC"), std::string::npos) << md.out;

  const json cmp = RunJson("compare --model " + P("m.ckpt") + " --ref " + P("ds/" + gen.records[0].path_ref) +
                           " --a " + P("ds/" + gen.records[0].path_a) + " --b " +
                           P("ds/" + gen.records[0].path_b) + " --seed 1");
  EXPECT_GT(cmp["p"].get<double>(), 0.0);
  EXPECT_LT(cmp["p"].get<double>(), 1.0);

  const json rd = RunJson("rd-tune --model " + P("m.ckpt") + " --in " +
                          P("ds/" + gen.records[0].path_ref) + " --tol 0.05 --seed 1");
  EXPECT_LE(rd["probes"].get<int>(), 7);
  EXPECT_TRUE(rd["flag"] == "ok" || rd["flag"] == "no-indistinguishable-point");
}

TEST_F(CliTest, GenerationIsReproducible) {
  const std::string args = " --refs 4 --width 24 --height 24 --test-fraction 0.25 --seed 8";
  RunJson("gen-dataset --out " + P("a") + args);
  RunJson("--threads 1 gen-dataset --out " + P("b") + args);
  EXPECT_EQ(test::ReadBytes(P("a/manifest.csv")), test::ReadBytes(P("b/manifest.csv")));
  const DatasetManifest m = LoadManifest(P("a/manifest.csv"));
  for (const auto& r : m.records) {
    EXPECT_EQ(test::ReadBytes(P("a/" + r.path_b)), test::ReadBytes(P("b/" + r.path_b)));
  }
}

}  // namespace
}  // namespace prefiqa
