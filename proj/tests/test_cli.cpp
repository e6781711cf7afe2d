/* Copyright 2026 The Seedscan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "seedscan/report.hpp"
#include "test_util.hpp"

namespace seedscan {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(SEEDSCAN_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

TEST(Cli, HelpAndUsageErrors) {
  const RunResult help = run("--help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.output.find("inspect"), std::string::npos);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("train --bogus 1").code, 1);
  EXPECT_EQ(run("generate --out x").code, 1);  // --seed is required
}

TEST(Cli, MissingModelIsIoErrorNamingThePath) {
  TempDir dir("cli_missing");
  const fs::path model = dir.path() / "absent.ckpt";
  const RunResult r = run("predict --model " + q(model) + " --image " + q(dir.path() / "x.png"));
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_NE(r.output.find("absent.ckpt"), std::string::npos) << r.output;
}

TEST(Cli, InvalidValuesAreValidationErrors) {
  TempDir dir("cli_invalid");
  EXPECT_EQ(run("generate --out " + q(dir.path() / "d") + " --seed 1 --counts 1,2").code, 2);
  std::ofstream(dir.path() / "junk.ckpt") << "definitely not a checkpoint";
  const RunResult r =
      run("predict --model " + q(dir.path() / "junk.ckpt") + " --image " + q(dir.path()));
  EXPECT_EQ(r.code, 2) << r.output;
}

TEST(Cli, GenerateTrainEvalPredictInspect) {
  TempDir dir("cli_flow");
  const fs::path data = dir.path() / "data";
  const fs::path model = dir.path() / "m.ckpt";
  ASSERT_EQ(run("generate --out " + q(data) + " --seed 3 --counts 6,6,2,2,2,2 --size 48").code, 0);
  EXPECT_TRUE(fs::exists(data / "manifest.jsonl"));

  EXPECT_EQ(run("train --data " + q(data) + " --model " + q(model) +
                " --epochs 2 --lr -1 --seed 3")
                .code,
            2);
  const RunResult trained = run("train --data " + q(data) + " --model " + q(model) +
                                " --epochs 2 --size 16 --batch 4 --seed 3 --augment hflip");
  ASSERT_EQ(trained.code, 0) << trained.output;
  EXPECT_NE(trained.output.find("trained epochs=2"), std::string::npos) << trained.output;
  ASSERT_TRUE(fs::exists(model));
  std::ifstream csv(dir.path() / "m.csv");
  const std::string text{std::istreambuf_iterator<char>(csv), std::istreambuf_iterator<char>()};
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);

  const fs::path eval_json = dir.path() / "eval.json";
  const RunResult eval =
      run("eval --model " + q(model) + " --data " + q(data) + " --report " + q(eval_json));
  ASSERT_EQ(eval.code, 0) << eval.output;
  EXPECT_NE(eval.output.find("images=4"), std::string::npos) << eval.output;
  const Report report = read_report(eval_json);
  EXPECT_EQ(report.rows.size(), 4u);

  const fs::path one = data / "test" / "abnormal" / report.rows.back().identifier;
  const RunResult predicted = run("predict --model " + q(model) + " --image " + q(one));
  ASSERT_EQ(predicted.code, 0) << predicted.output;
  EXPECT_TRUE(predicted.output.find(" Normal") != std::string::npos ||
              predicted.output.find(" Abnormal") != std::string::npos)
      << predicted.output;

  const fs::path scene = dir.path() / "scene.png";
  ASSERT_EQ(run("generate --out " + q(scene) + " --seed 4 --scene 2,1").code, 0);
  const fs::path annotated = dir.path() / "annotated.png";
  const fs::path inspection = dir.path() / "inspection.json";
  const RunResult inspected = run("inspect --model " + q(model) + " --image " + q(scene) +
                                  " --out " + q(annotated) + " --report " + q(inspection));
  ASSERT_EQ(inspected.code, 0) << inspected.output;
  EXPECT_TRUE(fs::exists(annotated));
  const Report rows = read_report(inspection);
  EXPECT_EQ(rows.rows.size(), 3u);
  EXPECT_EQ(rows.normal_count() + rows.abnormal_count(), 3u);
}

}  // namespace
}  // namespace seedscan
