// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "charrnn/checkpoint.hpp"
#include "charrnn/errors.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "test_util.hpp"

namespace charrnn::cli {
namespace {

using charrnn::testing::repeat;
using charrnn::testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drops the wall_ms column (third field) from every CSV line.
std::string without_wall_clock(const std::string& csv) {
  std::stringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    const auto c = line.find(',', b + 1);
    out += line.substr(0, b) + line.substr(c) + '\n';
  }
  return out;
}

struct Run {
  int code;
  std::string out, err;
};

Run train(const ConfigArgs& args) {
  std::ostringstream out, err;
  const int code = cmd_train(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = dir_.write("abab.txt", repeat("ab", 1500));
    config_ = dir_.write("run.cfg",
                         "# tiny alternating-corpus run\n"
                         "dataset = " + corpus_.string() + "\n"
                         "output_dir = " + (dir_.path() / "run").string() + "\n"
                         "scheme = 1\n"
                         "k1 = 10\n"
                         "k2 = 20\n"
                         "lanes = 8\n"
                         "hidden_size = 16\n"
                         "dense_size = 32\n"
                         "total_batches = 60\n"
                         "learning_rate = 0.01\n"
                         "test_length = 500\n"
                         "eval_points = 5\n"
                         "precision = 64\n");
  }
  TempDir dir_;
  std::filesystem::path corpus_, config_;
};

TEST(Config, ParsesCommentsAndTrims) {
  const auto cfg = parse_config("# c\n\n  k1 =  7 \nscheme=4\ndecay = exponential\nk3 = 5\n");
  EXPECT_EQ(cfg.train.k1, 7u);
  EXPECT_EQ(cfg.train.scheme, SchemeId::kScheme4);
  EXPECT_EQ(cfg.train.decay, LossDecay::kExponential);
  EXPECT_EQ(cfg.train.loss_window, 5u);
}

TEST(Config, RejectsUnknownDuplicateAndMalformed) {
  EXPECT_THROW(parse_config("k4 = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("k1 = 1\nk1 = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("k1 1\n"), ConfigError);
  EXPECT_THROW(parse_config("k1 = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("learning_rate = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("precision = 16\n"), ConfigError);
  EXPECT_THROW(parse_architectures("2by128"), ConfigError);
}

TEST(Config, SnapshotRoundTrips) {
  auto cfg = parse_config("k1 = 7\nscheme = 3\nbench_architectures = 1x128,2x64\nlearning_rate = 0.003\n");
  const auto text = to_config_text(cfg);
  const auto again = parse_config(text);
  EXPECT_EQ(to_config_text(again), text);
  EXPECT_EQ(again.bench_architectures.size(), 2u);
  EXPECT_EQ(again.train.learning_rate, 0.003);
}

TEST(Config, OutputRootPrefixesRelativeDirs) {
  ::setenv(kOutputRootEnv, "/tmp/root", 1);
  EXPECT_EQ(resolve_output_dir("runs/a"), std::filesystem::path("/tmp/root/runs/a"));
  EXPECT_EQ(resolve_output_dir("/abs"), std::filesystem::path("/abs"));
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(resolve_output_dir("runs/a"), std::filesystem::path("runs/a"));
}

TEST_F(CliTest, TrainWritesRunDirectoryAndIsDeterministic) {
  const auto first = train({config_, {}});
  ASSERT_EQ(first.code, kExitOk) << first.err;
  const auto run = dir_.path() / "run";
  for (const char* f : {kSnapshotFile, kMetricsFile, kCheckpointFile, kLogFile})
    EXPECT_TRUE(std::filesystem::exists(run / f)) << f;
  const std::string metrics = slurp(run / kMetricsFile);
  const std::string ckpt = slurp(run / kCheckpointFile);
  std::size_t rows = 0;
  for (char ch : metrics) rows += ch == '\n';
  EXPECT_EQ(rows, 1u + 5u);
  EXPECT_EQ(metrics.rfind("batch_index,sequences_seen,wall_ms,train_loss,test_perplexity\n", 0), 0u);

  const auto second = train({config_, {"output_dir=" + (dir_.path() / "run2").string()}});
  ASSERT_EQ(second.code, kExitOk) << second.err;
  EXPECT_EQ(without_wall_clock(slurp(dir_.path() / "run2" / kMetricsFile)), without_wall_clock(metrics));
  EXPECT_EQ(slurp(dir_.path() / "run2" / kCheckpointFile), ckpt);
}

TEST_F(CliTest, TrainedAlternatingModelEvaluatesAndSamples) {
  ASSERT_EQ(train({config_, {}}).code, kExitOk);
  const auto ckpt = dir_.path() / "run" / kCheckpointFile;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_eval({ckpt, corpus_}, out, err), kExitOk) << err.str();
  const std::string text = out.str();
  const double ppl = std::stod(text.substr(text.find(' ') + 1));
  EXPECT_LT(ppl, 1.2);

  std::ostringstream s1, s2, e;
  SampleArgs args;
  args.checkpoint = ckpt;
  args.n = 40;
  args.mode = "greedy";
  ASSERT_EQ(cmd_sample(args, s1, e), kExitOk) << e.str();
  ASSERT_EQ(cmd_sample(args, s2, e), kExitOk);
  EXPECT_EQ(s1.str(), s2.str());
  for (char ch : s1.str()) EXPECT_TRUE(ch == 'a' || ch == 'b' || ch == '\n');
  EXPECT_EQ(s1.str().size(), 20u + 40u + 1u);

  std::ostringstream s3;
  args.n = 0;
  args.seed_text = std::string(20, 'a');
  ASSERT_EQ(cmd_sample(args, s3, e), kExitOk);
  EXPECT_EQ(s3.str(), std::string(20, 'a') + "\n");

  args.seed_text = "ab";
  std::ostringstream s4;
  EXPECT_EQ(cmd_sample(args, s4, e), kExitConfigError);  // shorter than k2 for windowed
  args.sampling = "progressive";
  args.n = 4;
  std::ostringstream s5;
  EXPECT_EQ(cmd_sample(args, s5, e), kExitOk);
  EXPECT_EQ(s5.str(), "ababab\n");
}

TEST_F(CliTest, ExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_train({config_, {"k1=30"}}, out, err), kExitConfigError);
  EXPECT_NE(err.str().find("k1 (30) must not exceed k2 (20)"), std::string::npos) << err.str();
  EXPECT_FALSE(std::filesystem::exists(dir_.path() / "run"));
  EXPECT_EQ(cmd_train({config_, {"bogus=1"}}, out, err), kExitConfigError);
  EXPECT_EQ(cmd_train({dir_.path() / "nope.cfg", {}}, out, err), kExitIoError);
  EXPECT_EQ(cmd_train({config_, {"dataset=" + (dir_.path() / "nope.txt").string()}}, out, err), kExitIoError);
  EXPECT_EQ(cmd_train({config_, {"learning_rate=1e300", "total_batches=20"}}, out, err), kExitNumericalError);
  EXPECT_EQ(cmd_eval({dir_.path() / "nope.ckpt", corpus_}, out, err), kExitIoError);
}

TEST_F(CliTest, EvalOfUniformCheckpointAndForeignCharacters) {
  Checkpoint c;
  std::u32string symbols;
  for (char32_t ch = 32; ch < 32 + 85; ++ch) symbols += ch;
  c.vocabulary = Vocabulary::from_text(symbols);
  c.model = {85, 1, 8, 16};
  c.k1 = 20;
  c.k2 = 100;
  c.params = Parameters<float>::zeros(c.model);
  const auto ckpt = dir_.path() / "uniform.ckpt";
  save_checkpoint(ckpt, c);
  std::ostringstream out, err;
  ASSERT_EQ(cmd_eval({ckpt, dir_.write("t.txt", repeat("HELLO WORLD ", 40))}, out, err), kExitOk);
  const double ppl = std::stod(out.str().substr(out.str().find(' ') + 1));
  EXPECT_NEAR(ppl, 85.0, 1e-4);

  std::ostringstream out2, err2;
  EXPECT_EQ(cmd_eval({ckpt, dir_.write("u.txt", repeat("ok ", 50) + "\xC3\xA9")}, out2, err2), kExitIoError);
  EXPECT_NE(err2.str().find("U+00E9"), std::string::npos) << err2.str();
}

TEST_F(CliTest, BenchRowsAndValidation) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_bench({config_, {"bench_iters=4"}}, out, err), kExitConfigError);
  const std::vector<std::string> overrides = {"bench_iters=5", "bench_warmup=1", "bench_sample_tokens=2",
                                              "bench_architectures=1x8,2x4"};
  ASSERT_EQ(cmd_bench({config_, overrides}, out, err), kExitOk) << err.str();
  const std::string csv = slurp(dir_.path() / "run" / kBenchFile);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, 1u + 4u * 2u);
  EXPECT_EQ(csv.rfind(kBenchHeader, 0), 0u);
}

TEST(Gradcheck, PassesAndFailsOnImpossibleTolerance) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_gradcheck({{}, {"gradcheck_trials=3"}}, out, err), kExitOk) << err.str();
  std::ostringstream out2, err2;
  EXPECT_EQ(cmd_gradcheck({{}, {"gradcheck_trials=2", "gradcheck_tolerance=1e-300"}}, out2, err2),
            kExitGradcheckFailed);
}

}  // namespace
}  // namespace charrnn::cli
