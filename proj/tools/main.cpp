// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// charrnn: train, evaluate, sample, benchmark and gradient-check
// character-level LSTM language models.

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace charrnn::cli;
  CLI::App app{"Character-level LSTM training and sampling"};
  app.require_subcommand(1);

  ConfigArgs train_args;
  auto* train = app.add_subcommand("train", "Train a model and write a run directory");
  train->add_option("--config", train_args.config, "Run configuration file")->required();
  train->add_option("--override", train_args.overrides, "key=value applied after the file");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Perplexity of a checkpoint on a text file");
  eval->add_option("--checkpoint", eval_args.checkpoint, "model.ckpt from a run")->required();
  eval->add_option("--dataset", eval_args.dataset, "UTF-8 text to score")->required();

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Print the seed followed by generated text");
  sample->add_option("--checkpoint", sample_args.checkpoint, "model.ckpt from a run")->required();
  sample->add_option("--n", sample_args.n, "Characters to generate")->capture_default_str();
  sample->add_option("--mode", sample_args.mode, "multinomial or greedy")->capture_default_str();
  sample->add_option("--seed-text", sample_args.seed_text,
                     "Conditioning text; defaults to the test prefix stored in the checkpoint");
  sample->add_option("--sampling", sample_args.sampling,
                     "windowed or progressive; defaults to the scheme's method");
  sample->add_option("--rng-seed", sample_args.rng_seed, "Seed for multinomial draws")->capture_default_str();

  ConfigArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time training and sampling for all schemes");
  bench->add_option("--config", bench_args.config, "Run configuration file")->required();
  bench->add_option("--override", bench_args.overrides, "key=value applied after the file");

  ConfigArgs grad_args;
  auto* grad = app.add_subcommand("gradcheck", "Compare backward() with finite differences");
  grad->add_option("--config", grad_args.config, "Optional run configuration file");
  grad->add_option("--override", grad_args.overrides, "key=value, e.g. gradcheck_trials=40");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  if (*train) return cmd_train(train_args, std::cout, std::cerr);
  if (*eval) return cmd_eval(eval_args, std::cout, std::cerr);
  if (*sample) return cmd_sample(sample_args, std::cout, std::cerr);
  if (*bench) return cmd_bench(bench_args, std::cout, std::cerr);
  return cmd_gradcheck(grad_args, std::cout, std::cerr);
}
