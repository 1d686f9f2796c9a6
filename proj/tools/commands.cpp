// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>

#include "charrnn/bench.hpp"
#include "charrnn/checkpoint.hpp"
#include "charrnn/errors.hpp"
#include "charrnn/eval.hpp"
#include "charrnn/gradcheck.hpp"
#include "charrnn/trainer.hpp"
#include "config.hpp"

namespace charrnn::cli {

namespace fs = std::filesystem;

namespace {

// Maps library exceptions onto exit codes with a one-line diagnostic.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

RunConfig load_run_config(const ConfigArgs& args) {
  RunConfig cfg = load_config(args.config, args.overrides);
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

fs::path prepare_output_dir(const RunConfig& cfg) {
  const fs::path dir = resolve_output_dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

struct PreparedData {
  Vocabulary vocabulary;
  Split split;
};

PreparedData prepare_data(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("dataset is not set");
  LoadedCorpus loaded = load_corpus(cfg.dataset);
  const std::size_t n = loaded.corpus.size();
  if (n <= cfg.test_length)
    throw ConfigError("corpus has " + std::to_string(n) + " tokens, not more than test_length (" +
                      std::to_string(cfg.test_length) + ")");
  Rng rotation_rng(cfg.rotation_seed);
  const std::size_t rotation = rotation_rng.uniform_index(n);
  return {std::move(loaded.vocabulary), split_dataset(loaded.corpus, rotation, cfg.test_length)};
}

template <std::floating_point Real>
int train_run(const RunConfig& cfg, const ModelConfig& model, const PreparedData& data,
              const fs::path& dir, std::ostream& out, std::ostream& err) {
  std::ofstream log = open_output(dir / kLogFile);
  std::ofstream metrics = open_output(dir / kMetricsFile);
  write_metrics_header(metrics);
  metrics.flush();

  log << "corpus " << cfg.dataset.string() << ": train " << data.split.train.size() << " tokens, test "
      << data.split.test.size() << " tokens, vocabulary " << model.vocab_size << '\n'
      << "scheme " << to_string(cfg.train.scheme) << ", precision " << cfg.precision << ", "
      << Parameters<Real>::zeros(model).parameter_count() << " parameters\n";
  log.flush();

  Trainer<Real> trainer(model, cfg.train, cfg.adam, data.split.train);
  const auto schedule = eval_schedule(cfg.train.total_batches, cfg.eval_points);
  const MetricsSink sink = [&](const MetricsRecord& r) {
    write_metrics_row(metrics, r);
    metrics.flush();
    log << "batch " << r.batch_index << " loss " << format_real(r.train_loss) << " perplexity "
        << format_real(r.test_perplexity) << '\n';
    log.flush();
    out << "batch " << r.batch_index << "/" << cfg.train.total_batches << "  loss " << r.train_loss
        << "  test perplexity " << r.test_perplexity << '\n';
  };
  try {
    run_training(trainer, data.split.test, schedule, sink);
  } catch (const NumericalError& e) {
    log << "stopped: " << e.what() << '\n';
    err << "numerical error: " << e.what() << '\n';
    return kExitNumericalError;
  }

  Checkpoint ckpt;
  ckpt.model = model;
  ckpt.scheme = cfg.train.scheme;
  ckpt.k1 = cfg.train.k1;
  ckpt.k2 = cfg.train.k2;
  ckpt.vocabulary = data.vocabulary;
  const auto& test = data.split.test.tokens;
  ckpt.default_seed.assign(test.begin(), test.begin() + static_cast<std::ptrdiff_t>(std::min(test.size(), cfg.train.k2)));
  ckpt.params = trainer.parameters();
  save_checkpoint(dir / kCheckpointFile, ckpt);
  log << "checkpoint " << (dir / kCheckpointFile).string() << '\n';
  out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

template <std::floating_point Real>
std::vector<TokenId> run_sampler(const Parameters<Real>& params, const Checkpoint& ckpt,
                                 SamplingMethod method, const std::vector<TokenId>& seed,
                                 std::size_t n, Rng& rng, DrawMode mode) {
  if (method == SamplingMethod::kWindowed)
    return sample_windowed(params, ckpt.model, seed, n, ckpt.k2, rng, mode);
  return sample_progressive(params, ckpt.model, seed, n, rng, mode);
}

}  // namespace

fs::path resolve_output_dir(const fs::path& output_dir) {
  const char* root = std::getenv(kOutputRootEnv);
  if (root != nullptr && *root != '\0' && output_dir.is_relative()) return fs::path(root) / output_dir;
  return output_dir;
}

int cmd_train(const ConfigArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_run_config(args);
    const PreparedData data = prepare_data(cfg);
    ModelConfig model = cfg.model;
    model.vocab_size = data.vocabulary.size();
    model.validate();
    const fs::path dir = prepare_output_dir(cfg);
    {
      std::ofstream snapshot = open_output(dir / kSnapshotFile);
      snapshot << to_config_text(cfg);
    }
    if (cfg.precision == 64) return train_run<double>(cfg, model, data, dir, out, err);
    return train_run<float>(cfg, model, data, dir, out, err);
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    const Corpus corpus = load_corpus_with(args.dataset, ckpt.vocabulary);
    if (corpus.size() <= ckpt.k2)
      throw ConfigError("evaluation text has " + std::to_string(corpus.size()) +
                        " tokens; it needs more than k2 = " + std::to_string(ckpt.k2));
    const double ppl = std::visit(
        [&](const auto& p) { return perplexity(p, ckpt.model, corpus, ckpt.k2); }, ckpt.params);
    out << "perplexity " << format_real(ppl) << '\n'
        << "scored_tokens " << scored_token_count(corpus.size(), ckpt.k2) << '\n';
    return kExitOk;
  });
}

int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    DrawMode mode;
    if (args.mode == "multinomial") mode = DrawMode::kMultinomial;
    else if (args.mode == "greedy") mode = DrawMode::kGreedy;
    else throw ConfigError("mode: expected greedy or multinomial, got '" + args.mode + "'");

    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    SamplingMethod method = default_sampling(ckpt.scheme);
    if (args.sampling) {
      if (*args.sampling == "windowed") method = SamplingMethod::kWindowed;
      else if (*args.sampling == "progressive") method = SamplingMethod::kProgressive;
      else throw ConfigError("sampling: expected windowed or progressive, got '" + *args.sampling + "'");
    }
    const std::vector<TokenId> seed =
        args.seed_text ? ckpt.vocabulary.encode(utf8_decode(*args.seed_text)) : ckpt.default_seed;
    if (seed.empty()) throw ConfigError("sampling needs a non-empty seed");
    if (method == SamplingMethod::kWindowed && seed.size() < ckpt.k2)
      throw ConfigError("windowed sampling needs a seed of at least k2 = " + std::to_string(ckpt.k2) +
                        " characters, got " + std::to_string(seed.size()));
    Rng rng(args.rng_seed);
    const auto tokens = std::visit(
        [&](const auto& p) { return run_sampler(p, ckpt, method, seed, args.n, rng, mode); },
        ckpt.params);
    out << utf8_encode(ckpt.vocabulary.decode(tokens)) << '\n';
    return kExitOk;
  });
}

int cmd_bench(const ConfigArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_run_config(args);
    if (cfg.bench.iterations < 5)
      throw ConfigError("bench_iters must be >= 5, got " + std::to_string(cfg.bench.iterations));
    if (cfg.dataset.empty()) throw ConfigError("dataset is not set");
    const LoadedCorpus loaded = load_corpus(cfg.dataset);
    const std::size_t vocab = loaded.vocabulary.size();
    const auto rows = cfg.precision == 64
                          ? bench_all<double>(cfg.bench_architectures, cfg.train, loaded.corpus, vocab, cfg.bench)
                          : bench_all<float>(cfg.bench_architectures, cfg.train, loaded.corpus, vocab, cfg.bench);
    const fs::path dir = prepare_output_dir(cfg);
    {
      std::ofstream csv = open_output(dir / kBenchFile);
      write_bench_csv(csv, rows);
    }
    char line[160];
    std::snprintf(line, sizeof(line), "%-6s %-7s %4s %4s %14s %8s %-11s %14s %8s\n", "scheme",
                  "arch", "k1", "k2", "train ms/batch", "stddev", "sampling", "sample ms/tok",
                  "stddev");
    out << line;
    for (const auto& r : rows) {
      const std::string arch = std::to_string(r.arch.num_layers) + "x" + std::to_string(r.arch.hidden_size);
      std::snprintf(line, sizeof(line), "%-6s %-7s %4zu %4zu %14.3f %8.3f %-11s %14.4f %8.4f\n",
                    to_string(r.scheme).c_str(), arch.c_str(), r.k1, r.k2, r.train.mean_ms,
                    r.train.stddev_ms, to_string(default_sampling(r.scheme)).c_str(),
                    r.sample.mean_ms, r.sample.stddev_ms);
      out << line;
    }
    out << "wrote " << (dir / kBenchFile).string() << '\n';
    return kExitOk;
  });
}

int cmd_gradcheck(const ConfigArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg;
    if (!args.config.empty()) {
      cfg = load_config(args.config, args.overrides);
    } else {
      for (const auto& o : args.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("--override expects key=value, got '" + o + "'");
        apply_setting(cfg, o.substr(0, eq), o.substr(eq + 1));
      }
    }
    if (cfg.gradcheck_trials == 0) throw ConfigError("gradcheck_trials must be >= 1");
    if (!(cfg.gradcheck_epsilon > 0.0) || !(cfg.gradcheck_tolerance > 0.0))
      throw ConfigError("gradcheck_epsilon and gradcheck_tolerance must be > 0");
    const GradcheckReport report =
        run_gradcheck(cfg.gradcheck_trials, cfg.train.seed, cfg.gradcheck_epsilon, cfg.gradcheck_tolerance);
    char line[200];
    for (std::size_t k = 0; k < report.trials.size(); ++k) {
      const auto& t = report.trials[k];
      std::snprintf(line, sizeof(line),
                    "trial %2zu  V=%zu hidden=%zu layers=%zu dense=%zu lanes=%zu seq=%zu window=%zu "
                    "decay=%s  max_rel_err=%.3e  %s\n",
                    k, t.model.vocab_size, t.model.hidden_size, t.model.num_layers, t.model.dense_size,
                    t.lanes, t.seq_len, t.loss.window, to_string(t.loss.decay).c_str(),
                    t.comparison.max_relative_error, t.passed ? "ok" : "FAIL");
      out << line;
    }
    out << "worst relative error " << report.worst_relative_error << " (tolerance "
        << cfg.gradcheck_tolerance << ")\n";
    if (!report.passed()) {
      err << "gradient check failed\n";
      return kExitGradcheckFailed;
    }
    return kExitOk;
  });
}

}  // namespace charrnn::cli
