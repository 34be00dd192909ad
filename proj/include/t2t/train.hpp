#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "t2t/interp.hpp"
#include "t2t/params.hpp"

namespace t2t::learning {

struct TrainConfig {
  std::string data_dir;  // directory holding train.jsonl and valid.jsonl
  model::ModelConfig model;
  int epochs = 5;
  int accumulation = 16;  // examples per optimizer step
  std::uint64_t seed = 1;
  std::string out_dir;  // receives checkpoints, log, resolved config
  // Optional early stopping: stop after `patience` epochs without a new
  // best validation accuracy (0 = off), or once validation accuracy
  // reaches `stop_at_accuracy` (negative = off).
  int patience = 0;
  double stop_at_accuracy = -1.0;
  int threads = 0;  // gradient/eval parallelism; 0 = all available
};

struct TrainResult {
  std::string best_checkpoint;
  std::string final_checkpoint;
  std::string log_path;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
};

// Teacher-forced training with deterministic shuffling and gradient
// accumulation; per-epoch validation decodes the validation split. Writes
// train_log.csv (epoch,train_loss,val_program_accuracy,val_validity_rate,
// overflow_count), best.json / final.json checkpoints, and the resolved
// config. Bit-identical outputs for a fixed (seed, config, corpus).
// Throws NonFiniteValue naming the offending example on divergence.
TrainResult train(const TrainConfig& config);

struct EvalReport {
  double program_accuracy = 0.0;  // decoded tree == reference, exactly
  double validity_rate = 0.0;     // decoded passes the target grammar
  double token_accuracy = 0.0;    // teacher-forced argmax match rate
  std::size_t overflow_count = 0;
  std::size_t example_count = 0;
};

EvalReport evaluate(const model::ParameterSet& params,
                    const model::ModelConfig& config,
                    const std::vector<corpus::TranslationPair>& pairs,
                    int threads = 0);

std::string eval_report_to_json(const EvalReport& report);

struct RunSummary {
  std::vector<EvalReport> runs;
  double mean_program_accuracy = 0.0;
  double mean_validity_rate = 0.0;
  double mean_token_accuracy = 0.0;
  double mean_overflow = 0.0;
  // Sample standard deviation (n-1 denominator); absent for single runs.
  std::optional<double> sd_program_accuracy;
  std::optional<double> sd_validity_rate;
  std::optional<double> sd_token_accuracy;
};

RunSummary aggregate_runs(const std::vector<EvalReport>& reports);
std::string run_summary_to_json(const RunSummary& summary);

// Checkpoint: one JSON document {format_version, model_config,
// generator_provenance, params}. Loading restores every parameter value
// exactly and refuses foreign files: VersionMismatch on format_version,
// ConfigError on grammar-fingerprint mismatch, CorruptCheckpoint on
// missing/extra/misshapen/non-finite parameters.
void save_checkpoint(const model::ParameterSet& params,
                     const model::ModelConfig& config,
                     const std::string& path);

struct Checkpoint {
  model::ParameterSet params;
  model::ModelConfig config;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace t2t::learning
