#pragma once
// Run orchestration: versioned JSON experiment configs (strict about unknown
// keys), deterministic dataset materialization from a master seed, run
// directories with a manifest of content hashes, and the train/eval stages
// used by the command-line tool.

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "mr/taskgen.hpp"
#include "mr/trainer.hpp"

namespace mr {

struct DataConfig {
  // FDA sizes; THR sizes follow from the graph (N*R*R questions, 80/20 split)
  int64_t n_train = 40000;
  int64_t n_val = 10000;
  double noise_rate = 0.05;
  int64_t thr_n = 20;
  int64_t thr_r = 20;
  std::string assets = "data/thr_names.json";
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string name;  // short run label, used in exports
  std::string task;  // "fda" | "thr"
  uint64_t seed = 0;
  DataConfig data;
  ModelConfig model;  // vocab_size may be 0 = derive from the tokenizer
  TrainConfig train;  // .model and .seed are filled during resolution

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
};

// Seed streams derived from the master seed (see derive_seed).
uint64_t dataset_seed(const ExperimentConfig& cfg);
uint64_t model_seed(const ExperimentConfig& cfg);
uint64_t train_seed(const ExperimentConfig& cfg);

// Generates the dataset for this config in memory (deterministic in the
// master seed) and fills in derived fields (vocab size, train seed/model).
DatasetBundle materialize_dataset(ExperimentConfig& cfg);

// Read-modify-write of runs/<name>/manifest.json (atomic, sorted keys).
void manifest_update(const std::filesystem::path& run_dir, const std::string& key,
                     const nlohmann::json& value);
nlohmann::json manifest_read(const std::filesystem::path& run_dir);

// Stages. Each records its outputs (paths + content hashes) in the manifest.
// gen_data: writes dataset.jsonl; a rerun with identical content is a no-op,
// a content mismatch is refused with DataError.
void stage_gen_data(ExperimentConfig cfg, const std::filesystem::path& run_dir);
// train: materializes (and verifies) the dataset, builds or resumes the
// model, runs the training loop, and records checkpoints/dynamics.
void stage_train(ExperimentConfig cfg, const std::filesystem::path& run_dir, bool resume);
// eval: full-split evaluation of the latest checkpoint -> final_eval.json.
nlohmann::json stage_eval(ExperimentConfig cfg, const std::filesystem::path& run_dir);

// Latest checkpoint path under run_dir; throws DataError when none exists.
std::filesystem::path latest_checkpoint(const std::filesystem::path& run_dir);

}  // namespace mr
