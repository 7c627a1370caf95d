#pragma once
// Seeded language-model training: AdamW with decoupled weight decay, per-epoch
// reshuffled minibatches, periodic per-split evaluation, checkpointing with an
// optimizer sidecar for exact (bitwise) resume, and memorization-onset
// detection over the recorded learning dynamics.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mr/model.hpp"
#include "mr/taskgen.hpp"

namespace mr {

// One padded next-token training/eval batch.
struct Batch {
  int64_t B = 0, T = 0;
  std::vector<int32_t> tokens;   // [B*T], padded with the pad id
  std::vector<int32_t> targets;  // [B*T], -1 where no loss applies
  std::vector<int> lens;         // [B] valid lengths
};

// Builds next-token targets over the supervised span: full-sequence examples
// are scored at every position, answer examples only at the positions that
// predict answer tokens (prompt_len-1 .. len-2).
Batch make_batch(const std::vector<const Example*>& examples, int32_t pad_id);

struct TrainConfig {
  ModelConfig model;
  std::string train_dtype = "f64";  // "f32" | "f64"
  int64_t total_steps = 0;
  int64_t batch_size = 256;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  int64_t eval_every = 100;        // 0 = only at the final step
  int64_t checkpoint_every = 500;  // 0 = only at the final step; else a multiple of eval_every
  int64_t eval_sample = 1000;      // per-split cap for periodic evals; 0 = full split
  uint64_t seed = 0;
  bool deterministic = true;  // pin BLAS to one thread
  void validate() const;
};

// AdamW with bias-corrected moments kept in float64 regardless of the
// parameter scalar type. Throws NumericError on any non-finite gradient.
struct AdamW {
  double lr = 1e-4, beta1 = 0.9, beta2 = 0.999, eps = 1e-8, weight_decay = 0.01;
  int64_t t = 0;
  std::vector<std::vector<double>> m, v;

  template <typename T>
  void init(const std::vector<std::pair<std::string, Tensor<T>*>>& params);
  template <typename T>
  void step(const std::vector<std::pair<std::string, Tensor<T>*>>& params);
};

struct DynamicsRow {
  int64_t step = 0;
  std::string split, metric;
  double value = 0.0;
};

// Long-format learning dynamics: (step, split, metric, value).
struct Dynamics {
  std::vector<DynamicsRow> rows;

  void add(int64_t step, const std::string& split, const std::string& metric, double value);
  // Step-ordered series for one (split, metric).
  std::vector<std::pair<int64_t, double>> series(const std::string& split,
                                                 const std::string& metric) const;
  // Exact row lookup; throws DataError when absent.
  double at(int64_t step, const std::string& split, const std::string& metric) const;
  void save_csv(const std::filesystem::path& path) const;
  static Dynamics load_csv(const std::filesystem::path& path);
};

struct EvalMetrics {
  int64_t n = 0;               // examples evaluated
  bool token_metrics = false;  // false for full-sequence splits (facts)
  double first_token_acc = 0.0;
  double full_answer_acc = 0.0;
  double loss = 0.0;  // mean cross-entropy over supervised positions
};

// Teacher-forced evaluation of one split. first_token_acc is argmax-at-the-
// last-prompt-position exact match; full_answer_acc requires every answer
// position correct (equivalent to greedy exact match). mem_corrected scores
// the noisy prompts against their clean labels. sample > 0 evaluates a seeded
// subsample. Throws DataError on an empty split.
template <typename T>
EvalMetrics evaluate_split(const Transformer<T>& model, const DatasetBundle& data,
                           const std::string& split, int64_t sample = 0, uint64_t seed = 0,
                           int64_t batch_size = 256);

struct TrainOutput {
  int64_t steps_done = 0;
  int64_t epochs_done = 0;
  std::vector<int64_t> checkpoint_steps;
  std::filesystem::path final_checkpoint;
  Dynamics dynamics;
  double wall_seconds = 0.0;
  double cpu_seconds = 0.0;
};

// Runs (or resumes) training, writing checkpoints/step_XXXXXXX.ckpt, a rolling
// optimizer sidecar (optim_state.bin), dynamics.csv, and timing.json under
// out_dir. The final step is always evaluated on the full splits and
// checkpointed. Resuming from the sidecar reproduces the uninterrupted run
// bitwise. Refuses to run over an existing output directory unless resuming.
template <typename T>
TrainOutput train_run(Transformer<T>& model, const DatasetBundle& data, const TrainConfig& cfg,
                      const std::filesystem::path& out_dir, bool resume = false);

struct OnsetResult {
  bool onset_found = false;
  int64_t onset_step = -1;  // first eval step where mem_noisy acc exceeds theta_on, rising
  bool pre_mem_found = false;
  int64_t pre_mem_step = -1;  // latest checkpoint before onset with mem_corrected >= theta_gen
};

// Scans first_token_acc dynamics for the memorization onset and picks the
// pre-memorization checkpoint. A missing qualifying checkpoint is reported via
// pre_mem_found = false, not an error.
OnsetResult detect_memorization_onset(const Dynamics& dyn,
                                      const std::vector<int64_t>& checkpoint_steps,
                                      double theta_on = 0.10, double theta_gen = 0.90);

}  // namespace mr
