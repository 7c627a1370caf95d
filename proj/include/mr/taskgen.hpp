#pragma once
// Deterministic dataset generators for the two tasks:
//  - FDA: four-digit addition "a+b=c" with digit-level tokens.
//  - THR: two-hop relational reasoning over a synthetic person graph, with
//    declarative fact sentences plus two-hop questions, word-level tokens.
// Both support controlled label noise: a fixed fraction of training labels is
// replaced by systematically wrong answers, yielding four analysis splits:
//   train_clean    clean training examples
//   mem_noisy      noisy training examples scored against their wrong labels
//   mem_corrected  the same noisy prompts scored against the true labels
//                  (never present in the training stream)
//   validation     held-out examples

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mr/common.hpp"
#include "mr/rng.hpp"

namespace mr {

struct Tokenizer {
  std::string kind;                // "fda-digit" | "thr-word"
  std::vector<std::string> vocab;  // id -> token; id 0 is always "<pad>"
  std::map<std::string, int32_t> index;

  int32_t id(const std::string& tok) const;
  int32_t pad_id() const { return 0; }
  // FDA: character-level over digits/+/=; THR: whitespace-separated words.
  std::vector<int32_t> encode(const std::string& text) const;
  std::string decode(const std::vector<int32_t>& ids) const;

  static Tokenizer fda_digit();
  static Tokenizer thr_word(const std::vector<std::string>& extra_words);
};

struct Example {
  int64_t id = 0;
  std::string split;  // train_clean | mem_noisy | mem_corrected | validation | facts
  std::string text;   // prompt + supervised label, human readable
  std::vector<int32_t> tokens;  // full sequence (prompt + supervised label)
  int32_t prompt_len = 0;       // tokens[0 .. prompt_len) form the prompt
  std::string clean_label;
  std::string label;  // supervised label; equals clean_label unless noisy
  bool noisy = false;
  bool full_seq_loss = false;  // facts: LM loss at every position
  // FDA fields
  int32_t a = 0, b = 0;
  // THR fields
  std::string p0, r0, r1, bridge;

  std::vector<int32_t> prompt_tokens() const {
    return {tokens.begin(), tokens.begin() + prompt_len};
  }
  std::vector<int32_t> answer_tokens() const {
    return {tokens.begin() + prompt_len, tokens.end()};
  }
};

struct DatasetBundle {
  std::string task;  // "fda" | "thr"
  uint64_t seed = 0;
  double noise_rate = 0.0;
  Tokenizer tok;
  std::vector<Example> train;  // FDA: equations; THR: facts then QA
  std::vector<Example> val;

  // Materializes a split by name. mem_corrected is synthesized on demand from
  // the mem_noisy prompts re-paired with clean labels; those sequences exist
  // only here, never in `train`.
  std::vector<Example> split_examples(const std::string& split) const;
  int64_t count(const std::string& split) const;
};

// ---- FDA ----

// a, b ~ U[1000, 4999] without (a, b) repetition across train+val, so the sum
// lies in [2000, 9998] and is always four digits.
DatasetBundle gen_fda(uint64_t seed, int64_t n_train = 40000, int64_t n_val = 10000,
                      double noise_rate = 0.05);

// Uniform over [2000, 9999] by rejection until every digit differs from the
// clean sum's digit at the same position.
int32_t corrupt_fda_sum(int32_t clean_sum, Rng& rng);

// ---- THR ----

struct ThrAssets {
  int version = 0;
  std::vector<std::vector<std::string>> pools;  // 3 pools of person names
  std::vector<std::string> relations;
  std::vector<std::string> templates;  // with {s} {r} {o} slots
};
ThrAssets load_thr_assets(const std::filesystem::path& path);

struct ThrFact {
  std::string subj, rel, obj;
};

struct ThrGraph {
  std::vector<std::string> p0, p1, p2;    // selected disjoint entity sets
  std::vector<std::string> rels;          // selected relations (shared by both hops)
  std::map<std::pair<std::string, std::string>, std::string> hop1;  // (p0, r) -> p1
  std::map<std::pair<std::string, std::string>, std::string> hop2;  // (p1, r) -> p2
  std::vector<ThrFact> facts() const;     // hop-1 facts then hop-2 facts
};

ThrGraph build_thr_graph(const ThrAssets& assets, uint64_t seed, int64_t N = 20, int64_t R = 20);

// Each fact rendered under every template, in fact-major order.
std::vector<std::string> verbalize_facts(const std::vector<ThrFact>& facts,
                                         const std::vector<std::string>& templates);

// All (p0, r0, r1) triples (N*R*R questions), shuffled, split
// 80/20 into train/validation; a noise_rate fraction of training answers is
// replaced by a different entity from the layer-2 global pool.
DatasetBundle gen_thr_qa(const ThrAssets& assets, const ThrGraph& graph, uint64_t seed,
                         double noise_rate = 0.05);

// ---- serialization ----
// Line-delimited JSON: one header record, then one record per example.
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& path);
DatasetBundle load_dataset(const std::filesystem::path& path);

}  // namespace mr
