#pragma once
// Intervention-based analyses: activation-patching faithfulness, position and
// head importance scans, self-attention head ablation, edge-attribution
// circuit discovery and evaluation, pre-/post-memorization MLP patching,
// neuron activation grids, and hinted continuation scoring.
//
// The shared protocol: a PairSet draws (clean, corrupt) prompt pairs from one
// split; analyses run the model on the clean prompt with some activations
// replaced from the corrupt run (or from another model) and report
//   faithfulness = (l_patched - l_corrupt) / (l_clean - l_corrupt)
// where each l is the mean logit of the clean example's answer token at the
// last prompt position. Patching nothing gives exactly 1, substituting the
// whole corrupt state gives exactly 0.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mr/model.hpp"
#include "mr/taskgen.hpp"

namespace mr {

// ---- pairing ----

struct Pair {
  int64_t clean = 0, corrupt = 0;  // indices into split_examples(split)
};

struct PairSet {
  std::string split;
  uint64_t seed = 0;
  std::vector<Pair> pairs;
};

// Every example of the split becomes a clean prompt (n_pairs > 0 subsamples
// that many, seeded); each is paired with a uniformly drawn distinct corrupt
// example from the same split. Throws DataError on splits with < 2 examples.
PairSet make_pairs(const DatasetBundle& bundle, const std::string& split, int64_t n_pairs,
                   uint64_t seed);

// Which label the clean example is scored against: its supervised label (the
// noisy one on mem_noisy) or its clean label.
enum class AnswerOf { Supervised, CleanLabel };

// ---- faithfulness ----

struct FaithfulnessScore {
  double value = 0.0;  // (l_patched - l_corrupt) / (l_clean - l_corrupt)
  double l_clean = 0.0, l_corrupt = 0.0, l_patched = 0.0;  // mean answer logits
  int64_t n_pairs = 0;    // pairs entering the means
  int64_t n_dropped = 0;  // pairs dropped for |l_clean - l_corrupt| < 1e-6
};

// One activation patch, instantiated per pair from the corrupt run.
// pos -1 = every position; neuron only for MlpNeuron. FullState replaces the
// entire final residual stream (layer/pos ignored) and pins the output to the
// corrupt run's.
enum class PatchComponent { FullState, AttnOutput, MlpOutput, MlpNeuron, ResidualAfter };

struct PatchSpec {
  PatchComponent component = PatchComponent::ResidualAfter;
  int layer = 0;
  int pos = -1;
  int neuron = -1;
};

// Runs every pair through clean / corrupt / patched forwards and aggregates
// the three mean logits. Pairs whose clean and corrupt logits already agree
// to < 1e-6 are dropped (counted); if none survive, or the aggregate
// denominator is below 1e-6, throws NumericError.
template <typename T>
FaithfulnessScore faithfulness(const Transformer<T>& model, const DatasetBundle& bundle,
                               const PairSet& pairs, const std::vector<PatchSpec>& patches,
                               AnswerOf answer_of = AnswerOf::Supervised, int64_t batch = 128);

// ---- position & head scans ----

enum class ScanComponent { Attention, Mlp };

struct PositionScan {
  int64_t n_layers = 0, seq_len = 0;
  std::vector<double> value;  // [n_layers x seq_len] faithfulness
};

// Faithfulness with the single component output at (layer, position) patched
// from the corrupt run; positions the model never writes score exactly 1.
template <typename T>
PositionScan position_importance_scan(const Transformer<T>& model, const DatasetBundle& bundle,
                                      const PairSet& pairs, ScanComponent component,
                                      AnswerOf answer_of = AnswerOf::Supervised,
                                      int64_t batch = 128);

struct HeadRef {
  int layer = 0, head = 0;
};

// Ablates the listed heads jointly (each token attends only to itself, every
// position) on the clean run and scores faithfulness per split. No corrupt
// activations enter; the pairs only supply the corrupt baseline logits.
template <typename T>
std::map<std::string, FaithfulnessScore> head_self_ablation(
    const Transformer<T>& model, const DatasetBundle& bundle,
    const std::vector<PairSet>& per_split, const std::vector<HeadRef>& heads,
    AnswerOf answer_of = AnswerOf::Supervised, int64_t batch = 128);

struct HeadSummary {
  int layer = 0, head = 0;
  double max_drop = 0.0;  // max over positions of 1 - faithfulness
  int worst_pos = 0;      // position attaining it
  int attends_to = 0;     // argmax source position of the head's mean clean
                          // attention from the last prompt token
};

struct HeadScan {
  int64_t n_layers = 0, n_heads = 0, seq_len = 0;
  std::vector<double> value;         // [L x H x seq_len] faithfulness
  std::vector<HeadSummary> ranking;  // all heads, by max_drop descending
};

// Ablates each head at each single position on the clean run.
template <typename T>
HeadScan head_importance_scan(const Transformer<T>& model, const DatasetBundle& bundle,
                              const PairSet& pairs, AnswerOf answer_of = AnswerOf::Supervised,
                              int64_t batch = 128);

// ---- edge-attribution circuit discovery ----

enum class NodeKind { Input, Head, Mlp, Logits };

struct NodeRef {
  NodeKind kind = NodeKind::Input;
  int layer = -1, head = -1;
  std::string name() const;  // "input", "a0.h1", "m2", "logits"
};

struct EapEdge {
  NodeRef src, dst;
  Channel channel = Channel::Q;  // read path on dst (Q/K/V for heads)
  double score = 0.0;
  bool included = false;
  std::string name() const;  // e.g. "a0.h1->a1.h2.q", "input->m0", "m1->logits"
};

// The residual-decomposition graph: the input embedding and every upstream
// head/MLP output feed each head (through its q, k and v reads), each MLP, and
// the logits read. Edge order is fixed by construction.
struct CircuitGraph {
  int64_t n_layers = 0, n_heads = 0;
  std::vector<EapEdge> edges;
  double target = 0.0, achieved = 0.0;  // filled by extraction
  int64_t n_pairs = 0;                  // pairs behind the scores
  int64_t n_included() const;
};

CircuitGraph make_eap_graph(const ModelConfig& cfg);

// First-order edge scores: score(u->r) = (z_u^clean - z_u^corrupt) . dm/dz,
// with the gradient of the metric taken on the corrupt run at r's read of the
// residual stream. The metric is the mean logit difference between the clean
// and corrupt answer tokens. One clean forward, one taped corrupt forward and
// one backward per chunk of pairs; scores are averaged over pairs. The model
// is non-const because its parameters must carry requires_grad for gradients
// to reach intermediate activations (the flag is left set afterwards; it has
// no effect on untaped forwards).
template <typename T>
void eap_scores(Transformer<T>& model, const DatasetBundle& bundle, const PairSet& pairs,
                CircuitGraph& graph, AnswerOf answer_of = AnswerOf::Supervised,
                int64_t batch = 64);

// Exact counterpart of one edge's score: substitute the clean activation of
// edge.src into edge.dst's read on the corrupt run and return the mean change
// of the same logit-difference metric.
template <typename T>
double exact_edge_patch_delta(const Transformer<T>& model, const DatasetBundle& bundle,
                              const PairSet& pairs, const EapEdge& edge,
                              AnswerOf answer_of = AnswerOf::Supervised, int64_t batch = 128);

// Runs the clean prompts with every non-included edge severed to the corrupt
// run's activations (forward_circuit) and scores faithfulness. Including all
// edges gives exactly 1. Including none collapses every read to the corrupt
// activations, so the score lands at 0 up to floating-point resummation (the
// severed reads re-add the corrupt contributions in a different order than
// the corrupt run accumulated them).
template <typename T>
FaithfulnessScore circuit_faithfulness(const Transformer<T>& model, const DatasetBundle& bundle,
                                       const PairSet& pairs, const CircuitGraph& graph,
                                       AnswerOf answer_of = AnswerOf::Supervised,
                                       int64_t batch = 128);

// For each target (ascending), binary-searches the smallest top-k prefix of
// edges ordered by |score| whose circuit faithfulness reaches the target.
// Top-k prefixes of a shared order make the returned circuits nested.
template <typename T>
std::vector<CircuitGraph> extract_circuits(const CircuitGraph& scored,
                                           const Transformer<T>& model,
                                           const DatasetBundle& bundle, const PairSet& pairs,
                                           const std::vector<double>& targets,
                                           AnswerOf answer_of = AnswerOf::Supervised,
                                           int64_t batch = 128);

// Faithfulness of the top-k circuit for each requested k.
template <typename T>
std::vector<std::pair<int64_t, double>> circuit_sparsity_curve(
    const CircuitGraph& scored, const Transformer<T>& model, const DatasetBundle& bundle,
    const PairSet& pairs, const std::vector<int64_t>& ks,
    AnswerOf answer_of = AnswerOf::Supervised, int64_t batch = 128);

struct CircuitOverlap {
  int64_t n_a = 0, n_b = 0, n_both = 0;
  double containment_a_in_b = 0.0;  // |A∩B| / |A|; 1.0 for empty A
};

// Venn counts over included edges; throws ConfigError if the graphs do not
// share the same edge universe.
CircuitOverlap circuit_overlap(const CircuitGraph& a, const CircuitGraph& b);

// ---- pre-/post-memorization MLP patching ----

// Where replacement MLP activations come from: the pre-memorization model run
// on the same clean prompt, or the post-memorization model run on the
// corrupt prompt.
enum class PreMemSource { PreModel, RandomInstance };

struct UnitPatch {
  int layer = 0;
  int neuron = -1;  // -1 = the whole MLP layer
  FaithfulnessScore score;
};

// Faithfulness per unit. The corrupt baseline for the denominator is the
// clean prompt with *all* MLP activations replaced from the corrupt run
// (isolating what the MLP stack alone contributes); l_clean is the plain
// post-model run. Units default (empty) to one whole-layer unit per layer.
template <typename T>
std::vector<UnitPatch> pre_mem_patch(const Transformer<T>& post_model,
                                     const Transformer<T>& pre_model,
                                     const DatasetBundle& bundle, const PairSet& pairs,
                                     const std::vector<std::pair<int, int>>& units,
                                     PreMemSource source,
                                     AnswerOf answer_of = AnswerOf::Supervised,
                                     int64_t batch = 128);

// All MLP layers patched together (one score).
template <typename T>
FaithfulnessScore pre_mem_patch_all(const Transformer<T>& post_model,
                                    const Transformer<T>& pre_model,
                                    const DatasetBundle& bundle, const PairSet& pairs,
                                    PreMemSource source,
                                    AnswerOf answer_of = AnswerOf::Supervised,
                                    int64_t batch = 128);

// First-token accuracy against the *clean* labels of a split when the post
// model runs with every MLP activation replaced by the pre model's (same
// prompts). Measures how much generalizing behavior the patch restores.
template <typename T>
double pre_mem_patch_accuracy(const Transformer<T>& post_model, const Transformer<T>& pre_model,
                              const DatasetBundle& bundle, const std::string& split,
                              int64_t batch = 128);

// ---- neuron activation grids (FDA) ----

struct GridRecord {
  int32_t a = 0, b = 0;
  int32_t clean_sum = 0;
  double activation = 0.0;  // at the last prompt position
};

// Activation of one MLP neuron on n_samples distinct (a, b) prompts sampled
// away from every training pair (rejection against the training set), seeded
// and deterministic.
template <typename T>
std::vector<GridRecord> neuron_activation_grid(const Transformer<T>& model,
                                               const DatasetBundle& bundle, int layer,
                                               int neuron, int64_t n_samples, uint64_t seed,
                                               int64_t batch = 256);

// The same readout for one concrete example (e.g. a flagged noisy instance).
template <typename T>
double neuron_activation_on(const Transformer<T>& model, const Tokenizer& tok,
                            const Example& ex, int layer, int neuron);

// ---- hinted continuation (FDA) ----

struct HintReport {
  int64_t n = 0;
  // greedy completion of the bare prompt, exact-match over all answer digits
  double unhinted_matches_noisy = 0.0;
  double unhinted_matches_clean = 0.0;
  // greedy completion after appending the clean first answer digit,
  // exact-match over the remaining digits
  double clean_hint_tail_matches_clean = 0.0;
  double clean_hint_tail_matches_noisy = 0.0;
  // same with the supervised (noisy) first digit appended
  double noisy_hint_tail_matches_noisy = 0.0;
};

template <typename T>
HintReport hinted_continuation_accuracy(const Transformer<T>& model, const DatasetBundle& bundle,
                                        const std::string& split = "mem_noisy",
                                        int64_t batch = 128);

// ---- small statistics helper ----

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mr
