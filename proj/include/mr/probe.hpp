#pragma once
// Representation-level analyses: residual-stream collection, logit-lens and
// linear-probe layer curves, and iterative nullspace projection (INLP) with
// its random-direction and mean-direction baselines.
//
// Conventions shared by everything here:
//  - Residuals are read at one sequence position per example, by default the
//    last prompt token (the position whose logits produce the first answer
//    token).
//  - "Layer l" means the residual stream after block l (resid_post), so the
//    curve's final layer is exactly what the unembedding sees.
//  - All probe math runs in float64 regardless of the model scalar type.

#include <cstdint>
#include <string>
#include <vector>

#include "mr/model.hpp"
#include "mr/taskgen.hpp"

namespace mr {

// Which label accompanies each collected residual row.
enum class ProbeTarget {
  Supervised,  // first token of the example's supervised label
  CleanLabel,  // first token of the clean label (differs on noisy examples)
  Bridge,      // THR bridge entity token
};

// One design matrix: n residual rows and their class labels. Labels are dense
// class indices into `classes`, which holds the underlying token ids in
// ascending order.
struct ResidualSet {
  int64_t n = 0, d = 0;
  std::vector<double> x;        // [n x d]
  std::vector<int32_t> labels;  // [n], values in [0, classes.size())
  std::vector<int32_t> classes;
  int layer = -1;
  int position = -1;  // -1 = per-example last prompt token
};

// Residuals of one layer at one position for every example, in order.
// position -1 reads each example's last prompt token. pre=true reads the
// block input (resid_pre) instead of its output.
template <typename T>
ResidualSet collect_residuals(const Transformer<T>& model,
                              const std::vector<const Example*>& examples, const Tokenizer& tok,
                              int layer, int position, ProbeTarget target, bool pre = false,
                              int64_t batch = 256);

// All layers in one pass over the examples (same cost as one layer).
template <typename T>
std::vector<ResidualSet> collect_residuals_all_layers(const Transformer<T>& model,
                                                      const std::vector<const Example*>& examples,
                                                      const Tokenizer& tok, int position,
                                                      ProbeTarget target, int64_t batch = 256);

// Bias-free multinomial logistic probe: logits = x * w, argmax prediction
// (ties to the lowest class index).
struct ProbeModel {
  int64_t d = 0, n_classes = 0;
  std::vector<double> w;  // [d x n_classes]
  std::vector<int32_t> classes;
  int layer = -1, position = -1;
  std::string split;
  uint64_t seed = 0;

  std::vector<int32_t> predict(const double* x, int64_t n) const;
  double accuracy(const ResidualSet& data) const;
};

struct ProbeFit {
  ProbeModel model;
  double val_accuracy = 0.0;  // on the held-out 20%
};

// Adam-trained softmax regression without bias on a seeded 80/20 split.
// Throws DataError when fewer than two classes are present.
ProbeFit train_probe(const ResidualSet& data, uint64_t seed, int epochs = 200, double lr = 1e-3,
                     int64_t batch = 64, double train_fraction = 0.8);

enum class CurveMethod { LogitLens, Probe };

// Per-layer accuracy at the last prompt position against the split's target
// labels. LogitLens decodes each layer's residual through the final norm and
// unembedding (so the last entry equals the model's own first-token accuracy);
// Probe trains a fresh seeded probe per layer and reports held-out accuracy.
// shuffle_labels destroys the signal (seeded) as a chance-level control.
template <typename T>
std::vector<double> layer_curve(const Transformer<T>& model, const DatasetBundle& bundle,
                                const std::string& split, CurveMethod method, uint64_t seed,
                                ProbeTarget target = ProbeTarget::Supervised,
                                bool shuffle_labels = false, int64_t batch = 256);

// Symmetric idempotent projector onto the orthogonal complement of the
// removed directions. rank(p) = d - n_removed.
struct NullspaceProjector {
  int64_t d = 0;
  std::vector<double> p;        // [d x d]
  std::vector<double> removed;  // [n_removed x d], orthonormal rows
  int64_t n_removed = 0;
  int iterations = 0;
  double final_probe_accuracy = 0.0;
  bool converged = false;  // false = max_iter exhausted before accuracy < eps
};

// Iterative nullspace projection: train a probe, project the data onto the
// nullspace of its (orthonormalized) class directions, repeat until a fresh
// probe's held-out accuracy drops below eps. Non-convergence within max_iter
// is reported through `converged`, not an exception.
NullspaceProjector inlp_fit(const ResidualSet& data, uint64_t seed, double eps = 0.1,
                            int max_iter = 10, int probe_epochs = 200, double probe_lr = 1e-3,
                            int64_t probe_batch = 64);

enum class BaselineKind { RandomDirection, MeanDirection };

// Rank-(d-1) control projectors: the nullspace of a seeded random unit vector,
// or of the average class-mean vector. Throws NumericError when the direction
// is numerically zero.
NullspaceProjector baseline_projector(BaselineKind kind, const ResidualSet& data, uint64_t seed);

// Forward the split with the projector applied to the residual stream at
// (layer, last prompt position); returns the mean softmax probability of each
// example's supervised answer token.
template <typename T>
double projector_patch_eval(const Transformer<T>& model, const DatasetBundle& bundle,
                            const std::string& split, int layer,
                            const std::vector<double>& projector, int64_t batch = 256);

}  // namespace mr
