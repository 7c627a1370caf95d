#pragma once
// Decoder-only transformer with pre-norm blocks, learned absolute positions,
// and a tied embedding/unembedding matrix. Forward passes can capture
// intermediate activations (Trace) and apply activation-level interventions
// (replace/project residuals, replace MLP activations, pin attention heads to
// the identity pattern, substitute the residual a single read path sees).
// Interventions are value-level surgery and are only legal on no-grad
// forwards.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mr/tensor.hpp"

namespace mr {

struct ModelConfig {
  int64_t n_layers = 2;
  int64_t d_model = 64;
  int64_t n_heads = 2;
  int64_t d_mlp = 0;  // 0 means 4 * d_model
  int64_t vocab_size = 16;
  int64_t max_seq_len = 16;

  void validate() const;
  int64_t head_dim() const { return d_model / n_heads; }
  int64_t mlp_dim() const { return d_mlp ? d_mlp : 4 * d_model; }
  int64_t param_count() const;
  bool operator==(const ModelConfig&) const = default;
};

// What to record during a forward pass.
struct CaptureSpec {
  bool resid_pre = false;
  bool resid_mid = false;         // residual between the attention and MLP adds
  bool resid_post = false;
  bool attn_pattern = false;
  bool attn_output = false;       // post-projection attention output (incl. bias)
  bool attn_head_output = false;  // per-head post-projection contribution (excl. bias)
  bool mlp_activation = false;    // post-nonlinearity, width d_mlp
  bool mlp_output = false;
  bool grad_handles = false;      // keep autodiff handles on the read projections
  bool any() const {
    return resid_pre || resid_mid || resid_post || attn_pattern || attn_output ||
           attn_head_output || mlp_activation || mlp_output || grad_handles;
  }
  static CaptureSpec all() {
    CaptureSpec c;
    c.resid_pre = c.resid_mid = c.resid_post = c.attn_pattern = c.attn_output = true;
    c.attn_head_output = c.mlp_activation = c.mlp_output = c.grad_handles = true;
    return c;
  }
};

// Captured activations, flattened row-major with row r = b*T + t.
template <typename Scalar>
struct Trace {
  int64_t B = 0, T = 0, L = 0, H = 0, d = 0, d_mlp = 0;
  std::vector<std::vector<Scalar>> resid_pre;         // [L][R*d]
  std::vector<std::vector<Scalar>> resid_mid;         // [L][R*d]
  std::vector<std::vector<Scalar>> resid_post;        // [L][R*d]
  std::vector<std::vector<Scalar>> attn_pattern;      // [L][B*H*T*T]
  std::vector<std::vector<Scalar>> attn_output;       // [L][R*d]
  std::vector<std::vector<Scalar>> attn_head_output;  // [L*H][R*d]
  std::vector<std::vector<Scalar>> mlp_activation;    // [L][R*d_mlp]
  std::vector<std::vector<Scalar>> mlp_output;        // [L][R*d]
  // grad_handles captures: live autodiff handles on the q/k/v projections, the
  // post-ln2 rows, and the final residual. After running backward() on a tape
  // that covered this forward, each handle's grad buffer holds the metric
  // gradient at that tensor, which is how attribution code separates the
  // gradient flowing through each residual-stream read path.
  std::vector<Tensor<Scalar>> grad_q, grad_k, grad_v;  // [L], each [R x d]
  std::vector<Tensor<Scalar>> grad_ln2;                // [L], [R x d]
  Tensor<Scalar> grad_resid_final;                     // [R x d]
};

// The read paths through which downstream computation consumes the residual
// stream: a head's query/key/value projections, an MLP's pre-norm input, or
// the final-norm input feeding the unembedding.
enum class Channel { Q, K, V, Mlp, Logits };

// A single activation-level intervention. `pos` is a sequence position
// (0-based); -1 means every position. For batched payloads (per_row) the
// payload covers each batch row (pos >= 0: [B x dim]) or every grid cell
// (pos == -1: [B*T x dim]).
template <typename T>
struct Intervention {
  enum class Kind {
    ReplaceResidual,       // overwrite resid_post(layer) rows with payload [d]
    ProjectResidual,       // multiply resid_post(layer) rows by payload [d x d]
    ReplaceAttnOutput,     // overwrite attention block output rows, payload [d]
    ReplaceMlpActivation,  // overwrite post-GELU rows, payload [d_mlp]
    ReplaceMlpNeuron,      // overwrite one neuron, payload [1] (or [B]/[B*T])
    SelfAttentionOnly,     // force head's pattern to identity at pos (-1 = all)
    ReplaceChannelInput,   // substitute the residual one read path sees (below)
  };
  Kind kind;
  int layer = 0;
  int pos = -1;
  int head = -1;    // SelfAttentionOnly; ReplaceChannelInput on q/k/v (-1 = all heads)
  int neuron = -1;  // ReplaceMlpNeuron only
  bool per_row = false;
  std::vector<T> payload;
  // ReplaceChannelInput only: which read path. The pre-norm and projection for
  // that path are re-derived from the payload residual [B*T x d] (pos must be
  // -1, per_row true) while the residual stream itself is left untouched; for
  // q/k/v a head >= 0 confines the substitution to that head's columns.
  // Channel::Logits takes layer == -1 (the unembedding read sits after the
  // last block).
  Channel channel = Channel::Q;
};

template <typename T>
struct ForwardResult {
  Tensor<T> logits;  // [B*T x vocab]
  Trace<T> trace;
};

// Residual-stream circuit mask for forward_circuit. The stream decomposes into
// node outputs (the input embedding, each attention head's post-projection
// contribution, each MLP's output); every read path (a head's q/k/v, an MLP,
// the logits read) consumes their sum. A set bit severs that (read path,
// source node) edge: the read path sees the reference activation for that node
// instead of the live one. Node ids: 0 = input, then heads in (layer, head)
// order, then MLPs. Channel ids: (l*H + h)*3 + {0,1,2} for q/k/v, then one per
// MLP, then the logits read.
struct CircuitMask {
  int64_t n_layers = 0, n_heads = 0;
  std::vector<uint8_t> excluded;  // [n_channels x n_nodes]; empty = nothing severed

  static int64_t n_nodes(const ModelConfig& c) { return 1 + c.n_layers * (c.n_heads + 1); }
  static int64_t n_channels(const ModelConfig& c) { return c.n_layers * (3 * c.n_heads + 1) + 1; }
  static int64_t node_input() { return 0; }
  static int64_t node_head(const ModelConfig& c, int64_t l, int64_t h) {
    return 1 + l * c.n_heads + h;
  }
  static int64_t node_mlp(const ModelConfig& c, int64_t l) {
    return 1 + c.n_layers * c.n_heads + l;
  }
  static int64_t chan_qkv(const ModelConfig& c, int64_t l, int64_t h, int qkv) {
    return (l * c.n_heads + h) * 3 + qkv;  // qkv: 0=q 1=k 2=v
  }
  static int64_t chan_mlp(const ModelConfig& c, int64_t l) {
    return 3 * c.n_layers * c.n_heads + l;
  }
  static int64_t chan_logits(const ModelConfig& c) {
    return 3 * c.n_layers * c.n_heads + c.n_layers;
  }

  static CircuitMask none(const ModelConfig& c) {
    return {c.n_layers, c.n_heads, {}};
  }
  void exclude(const ModelConfig& c, int64_t channel, int64_t node) {
    if (excluded.empty())
      excluded.assign(static_cast<size_t>(n_channels(c) * n_nodes(c)), uint8_t{0});
    excluded[static_cast<size_t>(channel * n_nodes(c) + node)] = 1;
  }
};

template <typename T>
struct Transformer {
  ModelConfig cfg;

  Tensor<T> tok_emb;  // [V x d], also the unembedding (tied)
  Tensor<T> pos_emb;  // [max_seq_len x d]
  struct Layer {
    Tensor<T> ln1_g, ln1_b;
    Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor<T> ln2_g, ln2_b;
    Tensor<T> w_in, b_in, w_out, b_out;
  };
  std::vector<Layer> layers;
  Tensor<T> lnf_g, lnf_b;

  // Weight-order contract used by checkpoints; do not reorder.
  std::vector<std::pair<std::string, Tensor<T>*>> named_params();
  std::vector<std::pair<std::string, const Tensor<T>*>> named_params() const;
  void zero_grad();
  void set_requires_grad(bool rg);

  // tokens: B*T ids padded to the grid; lens[b] marks valid prefixes (empty =
  // all valid). Throws on invalid ids, lens, or malformed interventions.
  ForwardResult<T> forward(const std::vector<int32_t>& tokens, int64_t B, int64_t T_,
                           const std::vector<int>& lens = {}, const CaptureSpec& cap = {},
                           const std::vector<Intervention<T>>& interventions = {}) const;

  // Circuit-constrained forward: severed edges (see CircuitMask) make the read
  // path consume the reference trace's activation for that node instead of the
  // live one; everything else propagates live, so an empty mask reproduces
  // forward() bitwise. `ref` must carry resid_pre (layer 0), attn_head_output,
  // and mlp_output for the same grid shape, typically captured from a forward
  // pass over counterfactual inputs. No-grad only.
  Tensor<T> forward_circuit(const std::vector<int32_t>& tokens, int64_t B, int64_t T_,
                            const std::vector<int>& lens, const CircuitMask& mask,
                            const Trace<T>& ref) const;

  // Greedy argmax continuation of each prompt (ties break to the lowest id).
  // prompts: B*Tp grid; returns [B x n_new] generated ids.
  std::vector<int32_t> greedy_generate(const std::vector<int32_t>& prompts, int64_t B, int64_t Tp,
                                       int n_new) const;

  // Final layer norm + tied unembedding applied to arbitrary residual vectors
  // [N x d]: the logit-lens readout.
  std::vector<T> unembed_rows(const std::vector<T>& resid, int64_t N) const;
};

// Fresh model with Gaussian(0, 0.02) weights, zero biases, unit LN gains.
// Identical seeds produce bitwise-identical parameters.
template <typename T>
Transformer<T> build_model(const ModelConfig& cfg, uint64_t seed);

// ---- checkpoint I/O ----
// Container: magic line, header-length line, JSON header (config, seed, step,
// per-weight shapes/offsets/content hashes in fixed order), then raw
// little-endian float64 payload. Weights are stored as float64 regardless of
// the in-memory scalar type.

struct CheckpointMeta {
  ModelConfig config;
  uint64_t seed = 0;
  int64_t step = 0;
  std::string train_dtype;  // "f32" or "f64"
};

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Transformer<T>& model,
                     const CheckpointMeta& meta);

CheckpointMeta peek_checkpoint(const std::filesystem::path& path);

template <typename T>
Transformer<T> load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta = nullptr);

}  // namespace mr
