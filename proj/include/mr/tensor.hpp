#pragma once
// Reverse-mode autodiff over dense row-major tensors.
//
// Ops record backward closures on a thread-local Tape while one is in scope;
// backward() replays them in reverse. Everything is deterministic by
// construction: fixed accumulation order per output element, no threading in
// the op kernels, and BLAS pinned to one thread.
//
// The stack is templated on the scalar type. double is the default for every
// correctness-sensitive path (gradcheck, patching identities, checkpoints);
// float exists so the large training presets fit the wallclock budget of a
// single CPU core.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mr/common.hpp"
#include "mr/rng.hpp"

namespace mr {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}
std::string shape_str(const Shape& s);

// Global switch for post-op finiteness scans. On by default; the training hot
// loop turns it off and instead checks the loss and raw gradients each step.
void set_check_finite(bool on);
bool check_finite_enabled();

template <typename T>
struct TensorData {
  Shape shape;
  std::vector<T> v;  // values, row-major
  std::vector<T> g;  // gradient; empty until first touched
  bool requires_grad = false;
  void ensure_grad() {
    if (g.empty()) g.assign(v.size(), T(0));
  }
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& s, bool requires_grad = false);
  static Tensor full(const Shape& s, T val, bool requires_grad = false);
  static Tensor from(const Shape& s, std::vector<T> vals, bool requires_grad = false);
  static Tensor randn(const Shape& s, Rng& rng, T stddev, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(d_); }
  const Shape& shape() const { return d_->shape; }
  int ndim() const { return static_cast<int>(d_->shape.size()); }
  int64_t dim(int i) const { return d_->shape[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(d_->v.size()); }

  T* data() { return d_->v.data(); }
  const T* data() const { return d_->v.data(); }
  std::vector<T>& values() { return d_->v; }
  const std::vector<T>& values() const { return d_->v; }

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool rg) { d_->requires_grad = rg; }
  bool has_grad() const { return !d_->g.empty(); }
  T* grad() { d_->ensure_grad(); return d_->g.data(); }
  const std::vector<T>& grad_vec() const { return d_->g; }
  void zero_grad() {
    if (!d_->g.empty()) std::fill(d_->g.begin(), d_->g.end(), T(0));
  }

  T item() const {
    if (numel() != 1) throw DimError("item(): tensor is not scalar");
    return d_->v[0];
  }

  std::shared_ptr<TensorData<T>> node() const { return d_; }

 private:
  explicit Tensor(std::shared_ptr<TensorData<T>> d) : d_(std::move(d)) {}
  std::shared_ptr<TensorData<T>> d_;
  template <typename U> friend class TensorFactory;
};

template <typename T>
class TensorFactory {
 public:
  static Tensor<T> make(Shape s, std::vector<T> v, bool rg) {
    auto d = std::make_shared<TensorData<T>>();
    d->shape = std::move(s);
    d->v = std::move(v);
    d->requires_grad = rg;
    return Tensor<T>(std::move(d));
  }
};

// Tape: ordered record of backward closures for one forward computation.
template <typename T>
class Tape {
 public:
  void record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }
  size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and runs closures newest-first. Gradients
  // accumulate (+=); call zero_grad between independent backward passes.
  void backward(Tensor<T>& loss) {
    if (loss.numel() != 1) throw DimError("backward: loss must be scalar");
    loss.grad()[0] += T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  }

 private:
  std::vector<std::function<void()>> nodes_;
};

template <typename T>
Tape<T>* active_tape();

// RAII scope that installs a tape as the thread-local recorder.
template <typename T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* prev_;
};

// ---- ops ----

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);  // elementwise
template <typename T> Tensor<T> scale(const Tensor<T>& a, T s);
// bias [C] broadcast-added to every row of a [.. x C]
template <typename T> Tensor<T> add_bias(const Tensor<T>& a, const Tensor<T>& bias);

// matmul(a, b): a [M x K] * b [K x N]. matmul_ex supports transposed operands
// without materializing them.
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> matmul_ex(const Tensor<T>& a, const Tensor<T>& b, bool trans_a, bool trans_b);

template <typename T> Tensor<T> gelu(const Tensor<T>& x);  // tanh approximation

// Normalizes over the last dimension; gain/bias are [C].
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps = T(1e-5));

// Softmax along `axis` (negative axes count from the back). Max-subtracted.
template <typename T> Tensor<T> softmax(const Tensor<T>& x, int axis = -1);

// table [V x d], ids in [0, V); out [n x d]. Backward scatter-adds into table.
template <typename T>
Tensor<T> embedding_lookup(const Tensor<T>& table, const std::vector<int32_t>& ids);

// Mean cross-entropy over rows of logits [R x V] whose target is not -1.
// Throws DataError if every row is masked.
template <typename T>
Tensor<T> cross_entropy_mean(const Tensor<T>& logits, const std::vector<int32_t>& targets);

template <typename T> Tensor<T> sum(const Tensor<T>& x);

// Mean over i of logits[rows[i], tok_a[i]] minus, when tok_b[i] >= 0,
// logits[rows[i], tok_b[i]]. The scalar metric for attribution runs.
template <typename T>
Tensor<T> logit_gather_mean(const Tensor<T>& logits, const std::vector<int64_t>& rows,
                            const std::vector<int32_t>& tok_a, const std::vector<int32_t>& tok_b);

// Fused multi-head causal self-attention over a flattened batch.
// q,k,v are [B*T x d] with d = H * dh, row r = b*T + t. lens[b] <= T marks the
// valid prefix of each sequence (empty lens means all rows valid).
// Rows with t >= lens[b] produce zeros.
struct AttnIdentityOverride {
  int head = -1;   // which head to force to the identity pattern
  int pos = -1;    // query position, or -1 for every position
};
template <typename T>
struct AttnOptions {
  std::vector<int> lens;                           // per-sequence valid length
  std::vector<AttnIdentityOverride> identity;      // self-attention-only heads
  std::vector<T>* pattern_out = nullptr;           // filled with [B,H,T,T] probs
};
template <typename T>
Tensor<T> causal_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, int64_t B,
                           int64_t T_, int64_t H, const AttnOptions<T>& opts = {});

// ---- gradient checking ----

struct GradcheckReport {
  double max_rel_err = 0.0;
  int64_t worst_input = -1;   // which input tensor
  int64_t worst_index = -1;   // flat element index within it
  bool pass = false;
};

// fn must be a pure deterministic function of `inputs` returning a scalar.
// Compares reverse-mode gradients against central differences with step h.
GradcheckReport gradcheck(const std::function<Tensor<double>(std::vector<Tensor<double>>&)>& fn,
                          std::vector<Tensor<double>>& inputs, double h = 1e-5,
                          double tol = 1e-6);

// ---- no-grad helpers used across modules ----

// Row-wise softmax of a raw buffer (no tape), in place.
template <typename T>
void softmax_rows_inplace(T* x, int64_t rows, int64_t cols);

template <typename T>
void check_all_finite(const Tensor<T>& t, const char* where);

}  // namespace mr
