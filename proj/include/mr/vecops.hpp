#pragma once
// Elementwise kernels hot enough to deserve a dedicated translation unit that
// is compiled with -ffast-math so the compiler can use vector libm routines
// (tanh dominates the GELU cost otherwise). Inputs are assumed finite; the
// finiteness guard in the tensor layer runs on the outputs as usual.

#include <cstdint>

namespace mr::detail {

// out[i] = 0.5 x (1 + tanh(c (x + a x^3))); optionally stores tanh for reuse.
template <typename T>
void gelu_forward(const T* x, T* out, T* tanh_save, int64_t n);

// dx[i] += dout[i] * dgelu/dx using tanh values saved by the forward pass.
template <typename T>
void gelu_backward_accum(const T* x, const T* tanh_saved, const T* dout, T* dx, int64_t n);

}  // namespace mr::detail
