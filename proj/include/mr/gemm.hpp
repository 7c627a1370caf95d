#pragma once
// Dense GEMM entry point used by the tensor layer. Either forwards to
// single-threaded OpenBLAS (fast path) or to a portable blocked kernel.
// Both paths are deterministic: fixed accumulation order per output element
// at a fixed thread count (we pin BLAS to one thread at startup).

#include <cstdint>

namespace mr::detail {

// C[m x n] (+)= alpha * op(A) * op(B), row-major, ld* are row strides.
// trans_a=false: A is m x k; true: A is k x m (logical op(A) is m x k).
template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha,
          const T* a, int64_t lda, const T* b, int64_t ldb, T beta, T* c, int64_t ldc);

void pin_blas_single_thread();

// OpenBLAS's runtime CPU detection can fall back to SSE2-era kernels on CPUs
// whose model id postdates its table (seen on masked-cpuid cloud VMs), costing
// ~5x on GEMM. When that happens and OPENBLAS_CORETYPE is unset, pick a kernel
// matching the instruction set and re-exec the process so the library loads
// with it; no-op otherwise. Call first thing in main().
void ensure_fast_blas_kernel(char** argv);

// Keep freed multi-MB activation buffers in the heap instead of returning
// them to the kernel (glibc mmap/trim thresholds), so each training step
// reuses warm pages. Roughly halves step time at transformer batch sizes.
void tune_allocator_for_large_buffers();

}  // namespace mr::detail
