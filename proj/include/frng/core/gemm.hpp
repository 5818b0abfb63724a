#pragma once

#include <cstddef>

#include "frng/core/parallel.hpp"

namespace frng {

// Row-major matrix kernels. The k-loop runs sequentially per output row, and
// rows are partitioned into fixed chunks, so results do not depend on the
// thread count. The axpy form lets the compiler vectorize over n.

// C[m,n] (+)= A[m,k] * B[k,n]
template <class T>
void gemm_nn(const T* A, const T* B, T* C, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    parallel_for(m, 32, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            T* c = C + i * n;
            if (!accumulate)
                for (std::size_t j = 0; j < n; ++j) c[j] = T(0);
            const T* a = A + i * k;
            std::size_t p = 0;
            for (; p + 4 <= k; p += 4) {
                const T a0 = a[p], a1 = a[p + 1], a2 = a[p + 2], a3 = a[p + 3];
                const T* b0 = B + p * n;
                const T* b1 = b0 + n;
                const T* b2 = b1 + n;
                const T* b3 = b2 + n;
                for (std::size_t j = 0; j < n; ++j)
                    c[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
            }
            for (; p < k; ++p) {
                const T ap = a[p];
                const T* b = B + p * n;
                for (std::size_t j = 0; j < n; ++j) c[j] += ap * b[j];
            }
        }
    });
}

// C[m,n] (+)= A[m,k] * B[n,k]^T   (dot-product form, contiguous in k)
template <class T>
void gemm_nt(const T* A, const T* B, T* C, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    parallel_for(m, 32, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const T* a = A + i * k;
            T* c = C + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                const T* b = B + j * k;
                T acc = T(0);
                for (std::size_t p = 0; p < k; ++p) acc += a[p] * b[p];
                c[j] = accumulate ? c[j] + acc : acc;
            }
        }
    });
}

// C[m,n] (+)= A[k,m]^T * B[k,n]
template <class T>
void gemm_tn(const T* A, const T* B, T* C, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    parallel_for(m, 32, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            T* c = C + i * n;
            if (!accumulate)
                for (std::size_t j = 0; j < n; ++j) c[j] = T(0);
            for (std::size_t p = 0; p < k; ++p) {
                const T ap = A[p * m + i];
                const T* b = B + p * n;
                for (std::size_t j = 0; j < n; ++j) c[j] += ap * b[j];
            }
        }
    });
}

} // namespace frng
