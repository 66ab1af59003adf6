#pragma once

#include <cstddef>

namespace warpalign {

// Channel-major buffers: element (c, p) lives at c * len + p.

// y[o][p] = b[o] + sum_c sum_k w[o][c][k] x[c][p + k - (width-1)/2], zero padded.
void conv1d_same(const double* x, std::size_t cin, std::size_t len, const double* w,
                 const double* b, std::size_t cout, std::size_t width, double* y);

// Valid average pooling with stride 1; output length is len - pool + 1.
void avg_pool(const double* r, std::size_t channels, std::size_t len, std::size_t pool,
              double* z);

// Adjoint of avg_pool: accumulates dz / pool into every input of each window.
void avg_pool_backward(const double* dz, std::size_t channels, std::size_t len, std::size_t pool,
                       double* dr);

}  // namespace warpalign
