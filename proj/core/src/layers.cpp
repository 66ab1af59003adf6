#include "warpalign/layers.hpp"

#include <algorithm>

namespace warpalign {

void conv1d_same(const double* x, std::size_t cin, std::size_t len, const double* w,
                 const double* b, std::size_t cout, std::size_t width, double* y) {
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((width - 1) / 2);
  const auto L = static_cast<std::ptrdiff_t>(len);
  for (std::size_t o = 0; o < cout; ++o) {
    double* yo = y + o * len;
    std::fill(yo, yo + len, b[o]);
    for (std::size_t c = 0; c < cin; ++c) {
      const double* xc = x + c * len;
      const double* wk = w + (o * cin + c) * width;
      for (std::size_t k = 0; k < width; ++k) {
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
        const std::ptrdiff_t p0 = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t p1 = std::min<std::ptrdiff_t>(L, L - shift);
        const double wv = wk[k];
        for (std::ptrdiff_t p = p0; p < p1; ++p) yo[p] += wv * xc[p + shift];
      }
    }
  }
}

void avg_pool(const double* r, std::size_t channels, std::size_t len, std::size_t pool,
              double* z) {
  const std::size_t out_len = len - pool + 1;
  const double inv = 1.0 / static_cast<double>(pool);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* rc = r + c * len;
    double* zc = z + c * out_len;
    for (std::size_t p = 0; p < out_len; ++p) {
      double s = 0.0;
      for (std::size_t q = 0; q < pool; ++q) s += rc[p + q];
      zc[p] = s * inv;
    }
  }
}

void avg_pool_backward(const double* dz, std::size_t channels, std::size_t len, std::size_t pool,
                       double* dr) {
  const std::size_t out_len = len - pool + 1;
  const double inv = 1.0 / static_cast<double>(pool);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* dzc = dz + c * out_len;
    double* drc = dr + c * len;
    for (std::size_t p = 0; p < out_len; ++p) {
      const double v = dzc[p] * inv;
      for (std::size_t q = 0; q < pool; ++q) drc[p + q] += v;
    }
  }
}

}  // namespace warpalign
