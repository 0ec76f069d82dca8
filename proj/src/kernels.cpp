#include "hetmem/kernels.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace hetmem {

namespace {

// Forward unit roots exp(-2*pi*i*j/n), j < n/2, computed in double and
// cached per size. The cache keeps repeated small transforms cheap while
// the direct trig per entry keeps twiddles accurate to float rounding.
const std::vector<Complex>& forward_roots(size_t n) {
  thread_local std::map<size_t, std::vector<Complex>> cache;
  auto [it, inserted] = cache.try_emplace(n);
  if (inserted) {
    auto& table = it->second;
    table.resize(n / 2);
    for (size_t j = 0; j < n / 2; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      table[j] = Complex(static_cast<float>(std::cos(angle)), static_cast<float>(std::sin(angle)));
    }
  }
  return it->second;
}

}  // namespace

void fft_radix2(std::span<Complex> data, bool inverse) {
  const size_t n = data.size();
  if (n == 0 || !std::has_single_bit(n))
    raise(ErrorCode::NotPowerOfTwo, "fft size " + std::to_string(n));
  if (n < kMinFftSize || n > kMaxFftSize)
    raise(ErrorCode::InvalidArgument,
          "fft size " + std::to_string(n) + " outside [" + std::to_string(kMinFftSize) + ", " +
              std::to_string(kMaxFftSize) + "]");

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const auto& roots = forward_roots(n);
  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t stride = n / len;
    for (size_t base = 0; base < n; base += len) {
      for (size_t k = 0; k < len / 2; ++k) {
        Complex w = roots[k * stride];
        if (inverse) w = std::conj(w);
        const Complex even = data[base + k];
        const Complex odd = data[base + k + len / 2] * w;
        data[base + k] = even + odd;
        data[base + k + len / 2] = even - odd;
      }
    }
  }

  if (inverse) {
    const float scale = 1.0f / static_cast<float>(n);
    for (auto& v : data) v *= scale;
  }
}

void zip_pointwise(std::span<const Complex> a, std::span<const Complex> b,
                   std::span<Complex> out) {
  if (a.size() != b.size() || a.size() != out.size())
    raise(ErrorCode::LengthMismatch, "zip operands of lengths " + std::to_string(a.size()) +
                                         ", " + std::to_string(b.size()) + ", " +
                                         std::to_string(out.size()));
  for (size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
}

void corner_turn(std::span<const Complex> in, std::span<Complex> out, uint32_t rows,
                 uint32_t cols) {
  if (in.size() != out.size() || in.size() != static_cast<size_t>(rows) * cols)
    raise(ErrorCode::LengthMismatch, "corner turn extent does not match rows x cols");
  for (uint32_t r = 0; r < rows; ++r)
    for (uint32_t c = 0; c < cols; ++c)
      out[static_cast<size_t>(c) * rows + r] = in[static_cast<size_t>(r) * cols + c];
}

}  // namespace hetmem
