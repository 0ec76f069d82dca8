#pragma once

// Numeric kernels shared by every resource type. A single implementation
// serves CPU and simulated accelerators so outputs are bit-identical no
// matter where a task lands.

#include <complex>
#include <cstdint>
#include <span>

#include "hetmem/errors.hpp"

namespace hetmem {

using Complex = std::complex<float>;

inline constexpr uint64_t kBytesPerSample = sizeof(Complex);  // two 32-bit floats

inline constexpr uint32_t kMinFftSize = 64;
inline constexpr uint32_t kMaxFftSize = 131072;

/// In-place radix-2 transform. Forward: X[k] = sum_j x[j] e^(-2*pi*i*jk/n).
/// Inverse applies the 1/n normalization so the two compose to identity.
/// n must be a power of two in [kMinFftSize, kMaxFftSize].
void fft_radix2(std::span<Complex> data, bool inverse);

/// out[k] = a[k] * b[k], complex multiply. Lengths must match.
void zip_pointwise(std::span<const Complex> a, std::span<const Complex> b,
                   std::span<Complex> out);

/// Corner turn: viewing `in` as rows x cols row-major, writes its transpose
/// into `out` (cols x rows row-major).
void corner_turn(std::span<const Complex> in, std::span<Complex> out,
                 uint32_t rows, uint32_t cols);

}  // namespace hetmem
