#pragma once

#include <cstdint>

#include "qrng/chacha.hpp"

namespace qrng {

/// ln(k!) from a precomputed table below 256 and a Stirling series above.
double log_factorial(std::uint64_t k) noexcept;

/// Standard normal deviate (Marsaglia polar method).
double standard_normal(ChaChaStream& gen) noexcept;

/// Poisson deviate: sequential inversion for mean < 30, Hormann's PTRS
/// transformed rejection above. Both are platform independent given the stream.
std::int64_t poisson(ChaChaStream& gen, double mean) noexcept;

}  // namespace qrng
