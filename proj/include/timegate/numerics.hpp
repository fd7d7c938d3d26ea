#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "timegate/errors.hpp"

namespace timegate {

// Pairwise (tree) summation: deterministic reduction order and O(log n)
// rounding error growth. Used for every statistics reduction in the
// analysis chain so results are bit-reproducible.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

// Unbiased sample variance (divides by n-1); requires n >= 2.
double sample_variance(std::span<const double> values);

// FNV-1a, 64 bit; used for config fingerprints in file headers.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace timegate
