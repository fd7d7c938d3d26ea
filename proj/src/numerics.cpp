#include "timegate/numerics.hpp"

#include <vector>

namespace timegate {

namespace {

double pairwise_sum_impl(const double* data, std::size_t n) {
    if (n <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += data[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_impl(values.data(), values.size());
}

double mean(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("mean: empty input");
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw InsufficientData("sample_variance: need at least 2 values");
    const double mu = mean(values);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - mu;
        sq[i] = d * d;
    }
    return pairwise_sum(sq) / static_cast<double>(n - 1);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ull;
    }
    return hash;
}

}  // namespace timegate
