#ifndef PETITIONS_LDA_INTERNAL_HPP
#define PETITIONS_LDA_INTERNAL_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <algorithm>
#include <vector>

#include "petitions/common.hpp"

namespace petitions::lda::detail {

/// Uniform double in [0, 1) from the top 53 bits; identical on every standard library.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view id) {
    return splitmix64(seed ^ fnv1a64(id));
}

/// Fisher-Yates with uniform01 draws.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)), i - 1);
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace petitions::lda::detail

#endif
