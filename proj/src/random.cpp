#include "cfmac/random.hpp"

namespace cfmac {

SeededRandom::SeededRandom(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

std::int64_t SeededRandom::next_uniform(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
}

bool SeededRandom::next_bernoulli(double p) {
    return std::bernoulli_distribution(p)(engine_);
}

}  // namespace cfmac
