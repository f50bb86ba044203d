#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace cfmac {

/// Source of inclusive uniform integers. Same seed, same sequence.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual std::int64_t next_uniform(std::int64_t lo, std::int64_t hi) = 0;
    /// Bernoulli trial with success probability `p`.
    virtual bool next_bernoulli(double p) = 0;
};

class SeededRandom final : public RandomSource {
public:
    /// Independent streams are derived from (seed, stream) so that adding a
    /// station never perturbs the draws of the others.
    explicit SeededRandom(std::uint64_t seed, std::uint64_t stream = 0);

    std::int64_t next_uniform(std::int64_t lo, std::int64_t hi) override;
    bool next_bernoulli(double p) override;

private:
    std::mt19937_64 engine_;
};

// Test double: answers every draw through a user callback.
class ScriptedRandom final : public RandomSource {
public:
    using Picker = std::function<std::int64_t(std::int64_t, std::int64_t)>;

    explicit ScriptedRandom(Picker pick, bool bernoulli = false)
        : pick_(std::move(pick)), bernoulli_(bernoulli) {}

    std::int64_t next_uniform(std::int64_t lo, std::int64_t hi) override { return pick_(lo, hi); }
    bool next_bernoulli(double) override { return bernoulli_; }

private:
    Picker pick_;
    bool bernoulli_;
};

}  // namespace cfmac
