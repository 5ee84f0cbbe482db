#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace triage {

// Deterministic random source. All draw paths are spelled out here instead of
// going through std <random> distributions, whose outputs are
// implementation-defined; mt19937_64 itself is fully specified, so a seed
// produces the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Dedicated stream for (seed, epoch) so per-epoch shuffles never share
    // state with anything else.
    static Rng for_epoch(std::uint64_t seed, std::uint64_t epoch) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(epoch),
                          static_cast<std::uint32_t>(epoch >> 32)};
        Rng rng(0);
        rng.engine_.seed(seq);
        return rng;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), rejection sampled to avoid modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) {
            return 0;
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace triage
