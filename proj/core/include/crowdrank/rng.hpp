#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "crowdrank/types.hpp"

namespace crowdrank {

// All randomness flows through named streams derived from one master seed, so
// every run is reproducible and adding a consumer never shifts another
// stream's draws.  derive_seed hashes (base, tag, index) with FNV-1a and a
// splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t index = 0);

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    RngStream derive(std::string_view tag, std::uint64_t index = 0) const {
        return RngStream(derive_seed(seed_, tag, index));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.  We avoid the standard
    // library distributions on purpose: their algorithms are implementation
    // defined and would break byte-identical output across toolchains.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Exact at p <= 0 and p >= 1; consumes one draw otherwise.
    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }

    // Unbiased integer in [0, n) via rejection of the bottom 2^64 mod n values.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw Error("uniform_index: empty range");
        const std::uint64_t threshold = (0 - n) % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x < threshold);
        return x % n;
    }

    // Fisher-Yates; std::shuffle is implementation defined, this is not.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j =
                static_cast<std::size_t>(uniform_index(static_cast<std::uint64_t>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace crowdrank
