#include "crowdrank/rng.hpp"

namespace crowdrank {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t index) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](unsigned char c) { h = (h ^ c) * 1099511628211ULL; };
    for (char c : tag) mix(static_cast<unsigned char>(c));
    for (int s = 0; s < 64; s += 8) mix(static_cast<unsigned char>(base >> s));
    for (int s = 0; s < 64; s += 8) mix(static_cast<unsigned char>(index >> s));
    return splitmix64(h);
}

}  // namespace crowdrank
