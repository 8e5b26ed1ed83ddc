#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace coxcorr {

using Generator = std::mt19937_64;

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Folds a root seed and a list of stream coordinates into one 64-bit seed.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t root,
                                                  std::initializer_list<std::uint64_t> coords) noexcept {
    std::uint64_t h = splitmix64(root);
    for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
    return h;
}

/// Independent generator for replication `index` of the cell (b_n, a_n).
/// Within a replication the stream is consumed in a fixed order: all latent
/// normals first (Z1, Z2 per fine step), then Poisson increments
/// (dY1_j, dY2_j for j = 1..b_n).
[[nodiscard]] inline Generator substream(std::uint64_t root, std::uint64_t b_n, double a_n,
                                         std::uint64_t index) {
    return Generator(derive_seed(root, {b_n, std::bit_cast<std::uint64_t>(a_n), index}));
}

}  // namespace coxcorr
