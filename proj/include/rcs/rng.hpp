#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace rcs {

using rng_t = std::mt19937_64;

/// Uniform draw in [0, n) by rejection. std::uniform_int_distribution is
/// implementation-defined, which would make seeded outputs differ across
/// standard libraries.
template <typename Engine>
std::uint64_t uniform_index(Engine& rng, std::uint64_t n)
{
    static_assert(Engine::min() == 0 && Engine::max() == ~std::uint64_t{0}, "needs a full 64-bit engine");
    const std::uint64_t limit = Engine::max() - (Engine::max() % n);
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return x % n;
}

/// Uniform real in [0, 1) from the top 53 bits.
inline double uniform_real(rng_t& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, rng_t& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

/// SplitMix64: a small engine used for cheap per-replicate substreams.
class splitmix64 {
  public:
    using result_type = std::uint64_t;

    explicit splitmix64(std::uint64_t seed) : m_state(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()()
    {
        std::uint64_t z = (m_state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t m_state;
};

/// Independent stream for replicate `index` of a seeded computation.
inline splitmix64 substream(std::uint64_t seed, std::uint64_t index)
{
    splitmix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return splitmix64(mix());
}

}  // namespace rcs
