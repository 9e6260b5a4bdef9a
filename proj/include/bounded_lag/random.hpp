#ifndef BOUNDED_LAG_RANDOM_HPP
#define BOUNDED_LAG_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace bounded_lag
{

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31U);
}

/// SplitMix64 generator.
///
/// Substream rule: the stream for (seed, index) starts from state
/// mix64(mix64(seed) + (index + 1) * 0x9E3779B97F4A7C15). Work item `index`
/// always draws from its own substream, so results do not depend on how
/// items are scheduled across threads.
class SplitMix64
{
public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

    explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    static constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept
    {
        return SplitMix64(mix64(mix64(seed) + (index + 1) * golden_gamma));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept
    {
        state_ += golden_gamma;
        return mix64(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast< double >((*this)() >> 11U) * 0x1.0p-53; }

    /// Standard exponential variate.
    double exponential() noexcept { return -std::log1p(-uniform()); }

private:
    std::uint64_t state_;
};

/// Symmetric Dirichlet(1) draw, i.e. a uniform point on the simplex.
inline std::vector< double > dirichlet_uniform(SplitMix64& rng, std::size_t dim)
{
    std::vector< double > w(dim);
    double                total = 0.0;
    for (double& x : w)
    {
        x = rng.exponential();
        total += x;
    }
    if (total == 0.0)
        return std::vector< double >(dim, 1.0 / static_cast< double >(dim));
    for (double& x : w)
        x /= total;
    return w;
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_RANDOM_HPP
