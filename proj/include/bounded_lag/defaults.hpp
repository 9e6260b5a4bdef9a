#ifndef BOUNDED_LAG_DEFAULTS_HPP
#define BOUNDED_LAG_DEFAULTS_HPP

#include "bounded_lag/core.hpp"
#include "bounded_lag/sweep.hpp"

#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

namespace bounded_lag
{

/// Two actions {a, b}, uniform prior, ΔU = (−2, 5).
struct ReferenceInstance
{
    SpacePtr      space;
    Policy        prior;
    UtilityChange du;
};

inline ReferenceInstance reference_instance()
{
    auto space = std::make_shared< const ActionSpace >(std::vector< std::string >{"a", "b"});
    return {space, Policy::from_probabilities(space, {0.5, 0.5}), UtilityChange(space, {-2.0, 5.0})};
}

/// β grid used by the default sweeps; intermediate points are artifact
/// choices, 0 and 5 are the reference cases.
inline std::vector< double > default_beta_grid() { return {0.0, 0.25, 0.5, 1.0, 2.0, 5.0}; }

/// Reference instance, default β grid, N = 4.
inline SweepConfig figure1_config(std::uint64_t seed = 0, std::uint64_t mc_samples = 0)
{
    auto ref = reference_instance();
    return {ref.prior, ref.du, default_beta_grid(), {4}, seed, mc_samples};
}

/// Reference instance, default β grid, N = 1..20.
inline SweepConfig figure2_config(std::uint64_t seed = 0, std::uint64_t mc_samples = 0)
{
    auto                         ref = reference_instance();
    std::vector< std::uint32_t > ns(20);
    std::iota(ns.begin(), ns.end(), 1U);
    return {ref.prior, ref.du, default_beta_grid(), ns, seed, mc_samples};
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_DEFAULTS_HPP
