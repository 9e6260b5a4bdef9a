#ifndef BOUNDED_LAG_EQUILIBRIUM_HPP
#define BOUNDED_LAG_EQUILIBRIUM_HPP

#include "bounded_lag/core.hpp"
#include "bounded_lag/random.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace bounded_lag
{

struct EquilibriumResult
{
    Policy posterior;
    double free_energy_delta; ///< ΔF, utility units
    double log_partition;     ///< ln Z
};

/// Bounded-rational optimum p₁ ∝ p₀·exp(βΔU) and ΔF = ln Z / β.
///
/// β = 0 is handled exactly: the posterior is the prior and ΔF is the prior
/// mean of ΔU (the β→0 limit of ln Z / β).
inline EquilibriumResult gibbs_update(const Policy& prior, const UtilityChange& du, ResourceParameter beta)
{
    detail::require_same_space(prior.space(), du.space(), "gibbs_update");
    if (beta.is_zero())
        return {prior, expected_utility(prior, du), 0.0};

    const double          b = beta.value();
    std::vector< double > exponents(du.size());
    for (std::size_t i = 0; i < du.size(); ++i)
        exponents[i] = b * du[i];

    const double log_z = log_sum_exp_weighted(prior.log_probs(), exponents);

    std::vector< double > log_post(du.size());
    for (std::size_t i = 0; i < du.size(); ++i)
        log_post[i] = prior.log_prob(i) + exponents[i];
    return {Policy::from_log_weights(prior.space(), std::move(log_post)), log_z / b, log_z};
}

/// ΔF[p] = E_p[ΔU] − (1/β)·KL(p‖prior). Infinite when the KL term is.
inline double free_energy_functional(const Policy& p, const Policy& prior, const UtilityChange& du,
                                     ResourceParameter beta)
{
    detail::require_same_space(p.space(), prior.space(), "free_energy_functional");
    detail::require_same_space(p.space(), du.space(), "free_energy_functional");
    if (beta.is_zero())
        throw DomainError("free_energy_functional is undefined at beta = 0; use gibbs_update's limit branch");
    const double kl = kl_divergence(p, prior);
    if (kl == infinity)
        return beta.value() > 0.0 ? -infinity : infinity;
    return expected_utility(p, du) - kl / beta.value();
}

struct VariationalReport
{
    bool        passed;
    double      worst_violation; ///< max amount by which a sample beat the optimum (≤ 0 when none did)
    double      optimum;         ///< ΔF of the Gibbs posterior
    std::size_t trials;
};

/// Brute-force check that no Dirichlet(1) policy beats the Gibbs optimum
/// (maximum for β > 0, minimum for β < 0) by more than `slack`.
inline VariationalReport verify_variational_optimum(const Policy& prior, const UtilityChange& du,
                                                    ResourceParameter beta, std::size_t trials, std::uint64_t seed,
                                                    double slack = 1e-9)
{
    if (beta.is_zero())
        throw DomainError("verify_variational_optimum requires beta != 0");
    if (trials < 1)
        throw DomainError("verify_variational_optimum requires at least one trial");
    detail::require_same_space(prior.space(), du.space(), "verify_variational_optimum");

    const double optimum = gibbs_update(prior, du, beta).free_energy_delta;
    const double sign    = static_cast< double >(beta.sign());

    double worst = -infinity;
    for (std::size_t k = 0; k < trials; ++k)
    {
        auto         rng   = SplitMix64::substream(seed, k);
        const Policy p     = Policy::from_probabilities(prior.space(), dirichlet_uniform(rng, prior.size()));
        const double value = free_energy_functional(p, prior, du, beta);
        worst              = std::max(worst, sign * (value - optimum));
    }
    return {worst <= slack, worst, optimum, trials};
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_EQUILIBRIUM_HPP
