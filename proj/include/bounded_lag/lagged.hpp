#ifndef BOUNDED_LAG_LAGGED_HPP
#define BOUNDED_LAG_LAGGED_HPP

// Lagged-policy scenarios. The utility change ΔU arrives in N equal
// increments; at step t the agent still acts with p_{t-1}, earns
// E_{p_{t-1}}[ΔU/N], and only then moves to the Gibbs update p_t. Whatever
// it could have earned beyond that (the step's free-energy gain) is
// dissipated: (1/β)·KL(p_{t-1}‖p_t).

#include "bounded_lag/core.hpp"
#include "bounded_lag/equilibrium.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bounded_lag
{

enum class ScheduleKind
{
    linear,
};

/// U_t = U_0 + (t/N)·ΔU. Only the increments matter, so U_0 is not stored.
class UtilitySchedule
{
public:
    UtilitySchedule(UtilityChange total, std::uint32_t n_steps, ScheduleKind kind = ScheduleKind::linear)
        : total_(std::move(total)), n_steps_(n_steps), kind_(kind)
    {
        if (n_steps_ < 1)
            throw DomainError("schedule needs at least one step");
    }

    [[nodiscard]] const UtilityChange& total() const noexcept { return total_; }
    [[nodiscard]] std::uint32_t        n_steps() const noexcept { return n_steps_; }
    [[nodiscard]] ScheduleKind         kind() const noexcept { return kind_; }
    [[nodiscard]] const SpacePtr&      space() const noexcept { return total_.space(); }

    /// ΔU_t = U_t − U_{t-1}, for t in 1..N.
    [[nodiscard]] UtilityChange increment(std::uint32_t t) const
    {
        if (t < 1 || t > n_steps_)
            throw DomainError("schedule step " + std::to_string(t) + " outside 1.." + std::to_string(n_steps_));
        return total_.scaled(1.0 / static_cast< double >(n_steps_));
    }

    /// Schedule position t/N.
    [[nodiscard]] double position(std::uint32_t t) const noexcept
    {
        return static_cast< double >(t) / static_cast< double >(n_steps_);
    }

private:
    UtilityChange  total_;
    std::uint32_t  n_steps_;
    ScheduleKind   kind_;
};

struct StepRecord
{
    std::uint32_t t;
    double        position; ///< t/N
    Policy        policy_used;
    Policy        policy_after;
    double        net_utility;
    double        dissipated_utility; ///< may be ±inf only if a policy loses support
    double        free_energy_gain;
};

struct LagTrace
{
    std::vector< StepRecord > steps;
    double                    total_net;
    double                    total_dissipated;
    double                    total_free_energy;
    ResourceParameter         beta;

    [[nodiscard]] const Policy& final_policy() const { return steps.back().policy_after; }
};

/// Runs the N-step lagged scenario. N = 1 is the one-step scenario.
inline LagTrace n_step_scenario(const Policy& prior, const UtilitySchedule& schedule, ResourceParameter beta)
{
    detail::require_same_space(prior.space(), schedule.space(), "n_step_scenario");

    LagTrace trace{{}, 0.0, 0.0, 0.0, beta};
    trace.steps.reserve(schedule.n_steps());

    CompensatedSum net_sum;
    CompensatedSum diss_sum;
    CompensatedSum gain_sum;

    Policy current = prior;
    for (std::uint32_t t = 1; t <= schedule.n_steps(); ++t)
    {
        const UtilityChange step_du = schedule.increment(t);
        EquilibriumResult   eq      = gibbs_update(current, step_du, beta);

        const double net  = expected_utility(current, step_du);
        const double diss = beta.is_zero() ? 0.0 : kl_divergence(current, eq.posterior) / beta.value();

        net_sum.add(net);
        diss_sum.add(diss);
        gain_sum.add(eq.free_energy_delta);

        trace.steps.push_back(
            {t, schedule.position(t), current, eq.posterior, net, diss, eq.free_energy_delta});
        current = std::move(eq.posterior);
    }

    trace.total_net         = net_sum.value();
    trace.total_dissipated  = diss_sum.value();
    trace.total_free_energy = gain_sum.value();
    return trace;
}

inline LagTrace one_step_scenario(const Policy& prior, const UtilityChange& du, ResourceParameter beta)
{
    return n_step_scenario(prior, UtilitySchedule(du, 1), beta);
}

struct DissipationRow
{
    std::uint32_t n_steps;
    double        total_dissipated;
    double        total_net;
    double        total_free_energy;
};

/// Total dissipation, net utility and free energy for each schedule length.
inline std::vector< DissipationRow > dissipation_vs_n(const Policy& prior, const UtilityChange& du,
                                                      ResourceParameter beta, const std::vector< std::uint32_t >& n_values)
{
    if (n_values.empty())
        throw DomainError("dissipation_vs_n: empty list of step counts");
    std::vector< DissipationRow > rows;
    rows.reserve(n_values.size());
    for (auto n : n_values)
    {
        if (n < 1)
            throw DomainError("dissipation_vs_n: step counts must be >= 1");
        const auto trace = n_step_scenario(prior, UtilitySchedule(du, n), beta);
        rows.push_back({n, trace.total_dissipated, trace.total_net, trace.total_free_energy});
    }
    return rows;
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_LAGGED_HPP
