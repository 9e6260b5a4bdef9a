#ifndef BOUNDED_LAG_VERIFY_HPP
#define BOUNDED_LAG_VERIFY_HPP

// Self-verification suite behind `bounded_lag verify`: every library
// invariant, checked on seeded random instances plus a fixed set of
// deterministic identities on the two-action reference instance.

#include "bounded_lag/core.hpp"
#include "bounded_lag/defaults.hpp"
#include "bounded_lag/equilibrium.hpp"
#include "bounded_lag/jarzynski.hpp"
#include "bounded_lag/lagged.hpp"
#include "bounded_lag/random.hpp"
#include "bounded_lag/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace bounded_lag
{

/// |a − b| scaled by max(1, |a|, |b|).
inline double scaled_error(double a, double b)
{
    if (a == b)
        return 0.0;
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

struct RandomInstance
{
    Policy            prior;
    UtilityChange     du;
    ResourceParameter beta;
};

struct InstanceRanges
{
    std::size_t min_actions = 2;
    std::size_t max_actions = 6;
    double      du_bound    = 10.0; ///< ΔU entries in [−bound, bound]
    double      beta_min    = -5.0;
    double      beta_max    = 5.0;
};

/// Dirichlet(1) prior, uniform ΔU and uniform nonzero β within `ranges`.
inline RandomInstance random_instance(SplitMix64& rng, const InstanceRanges& ranges = {})
{
    const auto span_k = ranges.max_actions - ranges.min_actions + 1;
    const auto k      = ranges.min_actions + static_cast< std::size_t >(rng() % span_k);
    auto       space  = ActionSpace::indexed(k);

    std::vector< double > du(k);
    for (double& v : du)
        v = ranges.du_bound * (2.0 * rng.uniform() - 1.0);

    double beta = 0.0;
    while (beta == 0.0)
        beta = ranges.beta_min + (ranges.beta_max - ranges.beta_min) * rng.uniform();

    return {Policy::from_probabilities(space, dirichlet_uniform(rng, k)), UtilityChange(space, std::move(du)),
            ResourceParameter(beta)};
}

enum class VerifyFault
{
    none,
    /// Test-only: skews the reference ΔF used by identity checks by 1e-6.
    perturbed_free_energy,
};

struct VerifyOptions
{
    std::size_t   trials  = 200;
    std::uint64_t seed    = 0;
    unsigned      threads = 0;
    VerifyFault   fault   = VerifyFault::none;
};

struct InvariantResult
{
    std::string name;
    bool        passed;
    double      worst;     ///< worst observed error (or margin, see detail)
    double      tolerance;
    std::string detail;
    bool        informational = false; ///< reported, never fails the suite
};

namespace detail
{

class InvariantCheck
{
public:
    InvariantCheck(std::string name, double tolerance) : name_(std::move(name)), tolerance_(tolerance) {}

    /// Records an error value; passes while error <= tolerance.
    void error(double e)
    {
        if (std::isnan(e))
            e = infinity;
        worst_ = std::max(worst_, e);
    }
    void require(bool ok, const std::string& why)
    {
        if (!ok && failure_.empty())
            failure_ = why;
        if (!ok)
            forced_fail_ = true;
    }
    void note(std::string d) { detail_ = std::move(d); }

    [[nodiscard]] InvariantResult result(bool informational = false) const
    {
        const bool ok = !forced_fail_ && worst_ <= tolerance_;
        return {name_, ok, worst_, tolerance_, failure_.empty() ? detail_ : failure_, informational};
    }

private:
    std::string name_;
    double      tolerance_;
    double      worst_       = 0.0;
    bool        forced_fail_ = false;
    std::string failure_;
    std::string detail_;
};

inline std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline Policy random_policy(SplitMix64& rng, const SpacePtr& space)
{
    return Policy::from_probabilities(space, dirichlet_uniform(rng, space->size()));
}

} // namespace detail

/// Runs every invariant. With trials == 0 only the deterministic identities
/// on the reference instance run.
inline std::vector< InvariantResult > run_invariant_suite(const VerifyOptions& opt)
{
    using detail::InvariantCheck;
    std::vector< InvariantResult > out;

    const double fault_scale = opt.fault == VerifyFault::perturbed_free_energy ? 1.0 + 1e-6 : 1.0;
    auto         instance    = [&](std::uint64_t stream, std::size_t i, const InstanceRanges& r = {}) {
        auto rng = SplitMix64::substream(opt.seed ^ (stream << 40U), i);
        return random_instance(rng, r);
    };

    const auto ref = reference_instance();

    // ---- deterministic identities on the reference instance -------------
    {
        InvariantCheck c("reference_one_step_values", 1e-4);
        const auto     tr = one_step_scenario(ref.prior, ref.du, ResourceParameter(1.0));
        c.error(std::abs(tr.total_free_energy * fault_scale - 4.30776428589383));
        c.error(std::abs(tr.total_net - 1.5));
        c.error(std::abs(tr.total_dissipated - 2.80776428589383));
        c.note("dF=" + detail::fmt(tr.total_free_energy) + " net=" + detail::fmt(tr.total_net) +
               " diss=" + detail::fmt(tr.total_dissipated));
        out.push_back(c.result());
    }
    {
        InvariantCheck c("reference_exact_jarzynski", 1e-9);
        for (double b : {-2.0, -1.0, 0.0, 0.5, 1.0, 5.0})
            for (std::uint32_t n = 1; n <= 4; ++n)
            {
                const ResourceParameter beta(b);
                const auto              est = exact_path_expectation(ref.prior, UtilitySchedule(ref.du, n), beta);
                const auto              dF  = gibbs_update(ref.prior, ref.du, beta).free_energy_delta * fault_scale;
                c.error(scaled_error(est.log_estimate, b * dF));
            }
        out.push_back(c.result());
    }
    {
        InvariantCheck c("beta_zero_continuity", 1e-6);
        const double   at_zero = one_step_scenario(ref.prior, ref.du, ResourceParameter(0.0)).total_net;
        for (double b : {1e-8, -1e-8})
            for (std::uint32_t n : {1U, 4U})
            {
                const auto tr = n_step_scenario(ref.prior, UtilitySchedule(ref.du, n), ResourceParameter(b));
                c.error(std::abs(tr.total_net - at_zero));
            }
        out.push_back(c.result());
    }
    {
        InvariantCheck c("quasi_static_limit", 0.01);
        const auto     tr = n_step_scenario(ref.prior, UtilitySchedule(ref.du, 1000), ResourceParameter(1.0));
        c.error(tr.total_dissipated);
        c.note("N=1000 total dissipation " + detail::fmt(tr.total_dissipated));
        out.push_back(c.result());
    }
    {
        InvariantCheck c("figure1_shape", 0.0);
        const auto     rep = figure1_report(figure1_config(), opt.threads);
        const auto&    net1 = rep.net[0];
        for (double v : net1)
            c.require(v == net1.front(), "step-1 net utility varies with beta");
        for (std::size_t j = 1; j < rep.betas.size(); ++j)
            c.require(rep.dissipation[0][j] + 1e-12 >= rep.dissipation[0][j - 1],
                      "step-1 dissipation decreases in beta");
        for (std::size_t j = 0; j < rep.betas.size(); ++j)
        {
            if (rep.betas[j] == 5.0)
            {
                double later = 0.0;
                for (std::size_t t = 1; t < rep.dissipation.size(); ++t)
                    later += rep.dissipation[t][j];
                c.require(later < 0.01 * rep.dissipation[0][j], "beta=5 dissipation not concentrated in step 1");
            }
            if (rep.betas[j] > 0.0)
                c.require(rep.total_net[j] < rep.total_free_energy[j], "total net not below dF");
        }
        out.push_back(c.result());
    }
    {
        InvariantCheck c("figure2_shape", 1e-9);
        const auto     rows = run_sweep(figure2_config(), opt.threads);
        const SweepRow* prev = nullptr;
        for (const auto& r : rows)
        {
            if (r.t != 0)
                continue;
            if (prev && prev->beta == r.beta)
            {
                c.error(scaled_error(prev->free_energy_gain, r.free_energy_gain));
                c.require(r.dissipated_utility <= prev->dissipated_utility + 1e-9, "dissipation grows with N");
                c.require(r.net_utility + 1e-9 >= prev->net_utility, "net utility shrinks with N");
            }
            prev = &r;
        }
        out.push_back(c.result());
    }
    {
        InvariantCheck c("sweep_determinism", 0.0);
        auto           cfg = figure1_config(opt.seed, 2000);
        const auto     a   = to_csv(run_sweep(cfg, 1));
        const auto     b   = to_csv(run_sweep(cfg, 4));
        c.require(a == b, "CSV differs between 1 and 4 worker threads");
        out.push_back(c.result());
    }

    const std::size_t trials = opt.trials;
    if (trials == 0)
        return out;

    // ---- core ------------------------------------------------------------
    {
        InvariantCheck c("kl_nonnegative", 1e-12);
        for (std::size_t i = 0; i < trials; ++i)
        {
            auto         rng   = SplitMix64::substream(opt.seed ^ (1ULL << 40U), i);
            const auto   space = ActionSpace::indexed(2 + rng() % 5);
            const Policy p     = detail::random_policy(rng, space);
            const Policy q     = detail::random_policy(rng, space);
            const double kl    = kl_divergence(p, q);
            c.require(kl >= 0.0, "negative KL");
            c.error(kl_divergence(p, p));
            bool identical = true;
            for (std::size_t x = 0; x < p.size(); ++x)
                identical = identical && std::abs(p[x] - q[x]) <= 1e-12;
            c.require(identical || kl > 0.0, "KL is zero for distinct distributions");
        }
        out.push_back(c.result());
    }
    {
        InvariantCheck c("expected_utility_linear", 1e-12);
        for (std::size_t i = 0; i < trials; ++i)
        {
            const auto            inst = instance(2, i);
            auto                  rng  = SplitMix64::substream(opt.seed ^ (3ULL << 40U), i);
            std::vector< double > values(inst.du.size());
            for (double& v : values)
                v = 20.0 * rng.uniform() - 10.0;
            const UtilityChange other(inst.du.space(), std::move(values));
            const double        a = 2.0 * rng.uniform() - 1.0, b = 2.0 * rng.uniform() - 1.0;
            const double lhs = expected_utility(inst.prior, inst.du.scaled(a) + other.scaled(b));
            const double rhs = a * expected_utility(inst.prior, inst.du) + b * expected_utility(inst.prior, other);
            c.error(scaled_error(lhs, rhs));
        }
        out.push_back(c.result());
    }
    {
        InvariantCheck c("log_sum_exp_matches_naive", 1e-12);
        for (std::size_t i = 0; i < trials; ++i)
        {
            auto                  rng = SplitMix64::substream(opt.seed ^ (4ULL << 40U), i);
            const std::size_t     n   = 1 + rng() % 8;
            std::vector< double > lw(n), ex(n);
            double                naive = 0.0;
            for (std::size_t j = 0; j < n; ++j)
            {
                lw[j] = std::log(0.01 + rng.uniform());
                ex[j] = 40.0 * (2.0 * rng.uniform() - 1.0);
                naive += std::exp(lw[j] + ex[j]);
            }
            const double lse = log_sum_exp_weighted(lw, ex);
            c.error(std::abs(std::exp(lse) - naive) / naive);
        }
        out.push_back(c.result());
    }

    // ---- equilibrium -----------------------------------------------------
    {
        InvariantCheck eq3("free_energy_at_optimum", 1e-9);
        InvariantCheck eq4("posterior_exponential_identity", 1e-9);
        InvariantCheck eq5("utility_log_ratio_identity", 1e-9);
        InvariantCheck jensen("jensen_bound", 1e-12);
        InvariantCheck shift("shift_invariance", 1e-9);
        InvariantCheck negation("joint_negation", 0.0);
        for (std::size_t i = 0; i < trials; ++i)
        {
            const auto   inst = instance(5, i);
            const auto   eq   = gibbs_update(inst.prior, inst.du, inst.beta);
            const double b    = inst.beta.value();
            const double dF   = eq.free_energy_delta * fault_scale;

            eq3.error(scaled_error(free_energy_functional(eq.posterior, inst.prior, inst.du, inst.beta), dF));
            for (std::size_t x = 0; x < inst.prior.size(); ++x)
            {
                const double predicted = inst.prior[x] * std::exp(b * inst.du[x] - b * dF);
                const double scale     = std::max(eq.posterior[x], predicted);
                if (scale > 0.0)
                    eq4.error(std::abs(eq.posterior[x] - predicted) / scale);
                const double recovered = std::log(eq.posterior[x] / inst.prior[x]) / b + dF;
                eq5.error(scaled_error(inst.du[x], recovered));
            }

            const double prior_mean = expected_utility(inst.prior, inst.du);
            jensen.error(b > 0 ? prior_mean - eq.free_energy_delta : eq.free_energy_delta - prior_mean);

            const double offset  = 3.0;
            const auto   shifted = gibbs_update(inst.prior, inst.du.shifted(offset), inst.beta);
            shift.error(scaled_error(shifted.free_energy_delta, eq.free_energy_delta + offset));
            for (std::size_t x = 0; x < inst.prior.size(); ++x)
                shift.error(std::abs(shifted.posterior[x] - eq.posterior[x]));

            const auto negated = gibbs_update(inst.prior, -inst.du, -inst.beta);
            for (std::size_t x = 0; x < inst.prior.size(); ++x)
                negation.error(std::abs(negated.posterior[x] - eq.posterior[x]));
        }
        for (auto* c : {&eq3, &eq4, &eq5, &jensen, &shift, &negation})
            out.push_back(c->result());
    }
    {
        InvariantCheck c("variational_optimum", 1e-9);
        const std::size_t cases = std::max< std::size_t >(1, trials / 10);
        for (std::size_t i = 0; i < cases; ++i)
        {
            const auto inst = instance(6, i);
            const auto rep  = verify_variational_optimum(inst.prior, inst.du, inst.beta, 200, opt.seed + i);
            c.error(std::max(rep.worst_violation, 0.0));
        }
        out.push_back(c.result());
    }

    // ---- lagged ----------------------------------------------------------
    {
        InvariantCheck budget("step_budget", 1e-9);
        InvariantCheck totals("trace_totals", 1e-9);
        InvariantCheck telescoping("telescoping_free_energy", 1e-9);
        InvariantCheck final_policy("final_policy_matches_one_shot", 1e-9);
        InvariantCheck sign("dissipation_sign", 0.0);
        for (std::size_t i = 0; i < trials; ++i)
        {
            const auto          inst = instance(7, i);
            const std::uint32_t n    = 1 + static_cast< std::uint32_t >(i % 64);
            const auto          tr   = n_step_scenario(inst.prior, UtilitySchedule(inst.du, n), inst.beta);
            const auto          eq   = gibbs_update(inst.prior, inst.du, inst.beta);

            for (const auto& s : tr.steps)
                budget.error(std::abs(s.net_utility + s.dissipated_utility - s.free_energy_gain));
            totals.error(std::abs(tr.total_net - (tr.total_free_energy - tr.total_dissipated)));
            telescoping.error(scaled_error(tr.total_free_energy, eq.free_energy_delta * fault_scale));
            for (std::size_t x = 0; x < inst.prior.size(); ++x)
                final_policy.error(std::abs(tr.final_policy()[x] - eq.posterior[x]));
            sign.require(tr.total_dissipated * inst.beta.value() >= 0.0, "dissipation sign differs from beta sign");
        }
        for (auto* c : {&budget, &totals, &telescoping, &final_policy, &sign})
            out.push_back(c->result());
    }
    {
        InvariantCheck positive("n_monotonicity_positive_beta", 1e-9);
        InvariantCheck negative("n_monotonicity_negative_beta", 1e-9);
        const std::size_t cases = std::max< std::size_t >(1, trials / 4);
        std::vector< std::uint32_t > ns;
        for (std::uint32_t n = 1; n <= 16; ++n)
            ns.push_back(n);
        ns.insert(ns.end(), {24, 32, 48, 64});
        for (std::size_t i = 0; i < cases; ++i)
        {
            auto inst = instance(8, i, {2, 6, 10.0, 0.0, 5.0});
            for (auto* check : {&positive, &negative})
            {
                const auto rows = dissipation_vs_n(inst.prior, inst.du, inst.beta, ns);
                for (std::size_t j = 1; j < rows.size(); ++j)
                    check->error(rows[j].total_dissipated - rows[j - 1].total_dissipated);
                inst.beta = -inst.beta;
            }
        }
        out.push_back(positive.result());
        auto neg = negative.result(true);
        neg.detail = "reported only; worst increase " + detail::fmt(neg.worst);
        out.push_back(neg);
    }

    // ---- jarzynski -------------------------------------------------------
    {
        InvariantCheck identity("exact_jarzynski_identity", 1e-9);
        InvariantCheck mass("path_probability_mass", 1e-9);
        InvariantCheck utility("path_utility_recomputable", 1e-12);
        const std::size_t cases = std::max< std::size_t >(1, trials / 10);
        for (std::size_t i = 0; i < cases; ++i)
            for (double b : {-2.0, -1.0, 0.5, 1.0, 5.0})
                for (std::uint32_t n = 1; n <= 4; ++n)
                {
                    auto inst = instance(9, i, {1, 3, 10.0, 1.0, 1.0});
                    inst.beta = ResourceParameter(b);
                    const UtilitySchedule schedule(inst.du, n);
                    const auto            est = exact_path_expectation(inst.prior, schedule, inst.beta);
                    const auto            dF  = gibbs_update(inst.prior, inst.du, inst.beta).free_energy_delta;
                    identity.error(scaled_error(est.log_estimate, b * dF * fault_scale));

                    CompensatedSum total;
                    for_each_path(inst.prior, schedule, inst.beta, [&](const ActionPath& path) {
                        total.add(std::exp(path.log_path_probability));
                        double sum = 0.0;
                        for (auto x : path.actions)
                            sum += inst.du[x];
                        utility.error(std::abs(sum / n - path.path_utility));
                    });
                    mass.error(std::abs(total.value() - 1.0));
                }
        for (auto* c : {&identity, &mass, &utility})
            out.push_back(c->result());
    }
    {
        InvariantCheck c("monte_carlo_consistency", 0.01);
        const std::size_t       seeds = std::clamp< std::size_t >(trials / 10, 1, 100);
        const ResourceParameter beta(1.0);
        const UtilitySchedule   schedule(ref.du, 4);
        const double            exact = exact_path_expectation(ref.prior, schedule, beta).estimate;
        std::size_t             misses = 0;
        for (std::size_t s = 0; s < seeds; ++s)
        {
            const auto est = monte_carlo_estimate(ref.prior, schedule, beta, 20000, opt.seed + s, opt.threads);
            if (std::abs(est.estimate - exact) > 4.0 * est.standard_error)
                ++misses;
        }
        const double rate = static_cast< double >(misses) / static_cast< double >(seeds);
        c.error(seeds < 100 ? (misses > 0 ? 1.0 : 0.0) : rate);
        c.note(std::to_string(misses) + "/" + std::to_string(seeds) + " seeds outside 4 SE");
        out.push_back(c.result());
    }
    {
        InvariantCheck c("jensen_gap", 0.0);
        const ResourceParameter beta(1.0);
        const UtilitySchedule   schedule(ref.du, 4);
        const auto   mean = mean_path_utility(ref.prior, schedule, beta, 100000, opt.seed, opt.threads);
        const double dF   = gibbs_update(ref.prior, ref.du, beta).free_energy_delta;
        c.require(mean.mean + 3.0 * mean.standard_error < dF, "mean path utility not below dF by 3 SE");
        c.note("mean=" + detail::fmt(mean.mean) + " se=" + detail::fmt(mean.standard_error) + " dF=" + detail::fmt(dF));
        out.push_back(c.result());
    }
    return out;
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_VERIFY_HPP
