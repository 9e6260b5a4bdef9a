#ifndef BOUNDED_LAG_JARZYNSKI_HPP
#define BOUNDED_LAG_JARZYNSKI_HPP

// Decision-theoretic Jarzynski equality
//
//     exp(β ΔF) = E_paths[ exp(β · (1/N) Σ_t ΔU(x_t)) ],
//
// where a path x_1..x_N is drawn with probability Π_t p_{t-1}(x_t), i.e. each
// action comes from the lagged policy in force when it is taken. Checked
// exactly by enumerating every path and statistically by Monte-Carlo.
//
// The plain exponential average is a biased estimator of ΔF when taken
// through the log; no correction is applied here.

#include "bounded_lag/core.hpp"
#include "bounded_lag/lagged.hpp"
#include "bounded_lag/parallel.hpp"
#include "bounded_lag/random.hpp"

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace bounded_lag
{

inline constexpr std::uint64_t default_enumeration_budget = 1'000'000;

struct ActionPath
{
    std::vector< std::size_t > actions;              ///< x_1..x_N
    double                     path_utility;         ///< (1/N) Σ_t ΔU(x_t)
    double                     log_path_probability; ///< Σ_t ln p_{t-1}(x_t)
};

struct JarzynskiEstimate
{
    double        estimate;       ///< estimator of exp(βΔF)
    double        log_estimate;
    double        standard_error; ///< of `estimate`; 0 when exact
    std::uint64_t n_samples;      ///< samples drawn, or paths enumerated when exact
    bool          exact;
};

struct PathUtilityEstimate
{
    double        mean;
    double        standard_error;
    std::uint64_t n_samples;
};

/// Lagged policies p_0..p_{N-1}, one per step, from the same recursion as
/// n_step_scenario.
inline std::vector< Policy > lagged_policies(const Policy& prior, const UtilitySchedule& schedule,
                                             ResourceParameter beta)
{
    detail::require_same_space(prior.space(), schedule.space(), "lagged_policies");
    std::vector< Policy > out;
    out.reserve(schedule.n_steps());
    out.push_back(prior);
    for (std::uint32_t t = 1; t < schedule.n_steps(); ++t)
        out.push_back(gibbs_update(out.back(), schedule.increment(t), beta).posterior);
    return out;
}

/// Number of paths |X|^N, saturating at budget + 1.
inline std::uint64_t path_count(std::size_t n_actions, std::uint32_t n_steps, std::uint64_t budget)
{
    std::uint64_t count = 1;
    for (std::uint32_t t = 0; t < n_steps; ++t)
    {
        if (count > budget / n_actions)
            return budget + 1;
        count *= n_actions;
    }
    return count;
}

/// Visits every action path in lexicographic order.
template < typename Visitor >
void for_each_path(const Policy& prior, const UtilitySchedule& schedule, ResourceParameter beta, Visitor&& visit,
                   std::uint64_t budget = default_enumeration_budget)
{
    const std::size_t   k     = prior.size();
    const std::uint32_t steps = schedule.n_steps();
    if (path_count(k, steps, budget) > budget)
        throw ResourceError("path enumeration needs " + std::to_string(k) + "^" + std::to_string(steps) +
                            " paths, over the enumeration budget of " + std::to_string(budget));

    const auto  policies = lagged_policies(prior, schedule, beta);
    const auto& du       = schedule.total();
    const auto  inv_n    = 1.0 / static_cast< double >(steps);

    ActionPath path{std::vector< std::size_t >(steps, 0), 0.0, 0.0};
    for (;;)
    {
        CompensatedSum utility;
        double         log_p = 0.0;
        for (std::uint32_t t = 0; t < steps; ++t)
        {
            utility.add(du[path.actions[t]]);
            log_p += policies[t].log_prob(path.actions[t]);
        }
        path.path_utility         = utility.value() * inv_n;
        path.log_path_probability = log_p;
        visit(static_cast< const ActionPath& >(path));

        std::uint32_t pos = steps;
        while (pos > 0)
        {
            --pos;
            if (++path.actions[pos] < k)
                break;
            path.actions[pos] = 0;
            if (pos == 0)
                return;
        }
    }
}

namespace detail
{
inline JarzynskiEstimate finish_estimate(double log_estimate, double standard_error, std::uint64_t n, bool exact)
{
    if (!(log_estimate < std::log(DBL_MAX)))
        throw RangeError("exp(beta * dF) estimate overflows double precision (log value " +
                         std::to_string(log_estimate) + ")");
    return {std::exp(log_estimate), log_estimate, standard_error, n, exact};
}
} // namespace detail

/// Σ_paths Π_t p_{t-1}(x_t) · exp(β · path_utility), evaluated in log-space.
inline JarzynskiEstimate exact_path_expectation(const Policy& prior, const UtilitySchedule& schedule,
                                                ResourceParameter beta,
                                                std::uint64_t     budget = default_enumeration_budget)
{
    detail::require_same_space(prior.space(), schedule.space(), "exact_path_expectation");
    const std::uint64_t n_paths = path_count(prior.size(), schedule.n_steps(), budget);
    if (beta.is_zero() && n_paths <= budget)
        return {1.0, 0.0, 0.0, n_paths, true};

    std::vector< double > log_terms;
    log_terms.reserve(n_paths <= budget ? n_paths : 0);
    for_each_path(
        prior, schedule, beta,
        [&](const ActionPath& path) { log_terms.push_back(path.log_path_probability + beta.value() * path.path_utility); },
        budget);

    const std::vector< double > zeros(log_terms.size(), 0.0);
    return detail::finish_estimate(log_sum_exp_weighted(log_terms, zeros), 0.0, log_terms.size(), true);
}

namespace detail
{

/// Mean and centred second moment of a batch; merged with Chan's formula.
struct Moments
{
    std::uint64_t n    = 0;
    double        mean = 0.0;
    double        m2   = 0.0;

    void merge(const Moments& other) noexcept
    {
        if (other.n == 0)
            return;
        if (n == 0)
        {
            *this = other;
            return;
        }
        const double na    = static_cast< double >(n);
        const double nb    = static_cast< double >(other.n);
        const double total = na + nb;
        const double delta = other.mean - mean;
        mean += delta * (nb / total);
        m2 += other.m2 + delta * delta * (na * nb / total);
        n += other.n;
    }

    [[nodiscard]] double standard_error() const noexcept
    {
        if (n < 2)
            return 0.0;
        const double nd = static_cast< double >(n);
        return std::sqrt(m2 / (nd - 1.0) / nd);
    }
};

inline constexpr std::uint64_t sample_block_size = 4096;

/// Samples `n_samples` paths from the lagged measure and returns the moments
/// of statistic(path_utility). Sample i uses substream (seed, i); blocks of
/// 4096 samples are reduced independently and merged in index order, so the
/// result is bit-identical for any thread count.
template < typename Statistic >
Moments sample_path_moments(const Policy& prior, const UtilitySchedule& schedule, ResourceParameter beta,
                            std::uint64_t n_samples, std::uint64_t seed, unsigned threads, Statistic statistic)
{
    const auto          policies = lagged_policies(prior, schedule, beta);
    const auto&         du       = schedule.total();
    const std::uint32_t steps    = schedule.n_steps();
    const std::size_t   k        = prior.size();
    const double        inv_n    = 1.0 / static_cast< double >(steps);

    // Cumulative distributions per step, with the last supported action as
    // the fallback for u beyond the rounded total mass.
    std::vector< std::vector< double > > cdf(steps, std::vector< double >(k));
    std::vector< std::size_t >           last_support(steps, 0);
    for (std::uint32_t t = 0; t < steps; ++t)
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i)
        {
            acc += policies[t][i];
            cdf[t][i] = acc;
            if (policies[t][i] > 0.0)
                last_support[t] = i;
        }
    }

    const std::uint64_t    n_blocks = (n_samples + sample_block_size - 1) / sample_block_size;
    std::vector< Moments > blocks(n_blocks);

    parallel_for(n_blocks, threads == 0 ? default_thread_count() : threads, [&](std::size_t b) {
        const std::uint64_t   begin = b * sample_block_size;
        const std::uint64_t   end   = std::min(n_samples, begin + sample_block_size);
        std::vector< double > values;
        values.reserve(end - begin);
        for (std::uint64_t s = begin; s < end; ++s)
        {
            auto           rng = SplitMix64::substream(seed, s);
            CompensatedSum utility;
            for (std::uint32_t t = 0; t < steps; ++t)
            {
                const double u      = rng.uniform();
                std::size_t  action = last_support[t];
                for (std::size_t i = 0; i < k; ++i)
                    if (u < cdf[t][i] && policies[t][i] > 0.0)
                    {
                        action = i;
                        break;
                    }
                utility.add(du[action]);
            }
            values.push_back(statistic(utility.value() * inv_n));
        }

        Moments m;
        m.n = values.size();
        CompensatedSum sum;
        for (double v : values)
            sum.add(v);
        m.mean = sum.value() / static_cast< double >(m.n);
        CompensatedSum sq;
        for (double v : values)
            sq.add((v - m.mean) * (v - m.mean));
        m.m2      = sq.value();
        blocks[b] = m;
    });

    Moments total;
    for (const auto& m : blocks)
        total.merge(m);
    return total;
}

} // namespace detail

/// Monte-Carlo estimate of exp(βΔF) from sampled lagged-policy paths.
/// `threads == 0` uses BOUNDED_LAG_THREADS / hardware concurrency.
inline JarzynskiEstimate monte_carlo_estimate(const Policy& prior, const UtilitySchedule& schedule,
                                              ResourceParameter beta, std::uint64_t n_samples, std::uint64_t seed,
                                              unsigned threads = 0)
{
    detail::require_same_space(prior.space(), schedule.space(), "monte_carlo_estimate");
    if (n_samples < 2)
        throw DomainError("monte_carlo_estimate needs at least 2 samples");
    if (beta.is_zero())
        return {1.0, 0.0, 0.0, n_samples, false};

    // β·path_utility never exceeds the largest β·ΔU(x), so terms are in (0, 1].
    const double b     = beta.value();
    const double shift = std::max(b * schedule.total().max(), b * schedule.total().min());

    const auto moments = detail::sample_path_moments(prior, schedule, beta, n_samples, seed, threads,
                                                     [b, shift](double w) { return std::exp(b * w - shift); });
    if (!(moments.mean > 0.0))
        throw RangeError("every sampled exp(beta * path utility) underflowed");

    const double se_shifted = moments.standard_error();
    const double log_se     = se_shifted > 0.0 ? shift + std::log(se_shifted) : -infinity;
    if (log_se >= std::log(DBL_MAX))
        throw RangeError("standard error of the exp(beta * dF) estimate overflows double precision");
    return detail::finish_estimate(shift + std::log(moments.mean), std::exp(log_se), n_samples, false);
}

/// Sample mean of the path utility (1/N) Σ_t ΔU(x_t) under the lagged measure.
inline PathUtilityEstimate mean_path_utility(const Policy& prior, const UtilitySchedule& schedule,
                                             ResourceParameter beta, std::uint64_t n_samples, std::uint64_t seed,
                                             unsigned threads = 0)
{
    detail::require_same_space(prior.space(), schedule.space(), "mean_path_utility");
    if (n_samples < 2)
        throw DomainError("mean_path_utility needs at least 2 samples");
    const auto moments =
        detail::sample_path_moments(prior, schedule, beta, n_samples, seed, threads, [](double w) { return w; });
    return {moments.mean, moments.standard_error(), n_samples};
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_JARZYNSKI_HPP
