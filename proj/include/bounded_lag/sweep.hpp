#ifndef BOUNDED_LAG_SWEEP_HPP
#define BOUNDED_LAG_SWEEP_HPP

#include "bounded_lag/core.hpp"
#include "bounded_lag/jarzynski.hpp"
#include "bounded_lag/lagged.hpp"
#include "bounded_lag/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bounded_lag
{

struct SweepConfig
{
    Policy                       prior;
    UtilityChange                du;
    std::vector< double >        beta_grid;
    std::vector< std::uint32_t > n_grid;
    std::uint64_t                seed       = 0;
    std::uint64_t                mc_samples = 0; ///< 0 disables the Jarzynski columns

    void validate() const
    {
        detail::require_same_space(prior.space(), du.space(), "sweep config");
        if (beta_grid.empty() || n_grid.empty())
            throw DomainError("sweep grids must be non-empty");
        if (std::set< double >(beta_grid.begin(), beta_grid.end()).size() != beta_grid.size())
            throw DomainError("beta grid contains duplicate points");
        if (std::set< std::uint32_t >(n_grid.begin(), n_grid.end()).size() != n_grid.size())
            throw DomainError("n grid contains duplicate points");
        for (double b : beta_grid)
            if (!std::isfinite(b))
                throw DomainError("beta grid points must be finite");
        for (auto n : n_grid)
            if (n < 1)
                throw DomainError("n grid points must be >= 1");
        if (mc_samples == 1)
            throw DomainError("mc_samples must be 0 (disabled) or at least 2");
    }
};

/// One per-step row (t >= 1) or the totals row of a cell (t == 0).
struct SweepRow
{
    double                  beta;
    std::uint32_t           n_steps;
    std::uint32_t           t;
    double                  net_utility;
    double                  dissipated_utility;
    double                  free_energy_gain;
    double                  cumulative_net;
    double                  cumulative_dissipated;
    double                  cumulative_free_energy;
    std::optional< double > jarzynski_log_estimate;
    std::optional< double > jarzynski_se;
};

namespace detail
{
inline std::vector< SweepRow > sweep_cell(const SweepConfig& config, double beta_value, std::uint32_t n,
                                          unsigned mc_threads)
{
    const ResourceParameter beta(beta_value);
    const UtilitySchedule   schedule(config.du, n);
    const LagTrace          trace = n_step_scenario(config.prior, schedule, beta);

    std::vector< SweepRow > rows;
    rows.reserve(n + 1);
    rows.push_back({beta_value, n, 0, trace.total_net, trace.total_dissipated, trace.total_free_energy,
                    trace.total_net, trace.total_dissipated, trace.total_free_energy, std::nullopt, std::nullopt});
    if (config.mc_samples > 0)
    {
        const auto est = monte_carlo_estimate(config.prior, schedule, beta, config.mc_samples, config.seed, mc_threads);
        rows.front().jarzynski_log_estimate = est.log_estimate;
        rows.front().jarzynski_se           = est.standard_error;
    }

    CompensatedSum net, diss, gain;
    for (const auto& step : trace.steps)
    {
        net.add(step.net_utility);
        diss.add(step.dissipated_utility);
        gain.add(step.free_energy_gain);
        rows.push_back({beta_value, n, step.t, step.net_utility, step.dissipated_utility, step.free_energy_gain,
                        net.value(), diss.value(), gain.value(), std::nullopt, std::nullopt});
    }
    return rows;
}
} // namespace detail

/// Runs every (β, N) cell. Rows are ordered by β, then N, then t (totals
/// row first). `threads == 0` uses BOUNDED_LAG_THREADS / hardware concurrency.
inline std::vector< SweepRow > run_sweep(const SweepConfig& config, unsigned threads = 0)
{
    config.validate();
    auto betas = config.beta_grid;
    auto ns    = config.n_grid;
    std::sort(betas.begin(), betas.end());
    std::sort(ns.begin(), ns.end());

    const unsigned workers = threads == 0 ? default_thread_count() : threads;
    const auto     cells   = betas.size() * ns.size();
    // A lone cell hands its workers to the Monte-Carlo sampler instead.
    const unsigned mc_threads = cells == 1 ? workers : 1;

    std::vector< std::vector< SweepRow > > per_cell(cells);
    parallel_for(cells, workers, [&](std::size_t c) {
        per_cell[c] = detail::sweep_cell(config, betas[c / ns.size()], ns[c % ns.size()], mc_threads);
    });

    std::vector< SweepRow > rows;
    for (auto& cell : per_cell)
        rows.insert(rows.end(), cell.begin(), cell.end());
    return rows;
}

inline constexpr const char* csv_header =
    "beta,n_steps,t,net_utility,dissipated_utility,free_energy_gain,cumulative_net,cumulative_dissipated,"
    "cumulative_free_energy,jarzynski_log_estimate,jarzynski_se";

/// 12 significant digits; infinities as `inf` / `-inf`; negative zero as 0.
inline std::string format_real(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    if (std::isnan(x))
        return "nan";
    if (x == 0.0)
        x = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string format_row(const SweepRow& r)
{
    std::string line;
    line += format_real(r.beta);
    line += ',' + std::to_string(r.n_steps);
    line += ',' + std::to_string(r.t);
    for (double v : {r.net_utility, r.dissipated_utility, r.free_energy_gain, r.cumulative_net,
                     r.cumulative_dissipated, r.cumulative_free_energy})
        line += ',' + format_real(v);
    line += ',' + (r.jarzynski_log_estimate ? format_real(*r.jarzynski_log_estimate) : std::string());
    line += ',' + (r.jarzynski_se ? format_real(*r.jarzynski_se) : std::string());
    return line;
}

/// Header plus one line per row, newline-terminated.
inline std::string to_csv(const std::vector< SweepRow >& rows)
{
    std::string out = csv_header;
    out += '\n';
    for (const auto& r : rows)
    {
        out += format_row(r);
        out += '\n';
    }
    return out;
}

/// Per-timestep × β tables for a single schedule length.
struct Figure1Report
{
    std::uint32_t                        n_steps;
    std::vector< double >                betas;
    std::vector< std::vector< double > > dissipation;  ///< [t-1][beta index]
    std::vector< std::vector< double > > free_energy;  ///< [t-1][beta index]
    std::vector< std::vector< double > > net;          ///< [t-1][beta index]
    std::vector< double >                total_dissipation;
    std::vector< double >                total_free_energy;
    std::vector< double >                total_net;
};

/// Reshapes run_sweep output; every row must share one N.
inline Figure1Report figure1_report(const std::vector< SweepRow >& rows)
{
    if (rows.empty())
        throw DomainError("figure1_report: no rows");
    const std::uint32_t n = rows.front().n_steps;
    Figure1Report       rep{n, {}, std::vector< std::vector< double > >(n), std::vector< std::vector< double > >(n),
                      std::vector< std::vector< double > >(n), {}, {}, {}};
    for (const auto& r : rows)
    {
        if (r.n_steps != n)
            throw DomainError("figure1_report needs a single schedule length; found N=" + std::to_string(n) +
                              " and N=" + std::to_string(r.n_steps));
        if (r.t == 0)
        {
            rep.betas.push_back(r.beta);
            rep.total_dissipation.push_back(r.dissipated_utility);
            rep.total_free_energy.push_back(r.free_energy_gain);
            rep.total_net.push_back(r.net_utility);
        }
        else
        {
            rep.dissipation[r.t - 1].push_back(r.dissipated_utility);
            rep.free_energy[r.t - 1].push_back(r.free_energy_gain);
            rep.net[r.t - 1].push_back(r.net_utility);
        }
    }
    return rep;
}

inline Figure1Report figure1_report(const SweepConfig& config, unsigned threads = 0)
{
    if (config.n_grid.size() != 1)
        throw DomainError("figure1_report needs exactly one schedule length");
    return figure1_report(run_sweep(config, threads));
}

/// Four comment-delimited CSV blocks (A dissipation, B free energy, C net,
/// D totals), each with one column per β.
inline std::string render_figure1(const Figure1Report& rep)
{
    std::string header;
    for (double b : rep.betas)
        header += ",beta=" + format_real(b);

    std::string out;
    auto        block = [&](const char* title, const std::vector< std::vector< double > >& m) {
        out += "# ";
        out += title;
        out += "\nt" + header + '\n';
        for (std::size_t t = 0; t < m.size(); ++t)
        {
            out += std::to_string(t + 1);
            for (double v : m[t])
                out += ',' + format_real(v);
            out += '\n';
        }
    };
    block("A: dissipated utility", rep.dissipation);
    block("B: free energy difference", rep.free_energy);
    block("C: net utility", rep.net);

    out += "# D: totals over all timesteps\nquantity" + header + '\n';
    auto totals = [&](const char* name, const std::vector< double >& v) {
        out += name;
        for (double x : v)
            out += ',' + format_real(x);
        out += '\n';
    };
    totals("dissipated_utility", rep.total_dissipation);
    totals("free_energy_gain", rep.total_free_energy);
    totals("net_utility", rep.total_net);
    return out;
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_SWEEP_HPP
