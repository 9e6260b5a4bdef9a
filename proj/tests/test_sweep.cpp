#include "bounded_lag/config.hpp"
#include "bounded_lag/defaults.hpp"
#include "bounded_lag/sweep.hpp"

#include <gtest/gtest.h>

using namespace bounded_lag;

TEST(FormatReal, schema)
{
    EXPECT_EQ(format_real(infinity), "inf");
    EXPECT_EQ(format_real(-infinity), "-inf");
    EXPECT_EQ(format_real(-0.0), "0");
    EXPECT_EQ(format_real(1.5), "1.5");
    EXPECT_EQ(format_real(4.3077642858938289), "4.30776428589");
    EXPECT_EQ(format_real(1e-20), "1e-20");
}

TEST(RunSweep, rowOrderAndShape)
{
    auto cfg      = figure1_config();
    cfg.beta_grid = {5.0, 0.0, 1.0};
    cfg.n_grid    = {3, 1};
    const auto rows = run_sweep(cfg, 2);
    ASSERT_EQ(rows.size(), 3U * (2 + 4));
    EXPECT_EQ(rows[0].beta, 0.0);
    EXPECT_EQ(rows[0].n_steps, 1U);
    EXPECT_EQ(rows[0].t, 0U);
    EXPECT_EQ(rows[1].t, 1U);
    EXPECT_EQ(rows[2].n_steps, 3U);
    EXPECT_EQ(rows.back().beta, 5.0);
    EXPECT_EQ(rows.back().t, 3U);
    for (const auto& r : rows)
    {
        EXPECT_NEAR(r.net_utility + r.dissipated_utility, r.free_energy_gain, 1e-9);
        if (r.t == 0)
        {
            EXPECT_NEAR(r.cumulative_net, r.cumulative_free_energy - r.cumulative_dissipated, 1e-9);
        }
        EXPECT_FALSE(r.jarzynski_log_estimate.has_value());
    }
}

TEST(RunSweep, betaZeroColumn)
{
    const auto rows = run_sweep(figure1_config(), 1);
    for (const auto& r : rows)
        if (r.beta == 0.0)
        {
            EXPECT_EQ(r.dissipated_utility, 0.0);
            if (r.t == 0)
            {
                EXPECT_EQ(r.net_utility, r.cumulative_free_energy);
            }
        }
}

TEST(RunSweep, oneStepCellsMatchOneStepScenario)
{
    auto cfg   = figure2_config();
    cfg.n_grid = {1};
    const auto ref = reference_instance();
    for (const auto& r : run_sweep(cfg, 1))
    {
        const auto tr = one_step_scenario(ref.prior, ref.du, ResourceParameter(r.beta));
        EXPECT_EQ(r.net_utility, tr.total_net);
        EXPECT_EQ(r.dissipated_utility, tr.total_dissipated);
        EXPECT_EQ(r.free_energy_gain, tr.total_free_energy);
    }
}

TEST(RunSweep, freeEnergyIndependentOfNAndMonotoneTotals)
{
    const auto rows = run_sweep(figure2_config(), 2);
    const SweepRow* prev = nullptr;
    for (const auto& r : rows)
    {
        if (r.t != 0)
            continue;
        if (prev && prev->beta == r.beta)
        {
            EXPECT_NEAR(r.free_energy_gain, prev->free_energy_gain, 1e-9);
            EXPECT_LE(r.dissipated_utility, prev->dissipated_utility + 1e-9);
            EXPECT_GE(r.net_utility + 1e-9, prev->net_utility);
        }
        prev = &r;
    }
}

TEST(RunSweep, monteCarloColumnsOnTotalsRow)
{
    auto cfg      = figure1_config(3, 5000);
    cfg.beta_grid = {1.0};
    const auto rows = run_sweep(cfg, 1);
    ASSERT_TRUE(rows[0].jarzynski_log_estimate.has_value());
    EXPECT_NEAR(*rows[0].jarzynski_log_estimate, 4.30776428589383, 0.1);
    EXPECT_GT(*rows[0].jarzynski_se, 0.0);
    EXPECT_FALSE(rows[1].jarzynski_log_estimate.has_value());
    const auto line = format_row(rows[1]);
    EXPECT_EQ(line.substr(line.size() - 2), ",,");
}

TEST(RunSweep, csvIsDeterministicAcrossThreadCounts)
{
    const auto cfg = figure2_config(11, 3000);
    EXPECT_EQ(to_csv(run_sweep(cfg, 1)), to_csv(run_sweep(cfg, 4)));
}

TEST(RunSweep, csvHeader)
{
    const auto csv = to_csv(run_sweep(figure1_config(), 1));
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "beta,n_steps,t,net_utility,dissipated_utility,free_energy_gain,cumulative_net,"
              "cumulative_dissipated,cumulative_free_energy,jarzynski_log_estimate,jarzynski_se");
}

TEST(RunSweep, invalidConfigs)
{
    auto dup      = figure1_config();
    dup.beta_grid = {1.0, 1.0};
    EXPECT_THROW(run_sweep(dup, 1), DomainError);
    auto empty   = figure1_config();
    empty.n_grid = {};
    EXPECT_THROW(run_sweep(empty, 1), DomainError);
    auto one_sample = figure1_config(0, 1);
    EXPECT_THROW(run_sweep(one_sample, 1), DomainError);
}

TEST(Figure1Report, blocks)
{
    const auto rep = figure1_report(figure1_config(), 1);
    ASSERT_EQ(rep.n_steps, 4U);
    ASSERT_EQ(rep.betas.size(), 6U);
    for (double v : rep.net[0])
        EXPECT_EQ(v, 0.375);
    for (std::size_t t = 0; t < 4; ++t)
        EXPECT_EQ(rep.free_energy[t][0], 0.375); // β = 0 column
    for (std::size_t j = 0; j < rep.betas.size(); ++j)
        EXPECT_NEAR(rep.total_net[j], rep.total_free_energy[j] - rep.total_dissipation[j], 1e-12);

    const auto text = render_figure1(rep);
    EXPECT_NE(text.find("# A: dissipated utility"), std::string::npos);
    EXPECT_NE(text.find("# D: totals"), std::string::npos);
    EXPECT_NE(text.find("t,beta=0,beta=0.25"), std::string::npos);

    EXPECT_THROW(figure1_report(figure2_config(), 1), DomainError);
}
