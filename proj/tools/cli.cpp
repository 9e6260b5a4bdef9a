#include "cli.hpp"

#include "bounded_lag/config.hpp"
#include "bounded_lag/jarzynski.hpp"
#include "bounded_lag/lagged.hpp"
#include "bounded_lag/parallel.hpp"
#include "bounded_lag/sweep.hpp"
#include "bounded_lag/verify.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace bounded_lag::cli
{

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int  length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::string hex;
    hex.reserve(2 * length);
    for (unsigned i = 0; i < length; ++i)
    {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

namespace
{

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm           tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string join(const std::vector< std::string >& args)
{
    std::string s;
    for (const auto& a : args)
    {
        if (!s.empty())
            s += ' ';
        s += a;
    }
    return s;
}

std::string manifest_header(const RunConfig& cfg, const std::vector< std::string >& args)
{
    std::string h;
    h += "# config_digest: " + sha256_hex(cfg.canonical_json) + '\n';
    h += std::string("# version: ") + version + '\n';
    h += "# timestamp: " + utc_timestamp() + '\n';
    h += "# command: " + join(args) + '\n';
    return h;
}

/// Writes to `path`, or to `out` when path is empty.
void emit(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty())
    {
        out << text;
        out.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw ConfigError("cannot open output file '" + path + "'");
    file << text;
    if (!file)
        throw ConfigError("failed writing output file '" + path + "'");
}

/// Applies --beta/--n overrides; otherwise keeps the first grid entry of each.
SweepConfig single_cell(SweepConfig cfg, std::optional< double > beta, std::optional< std::uint32_t > n)
{
    cfg.beta_grid = {beta ? *beta : cfg.beta_grid.front()};
    cfg.n_grid    = {n ? *n : cfg.n_grid.front()};
    return cfg;
}

struct Options
{
    std::string                    config_path;
    std::string                    out_path;
    std::optional< double >        beta;
    std::optional< std::uint32_t > n;
    std::optional< std::uint64_t > samples;
    std::optional< std::uint64_t > seed;
    bool                           exact   = false;
    bool                           figure1 = false;
    std::size_t                    trials  = 200;
    std::uint64_t                  verify_seed = 0;
    std::string                    fault = "none";
};

int cmd_simulate(const Options& o, std::ostream& out)
{
    const auto cfg  = load_config(o.config_path).to_sweep_config();
    const auto rows = run_sweep(single_cell(cfg, o.beta, o.n));
    emit(to_csv(rows), o.out_path, out);
    return ok;
}

int cmd_sweep(const Options& o, const std::vector< std::string >& args, std::ostream& out)
{
    const auto run  = load_config(o.config_path);
    const auto cfg  = run.to_sweep_config();
    const auto rows = run_sweep(cfg);
    std::string text = manifest_header(run, args);
    text += o.figure1 ? render_figure1(figure1_report(rows)) : to_csv(rows);
    emit(text, o.out_path, out);
    return ok;
}

int cmd_jarzynski(const Options& o, std::ostream& out, std::ostream& err)
{
    const auto run = load_config(o.config_path);
    const auto cfg = single_cell(run.to_sweep_config(), o.beta, o.n);

    const ResourceParameter beta(cfg.beta_grid.front());
    const UtilitySchedule   schedule(cfg.du, cfg.n_grid.front());
    const std::uint64_t     seed = o.seed.value_or(cfg.seed);

    JarzynskiEstimate est{};
    if (o.exact)
        est = exact_path_expectation(cfg.prior, schedule, beta);
    else
    {
        const std::uint64_t samples = o.samples.value_or(cfg.mc_samples);
        if (samples < 2)
        {
            err << "error: --samples must be at least 2 for a Monte-Carlo estimate (got " << samples
                << "); use --exact for enumeration\n";
            return usage_error;
        }
        est = monte_carlo_estimate(cfg.prior, schedule, beta, samples, seed);
    }

    const double log_reference = beta.value() * gibbs_update(cfg.prior, cfg.du, beta).free_energy_delta;
    const double rel_deviation = std::abs(std::expm1(est.log_estimate - log_reference));

    out << "beta: " << format_real(beta.value()) << '\n';
    out << "n_steps: " << schedule.n_steps() << '\n';
    out << "method: " << (est.exact ? "exact" : "monte_carlo") << '\n';
    out << (est.exact ? "paths: " : "samples: ") << est.n_samples << '\n';
    if (!est.exact)
        out << "seed: " << seed << '\n';
    out << "estimate: " << format_real(est.estimate) << '\n';
    out << "log_estimate: " << format_real(est.log_estimate) << '\n';
    out << "standard_error: " << format_real(est.standard_error) << '\n';
    out << "reference: " << format_real(std::exp(log_reference)) << '\n';
    out << "log_reference: " << format_real(log_reference) << '\n';
    out << "relative_deviation: " << format_real(rel_deviation) << '\n';
    if (!est.exact)
    {
        const double dev = std::abs(est.estimate - std::exp(log_reference));
        out << "deviation_in_se: " << (est.standard_error > 0 ? format_real(dev / est.standard_error) : "0") << '\n';
    }
    return ok;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err)
{
    VerifyOptions opt;
    opt.trials = o.trials;
    opt.seed   = o.verify_seed;
    if (o.fault == "perturbed-free-energy")
        opt.fault = VerifyFault::perturbed_free_energy;
    else if (o.fault != "none")
    {
        err << "error: unknown fault '" << o.fault << "'\n";
        return usage_error;
    }

    const auto results = run_invariant_suite(opt);
    const InvariantResult* first_failure = nullptr;
    std::size_t            passed        = 0;
    for (const auto& r : results)
    {
        const char* tag = r.informational ? "INFO" : (r.passed ? "PASS" : "FAIL");
        out << tag << ' ' << r.name << " worst=" << detail::fmt(r.worst) << " tol=" << detail::fmt(r.tolerance);
        if (!r.detail.empty())
            out << " (" << r.detail << ')';
        out << '\n';
        if (r.informational || r.passed)
            ++passed;
        else if (!first_failure)
            first_failure = &r;
    }
    out << passed << '/' << results.size() << " invariants passed\n";
    if (first_failure)
    {
        err << "verification failed: " << first_failure->name << '\n';
        return verification_failure;
    }
    return ok;
}

} // namespace

int run(const std::vector< std::string >& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Bounded-rational decision making with lagged policies"};
    app.name(args.empty() ? "bounded_lag" : args.front());
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    Options o;

    auto* simulate = app.add_subcommand("simulate", "Run one (beta, N) lagged scenario and print per-step CSV");
    simulate->add_option("config", o.config_path, "JSON config file")->required();
    simulate->add_option("--beta", o.beta, "Resource parameter override");
    simulate->add_option("--n", o.n, "Number of timesteps override")->check(CLI::PositiveNumber);
    simulate->add_option("--out", o.out_path, "Output CSV path (default stdout)");

    auto* sweep = app.add_subcommand("sweep", "Run every (beta, N) cell of the config grid");
    sweep->add_option("config", o.config_path, "JSON config file")->required();
    sweep->add_option("--out", o.out_path, "Output CSV path (default stdout)");
    sweep->add_flag("--figure1", o.figure1, "Emit per-timestep x beta blocks (requires a single N)");

    auto* jarzynski = app.add_subcommand("jarzynski", "Estimate exp(beta dF) from action paths");
    jarzynski->add_option("config", o.config_path, "JSON config file")->required();
    jarzynski->add_option("--samples", o.samples, "Monte-Carlo sample count (default: config mc_samples)");
    jarzynski->add_option("--seed", o.seed, "RNG seed (default: config seed)");
    jarzynski->add_flag("--exact", o.exact, "Enumerate every path instead of sampling");
    jarzynski->add_option("--beta", o.beta, "Resource parameter override");
    jarzynski->add_option("--n", o.n, "Number of timesteps override")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "Run the invariant suite on seeded random instances");
    verify->add_option("--trials", o.trials, "Random instances per invariant (0: deterministic checks only)");
    verify->add_option("--seed", o.verify_seed, "RNG seed");
    verify->add_option("--fault", o.fault, "Inject a fault (testing)")->group("");

    try
    {
        std::vector< std::string > reversed(args.rbegin(), args.rend());
        if (!reversed.empty())
            reversed.pop_back();
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e)
    {
        std::ostringstream o_out, o_err;
        const int          code = app.exit(e, o_out, o_err);
        out << o_out.str();
        err << o_err.str();
        return code == 0 ? ok : usage_error;
    }

    try
    {
        default_thread_count(); // validates BOUNDED_LAG_THREADS up front
        if (*simulate)
            return cmd_simulate(o, out);
        if (*sweep)
            return cmd_sweep(o, args, out);
        if (*jarzynski)
            return cmd_jarzynski(o, out, err);
        return cmd_verify(o, out, err);
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << '\n';
        return usage_error;
    }
    catch (const DimensionError& e)
    {
        err << "dimension error: " << e.what() << '\n';
        return dimension_error;
    }
    catch (const ResourceError& e)
    {
        err << "resource error: " << e.what() << '\n';
        return resource_error;
    }
    catch (const RangeError& e)
    {
        err << "range error: " << e.what() << '\n';
        return resource_error;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return usage_error;
    }
}

} // namespace bounded_lag::cli
