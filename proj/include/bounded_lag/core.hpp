#ifndef BOUNDED_LAG_CORE_HPP
#define BOUNDED_LAG_CORE_HPP

// Finite-distribution arithmetic shared by every other header: action spaces,
// policies, utility vectors, the resource parameter, and the numerically
// stable primitives (compensated sums, log-sum-exp, KL divergence).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace bounded_lag
{

struct DimensionError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error
{
    using std::domain_error::domain_error;
};

/// Raised when an exact computation would exceed its configured budget.
struct ResourceError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct RangeError : std::range_error
{
    using std::range_error::range_error;
};

inline constexpr double infinity = std::numeric_limits< double >::infinity();

/// Neumaier-compensated accumulator.
class CompensatedSum
{
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_  = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span< const double > xs) noexcept
{
    CompensatedSum acc;
    for (double x : xs)
        acc.add(x);
    return acc.value();
}

class ActionSpace
{
public:
    explicit ActionSpace(std::vector< std::string > labels) : labels_(std::move(labels))
    {
        if (labels_.empty())
            throw DomainError("action space must contain at least one action");
        std::unordered_set< std::string > seen;
        for (const auto& l : labels_)
            if (!seen.insert(l).second)
                throw DomainError("duplicate action label '" + l + "'");
    }

    /// Anonymous space with labels "a0", "a1", ...
    static std::shared_ptr< const ActionSpace > indexed(std::size_t n)
    {
        std::vector< std::string > labels;
        labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            labels.push_back("a" + std::to_string(i));
        return std::make_shared< const ActionSpace >(std::move(labels));
    }

    [[nodiscard]] std::size_t                        size() const noexcept { return labels_.size(); }
    [[nodiscard]] const std::vector< std::string >& labels() const noexcept { return labels_; }
    [[nodiscard]] const std::string&                label(std::size_t i) const { return labels_.at(i); }

    friend bool operator==(const ActionSpace&, const ActionSpace&) = default;

private:
    std::vector< std::string > labels_;
};

using SpacePtr = std::shared_ptr< const ActionSpace >;

namespace detail
{
inline void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what)
{
    if (a == b)
        return;
    if (!a || !b || !(*a == *b))
        throw DimensionError(std::string(what) + ": operands live on different action spaces");
}

inline void require_space(const SpacePtr& space)
{
    if (!space)
        throw DomainError("null action space");
}
} // namespace detail

/// Probability distribution over an ActionSpace.
///
/// Linear-space probabilities are canonical; the natural-log probabilities are
/// carried alongside so that log-space producers (Gibbs updates) never lose
/// precision to underflow. Zero entries have log-probability -inf.
class Policy
{
public:
    static constexpr double normalization_tolerance = 1e-12;
    static constexpr double renormalize_window      = 1e-9;

    /// Validates and, if the mass is within 1e-9 of one, renormalizes.
    static Policy from_probabilities(SpacePtr space, std::vector< double > probs)
    {
        detail::require_space(space);
        if (probs.size() != space->size())
            throw DimensionError("policy has " + std::to_string(probs.size()) + " entries for " +
                                 std::to_string(space->size()) + " actions");
        for (double p : probs)
            if (!std::isfinite(p) || p < 0.0)
                throw DomainError("policy entries must be finite and non-negative");
        const double mass = compensated_sum(probs);
        if (std::abs(mass - 1.0) > renormalize_window)
            throw DomainError("policy mass " + std::to_string(mass) + " is not within 1e-9 of 1");
        if (std::abs(mass - 1.0) > 0.0)
            for (double& p : probs)
                p /= mass;
        std::vector< double > logs(probs.size());
        std::transform(probs.begin(), probs.end(), logs.begin(), [](double p) { return std::log(p); });
        return Policy(std::move(space), std::move(probs), std::move(logs));
    }

    /// Builds a policy from unnormalized log-weights (-inf allowed, not all).
    static Policy from_log_weights(SpacePtr space, std::vector< double > log_weights);

    static Policy uniform(SpacePtr space)
    {
        detail::require_space(space);
        const auto n = space->size();
        return from_probabilities(std::move(space), std::vector< double >(n, 1.0 / static_cast< double >(n)));
    }

    [[nodiscard]] const SpacePtr&              space() const noexcept { return space_; }
    [[nodiscard]] std::size_t                  size() const noexcept { return probs_.size(); }
    [[nodiscard]] std::span< const double >    probs() const noexcept { return probs_; }
    [[nodiscard]] std::span< const double >    log_probs() const noexcept { return log_probs_; }
    [[nodiscard]] double                       operator[](std::size_t i) const { return probs_.at(i); }
    [[nodiscard]] double                       log_prob(std::size_t i) const { return log_probs_.at(i); }

    [[nodiscard]] bool strictly_positive() const noexcept
    {
        return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; });
    }

private:
    Policy(SpacePtr space, std::vector< double > probs, std::vector< double > logs)
        : space_(std::move(space)), probs_(std::move(probs)), log_probs_(std::move(logs))
    {}

    SpacePtr              space_;
    std::vector< double > probs_;
    std::vector< double > log_probs_;
};

/// Utility change ΔU(x) over an ActionSpace; every entry finite.
class UtilityChange
{
public:
    UtilityChange(SpacePtr space, std::vector< double > values) : space_(std::move(space)), values_(std::move(values))
    {
        detail::require_space(space_);
        if (values_.size() != space_->size())
            throw DimensionError("utility change has " + std::to_string(values_.size()) + " entries for " +
                                 std::to_string(space_->size()) + " actions");
        for (double v : values_)
            if (!std::isfinite(v))
                throw DomainError("utility change entries must be finite");
    }

    [[nodiscard]] const SpacePtr&           space() const noexcept { return space_; }
    [[nodiscard]] std::size_t               size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span< const double > values() const noexcept { return values_; }
    [[nodiscard]] double                    operator[](std::size_t i) const { return values_.at(i); }

    [[nodiscard]] double max() const { return *std::max_element(values_.begin(), values_.end()); }
    [[nodiscard]] double min() const { return *std::min_element(values_.begin(), values_.end()); }

    [[nodiscard]] UtilityChange scaled(double factor) const
    {
        auto v = values_;
        for (double& x : v)
            x *= factor;
        return {space_, std::move(v)};
    }

    [[nodiscard]] UtilityChange shifted(double offset) const
    {
        auto v = values_;
        for (double& x : v)
            x += offset;
        return {space_, std::move(v)};
    }

    [[nodiscard]] UtilityChange operator-() const { return scaled(-1.0); }

    friend UtilityChange operator+(const UtilityChange& a, const UtilityChange& b)
    {
        detail::require_same_space(a.space_, b.space_, "utility sum");
        auto v = a.values_;
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] += b.values_[i];
        return {a.space_, std::move(v)};
    }

private:
    SpacePtr              space_;
    std::vector< double > values_;
};

/// Signed resource (rationality) parameter β. Zero selects limit-form branches.
class ResourceParameter
{
public:
    explicit ResourceParameter(double beta) : beta_(beta)
    {
        if (!std::isfinite(beta))
            throw DomainError("resource parameter must be finite");
    }

    [[nodiscard]] double value() const noexcept { return beta_; }
    [[nodiscard]] bool   is_zero() const noexcept { return beta_ == 0.0; }
    [[nodiscard]] int    sign() const noexcept { return (beta_ > 0.0) - (beta_ < 0.0); }

    [[nodiscard]] ResourceParameter operator-() const { return ResourceParameter(-beta_); }

private:
    double beta_;
};

/// log Σ_i exp(log_weights[i] + exponents[i]), shifted by the maximum term.
inline double log_sum_exp_weighted(std::span< const double > log_weights, std::span< const double > exponents)
{
    if (log_weights.empty())
        throw DomainError("log_sum_exp_weighted: empty input");
    if (log_weights.size() != exponents.size())
        throw DimensionError("log_sum_exp_weighted: length mismatch");

    std::size_t arg_max = 0;
    double      top     = -infinity;
    for (std::size_t i = 0; i < log_weights.size(); ++i)
    {
        const double term = log_weights[i] + exponents[i];
        if (std::isnan(term))
            throw DomainError("log_sum_exp_weighted: NaN term");
        if (term > top)
        {
            top     = term;
            arg_max = i;
        }
    }
    if (top == -infinity)
        throw DomainError("log_sum_exp_weighted: every weight is zero");
    if (top == infinity)
        return infinity;

    CompensatedSum rest;
    for (std::size_t i = 0; i < log_weights.size(); ++i)
        if (i != arg_max)
            rest.add(std::exp(log_weights[i] + exponents[i] - top));
    return top + std::log1p(rest.value());
}

inline Policy Policy::from_log_weights(SpacePtr space, std::vector< double > log_weights)
{
    detail::require_space(space);
    if (log_weights.size() != space->size())
        throw DimensionError("log-weights have " + std::to_string(log_weights.size()) + " entries for " +
                             std::to_string(space->size()) + " actions");
    const std::vector< double > zeros(log_weights.size(), 0.0);
    const double                log_mass = log_sum_exp_weighted(log_weights, zeros);
    if (!std::isfinite(log_mass))
        throw DomainError("log-weights are not normalizable");
    std::vector< double > probs(log_weights.size());
    for (std::size_t i = 0; i < log_weights.size(); ++i)
    {
        log_weights[i] -= log_mass;
        probs[i] = std::exp(log_weights[i]);
    }
    return Policy(std::move(space), std::move(probs), std::move(log_weights));
}

/// Σ_x p(x) ΔU(x).
inline double expected_utility(const Policy& p, const UtilityChange& du)
{
    detail::require_same_space(p.space(), du.space(), "expected_utility");
    CompensatedSum acc;
    for (std::size_t i = 0; i < p.size(); ++i)
        acc.add(p[i] * du[i]);
    return acc.value();
}

/// KL(p‖q) in nats. 0·ln(0/q) = 0; p>0 over q=0 yields +inf.
inline double kl_divergence(const Policy& p, const Policy& q)
{
    detail::require_same_space(p.space(), q.space(), "kl_divergence");
    CompensatedSum acc;
    for (std::size_t i = 0; i < p.size(); ++i)
    {
        if (p[i] == 0.0 && p.log_prob(i) == -infinity)
            continue;
        if (q.log_prob(i) == -infinity)
            return infinity;
        acc.add(p[i] * (p.log_prob(i) - q.log_prob(i)));
    }
    // Rounding can leave tiny negative residue for near-identical inputs.
    return std::max(acc.value(), 0.0);
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_CORE_HPP
