#ifndef BOUNDED_LAG_CONFIG_HPP
#define BOUNDED_LAG_CONFIG_HPP

// JSON run configuration:
//
//   { "actions": ["a", "b"], "prior": [0.5, 0.5], "delta_u": [-2, 5],
//     "beta": [0, 1, 5], "n": [4], "seed": 7, "mc_samples": 100000 }
//
// `seed` and `mc_samples` are optional (default 0). Array lengths are
// checked against `actions`.

#include "bounded_lag/core.hpp"
#include "bounded_lag/sweep.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace bounded_lag
{

/// Unreadable, malformed or schema-violating configuration.
struct ConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct RunConfig
{
    std::vector< std::string >   actions;
    std::vector< double >        prior;
    std::vector< double >        delta_u;
    std::vector< double >        beta;
    std::vector< std::uint32_t > n;
    std::uint64_t                seed       = 0;
    std::uint64_t                mc_samples = 0;
    std::string                  canonical_json; ///< compact, key-sorted form of the parsed document

    /// Builds the library-level sweep configuration. Length mismatches
    /// surface as DimensionError; invalid values as ConfigError.
    [[nodiscard]] SweepConfig to_sweep_config() const
    {
        SpacePtr space;
        try
        {
            space = std::make_shared< const ActionSpace >(actions);
        }
        catch (const DomainError& e)
        {
            throw ConfigError(std::string("field 'actions': ") + e.what());
        }
        if (prior.size() != actions.size())
            throw DimensionError("field 'prior' has " + std::to_string(prior.size()) + " entries but 'actions' has " +
                                 std::to_string(actions.size()));
        if (delta_u.size() != actions.size())
            throw DimensionError("field 'delta_u' has " + std::to_string(delta_u.size()) +
                                 " entries but 'actions' has " + std::to_string(actions.size()));
        try
        {
            SweepConfig cfg{Policy::from_probabilities(space, prior), UtilityChange(space, delta_u), beta, n, seed,
                            mc_samples};
            cfg.validate();
            return cfg;
        }
        catch (const DimensionError&)
        {
            throw;
        }
        catch (const std::logic_error& e)
        {
            throw ConfigError(std::string("invalid configuration: ") + e.what());
        }
    }
};

namespace detail
{

inline std::string line_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    {
        if (text[i] == '\n')
        {
            ++line;
            column = 1;
        }
        else
            ++column;
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

template < typename T >
std::vector< T > array_field(const nlohmann::json& doc, const std::string& origin, const char* key)
{
    if (!doc.contains(key))
        throw ConfigError(origin + ": missing required field '" + key + "'");
    const auto& node = doc.at(key);
    if (!node.is_array())
        throw ConfigError(origin + ": field '" + key + "' must be an array");
    std::vector< T > out;
    out.reserve(node.size());
    for (std::size_t i = 0; i < node.size(); ++i)
    {
        const auto& item = node[i];
        const auto  where = origin + ": field '" + key + "[" + std::to_string(i) + "]'";
        if constexpr (std::is_same_v< T, std::string >)
        {
            if (!item.is_string())
                throw ConfigError(where + " must be a string");
            out.push_back(item.template get< std::string >());
        }
        else if constexpr (std::is_same_v< T, double >)
        {
            if (!item.is_number())
                throw ConfigError(where + " must be a number");
            out.push_back(item.template get< double >());
        }
        else
        {
            if (!item.is_number_unsigned() || item.template get< std::uint64_t >() == 0 ||
                item.template get< std::uint64_t >() > 0xFFFFFFFFULL)
                throw ConfigError(where + " must be a positive integer");
            out.push_back(static_cast< T >(item.template get< std::uint64_t >()));
        }
    }
    if (out.empty())
        throw ConfigError(origin + ": field '" + key + "' must not be empty");
    return out;
}

inline std::uint64_t unsigned_field(const nlohmann::json& doc, const std::string& origin, const char* key)
{
    if (!doc.contains(key))
        return 0;
    const auto& node = doc.at(key);
    if (!node.is_number_unsigned())
        throw ConfigError(origin + ": field '" + key + "' must be a non-negative integer");
    return node.get< std::uint64_t >();
}

} // namespace detail

/// Parses a configuration document. `origin` names the source in messages.
inline RunConfig parse_config(const std::string& text, const std::string& origin = "<config>")
{
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        const auto byte = e.byte > 0 ? e.byte - 1 : 0;
        throw ConfigError(origin + ": JSON parse error at " + detail::line_column(text, byte) + ": " + e.what());
    }
    if (!doc.is_object())
        throw ConfigError(origin + ": top-level JSON value must be an object");

    static const std::vector< std::string > known = {"actions", "prior", "delta_u", "beta", "n", "seed", "mc_samples"};
    for (const auto& [key, _] : doc.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(origin + ": unknown field '" + key + "'");

    RunConfig cfg;
    cfg.actions        = detail::array_field< std::string >(doc, origin, "actions");
    cfg.prior          = detail::array_field< double >(doc, origin, "prior");
    cfg.delta_u        = detail::array_field< double >(doc, origin, "delta_u");
    cfg.beta           = detail::array_field< double >(doc, origin, "beta");
    cfg.n              = detail::array_field< std::uint32_t >(doc, origin, "n");
    cfg.seed           = detail::unsigned_field(doc, origin, "seed");
    cfg.mc_samples     = detail::unsigned_field(doc, origin, "mc_samples");
    cfg.canonical_json = doc.dump();
    return cfg;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_CONFIG_HPP
