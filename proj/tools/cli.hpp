#ifndef BOUNDED_LAG_TOOLS_CLI_HPP
#define BOUNDED_LAG_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace bounded_lag::cli
{

enum ExitCode : int
{
    ok                   = 0,
    verification_failure = 1,
    usage_error          = 2,
    dimension_error      = 3,
    resource_error       = 4,
};

inline constexpr const char* version = "0.1.0";

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector< std::string >& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(const std::string& bytes);

} // namespace bounded_lag::cli

#endif // BOUNDED_LAG_TOOLS_CLI_HPP
