#ifndef BOUNDED_LAG_PARALLEL_HPP
#define BOUNDED_LAG_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bounded_lag
{

inline constexpr const char* threads_env_var = "BOUNDED_LAG_THREADS";

/// Parses a BOUNDED_LAG_THREADS value; nullopt for anything but a positive integer.
inline std::optional< unsigned > parse_thread_count(const std::string& text)
{
    if (text.empty() || text.size() > 6)
        return std::nullopt;
    unsigned value = 0;
    for (char c : text)
    {
        if (c < '0' || c > '9')
            return std::nullopt;
        value = value * 10 + static_cast< unsigned >(c - '0');
    }
    if (value == 0)
        return std::nullopt;
    return value;
}

/// Worker cap from the environment, falling back to hardware concurrency.
/// Throws std::invalid_argument if the variable is set but malformed.
inline unsigned default_thread_count()
{
    if (const char* env = std::getenv(threads_env_var))
    {
        auto parsed = parse_thread_count(env);
        if (!parsed)
            throw std::invalid_argument(std::string(threads_env_var) + " must be a positive integer, got '" + env +
                                        "'");
        return *parsed;
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Work is
/// claimed dynamically; callers must write results into per-index slots.
/// The first exception thrown by any fn is rethrown after all workers join.
template < typename Fn >
void parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
    const std::size_t workers = std::min< std::size_t >(std::max(1U, threads), count);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }

    std::atomic< std::size_t > next{0};
    std::exception_ptr         failure;
    std::mutex                 failure_mutex;

    auto body = [&] {
        for (;;)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };

    std::vector< std::jthread > pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w)
        pool.emplace_back(body);
    body();
    pool.clear();

    if (failure)
        std::rethrow_exception(failure);
}

} // namespace bounded_lag

#endif // BOUNDED_LAG_PARALLEL_HPP
