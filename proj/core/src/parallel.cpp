// SPDX-License-Identifier: Apache-2.0
#include "gennav/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace gennav
{

int resolve_workers(int requested)
{
    if (requested > 0)
        return requested;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn)
{
    auto const threads = static_cast<std::size_t>(std::clamp<int>(resolve_workers(workers), 1, 256));
    if (threads == 1 || count <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }

    auto errors = std::vector<std::exception_ptr>(count);
    auto next = std::atomic<std::size_t> {0};
    auto worker = [&] {
        for (auto i = next++; i < count; i = next++)
        {
            try
            {
                fn(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };

    auto pool = std::vector<std::jthread> {};
    for (std::size_t t = 0; t < std::min(threads, count); ++t)
        pool.emplace_back(worker);
    pool.clear();

    for (auto const& error: errors)
        if (error)
            std::rethrow_exception(error);
}

} // namespace gennav
