#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace coopetition {

/// Worker count taken from COOPETITION_WORKERS, else the hardware thread
/// count (at least 1).
inline unsigned default_workers()
{
  if (const char *env = std::getenv("COOPETITION_WORKERS"))
  {
    try
    {
      const long v = std::stol(env);
      if (v > 0)
      {
        return static_cast<unsigned>(v);
      }
    }
    catch (const std::exception &)
    {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for every i in [0, n) on up to `workers` threads. Work is
/// handed out in small chunks from a shared counter; callers must write
/// results by index so the outcome does not depend on the schedule. If any
/// call throws, the exception from the lowest failing index is rethrown.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F &&fn)
{
  workers = std::max(1u, workers);
  if (workers == 1 || n < 2)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      fn(i);
    }
    return;
  }

  constexpr std::size_t chunk = 64;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();

  auto work = [&] {
    for (;;)
    {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= n)
      {
        return;
      }
      const std::size_t end = std::min(n, begin + chunk);
      for (std::size_t i = begin; i < end; ++i)
      {
        try
        {
          fn(i);
        }
        catch (...)
        {
          std::lock_guard lock(error_mutex);
          if (i < error_index)
          {
            error_index = i;
            error       = std::current_exception();
          }
          return;
        }
      }
    }
  };

  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (unsigned t = 1; t < threads; ++t)
  {
    pool.emplace_back(work);
  }
  work();
  pool.clear();
  if (error)
  {
    std::rethrow_exception(error);
  }
}

}  // namespace coopetition
