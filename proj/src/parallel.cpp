#include "greenwalk/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "greenwalk/errors.hpp"
#include "greenwalk/numerics.hpp"

namespace greenwalk {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) {
  require(n >= 1, ErrorCode::kInvalidArgument, "thread count must be >= 1");
  g_threads = n;
}

int thread_count() noexcept { return g_threads.load(); }

void parallel_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n_blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < n_blocks; b = next++) {
        try {
          fn(b);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Rng substream(std::uint64_t master, std::uint64_t block) {
  return Rng(splitmix64(master + 0x9E3779B97F4A7C15ULL * (block + 1)));
}

}  // namespace greenwalk
