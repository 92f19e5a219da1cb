#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace lacunary {

/// Worker cap shared by the counting and Euler-product loops.
inline unsigned& max_threads()
{
  static unsigned n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Runs fn(block) for block in [0, blocks) on up to max_threads() workers.
/// Results are indexed by block, so merges are deterministic regardless of thread count.
template <class T, class Fn>
std::vector<T> run_blocks(std::size_t blocks, Fn fn)
{
  std::vector<T> out(blocks);
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(max_threads(), blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b)
      out[b] = fn(b);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t b; (b = next++) < blocks;)
        out[b] = fn(b);
    });
  for (auto& t : pool)
    t.join();
  return out;
}

} // namespace lacunary
