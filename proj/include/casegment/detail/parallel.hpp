#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace casegment::detail {

/// 0 means "one per hardware thread".
inline unsigned resolve_threads(unsigned requested) noexcept {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, count) into at most `threads` contiguous blocks and calls
/// fn(block, begin, end) for each, concurrently. Block boundaries depend only
/// on `count` and the block count, so callers can merge per-block results
/// in block order.
template <typename Fn>
void parallel_blocks(std::size_t count, unsigned threads, Fn&& fn) {
  const std::size_t blocks = std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(count, 1));
  if (blocks <= 1) {
    fn(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(blocks - 1);
  for (std::size_t b = 1; b < blocks; ++b)
    workers.emplace_back([&fn, b, count, blocks] { fn(b, b * count / blocks, (b + 1) * count / blocks); });
  fn(std::size_t{0}, std::size_t{0}, count / blocks);
}

}  // namespace casegment::detail
