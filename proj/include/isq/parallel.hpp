#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "isq/common.hpp"

namespace isq {

// Worker count resolution: ISQ_THREADS when set (clamped to [1, 64]),
// otherwise 1. Results are a function of (seed, worker count); the runner
// records the resolved count in its manifest.
inline int worker_count_from_env() {
  const char* env = std::getenv("ISQ_THREADS");
  if (!env) return 1;
  int n = 0;
  try {
    n = std::stoi(env);
  } catch (...) {
    throw InvalidArgs(std::string("ISQ_THREADS is not an integer: ") + env);
  }
  return std::clamp(n, 1, 64);
}

// Splits [0, total) into `workers` contiguous chunks and runs
// body(chunk_index, begin, end) on each, in parallel when workers > 1.
// Each chunk must derive its own random stream from its index so that the
// output depends only on (seed, workers), never on scheduling.
template <typename Body>
void for_each_chunk(std::int64_t total, int workers, const Body& body) {
  if (total <= 0) return;
  workers = std::clamp<int>(workers, 1, static_cast<int>(std::min<std::int64_t>(total, 64)));
  if (workers == 1) {
    body(0, std::int64_t{0}, total);
    return;
  }
  const std::int64_t base = total / workers;
  const std::int64_t extra = total % workers;
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  std::int64_t begin = 0;
  for (int c = 0; c < workers; ++c) {
    const std::int64_t len = base + (c < extra ? 1 : 0);
    threads.emplace_back([&body, c, begin, len] { body(c, begin, begin + len); });
    begin += len;
  }
  for (auto& t : threads) t.join();
}

}  // namespace isq
