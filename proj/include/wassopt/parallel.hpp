#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace wassopt {

// Worker cap for internal parallelism: WASSOPT_THREADS, with 0 (or unset
// nonsense) meaning hardware auto-detect.
inline unsigned max_threads() {
  unsigned cap = 0;
  if (const char* env = std::getenv("WASSOPT_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) cap = static_cast<unsigned>(parsed);
  }
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return cap;
}

// Static-partition parallel loop. The body must be safe to run concurrently
// for distinct indices and deterministic per index; result ordering is then
// independent of the thread count.
template <typename Body>
void parallel_for(std::size_t count, const Body& body) {
  const unsigned workers = std::min<std::size_t>(max_threads(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += workers) body(i);
    });
  }
  for (std::thread& th : threads) th.join();
}

}  // namespace wassopt
