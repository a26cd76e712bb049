#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace pqbias::detail {

/// Runs body(i, acc) for i in [0, n), dealing indices round-robin to `workers`
/// threads with one accumulator each, then folds the accumulators in worker
/// order. Only use with exact (integer) accumulation.
template <typename Acc, typename Body>
Acc interleaved_reduce(std::size_t n, unsigned workers, Body body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    Acc acc{};
    for (std::size_t i = 0; i < n; ++i) body(i, acc);
    return acc;
  }
  std::vector<Acc> partial(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i, partial[w]);
    });
  }
  for (auto& t : pool) t.join();
  Acc acc{};
  for (const auto& p : partial) acc += p;
  return acc;
}

}  // namespace pqbias::detail
