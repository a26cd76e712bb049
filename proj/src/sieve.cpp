#include "pqbias/sieve.hpp"

#include <cmath>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "pqbias/errors.hpp"

namespace pqbias {

namespace {

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Odd primes in [low, high], low odd, using odd sieving primes up to sqrt(high).
void sieve_segment(std::uint64_t low, std::uint64_t high, std::span<const std::uint32_t> base,
                   std::vector<std::uint8_t>& flags, std::vector<std::uint32_t>& out) {
  const std::size_t slots = (high - low) / 2 + 1;
  flags.assign(slots, 1);
  for (const std::uint64_t p : base) {
    const std::uint64_t pp = p * p;
    if (pp > high) break;
    std::uint64_t start = pp;
    if (start < low) {
      start = (low + p - 1) / p * p;
      if (start % 2 == 0) start += p;
    }
    for (std::uint64_t j = (start - low) / 2; j < slots; j += p) flags[j] = 0;
  }
  if (low == 1) flags[0] = 0;
  for (std::size_t i = 0; i < slots; ++i) {
    if (flags[i]) out.push_back(static_cast<std::uint32_t>(low + 2 * i));
  }
}

}  // namespace

std::size_t PrimeStore::pi(std::uint64_t bound) const {
  if (bound > limit_) throw RangeError(fmt::format("prime count requested at {} beyond store limit {}", bound, limit_));
  return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), bound) - primes_.begin());
}

std::vector<std::uint32_t> simple_sieve(std::uint64_t limit) {
  std::vector<std::uint8_t> composite(limit + 1, 0);
  std::vector<std::uint32_t> primes;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
  }
  return primes;
}

PrimeStore build_primes(std::uint64_t limit, const SieveOptions& options) {
  const std::uint64_t ceiling = std::min<std::uint64_t>(options.ceiling, std::numeric_limits<std::uint32_t>::max());
  if (limit > ceiling) {
    throw ResourceError(fmt::format("sieve limit {} exceeds the configured ceiling {}", limit, ceiling));
  }
  if (limit < 2) return PrimeStore(limit, {});

  const std::uint64_t root = isqrt(limit);
  std::vector<std::uint32_t> base;
  for (const auto p : simple_sieve(root)) {
    if (p != 2) base.push_back(p);
  }

  // Segments are aligned on an even span so every segment starts at an odd number.
  std::uint64_t span = std::max<std::uint64_t>(options.segment_size, 64);
  span += span % 2;
  const std::uint64_t segments = (limit - 1) / span + 1;  // covering [1, limit]
  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(segments)));

  auto bounds = [&](std::uint64_t s) {
    const std::uint64_t low = 1 + s * span;
    const std::uint64_t high = std::min(low + span - 1, limit);
    return std::pair{low, high};
  };

  std::vector<std::uint32_t> primes{2};
  if (workers == 1) {
    std::vector<std::uint8_t> flags;
    for (std::uint64_t s = 0; s < segments; ++s) {
      const auto [low, high] = bounds(s);
      sieve_segment(low, high, base, flags, primes);
    }
  } else {
    std::vector<std::vector<std::uint32_t>> chunks(segments);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        std::vector<std::uint8_t> flags;
        for (std::uint64_t s = w; s < segments; s += workers) {
          const auto [low, high] = bounds(s);
          sieve_segment(low, high, base, flags, chunks[s]);
        }
      });
    }
    for (auto& t : pool) t.join();
    std::size_t total = 1;
    for (const auto& c : chunks) total += c.size();
    primes.reserve(total);
    for (const auto& c : chunks) primes.insert(primes.end(), c.begin(), c.end());
  }
  return PrimeStore(limit, std::move(primes));
}

ClassifiedPrimeCounts::ClassifiedPrimeCounts(std::shared_ptr<const PrimeStore> store, QuadraticCharacter chi)
    : store_(std::move(store)), chi_(std::move(chi)) {
  const auto primes = store_->primes();
  plus_.resize(primes.size() + 1);
  ramified_.resize(primes.size() + 1);
  plus_[0] = ramified_[0] = 0;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const ClassLabel c = chi_.classify(primes[i]);
    plus_[i + 1] = plus_[i] + (c == ClassLabel::plus ? 1 : 0);
    ramified_[i + 1] = ramified_[i] + (c == ClassLabel::ramified ? 1 : 0);
  }
}

}  // namespace pqbias
