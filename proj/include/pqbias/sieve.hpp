#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pqbias/characters.hpp"

namespace pqbias {

struct SieveOptions {
  /// Largest limit build_primes accepts. Primes are stored as 32-bit values,
  /// so the ceiling may not exceed 2^32 - 1.
  std::uint64_t ceiling = std::uint64_t{1} << 31;
  /// Integers covered per segment.
  std::size_t segment_size = std::size_t{1} << 18;
  unsigned workers = 1;
};

/// All primes <= limit in increasing order.
class PrimeStore {
 public:
  PrimeStore(std::uint64_t limit, std::vector<std::uint32_t> primes) : limit_(limit), primes_(std::move(primes)) {}

  std::uint64_t limit() const { return limit_; }
  std::size_t size() const { return primes_.size(); }
  std::span<const std::uint32_t> primes() const { return primes_; }
  std::uint64_t operator[](std::size_t i) const { return primes_[i]; }

  /// Number of primes <= bound. Throws RangeError for bound > limit.
  std::size_t pi(std::uint64_t bound) const;

  friend bool operator==(const PrimeStore&, const PrimeStore&) = default;

 private:
  std::uint64_t limit_;
  std::vector<std::uint32_t> primes_;
};

/// Segmented, odd-only sieve of Eratosthenes. Output does not depend on
/// segment size or worker count. Throws ResourceError above the ceiling.
PrimeStore build_primes(std::uint64_t limit, const SieveOptions& options = {});

/// Plain byte-per-integer sieve over [0, limit]; the reference for build_primes.
std::vector<std::uint32_t> simple_sieve(std::uint64_t limit);

/// Per-class prime counting for one character over a shared PrimeStore.
///
/// Only the +1 and 0 prefix sums are stored; the -1 count is what remains.
class ClassifiedPrimeCounts {
 public:
  ClassifiedPrimeCounts(std::shared_ptr<const PrimeStore> store, QuadraticCharacter chi);

  const QuadraticCharacter& character() const { return chi_; }
  const PrimeStore& store() const { return *store_; }
  std::shared_ptr<const PrimeStore> shared_store() const { return store_; }
  std::uint64_t limit() const { return store_->limit(); }

  /// #{p <= bound : chi(p) = eta}. Throws RangeError for bound > limit.
  std::size_t query(std::uint64_t bound, ClassLabel eta) const { return count_below(store_->pi(bound), eta); }

  /// Class count among the first `rank` primes.
  std::size_t count_below(std::size_t rank, ClassLabel eta) const {
    switch (eta) {
      case ClassLabel::plus:
        return plus_[rank];
      case ClassLabel::ramified:
        return ramified_[rank];
      case ClassLabel::minus:
        break;
    }
    return rank - plus_[rank] - ramified_[rank];
  }

  /// Primes with index in [first, last) of class eta.
  std::size_t count_between(std::size_t first, std::size_t last, ClassLabel eta) const {
    return last > first ? count_below(last, eta) - count_below(first, eta) : 0;
  }

  ClassLabel label_at(std::size_t index) const {
    if (plus_[index + 1] != plus_[index]) return ClassLabel::plus;
    if (ramified_[index + 1] != ramified_[index]) return ClassLabel::ramified;
    return ClassLabel::minus;
  }

 private:
  std::shared_ptr<const PrimeStore> store_;
  QuadraticCharacter chi_;
  std::vector<std::uint32_t> plus_;
  std::vector<std::uint32_t> ramified_;
};

inline ClassifiedPrimeCounts classified_counts(std::shared_ptr<const PrimeStore> store, const QuadraticCharacter& chi) {
  return ClassifiedPrimeCounts(std::move(store), chi);
}

}  // namespace pqbias
