#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pqbias/characters.hpp"
#include "pqbias/sieve.hpp"

namespace pqbias {

/// Whether p = q (and repeated factors in general) is admitted.
enum class PairConvention {
  inclusive,  // p <= q, squares counted
  strict,     // p < q, squarefree products only
};

std::string_view to_string(PairConvention convention);

struct CountOptions {
  PairConvention convention = PairConvention::inclusive;
  unsigned workers = 1;
};

/// Integers pq <= x split by the unordered class pair of their factors.
struct SemiprimeClassCounts {
  std::uint64_t x = 0;
  std::int64_t discriminant = 0;
  PairConvention convention = PairConvention::inclusive;
  std::uint64_t plus_plus = 0;
  std::uint64_t plus_minus = 0;
  std::uint64_t minus_minus = 0;
  std::uint64_t ramified = 0;        // at least one factor divides the conductor
  std::uint64_t total_coprime = 0;   // gcd(pq, d) = 1

  /// Symmetric in its arguments. Ramified labels are a UsageError.
  std::uint64_t count(ClassLabel a, ClassLabel b) const;
  std::uint64_t total() const { return total_coprime + ramified; }

  friend bool operator==(const SemiprimeClassCounts&, const SemiprimeClassCounts&) = default;
};

/// One experiment row: empirical ratio count / (normalizer * total) beside
/// the leading-order prediction.
struct BiasReport {
  std::uint64_t x = 0;
  std::string spec;
  std::uint64_t count = 0;
  std::uint64_t total = 0;
  double normalizer = 0.0;
  double empirical = 0.0;
  std::optional<double> predicted;  // absent for x < 16
  /// L_chi for single-character reports, c(chi, eta) for mixed ones, unset for progression pairs.
  std::optional<double> lchi;
  /// (empirical - 1) log log x, progression pairs only.
  std::optional<double> beta;
};

/// Largest prime the counting routines for x and k factors will look up.
inline std::uint64_t required_prime_limit(std::uint64_t x, int k) {
  return k <= 1 ? x : x >> (k - 1);
}

/// Exact class counts of pq <= x. The store behind `counts` must reach x/2.
SemiprimeClassCounts count_semiprimes_by_class(const ClassifiedPrimeCounts& counts, std::uint64_t x,
                                               const CountOptions& options = {});

/// r(x): (eta, eta) pairs over a quarter of all coprime pairs. `lchi` feeds
/// the prediction. Throws DomainError for x < 9 or an empty denominator.
BiasReport ratio_r(const ClassifiedPrimeCounts& counts, std::uint64_t x, ClassLabel eta, double lchi,
                   const CountOptions& options = {});

/// Integers p1...pk <= x (nondecreasing factors, or increasing under the
/// strict convention) with every chi(pj) = eta, over 2^-k times those with
/// every pj coprime to d. Requires 2 <= k <= 8.
BiasReport count_k_almost(const ClassifiedPrimeCounts& counts, std::uint64_t x, int k, ClassLabel eta, double lchi,
                          const CountOptions& options = {});

struct CharacterSpec {
  QuadraticCharacter character;
  ClassLabel eta;
};

/// Ordered tuples (p1..pk), prod <= x, with chi_j(p_j) = eta_j, over 2^-k
/// times the ordered tuples with (p_j, d_j) = 1. Requires 1 <= k <= 6 and
/// a store reaching x / 2^(k-1). `lchis` gives L_{chi_j} per spec.
BiasReport count_mixed(std::shared_ptr<const PrimeStore> store, std::uint64_t x, std::span<const CharacterSpec> specs,
                       std::span<const double> lchis, const CountOptions& options = {});

/// Sums of 1/p over p <= x with chi(p) = +1 and with chi(p) = -1.
struct WeightedRaceResult {
  std::uint64_t x = 0;
  std::int64_t discriminant = 0;
  double s_plus = 0.0;
  double s_minus = 0.0;
  double lchi = 0.0;
  std::optional<double> predicted;  // prediction for s_plus / s_minus

  double ratio() const { return s_plus / s_minus; }
  /// Sum for class `num` over sum for class `den`; both must be +1 or -1.
  double ratio(ClassLabel num, ClassLabel den) const;
};

/// Compensated sums in increasing prime order over fixed blocks, so the result
/// is bit-identical for every worker count.
WeightedRaceResult weighted_race(const ClassifiedPrimeCounts& counts, std::uint64_t x, double lchi,
                                 unsigned workers = 1);

/// A nonempty set of reduced residues modulo m.
class ResidueClassSet {
 public:
  /// Throws UsageError for an empty set or a residue not coprime to m.
  ResidueClassSet(std::uint64_t modulus, std::span<const std::int64_t> residues);
  explicit ResidueClassSet(std::span<const ResidueClassPredicate> classes);

  std::uint64_t modulus() const { return modulus_; }
  std::size_t size() const { return residues_.size(); }
  const std::vector<std::uint64_t>& residues() const { return residues_; }
  bool contains(std::uint64_t n) const;
  bool coprime(std::uint64_t n) const;
  std::string describe() const;

  friend bool operator==(const ResidueClassSet&, const ResidueClassSet&) = default;

 private:
  std::uint64_t modulus_ = 1;
  std::vector<std::uint64_t> residues_;  // sorted, distinct
  std::vector<std::uint8_t> member_;     // indexed by residue
};

/// #{pq <= x : p mod m in A, q mod n in B} over |A||B|/(phi(m)phi(n)) times
/// #{pq <= x : (p, m) = (q, n) = 1}. Identical sets are counted as unordered
/// pairs under the chosen convention; otherwise ordered tuples (p, q) are
/// counted, with p != q under the strict convention. Requires a store
/// reaching x/2.
BiasReport progression_pair_ratio(const PrimeStore& store, std::uint64_t x, const ResidueClassSet& A,
                                  const ResidueClassSet& B, const CountOptions& options = {});

/// Weight given to one factorization; sorted prime factors with multiplicity.
using FactorWeight = std::function<std::uint64_t(std::span<const std::uint64_t>)>;

constexpr std::uint64_t kNaiveOracleCeiling = 1'000'000;

/// Factors every n <= x by trial division and sums `weight` over those with
/// exactly k prime factors counted with multiplicity. Throws UsageError for
/// x above kNaiveOracleCeiling.
std::uint64_t naive_oracle(std::uint64_t x, int k, const FactorWeight& weight);

}  // namespace pqbias
