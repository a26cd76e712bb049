#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pqbias {

/// Kronecker symbol (a/n). Undefined, and rejected with DomainError, for a = n = 0.
int kronecker(std::int64_t a, std::int64_t n);

/// Value of a quadratic character at a prime, used to partition primes.
enum class ClassLabel : std::int8_t { minus = -1, ramified = 0, plus = 1 };

constexpr int to_int(ClassLabel label) { return static_cast<int>(label); }

/// Accepts -1, 0, +1; anything else is a UsageError.
ClassLabel label_from_int(int value);

/// "+", "-" or "0".
std::string_view to_string(ClassLabel label);

/// Reason D fails to be a fundamental discriminant, or nullopt if it is one.
std::optional<std::string> fundamental_discriminant_defect(std::int64_t D);

inline bool is_fundamental_discriminant(std::int64_t D) {
  return !fundamental_discriminant_defect(D).has_value();
}

bool is_squarefree(std::uint64_t n);
std::vector<std::uint64_t> prime_divisors(std::uint64_t n);
std::uint64_t euler_phi(std::uint64_t m);

/// The primitive real character n -> (D/n) attached to a fundamental
/// discriminant D. Its conductor is |D|.
class QuadraticCharacter {
 public:
  /// Throws DomainError naming the failed condition when D is not fundamental.
  explicit QuadraticCharacter(std::int64_t discriminant);

  std::int64_t discriminant() const { return discriminant_; }
  std::uint64_t conductor() const { return conductor_; }
  const std::vector<std::uint64_t>& ramified_primes() const { return ramified_; }

  int eval(std::int64_t n) const;
  ClassLabel classify(std::uint64_t n) const { return static_cast<ClassLabel>(eval(static_cast<std::int64_t>(n))); }

  friend bool operator==(const QuadraticCharacter& a, const QuadraticCharacter& b) {
    return a.discriminant_ == b.discriminant_;
  }

 private:
  std::int64_t discriminant_;
  std::uint64_t conductor_;
  std::vector<std::uint64_t> ramified_;
  // eval over one period for small conductors; null otherwise.
  std::shared_ptr<const std::vector<std::int8_t>> table_;
};

inline QuadraticCharacter make_character(std::int64_t D) { return QuadraticCharacter(D); }

/// classify(chi, 1) is +1.
inline ClassLabel classify(const QuadraticCharacter& chi, std::uint64_t n) { return chi.classify(n); }

/// n == a (mod m) for a reduced residue a.
class ResidueClassPredicate {
 public:
  /// Throws UsageError unless m >= 1 and gcd(a, m) == 1.
  ResidueClassPredicate(std::uint64_t modulus, std::int64_t residue);

  std::uint64_t modulus() const { return modulus_; }
  std::uint64_t residue() const { return residue_; }
  bool accepts(std::uint64_t n) const { return n % modulus_ == residue_; }

 private:
  std::uint64_t modulus_;
  std::uint64_t residue_;
};

}  // namespace pqbias
