#include "pqbias/characters.hpp"

#include <bit>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "pqbias/errors.hpp"

namespace pqbias {

namespace {

// Jacobi symbol (a/n) for odd n >= 1 and 0 <= a < n.
int jacobi(std::uint64_t a, std::uint64_t n) {
  int result = 1;
  while (a != 0) {
    const int twos = std::countr_zero(a);
    a >>= twos;
    if ((twos & 1) && (n % 8 == 3 || n % 8 == 5)) result = -result;
    if (a % 4 == 3 && n % 4 == 3) result = -result;
    std::swap(a, n);
    a %= n;
  }
  return n == 1 ? result : 0;
}

std::uint64_t magnitude(std::int64_t v) {
  return v < 0 ? ~static_cast<std::uint64_t>(v) + 1 : static_cast<std::uint64_t>(v);
}

constexpr std::uint64_t kTableConductorLimit = 1u << 20;

}  // namespace

int kronecker(std::int64_t a, std::int64_t n) {
  if (a == 0 && n == 0) throw DomainError("kronecker symbol (0/0) is undefined");
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;

  int result = 1;
  if (n < 0 && a < 0) result = -1;  // (a/-1)
  std::uint64_t un = magnitude(n);

  if (un % 2 == 0) {
    if (a % 2 == 0) return 0;
    const int twos = std::countr_zero(un);
    un >>= twos;
    // (a/2) = +1 for a = +-1 (mod 8), -1 for a = +-3 (mod 8)
    const std::int64_t r = ((a % 8) + 8) % 8;
    if ((twos & 1) && (r == 3 || r == 5)) result = -result;
  }
  if (un == 1) return result;

  std::uint64_t ua = magnitude(a) % un;
  if (a < 0 && ua != 0) ua = un - ua;
  return result * jacobi(ua, un);
}

ClassLabel label_from_int(int value) {
  if (value < -1 || value > 1) throw UsageError(fmt::format("class label must be -1, 0 or 1, got {}", value));
  return static_cast<ClassLabel>(value);
}

std::string_view to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::minus:
      return "-";
    case ClassLabel::ramified:
      return "0";
    case ClassLabel::plus:
      return "+";
  }
  return "?";
}

bool is_squarefree(std::uint64_t n) {
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    n /= p;
    if (n % p == 0) return false;
  }
  return true;
}

std::vector<std::uint64_t> prime_divisors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    out.push_back(p);
    while (n % p == 0) n /= p;
  }
  if (n > 1) out.push_back(n);
  return out;
}

std::uint64_t euler_phi(std::uint64_t m) {
  std::uint64_t phi = m;
  for (const auto p : prime_divisors(m)) phi = phi / p * (p - 1);
  return phi;
}

std::optional<std::string> fundamental_discriminant_defect(std::int64_t D) {
  if (D == 0) return "D = 0 is not a discriminant";
  if (D == 1) return "D = 1 gives the principal character";
  const std::int64_t r = ((D % 4) + 4) % 4;
  if (r == 1) {
    if (!is_squarefree(magnitude(D))) return fmt::format("D = {} is 1 mod 4 but not squarefree", D);
    return std::nullopt;
  }
  if (r == 0) {
    const std::int64_t m = D / 4;
    const std::int64_t mr = ((m % 4) + 4) % 4;
    if (mr != 2 && mr != 3) return fmt::format("D = {} is 0 mod 4 but D/4 = {} is not 2 or 3 mod 4", D, m);
    if (!is_squarefree(magnitude(m))) return fmt::format("D = {} is 0 mod 4 but D/4 = {} is not squarefree", D, m);
    return std::nullopt;
  }
  return fmt::format("D = {} is {} mod 4; a discriminant must be 0 or 1 mod 4", D, r);
}

QuadraticCharacter::QuadraticCharacter(std::int64_t discriminant)
    : discriminant_(discriminant), conductor_(magnitude(discriminant)) {
  if (auto defect = fundamental_discriminant_defect(discriminant)) {
    throw DomainError("not a fundamental discriminant: " + *defect);
  }
  ramified_ = prime_divisors(conductor_);
  if (conductor_ <= kTableConductorLimit) {
    std::vector<std::int8_t> table(conductor_);
    for (std::uint64_t a = 0; a < conductor_; ++a) {
      table[a] = static_cast<std::int8_t>(kronecker(discriminant_, static_cast<std::int64_t>(a)));
    }
    table_ = std::make_shared<const std::vector<std::int8_t>>(std::move(table));
  }
}

int QuadraticCharacter::eval(std::int64_t n) const {
  if (n > 0 && table_) return (*table_)[static_cast<std::uint64_t>(n) % conductor_];
  return kronecker(discriminant_, n);
}

ResidueClassPredicate::ResidueClassPredicate(std::uint64_t modulus, std::int64_t residue) : modulus_(modulus) {
  if (modulus == 0) throw UsageError("residue class modulus must be positive");
  const auto m = static_cast<std::int64_t>(modulus);
  residue_ = static_cast<std::uint64_t>(((residue % m) + m) % m);
  if (std::gcd(residue_, modulus_) != 1) {
    throw UsageError(fmt::format("residue {} mod {} is not a reduced class", residue, modulus));
  }
}

}  // namespace pqbias
