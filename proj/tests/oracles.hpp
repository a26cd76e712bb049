#pragma once

// Reference implementations used only by the tests. None of them go through
// the segmented sieve, the prefix tables or the Kronecker routine.

#include <cmath>
#include <cstdint>
#include <vector>

namespace pqbias::testing {

inline bool is_prime_trial(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

inline std::vector<std::uint64_t> primes_trial(std::uint64_t limit) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 2; n <= limit; ++n) {
    if (is_prime_trial(n)) out.push_back(n);
  }
  return out;
}

// Eratosthenes over the whole range with a bit vector.
inline std::vector<std::uint64_t> primes_eratosthenes(std::uint64_t limit) {
  std::vector<bool> sieve(limit + 1, true);
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (!sieve[i]) continue;
    out.push_back(i);
    for (std::uint64_t j = i * i; j <= limit; j += i) sieve[j] = false;
  }
  return out;
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  for (; e; e >>= 1) {
    if (e & 1) r = static_cast<std::uint64_t>((static_cast<unsigned __int128>(r) * b) % m);
    b = static_cast<std::uint64_t>((static_cast<unsigned __int128>(b) * b) % m);
  }
  return r;
}

// Legendre symbol (a/p) for an odd prime p by Euler's criterion.
inline int legendre_euler(std::int64_t a, std::uint64_t p) {
  const auto sp = static_cast<std::int64_t>(p);
  const auto r = static_cast<std::uint64_t>(((a % sp) + sp) % sp);
  if (r == 0) return 0;
  return powmod(r, (p - 1) / 2, p) == 1 ? 1 : -1;
}

// (a/2) from the definition.
inline int kronecker_two(std::int64_t a) {
  if (a % 2 == 0) return 0;
  const std::int64_t r = ((a % 8) + 8) % 8;
  return (r == 1 || r == 7) ? 1 : -1;
}

// Kronecker symbol for n >= 1 by factoring n and multiplying Legendre symbols.
inline int kronecker_by_factoring(std::int64_t a, std::uint64_t n) {
  int result = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      result *= p == 2 ? kronecker_two(a) : legendre_euler(a, p);
      n /= p;
    }
  }
  if (n > 1) result *= n == 2 ? kronecker_two(a) : legendre_euler(a, n);
  return result;
}

}  // namespace pqbias::testing
