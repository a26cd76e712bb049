#include <fmt/format.h>

#include "pqbias/counting.hpp"
#include "pqbias/errors.hpp"

namespace pqbias {

std::uint64_t naive_oracle(std::uint64_t x, int k, const FactorWeight& weight) {
  if (x > kNaiveOracleCeiling) {
    throw UsageError(fmt::format("naive oracle is limited to x <= {}, got {}", kNaiveOracleCeiling, x));
  }
  if (k < 1) throw UsageError(fmt::format("naive oracle needs k >= 1, got {}", k));
  const auto wanted = static_cast<std::size_t>(k);
  std::vector<std::uint64_t> factors;
  std::uint64_t total = 0;
  for (std::uint64_t n = 2; n <= x; ++n) {
    factors.clear();
    std::uint64_t m = n;
    for (std::uint64_t d = 2; d * d <= m && factors.size() < wanted; d += (d == 2 ? 1 : 2)) {
      while (m % d == 0 && factors.size() <= wanted) {
        factors.push_back(d);
        m /= d;
      }
    }
    if (m > 1) factors.push_back(m);
    if (factors.size() != wanted) continue;
    total += weight(factors);
  }
  return total;
}

}  // namespace pqbias
