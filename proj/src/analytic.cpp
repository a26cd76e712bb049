#include "pqbias/analytic.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pqbias/errors.hpp"

namespace pqbias {

namespace {

constexpr std::uint64_t kDirichletTermCap = std::uint64_t{1} << 31;
constexpr std::uint64_t kZetaCutoff = 10000;
// Absolute error assumed for log L(1, chi) from the digamma route.
constexpr double kLogL1Error = 1e-12;

// n^-m for integer m >= 1.
double inverse_power(double n, int m) {
  double base = 1.0 / n;
  double result = 1.0;
  for (int e = m; e > 0; e >>= 1) {
    if (e & 1) result *= base;
    base *= base;
  }
  return result;
}

// Bound on sum_{m > M} |mu(m)/m log L(m, .)| from |log L(m, .)| <= 2^(2-m), m >= 3.
double mobius_tail_bound(int M) { return std::ldexp(1.0, 2 - M) / (M + 1); }

double prime_sum_tail(std::uint64_t X) {
  const double x = static_cast<double>(X);
  return -1.0 / (2.0 * x * std::log(x));
}

}  // namespace

double loglog(double x) { return std::log(std::log(x)); }

int mobius(std::uint64_t m) {
  if (m == 0) throw DomainError("mobius(0) is undefined");
  int sign = 1;
  for (std::uint64_t p = 2; p * p <= m; ++p) {
    if (m % p != 0) continue;
    m /= p;
    if (m % p == 0) return 0;
    sign = -sign;
  }
  if (m > 1) sign = -sign;
  return sign;
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError(fmt::format("digamma is evaluated only for x > 0, got {}", x));
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  // Bernoulli terms B_2k / (2k x^2k), k = 1..7
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))));
  return result + std::log(x) - 0.5 / x - series;
}

double dirichlet_L(int m, const QuadraticCharacter& chi, double tol) {
  if (m < 2) throw DomainError(fmt::format("dirichlet_L needs m >= 2, got {}", m));
  if (!(tol >= 1e-14)) throw DomainError(fmt::format("dirichlet_L tolerance {} below 1e-14", tol));
  const double d = static_cast<double>(chi.conductor());
  const double n_needed = std::ceil(std::pow(2.0 * d / tol, 1.0 / m));
  if (n_needed > static_cast<double>(kDirichletTermCap)) {
    throw ComputationError(
        fmt::format("L({}, chi_{}) to {} needs {} terms, over the cap {}", m, chi.discriminant(), tol, n_needed,
                    kDirichletTermCap));
  }
  const auto N = static_cast<std::uint64_t>(n_needed);
  CompensatedSum sum;
  for (std::uint64_t n = N; n >= 1; --n) {
    const int c = chi.eval(static_cast<std::int64_t>(n));
    if (c != 0) sum += c * inverse_power(static_cast<double>(n), m);
  }
  return sum.value();
}

double principal_L(int m, std::uint64_t d) {
  if (m < 2) throw DomainError(fmt::format("principal_L needs m >= 2, got {}", m));
  if (d == 0) throw DomainError("principal_L needs a positive modulus");
  CompensatedSum zeta;
  for (std::uint64_t n = kZetaCutoff - 1; n >= 1; --n) zeta += inverse_power(static_cast<double>(n), m);
  // Euler-Maclaurin remainder from N on.
  const double N = static_cast<double>(kZetaCutoff);
  const double tailN = inverse_power(N, m);
  zeta += N * tailN / (m - 1);
  zeta += 0.5 * tailN;
  zeta += m * tailN / N / 12.0;
  double value = zeta.value();
  for (const auto p : prime_divisors(d)) value *= 1.0 - inverse_power(static_cast<double>(p), m);
  return value;
}

double L_at_one(const QuadraticCharacter& chi) {
  const std::uint64_t d = chi.conductor();
  CompensatedSum sum;
  for (std::uint64_t a = 1; a < d; ++a) {
    const int c = chi.eval(static_cast<std::int64_t>(a));
    if (c != 0) sum += c * digamma(static_cast<double>(a) / static_cast<double>(d));
  }
  return -sum.value() / static_cast<double>(d);
}

LchiEstimate lchi(const QuadraticCharacter& chi, double tol) {
  if (!(tol >= 1e-11)) throw ComputationError(fmt::format("lchi tolerance {} is below the achievable 1e-11", tol));

  int M = 3;
  while (mobius_tail_bound(M) > tol / 2) ++M;
  const double term_tol = std::max(1e-14, tol / (4.0 * M));

  LchiEstimate est{};
  est.discriminant = chi.discriminant();
  est.L1 = L_at_one(chi);
  if (!(est.L1 > 0.0)) throw ComputationError(fmt::format("L(1, chi_{}) evaluated to {}", chi.discriminant(), est.L1));

  CompensatedSum total;
  double bound = mobius_tail_bound(M) + kLogL1Error;
  for (int m = 1; m <= M; ++m) {
    const int mu = mobius(static_cast<std::uint64_t>(m));
    if (mu == 0) continue;
    double L = 0.0;
    if (m == 1) {
      L = est.L1;
    } else if (m % 2 == 0) {
      L = principal_L(m, chi.conductor());
    } else {
      L = dirichlet_L(m, chi, term_tol);
      // L(m, chi) >= 1 - (zeta(3) - 1) > 0.79 for odd m >= 3.
      bound += term_tol / (0.79 * m);
    }
    const double term = mu * std::log(L) / m;
    est.terms.push_back({m, term});
    total += term;
  }
  est.value = total.value();
  est.truncation_bound = bound;
  est.terms_used = M;
  est.E = est.value - std::log(est.L1);
  if (!(bound < tol)) {
    throw ComputationError(fmt::format("lchi error bound {} does not meet tolerance {}", bound, tol));
  }
  return est;
}

double lchi_direct(const QuadraticCharacter& chi, const PrimeStore& store, std::uint64_t X) {
  const std::size_t count = store.pi(X);
  CompensatedSum sum;
  for (std::size_t i = 0; i < count; ++i) {
    const int c = chi.eval(static_cast<std::int64_t>(store[i]));
    if (c != 0) sum += c / static_cast<double>(store[i]);
  }
  return sum.value();
}

double e_prime_sum(const QuadraticCharacter& chi, const PrimeStore& store) {
  CompensatedSum sum;
  for (const std::uint64_t p : store.primes()) {
    const int c = chi.eval(static_cast<std::int64_t>(p));
    if (c == 0) continue;
    const double t = c / static_cast<double>(p);
    sum += std::log1p(-t) + t;
  }
  sum += prime_sum_tail(store.limit());
  return sum.value();
}

EBoundConstants e_bound_constants(const PrimeStore& store) {
  EBoundConstants out{};
  out.prime_limit = store.limit();
  out.closed_form.lower = constants::mertens - constants::euler_gamma;
  out.closed_form.upper = constants::euler_gamma - constants::mertens - std::log(std::numbers::pi * std::numbers::pi / 6);

  CompensatedSum lower;
  CompensatedSum upper;
  for (const std::uint64_t p : store.primes()) {
    const double t = 1.0 / static_cast<double>(p);
    lower += std::log1p(-t) + t;
    upper += std::log1p(t) - t;
  }
  lower += prime_sum_tail(store.limit());
  upper += prime_sum_tail(store.limit());
  out.prime_sum = {lower.value(), upper.value()};

  const double dl = std::abs(out.prime_sum.lower - out.closed_form.lower);
  const double du = std::abs(out.prime_sum.upper - out.closed_form.upper);
  if (dl > 1e-5 || du > 1e-5) {
    throw ComputationError(
        fmt::format("E bound constants disagree between prime sum and closed form ({:.3e}, {:.3e})", dl, du));
  }
  return out;
}

EBoundConstants e_bound_constants() { return e_bound_constants(build_primes(10'000'000)); }

EBounds corrected_e_bounds(const QuadraticCharacter& chi) {
  const EBounds all{constants::mertens - constants::euler_gamma,
                    constants::euler_gamma - constants::mertens - std::log(std::numbers::pi * std::numbers::pi / 6)};
  EBounds out = all;
  for (const auto p : chi.ramified_primes()) {
    const double t = 1.0 / static_cast<double>(p);
    out.lower -= std::log1p(-t) + t;
    out.upper -= std::log1p(t) - t;
  }
  return out;
}

EBounds corrected_e_bounds(const QuadraticCharacter& chi, const PrimeStore& store) {
  CompensatedSum lower;
  CompensatedSum upper;
  for (const std::uint64_t p : store.primes()) {
    if (chi.conductor() % p == 0) continue;
    const double t = 1.0 / static_cast<double>(p);
    lower += std::log1p(-t) + t;
    upper += std::log1p(t) - t;
  }
  lower += prime_sum_tail(store.limit());
  upper += prime_sum_tail(store.limit());
  return {lower.value(), upper.value()};
}

Prediction predict(Formula formula, double x, const PredictionParams& params) {
  if (!(x >= 16.0)) throw DomainError(fmt::format("predictions need x >= 16 so that log log x > 1, got {}", x));
  const double ll = loglog(x);
  Prediction out{formula, x, params, 0.0, 0.0};
  switch (formula) {
    case Formula::theorem:
      out.coefficient = params.eta * params.lchi;
      break;
    case Formula::s:
      out.coefficient = 1.0 / 3.0;
      out.ratio = 1.0 + out.coefficient / (ll - 1.0);
      return out;
    case Formula::k_factor:
      out.coefficient = params.eta * (params.k - 1) * params.lchi;
      break;
    case Formula::weighted:
      out.coefficient = 2.0 * params.eta * params.lchi;
      break;
    case Formula::mixed:
      out.coefficient = (params.k - 1) * params.c;
      break;
  }
  out.ratio = 1.0 + out.coefficient / ll;
  return out;
}

double mixed_coefficient(std::span<const double> lchis, std::span<const int> etas) {
  if (lchis.empty() || lchis.size() != etas.size()) {
    throw UsageError("mixed coefficient needs one eta per character and at least one character");
  }
  CompensatedSum sum;
  for (std::size_t j = 0; j < lchis.size(); ++j) sum += etas[j] * lchis[j];
  return sum.value() / static_cast<double>(lchis.size());
}

}  // namespace pqbias
