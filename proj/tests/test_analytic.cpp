#include <doctest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pqbias/analytic.hpp"
#include "pqbias/errors.hpp"

using namespace pqbias;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double catalan = 0.915965594177219015054603514932;

const PrimeStore& primes_1e7() {
  static const PrimeStore store = build_primes(10'000'000);
  return store;
}

// Sum of chi(p)/p over p <= X plus log(1 - chi(p)/p) + chi(p)/p over p <= Y,
// the latter converging fast enough to read E off directly.
double e_oracle(const QuadraticCharacter& chi, std::uint64_t Y) {
  long double s = 0;
  for (const auto p : testing::primes_eratosthenes(Y)) {
    const int c = chi.eval(static_cast<std::int64_t>(p));
    const long double t = static_cast<long double>(c) / p;
    s += std::log1p(-t) + t;
  }
  return static_cast<double>(s);
}

}  // namespace

TEST_CASE("digamma against boost") {
  CHECK(digamma(1.0) == doctest::Approx(-std::numbers::egamma).epsilon(1e-15));
  CHECK(digamma(0.5) == doctest::Approx(-std::numbers::egamma - 2 * std::numbers::ln2).epsilon(1e-15));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-3, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng);
    const double ref = boost::math::digamma(x);
    REQUIRE(std::abs(digamma(x) - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
  }
  CHECK_THROWS_AS(digamma(0.0), DomainError);
  CHECK_THROWS_AS(digamma(-1.5), DomainError);
}

TEST_CASE("mobius and loglog") {
  const int expected[] = {1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0, -1, 1, 1, 0};
  for (int m = 1; m <= 16; ++m) CHECK(mobius(m) == expected[m - 1]);
  CHECK_THROWS_AS(mobius(0), DomainError);
  CHECK(loglog(std::exp(std::exp(2.0))) == doctest::Approx(2.0));
}

TEST_CASE("Dirichlet L at integers") {
  const auto chi4 = make_character(-4);
  CHECK(std::abs(dirichlet_L(2, chi4) - catalan) < 1e-12);
  CHECK(std::abs(dirichlet_L(3, chi4) - pi * pi * pi / 32) < 1e-12);
  CHECK(std::abs(dirichlet_L(2, make_character(5)) - 4 * pi * pi / (25 * std::sqrt(5.0))) < 1e-12);
  CHECK(std::abs(dirichlet_L(2, make_character(-3)) - 0.781302412896486296867) < 1e-12);

  for (const std::int64_t D : {-4, 5, 8, -3, -7, 12, -163, 1001}) {
    if (!is_fundamental_discriminant(D)) continue;
    const auto chi = make_character(D);
    for (const int m : {3, 5, 7}) {
      const double L = dirichlet_L(m, chi, 1e-13);
      const double zeta_m = std::riemann_zeta(static_cast<double>(m));
      CHECK(std::abs(L - 1) <= zeta_m - 1 + 1e-13);
      CHECK(L > 0.79);
    }
  }

  CHECK_THROWS_AS(dirichlet_L(1, chi4), DomainError);
  CHECK_THROWS_AS(dirichlet_L(2, chi4, 1e-15), DomainError);
  std::int64_t D = 100'001;
  while (!is_fundamental_discriminant(D)) D += 4;
  CHECK_THROWS_AS(dirichlet_L(2, make_character(D), 1e-14), ComputationError);
}

TEST_CASE("principal L is zeta with Euler factors removed") {
  CHECK(std::abs(principal_L(2, 1) - pi * pi / 6) < 1e-13);
  CHECK(std::abs(principal_L(2, 4) - pi * pi / 8) < 1e-13);
  CHECK(std::abs(principal_L(4, 4) - std::pow(pi, 4) / 90 * 15 / 16) < 1e-13);
  for (const int m : {3, 5, 6, 10, 20}) {
    CHECK(std::abs(principal_L(m, 1) - std::riemann_zeta(static_cast<double>(m))) < 1e-13);
  }
  CHECK(std::abs(principal_L(2, 15) - pi * pi / 6 * (1 - 1.0 / 9) * (1 - 1.0 / 25)) < 1e-13);
  CHECK_THROWS_AS(principal_L(1, 4), DomainError);
  CHECK_THROWS_AS(principal_L(2, 0), DomainError);
}

TEST_CASE("L(1, chi) closed forms") {
  CHECK(std::abs(L_at_one(make_character(-4)) - pi / 4) < 1e-13);
  CHECK(std::abs(L_at_one(make_character(-3)) - pi / (3 * std::sqrt(3.0))) < 1e-13);
  CHECK(std::abs(L_at_one(make_character(-7)) - pi / std::sqrt(7.0)) < 1e-13);
  CHECK(std::abs(L_at_one(make_character(-8)) - pi / (2 * std::sqrt(2.0))) < 1e-13);
  // Real quadratic fields: 2 h log(eps) / sqrt(D).
  CHECK(std::abs(L_at_one(make_character(5)) - 2 * std::log((1 + std::sqrt(5.0)) / 2) / std::sqrt(5.0)) < 1e-13);
  CHECK(std::abs(L_at_one(make_character(8)) - std::log(1 + std::sqrt(2.0)) / std::sqrt(2.0)) < 1e-13);
  CHECK(std::abs(L_at_one(make_character(12)) - std::log(2 + std::sqrt(3.0)) / std::sqrt(3.0)) < 1e-13);
  // Class number 3.
  CHECK(std::abs(L_at_one(make_character(-23)) - 3 * pi / std::sqrt(23.0)) < 1e-12);
}

TEST_CASE("L_chi through the Mobius identity") {
  SUBCASE("reference values") {
    CHECK(std::abs(lchi(make_character(-4)).value - (-0.334981325)) < 1e-9);
    CHECK(std::abs(lchi(make_character(5)).value - (-1.007996548)) < 1e-9);
  }

  SUBCASE("invariants") {
    for (const std::int64_t D : {-4, 5, 8, -3, -7, -8, 12, 13, -163, 1'000'005}) {
      if (!is_fundamental_discriminant(D)) continue;
      const auto chi = make_character(D);
      const auto est = lchi(chi);
      CHECK(est.discriminant == D);
      CHECK(est.truncation_bound < 1e-9);
      CHECK(est.L1 == doctest::Approx(L_at_one(chi)).epsilon(1e-15));
      CHECK(est.E == doctest::Approx(est.value - std::log(est.L1)).epsilon(1e-15));
      REQUIRE(!est.terms.empty());
      CHECK(est.terms.front().m == 1);
      CHECK(est.terms.back().m <= est.terms_used);
      for (std::size_t i = 1; i < est.terms.size(); ++i) {
        CHECK(std::abs(est.terms[i].value) <= std::pow(2.0, 1 - est.terms[i].m) + 1e-15);
      }
      const auto tight = lchi(chi, 1e-11);
      CHECK(std::abs(tight.value - est.value) <= est.truncation_bound + tight.truncation_bound);
      CHECK(tight.terms_used >= est.terms_used);
    }
  }

  SUBCASE("E against a direct prime sum") {
    for (const std::int64_t D : {-4, 5, -3, 8, -7, 13}) {
      const auto chi = make_character(D);
      // tail of the prime sum past 2e6 is below 1e-6
      CHECK(std::abs(lchi(chi).E - e_oracle(chi, 2'000'000)) < 1e-6);
      CHECK(std::abs(lchi(chi).E - e_prime_sum(chi, primes_1e7())) < 1e-6);
    }
  }

  SUBCASE("tolerance floor") {
    CHECK_THROWS_AS(lchi(make_character(-4), 1e-12), ComputationError);
    CHECK_NOTHROW(lchi(make_character(-4), 1e-11));
  }

  SUBCASE("partial sums approach L_chi") {
    const auto chi = make_character(-4);
    const double target = lchi(chi).value;
    const double a = std::abs(lchi_direct(chi, primes_1e7(), 10'000) - target);
    const double b = std::abs(lchi_direct(chi, primes_1e7(), 10'000'000) - target);
    CHECK(b < 1e-3);
    CHECK(b < a);
    CHECK(lchi_direct(chi, primes_1e7(), 10) == doctest::Approx(-1.0 / 3 + 1.0 / 5 - 1.0 / 7));
    CHECK_THROWS_AS(lchi_direct(chi, primes_1e7(), 20'000'000), RangeError);
  }
}

TEST_CASE("E bound constants") {
  const auto k = e_bound_constants(primes_1e7());
  CHECK(k.prime_limit == 10'000'000);
  CHECK(k.closed_form.lower == doctest::Approx(-0.315718452).epsilon(1e-9));
  CHECK(k.closed_form.upper == doctest::Approx(-0.181981850).epsilon(1e-9));
  CHECK(std::abs(k.prime_sum.lower - k.closed_form.lower) < 1e-8);
  CHECK(std::abs(k.prime_sum.upper - k.closed_form.upper) < 1e-8);
  CHECK_THROWS_AS(e_bound_constants(build_primes(10)), ComputationError);

  const auto chi4 = make_character(-4);
  const auto b = corrected_e_bounds(chi4);
  CHECK(b.lower == doctest::Approx(-0.12257).epsilon(1e-4));
  CHECK(b.upper == doctest::Approx(-0.08745).epsilon(1e-4));
  const auto bs = corrected_e_bounds(chi4, primes_1e7());
  CHECK(std::abs(bs.lower - b.lower) < 1e-8);
  CHECK(std::abs(bs.upper - b.upper) < 1e-8);

  const double E = lchi(chi4).E;
  CHECK(E == doctest::Approx(-0.09341685).epsilon(1e-6));
  CHECK(E > k.closed_form.upper);
  CHECK(E >= b.lower);
  CHECK(E <= b.upper);
}

TEST_CASE("predictions") {
  CHECK(s_of_x(1000) == doctest::Approx(1 + 1 / (3 * (loglog(1000) - 1))));
  CHECK(s_of_x(1000) == doctest::Approx(1.357).epsilon(1e-3));

  const auto t = predict(Formula::theorem, 1e6, {.eta = -1, .lchi = -0.334981325});
  CHECK(t.coefficient == doctest::Approx(0.334981325));
  CHECK(t.ratio == doctest::Approx(1.1277).epsilon(1e-4));

  const auto kf = predict(Formula::k_factor, 1e6, {.eta = -1, .k = 4, .lchi = -0.3});
  CHECK(kf.coefficient == doctest::Approx(0.9));

  const auto w = predict(Formula::weighted, 1e7, {.eta = 1, .lchi = -0.334981325});
  CHECK(w.ratio == doctest::Approx(1 - 2 * 0.334981325 / loglog(1e7)));
  const auto winv = predict(Formula::weighted, 1e7, {.eta = -1, .lchi = -0.334981325});
  CHECK(winv.ratio == doctest::Approx(1 + 2 * 0.334981325 / loglog(1e7)));

  const double ls[] = {-0.33, -1.0};
  const int etas[] = {-1, 1};
  const double c = mixed_coefficient(ls, etas);
  CHECK(c == doctest::Approx((0.33 - 1.0) / 2));
  CHECK(predict(Formula::mixed, 1e5, {.k = 2, .c = c}).ratio == doctest::Approx(1 + c / loglog(1e5)));
  CHECK_THROWS_AS(mixed_coefficient(std::span<const double>{}, std::span<const int>{}), UsageError);
  CHECK_THROWS_AS(mixed_coefficient(std::span(ls), std::span(etas).first(1)), UsageError);

  CHECK_THROWS_AS(predict(Formula::theorem, 15.9, {}), DomainError);
  CHECK_NOTHROW(predict(Formula::theorem, 16, {}));
}

TEST_CASE("compensated summation") {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000; ++i) s += 1e-16;
  s += -1.0;
  CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-10));
}
