#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "pqbias/characters.hpp"
#include "pqbias/sieve.hpp"

namespace pqbias {

namespace constants {
/// Meissel-Mertens constant: lim (sum_{p<=x} 1/p - log log x).
inline constexpr double mertens = 0.26149721284764278375542683860869585;
inline constexpr double euler_gamma = std::numbers::egamma;
}  // namespace constants

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Natural log applied twice.
double loglog(double x);

/// Moebius function by trial factorization.
int mobius(std::uint64_t m);

/// Digamma for x > 0: upward recurrence to x >= 10, then the asymptotic series.
double digamma(double x);

/// L(m, chi) = sum chi(n)/n^m for m >= 2, truncated once the tail bound
/// 2d/N^m is below tol. tol must be at least 1e-14; a truncation point beyond
/// the iteration cap raises ComputationError.
double dirichlet_L(int m, const QuadraticCharacter& chi, double tol = 1e-12);

/// L(m, chi_0) for the principal character mod d: zeta(m) * prod_{p | d} (1 - p^-m).
double principal_L(int m, std::uint64_t d);

/// L(1, chi) = -(1/d) sum_{a<d} chi(a) psi(a/d).
double L_at_one(const QuadraticCharacter& chi);

struct MobiusTerm {
  int m;
  double value;  // mu(m)/m * log L(m, chi^m)
};

struct LchiEstimate {
  std::int64_t discriminant;
  double value;             // sum_p chi(p)/p
  double truncation_bound;  // absolute error bound on value
  double L1;                // L(1, chi)
  double E;                 // value - log L1
  int terms_used;           // largest m summed
  std::vector<MobiusTerm> terms;
};

/// sum_p chi(p)/p through sum_m mu(m)/m log L(m, chi^m).
LchiEstimate lchi(const QuadraticCharacter& chi, double tol = 1e-9);

/// sum_{p <= X} chi(p)/p straight from the sieve. Converges slowly.
double lchi_direct(const QuadraticCharacter& chi, const PrimeStore& store, std::uint64_t X);

/// E(chi) = sum_p (log(1 - chi(p)/p) + chi(p)/p) accumulated prime by prime
/// over the whole store, plus a tail estimate for primes beyond it.
double e_prime_sum(const QuadraticCharacter& chi, const PrimeStore& store);

struct EBounds {
  double lower;
  double upper;
};

/// sum over all p of (log(1-1/p)+1/p) and of (log(1+1/p)-1/p), by prime sums
/// with tail estimates and by the closed forms M - gamma and
/// gamma - M - log(pi^2/6).
struct EBoundConstants {
  EBounds closed_form;
  EBounds prime_sum;
  std::uint64_t prime_limit;
};

/// Throws ComputationError if the two routes differ by more than 1e-5.
EBoundConstants e_bound_constants(const PrimeStore& store);
EBoundConstants e_bound_constants();

/// The bounds with primes dividing the conductor removed; these hold for E(chi).
EBounds corrected_e_bounds(const QuadraticCharacter& chi);

/// Same bounds by prime summation over the store plus tail estimates.
EBounds corrected_e_bounds(const QuadraticCharacter& chi, const PrimeStore& store);

enum class Formula { theorem, s, k_factor, weighted, mixed };

struct PredictionParams {
  int eta = 1;
  int k = 2;
  double lchi = 0.0;
  double c = 0.0;  // mixed-character coefficient
};

/// Leading-order ratio 1 + coefficient / log log x. The o(1) corrections are
/// not modelled.
struct Prediction {
  Formula formula;
  double x;
  PredictionParams params;
  double coefficient;
  double ratio;
};

/// Throws DomainError for x < 16.
Prediction predict(Formula formula, double x, const PredictionParams& params);

/// s(x) = 1 + 1/(3 (log log x - 1)).
inline double s_of_x(double x) { return predict(Formula::s, x, {}).ratio; }

/// (1/k) sum_j eta_j L_{chi_j}.
double mixed_coefficient(std::span<const double> lchis, std::span<const int> etas);

}  // namespace pqbias
