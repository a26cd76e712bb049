#include "pqbias/selftest.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "pqbias/analytic.hpp"
#include "pqbias/cli.hpp"
#include "pqbias/counting.hpp"
#include "pqbias/errors.hpp"
#include "pqbias/sieve.hpp"

namespace pqbias {

namespace {

const std::vector<std::int64_t> kOracleDiscs{-4, 5, 8, -3};
const std::vector<std::int64_t> kIdentityDiscs{-4, 5, 8, -3, 12, -7};

std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  for (; e; e >>= 1) {
    if (e & 1) r = r * b % m;
    b = b * b % m;
  }
  return r;
}

std::vector<std::int64_t> fundamental_discriminants(std::int64_t max_abs) {
  std::vector<std::int64_t> out;
  for (std::int64_t D = -max_abs; D <= max_abs; ++D) {
    if (is_fundamental_discriminant(D)) out.push_back(D);
  }
  return out;
}

class Runner {
 public:
  explicit Runner(std::ostream& out) : out_(out) {}

  // `body` returns a detail line and throws or returns false-ish via `fail`.
  void check(const std::string& name, const std::function<std::string()>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = body();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out_ << fmt::format("[{}] {:<44} {} ({:.2f}s)\n", ok ? "PASS" : "FAIL", name, detail, secs) << std::flush;
    failures_ += ok ? 0 : 1;
  }

  int failures() const { return failures_; }

 private:
  std::ostream& out_;
  int failures_ = 0;
};

void require(bool condition, const std::string& what) {
  if (!condition) throw ComputationError(what);
}

SemiprimeClassCounts oracle_semiprimes(std::uint64_t x, const QuadraticCharacter& chi, PairConvention convention) {
  SemiprimeClassCounts c;
  c.x = x;
  c.discriminant = chi.discriminant();
  c.convention = convention;
  naive_oracle(x, 2, [&](std::span<const std::uint64_t> f) -> std::uint64_t {
    if (convention == PairConvention::strict && f[0] == f[1]) return 0;
    const int a = chi.eval(static_cast<std::int64_t>(f[0]));
    const int b = chi.eval(static_cast<std::int64_t>(f[1]));
    if (a == 0 || b == 0) {
      ++c.ramified;
      return 0;
    }
    ++c.total_coprime;
    if (a != b) ++c.plus_minus;
    else if (a > 0) ++c.plus_plus;
    else ++c.minus_minus;
    return 0;
  });
  return c;
}

}  // namespace

bool run_selftest(std::ostream& out, unsigned workers) {
  Runner run(out);
  std::mt19937_64 rng(20240601);

  out << "characters\n";
  run.check("multiplicativity (1e4 random pairs per D)", [&] {
    std::uniform_int_distribution<std::int64_t> dist(1, 1'000'000);
    for (const auto D : kIdentityDiscs) {
      const QuadraticCharacter chi(D);
      for (int i = 0; i < 10'000; ++i) {
        const auto m = dist(rng), n = dist(rng);
        require(chi.eval(m * n) == chi.eval(m) * chi.eval(n), fmt::format("D={} m={} n={}", D, m, n));
      }
    }
    return fmt::format("{} characters", kIdentityDiscs.size());
  });
  run.check("Euler criterion for odd p <= 1e4", [&] {
    const auto primes = simple_sieve(10'000);
    std::size_t checked = 0;
    for (const auto D : kIdentityDiscs) {
      const QuadraticCharacter chi(D);
      for (const std::uint64_t p : primes) {
        if (p == 2 || chi.conductor() % p == 0) continue;
        const auto a = static_cast<std::uint64_t>(((D % static_cast<std::int64_t>(p)) + static_cast<std::int64_t>(p)) %
                                                  static_cast<std::int64_t>(p));
        const std::uint64_t e = powmod(a, (p - 1) / 2, p);
        const int expected = e == 1 ? 1 : -1;
        require(chi.eval(static_cast<std::int64_t>(p)) == expected, fmt::format("D={} p={}", D, p));
        ++checked;
      }
    }
    return fmt::format("{} (D, p) pairs", checked);
  });
  run.check("periodicity and zero set for n <= 1e5", [&] {
    for (const auto D : kIdentityDiscs) {
      const QuadraticCharacter chi(D);
      const auto d = static_cast<std::int64_t>(chi.conductor());
      for (std::int64_t n = 1; n <= 100'000; ++n) {
        const bool coprime = std::gcd(n, d) == 1;
        require((chi.eval(n) == 0) == !coprime, fmt::format("zero set D={} n={}", D, n));
        if (coprime) require(chi.eval(n) == kronecker(D, n % d), fmt::format("period D={} n={}", D, n));
      }
    }
    return std::string("exact");
  });
  run.check("character sums vanish for |D| <= 500", [&] {
    const auto discs = fundamental_discriminants(500);
    for (const auto D : discs) {
      const QuadraticCharacter chi(D);
      std::int64_t sum = 0;
      for (std::uint64_t a = 1; a <= chi.conductor(); ++a) sum += chi.eval(static_cast<std::int64_t>(a));
      require(sum == 0, fmt::format("D={} sum={}", D, sum));
    }
    return fmt::format("{} discriminants", discs.size());
  });

  out << "sieve\n";
  run.check("segmented sieve equals simple sieve", [&] {
    std::vector<std::uint64_t> limits{1'000, 10'000, 100'000, 1'000'000};
    std::uniform_int_distribution<std::uint64_t> dist(2, 1'000'000);
    for (int i = 0; i < 100; ++i) limits.push_back(dist(rng));
    for (const auto limit : limits) {
      SieveOptions options;
      options.segment_size = 1u << 12;
      require(build_primes(limit, options).primes().size() == simple_sieve(limit).size() &&
                  std::ranges::equal(build_primes(limit, options).primes(), simple_sieve(limit)),
              fmt::format("limit {}", limit));
    }
    require(build_primes(1'000'000).size() == 78498, "pi(1e6) != 78498");
    return fmt::format("{} limits, pi(1e6) = 78498", limits.size());
  });
  run.check("sieve determinism over segments and workers", [&] {
    const auto reference = build_primes(3'000'017);
    for (const std::size_t seg : {64u, 1000u, 1u << 15, 1u << 18}) {
      for (const unsigned w : {1u, 2u, workers}) {
        SieveOptions options;
        options.segment_size = seg;
        options.workers = w;
        require(build_primes(3'000'017, options) == reference, fmt::format("segment {} workers {}", seg, w));
      }
    }
    return std::string("identical");
  });
  run.check("classified counts invariants", [&] {
    auto store = std::make_shared<const PrimeStore>(build_primes(100'000));
    for (const auto D : kIdentityDiscs) {
      const ClassifiedPrimeCounts counts(store, QuadraticCharacter(D));
      std::size_t prev[3] = {0, 0, 0};
      for (std::uint64_t B = 0; B <= 100'000; ++B) {
        std::size_t sum = 0;
        for (const auto eta : {ClassLabel::minus, ClassLabel::ramified, ClassLabel::plus}) {
          const std::size_t q = counts.query(B, eta);
          const std::size_t step = q - prev[to_int(eta) + 1];
          const bool is_prime_of_class = B >= 2 && store->pi(B) != store->pi(B - 1) &&
                                         counts.character().classify(B) == eta;
          require(step == (is_prime_of_class ? 1u : 0u), fmt::format("step D={} B={}", D, B));
          prev[to_int(eta) + 1] = q;
          sum += q;
        }
        require(sum == store->pi(B), fmt::format("partition D={} B={}", D, B));
      }
      require(counts.query(100'000, ClassLabel::ramified) == counts.character().ramified_primes().size(),
              fmt::format("ramified count D={}", D));
    }
    return std::string("partition, monotone, unit steps, ramified count");
  });

  out << "counting\n";
  const auto store = std::make_shared<const PrimeStore>(build_primes(10'000'000, {.workers = workers}));
  run.check("oracle equivalence (semiprimes, k = 2, 3)", [&] {
    std::size_t comparisons = 0;
    for (const std::uint64_t x : {1'000u, 3'000u, 10'000u, 100'000u}) {
      for (const auto D : kOracleDiscs) {
        const QuadraticCharacter chi(D);
        const ClassifiedPrimeCounts counts(store, chi);
        for (const auto conv : {PairConvention::inclusive, PairConvention::strict}) {
          require(count_semiprimes_by_class(counts, x, {conv, workers}) == oracle_semiprimes(x, chi, conv),
                  fmt::format("semiprimes x={} D={} {}", x, D, to_string(conv)));
          ++comparisons;
        }
        for (const int k : {2, 3}) {
          for (const auto eta : {ClassLabel::minus, ClassLabel::plus}) {
            const auto r = count_k_almost(counts, x, k, eta, 0.0, {PairConvention::inclusive, workers});
            std::uint64_t total = 0;
            const std::uint64_t count = naive_oracle(x, k, [&](std::span<const std::uint64_t> f) -> std::uint64_t {
              bool all = true, coprime = true;
              for (const auto p : f) {
                const int c = chi.eval(static_cast<std::int64_t>(p));
                coprime = coprime && c != 0;
                all = all && c == to_int(eta);
              }
              total += coprime ? 1 : 0;
              return all ? 1 : 0;
            });
            require(r.count == count && r.total == total, fmt::format("k={} x={} D={}", k, x, D));
            ++comparisons;
          }
        }
      }
    }
    return fmt::format("{} exact comparisons", comparisons);
  });
  run.check("progression pairs match oracle", [&] {
    const ResidueClassSet A(4, std::vector<std::int64_t>{3});
    const ResidueClassSet B(5, std::vector<std::int64_t>{2, 3});
    for (const std::uint64_t x : {1'000u, 10'000u, 100'000u}) {
      const auto r = progression_pair_ratio(*store, x, A, B, {PairConvention::inclusive, workers});
      std::uint64_t total = 0;
      const std::uint64_t count = naive_oracle(x, 2, [&](std::span<const std::uint64_t> f) -> std::uint64_t {
        std::uint64_t c = 0;
        std::uint64_t t = 0;
        const std::uint64_t orders = f[0] == f[1] ? 1 : 2;
        for (std::uint64_t o = 0; o < orders; ++o) {
          const std::uint64_t p = f[o], q = f[1 - o];
          c += A.contains(p) && B.contains(q) ? 1 : 0;
          t += A.coprime(p) && B.coprime(q) ? 1 : 0;
        }
        total += t;
        return c;
      });
      require(r.count == count && r.total == total, fmt::format("x={}", x));
    }
    return std::string("A = {3} mod 4, B = {2,3} mod 5, ordered");
  });
  run.check("class completeness and monotonicity", [&] {
    for (const auto D : kOracleDiscs) {
      const ClassifiedPrimeCounts counts(store, QuadraticCharacter(D));
      SemiprimeClassCounts prev;
      for (std::uint64_t x = 4; x <= 20'000; x += 211) {
        const auto c = count_semiprimes_by_class(counts, x);
        require(c.plus_plus + c.plus_minus + c.minus_minus == c.total_coprime, "class sum");
        const std::uint64_t all = naive_oracle(x, 2, [](auto) -> std::uint64_t { return 1; });
        require(c.total() == all, fmt::format("total D={} x={}", D, x));
        require(c.plus_plus >= prev.plus_plus && c.plus_minus >= prev.plus_minus &&
                    c.minus_minus >= prev.minus_minus && c.ramified >= prev.ramified,
                fmt::format("monotone D={} x={}", D, x));
        prev = c;
      }
    }
    return std::string("x = 4..20000 step 211");
  });
  run.check("parallel determinism", [&] {
    const QuadraticCharacter chi(-4);
    const ClassifiedPrimeCounts counts(store, chi);
    const std::uint64_t x = 10'000'000;
    for (const unsigned w : {2u, 3u, std::max(4u, workers)}) {
      require(count_semiprimes_by_class(counts, x, {PairConvention::inclusive, 1}) ==
                  count_semiprimes_by_class(counts, x, {PairConvention::inclusive, w}),
              "semiprimes");
      const auto k1 = count_k_almost(counts, x, 3, ClassLabel::minus, 0.0, {PairConvention::inclusive, 1});
      const auto kw = count_k_almost(counts, x, 3, ClassLabel::minus, 0.0, {PairConvention::inclusive, w});
      require(k1.count == kw.count && k1.total == kw.total, "k = 3");
      const auto r1 = weighted_race(counts, x, 0.0, 1);
      const auto rw = weighted_race(counts, x, 0.0, w);
      require(r1.s_plus == rw.s_plus && r1.s_minus == rw.s_minus, "weighted race not bit-identical");
      const std::vector<CharacterSpec> specs{{chi, ClassLabel::minus}, {QuadraticCharacter(5), ClassLabel::plus}};
      const std::vector<double> ls{0.0, 0.0};
      const auto m1 = count_mixed(store, 1'000'000, specs, ls, {PairConvention::inclusive, 1});
      const auto mw = count_mixed(store, 1'000'000, specs, ls, {PairConvention::inclusive, w});
      require(m1.count == mw.count && m1.total == mw.total, "mixed");
    }
    return std::string("1 vs 2, 3, 4+ workers at x = 1e7");
  });
  run.check("r(x) > 1 on the grid 1e2..1e7 (D = -4, eta = -1)", [&] {
    const ClassifiedPrimeCounts counts(store, QuadraticCharacter(-4));
    std::string values;
    for (std::uint64_t x = 100; x <= 10'000'000; x *= 10) {
      for (const auto conv : {PairConvention::inclusive, PairConvention::strict}) {
        const auto r = ratio_r(counts, x, ClassLabel::minus, 0.0, {conv, workers});
        require(r.empirical > 1.0, fmt::format("r({}) = {} under {}", x, r.empirical, to_string(conv)));
        if (conv == PairConvention::inclusive) values += fmt::format(" {:.3f}", r.empirical);
      }
    }
    return "r =" + values;
  });

  out << "analytic\n";
  run.check("closed forms of L(1, chi)", [&] {
    const double e4 = std::abs(L_at_one(QuadraticCharacter(-4)) - std::numbers::pi / 4);
    const double e5 = std::abs(L_at_one(QuadraticCharacter(5)) - 2 / std::sqrt(5.0) * std::log(std::numbers::phi));
    const double e3 = std::abs(L_at_one(QuadraticCharacter(-3)) - std::numbers::pi / (3 * std::sqrt(3.0)));
    require(e4 < 1e-10 && e5 < 1e-10 && e3 < 1e-10, fmt::format("errors {:.2e} {:.2e} {:.2e}", e4, e5, e3));
    return fmt::format("errors {:.1e}, {:.1e}, {:.1e}", e4, e5, e3);
  });
  run.check("L_chi = log L(1, chi) + E(chi) prime by prime", [&] {
    double worst = 0.0;
    for (const auto D : kIdentityDiscs) {
      const QuadraticCharacter chi(D);
      const auto est = lchi(chi);
      require(std::abs(est.value - (std::log(est.L1) + est.E)) < 1e-12, "internal consistency");
      const double gap = std::abs(est.value - std::log(est.L1) - e_prime_sum(chi, *store));
      worst = std::max(worst, gap);
      require(gap < 1e-4, fmt::format("D={} gap {:.3e}", D, gap));
    }
    return fmt::format("worst gap {:.2e} over {} characters", worst, kIdentityDiscs.size());
  });
  run.check("tolerance honesty and Moebius term decay", [&] {
    for (const auto D : kIdentityDiscs) {
      const QuadraticCharacter chi(D);
      const auto coarse = lchi(chi, 1e-9);
      const auto fine = lchi(chi, 1e-10);
      require(std::abs(coarse.value - fine.value) < coarse.truncation_bound, fmt::format("D={}", D));
      require(coarse.truncation_bound < 1e-9, "bound over tolerance");
      for (const auto& t : coarse.terms) {
        if (t.m >= 3) require(std::abs(t.value) <= std::ldexp(1.0, 3 - t.m), fmt::format("D={} m={}", D, t.m));
      }
    }
    return std::string("tol 1e-9 vs 1e-10");
  });
  run.check("E bound constants, two routes", [&] {
    const auto c = e_bound_constants(*store);
    return fmt::format("lower {:.6f} upper {:.5f}", c.closed_form.lower, c.closed_form.upper);
  });
  run.check("corrected E bounds for fundamental |D| <= 200", [&] {
    const auto small = build_primes(1'000'000);
    const auto discs = fundamental_discriminants(200);
    for (const auto D : discs) {
      const QuadraticCharacter chi(D);
      const double E = lchi(chi).E;
      const auto closed = corrected_e_bounds(chi);
      const auto summed = corrected_e_bounds(chi, small);
      require(std::abs(closed.lower - summed.lower) < 1e-5 && std::abs(closed.upper - summed.upper) < 1e-5,
              fmt::format("routes disagree for D={}", D));
      require(summed.lower <= E && E <= summed.upper && summed.upper < 0,
              fmt::format("D={}: {} <= {} <= {} fails", D, summed.lower, E, summed.upper));
    }
    return fmt::format("{} discriminants", discs.size());
  });
  run.check("all-prime upper bound is violated by D = -4", [&] {
    const double E = lchi(QuadraticCharacter(-4)).E;
    const double literal_upper = e_bound_constants(*store).closed_form.upper;
    require(E > literal_upper, "expected E(chi_-4) above the all-prime upper bound");
    return fmt::format("E(chi_-4) = {:.4f} > {:.5f}; primes dividing d must be excluded", E, literal_upper);
  });

  out << "cli\n";
  run.check("csv and json agree; output independent of workers", [&] {
    cli::RunConfig config;
    config.subcommand = "ratio";
    config.xs = {1'000, 10'000, 100'000};
    auto render = [&](cli::OutputFormat f, unsigned w) {
      config.format = f;
      config.workers = w;
      std::ostringstream o, e;
      require(cli::run(config, o, e) == 0, e.str());
      return o.str();
    };
    const std::string csv = render(cli::OutputFormat::csv, 1);
    const auto doc = nlohmann::json::parse(render(cli::OutputFormat::json, 1));
    std::istringstream lines(csv);
    std::string header, line;
    std::getline(lines, header);
    require(header == "x,disc,eta,count,total,ratio,predicted,s_of_x,lchi", "csv header");
    std::vector<std::string> columns;
    std::istringstream hs(header);
    for (std::string col; std::getline(hs, col, ',');) columns.push_back(col);
    std::size_t row = 0;
    while (std::getline(lines, line)) {
      std::istringstream ls(line);
      std::size_t c = 0;
      for (std::string field; std::getline(ls, field, ','); ++c) {
        const auto& v = doc["rows"][row][columns[c]];
        require(std::stod(field) == v.get<double>(), fmt::format("row {} column {}", row, columns[c]));
      }
      ++row;
    }
    require(row == 3, "row count");
    for (const auto f : {cli::OutputFormat::pretty, cli::OutputFormat::csv, cli::OutputFormat::json}) {
      require(render(f, 1) == render(f, 3), "output depends on worker count");
    }
    return std::string("3 rows");
  });

  out << fmt::format("{} check(s) failed\n", run.failures());
  return run.failures() == 0;
}

}  // namespace pqbias
