#include "pqbias/counting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "parallel.hpp"
#include "pqbias/analytic.hpp"
#include "pqbias/errors.hpp"

namespace pqbias {

namespace {

struct PairTally {
  std::uint64_t plus_plus = 0;
  std::uint64_t plus_minus = 0;
  std::uint64_t minus_minus = 0;
  std::uint64_t ramified = 0;
  std::uint64_t total_coprime = 0;

  PairTally& operator+=(const PairTally& o) {
    plus_plus += o.plus_plus;
    plus_minus += o.plus_minus;
    minus_minus += o.minus_minus;
    ramified += o.ramified;
    total_coprime += o.total_coprime;
    return *this;
  }
};

struct CountPair {
  std::uint64_t count = 0;
  std::uint64_t total = 0;

  CountPair& operator+=(const CountPair& o) {
    count += o.count;
    total += o.total;
    return *this;
  }
};

ClassLabel require_sign(ClassLabel eta) {
  if (eta == ClassLabel::ramified) throw UsageError("class label must be +1 or -1 here");
  return eta;
}

void require_store(const PrimeStore& store, std::uint64_t needed, std::uint64_t x) {
  if (store.limit() < needed) {
    throw RangeError(fmt::format("prime store reaches {} but x = {} needs primes up to {}", store.limit(), x, needed));
  }
}

// Primes p with p * p <= x.
std::size_t primes_up_to_root(const PrimeStore& store, std::uint64_t x) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(x)));
  while (r * r > x) --r;
  while ((r + 1) * (r + 1) <= x) ++r;
  return store.pi(std::min(r, store.limit()));
}

// True when product * p^times > x.
bool exceeds(std::uint64_t product, std::uint64_t p, int times, std::uint64_t x) {
  for (int t = 0; t < times; ++t) {
    if (product > x / p) return true;
    product *= p;
  }
  return false;
}

std::optional<double> predicted_if_defined(std::uint64_t x, Formula formula, const PredictionParams& params) {
  if (x < 16) return std::nullopt;
  return predict(formula, static_cast<double>(x), params).ratio;
}

double ratio_of(std::uint64_t count, double normalizer, std::uint64_t total) {
  if (total == 0) throw DomainError("normalizing total is zero");
  return static_cast<double>(count) / (normalizer * static_cast<double>(total));
}

}  // namespace

std::string_view to_string(PairConvention convention) {
  return convention == PairConvention::strict ? "p<q" : "p<=q";
}

std::uint64_t SemiprimeClassCounts::count(ClassLabel a, ClassLabel b) const {
  if (a == ClassLabel::ramified || b == ClassLabel::ramified) {
    throw UsageError("per-pair counts exist only for unramified classes; use `ramified`");
  }
  if (a != b) return plus_minus;
  return a == ClassLabel::plus ? plus_plus : minus_minus;
}

SemiprimeClassCounts count_semiprimes_by_class(const ClassifiedPrimeCounts& counts, std::uint64_t x,
                                               const CountOptions& options) {
  if (x < 4) throw DomainError(fmt::format("semiprime counts need x >= 4, got {}", x));
  const PrimeStore& store = counts.store();
  require_store(store, x / 2, x);
  const bool strict = options.convention == PairConvention::strict;

  const auto tally = detail::interleaved_reduce<PairTally>(
      primes_up_to_root(store, x), options.workers, [&](std::size_t i, PairTally& t) {
        const std::uint64_t p = store[i];
        const std::size_t hi = store.pi(x / p);
        const std::size_t lo = strict ? i + 1 : i;
        if (hi <= lo) return;
        const ClassLabel lp = counts.label_at(i);
        if (lp == ClassLabel::ramified) {
          t.ramified += hi - lo;
          return;
        }
        const std::uint64_t n_plus = counts.count_between(lo, hi, ClassLabel::plus);
        const std::uint64_t n_minus = counts.count_between(lo, hi, ClassLabel::minus);
        t.ramified += counts.count_between(lo, hi, ClassLabel::ramified);
        t.total_coprime += n_plus + n_minus;
        if (lp == ClassLabel::plus) {
          t.plus_plus += n_plus;
          t.plus_minus += n_minus;
        } else {
          t.plus_minus += n_plus;
          t.minus_minus += n_minus;
        }
      });

  SemiprimeClassCounts out;
  out.x = x;
  out.discriminant = counts.character().discriminant();
  out.convention = options.convention;
  out.plus_plus = tally.plus_plus;
  out.plus_minus = tally.plus_minus;
  out.minus_minus = tally.minus_minus;
  out.ramified = tally.ramified;
  out.total_coprime = tally.total_coprime;
  return out;
}

BiasReport ratio_r(const ClassifiedPrimeCounts& counts, std::uint64_t x, ClassLabel eta, double lchi,
                   const CountOptions& options) {
  require_sign(eta);
  if (x < 9) throw DomainError(fmt::format("r(x) needs x >= 9, got {}", x));
  const auto classes = count_semiprimes_by_class(counts, x, options);
  if (classes.total_coprime == 0) throw DomainError(fmt::format("no semiprimes coprime to the conductor up to {}", x));

  BiasReport report;
  report.x = x;
  report.spec = fmt::format("D={} eta={}{} {}", classes.discriminant, to_int(eta) > 0 ? "+" : "", to_int(eta),
                            to_string(options.convention));
  report.count = classes.count(eta, eta);
  report.total = classes.total_coprime;
  report.normalizer = 0.25;
  report.empirical = ratio_of(report.count, report.normalizer, report.total);
  report.predicted = predicted_if_defined(x, Formula::theorem, {.eta = to_int(eta), .lchi = lchi});
  report.lchi = lchi;
  return report;
}

BiasReport count_k_almost(const ClassifiedPrimeCounts& counts, std::uint64_t x, int k, ClassLabel eta, double lchi,
                          const CountOptions& options) {
  require_sign(eta);
  if (k < 2 || k > 8) throw UsageError(fmt::format("k must lie in [2, 8], got {}", k));
  const PrimeStore& store = counts.store();
  require_store(store, required_prime_limit(x, k), x);
  const bool strict = options.convention == PairConvention::strict;

  // Nondecreasing prime tuples; the last factor is resolved by a range count.
  auto descend = [&](auto&& self, int remaining, std::size_t start, std::uint64_t product, bool all_eta,
                     CountPair& acc) -> void {
    if (remaining == 1) {
      const std::size_t hi = store.pi(x / product);
      if (hi <= start) return;
      acc.total += counts.count_between(start, hi, ClassLabel::plus) + counts.count_between(start, hi, ClassLabel::minus);
      if (all_eta) acc.count += counts.count_between(start, hi, eta);
      return;
    }
    for (std::size_t i = start; i < store.size(); ++i) {
      if (exceeds(product, store[i], remaining, x)) break;
      const ClassLabel label = counts.label_at(i);
      if (label == ClassLabel::ramified) continue;
      self(self, remaining - 1, strict ? i + 1 : i, product * store[i], all_eta && label == eta, acc);
    }
  };

  std::size_t top = 0;
  while (top < store.size() && !exceeds(1, store[top], k, x)) ++top;

  const auto tally = detail::interleaved_reduce<CountPair>(top, options.workers, [&](std::size_t i, CountPair& acc) {
    const ClassLabel label = counts.label_at(i);
    if (label == ClassLabel::ramified) return;
    descend(descend, k - 1, strict ? i + 1 : i, store[i], label == eta, acc);
  });

  BiasReport report;
  report.x = x;
  report.spec = fmt::format("D={} eta={}{} k={} {}", counts.character().discriminant(), to_int(eta) > 0 ? "+" : "",
                            to_int(eta), k, to_string(options.convention));
  report.count = tally.count;
  report.total = tally.total;
  report.normalizer = std::ldexp(1.0, -k);
  report.empirical = ratio_of(report.count, report.normalizer, report.total);
  report.predicted = predicted_if_defined(x, Formula::k_factor, {.eta = to_int(eta), .k = k, .lchi = lchi});
  report.lchi = lchi;
  return report;
}

BiasReport count_mixed(std::shared_ptr<const PrimeStore> store_ptr, std::uint64_t x,
                       std::span<const CharacterSpec> specs, std::span<const double> lchis,
                       const CountOptions& options) {
  const int k = static_cast<int>(specs.size());
  if (k < 1 || k > 6) throw UsageError(fmt::format("mixed counts take 1 to 6 character specs, got {}", k));
  if (lchis.size() != specs.size()) throw UsageError("count_mixed needs one L_chi value per spec");
  for (const auto& s : specs) require_sign(s.eta);
  const PrimeStore& store = *store_ptr;
  require_store(store, required_prime_limit(x, k), x);
  const bool strict = options.convention == PairConvention::strict;

  // One classified table per distinct character.
  std::vector<ClassifiedPrimeCounts> tables;
  std::vector<std::size_t> table_of(specs.size());
  for (std::size_t j = 0; j < specs.size(); ++j) {
    auto it = std::find_if(tables.begin(), tables.end(),
                           [&](const ClassifiedPrimeCounts& t) { return t.character() == specs[j].character; });
    if (it == tables.end()) {
      tables.emplace_back(store_ptr, specs[j].character);
      it = tables.end() - 1;
    }
    table_of[j] = static_cast<std::size_t>(it - tables.begin());
  }

  // Ordered tuples: position j takes any prime passing its own test; the
  // remaining factors are each at least 2, which bounds the loop. Under the
  // strict convention the primes must be pairwise distinct.
  struct Path {
    std::array<std::size_t, 6> used{};
    int depth = 0;
  };

  auto accepts = [&](std::size_t j, std::size_t i, bool numerator) {
    const ClassLabel label = tables[table_of[j]].label_at(i);
    return numerator ? label == specs[j].eta : label != ClassLabel::ramified;
  };

  auto descend = [&](auto&& self, std::size_t j, std::uint64_t product, Path& path, bool numerator,
                     std::uint64_t& acc) -> void {
    const auto& table = tables[table_of[j]];
    if (static_cast<int>(j) == k - 1) {
      const std::uint64_t bound = x / product;
      const std::size_t hi = store.pi(bound);
      std::uint64_t n = numerator ? table.count_below(hi, specs[j].eta)
                                  : table.count_below(hi, ClassLabel::plus) + table.count_below(hi, ClassLabel::minus);
      if (strict) {
        for (int u = 0; u < path.depth; ++u) {
          const std::size_t i = path.used[u];
          if (i < hi && accepts(j, i, numerator)) --n;
        }
      }
      acc += n;
      return;
    }
    const int after = k - 1 - static_cast<int>(j);
    for (std::size_t i = 0; i < store.size(); ++i) {
      const std::uint64_t p = store[i];
      if (product > x / p || exceeds(product * p, 2, after, x)) break;
      if (!accepts(j, i, numerator)) continue;
      if (strict && std::find(path.used.begin(), path.used.begin() + path.depth, i) != path.used.begin() + path.depth) {
        continue;
      }
      path.used[path.depth++] = i;
      self(self, j + 1, product * p, path, numerator, acc);
      --path.depth;
    }
  };

  auto run = [&](bool numerator) {
    if (k == 1) {
      std::uint64_t acc = 0;
      Path path;
      descend(descend, 0, 1, path, numerator, acc);
      return acc;
    }
    std::size_t top = 0;
    while (top < store.size() && !exceeds(store[top], 2, k - 1, x)) ++top;
    return detail::interleaved_reduce<std::uint64_t>(top, options.workers, [&](std::size_t i, std::uint64_t& acc) {
      if (!accepts(0, i, numerator)) return;
      Path path;
      path.used[path.depth++] = i;
      descend(descend, 1, store[i], path, numerator, acc);
    });
  };

  std::vector<int> etas;
  std::string spec;
  for (const auto& s : specs) {
    etas.push_back(to_int(s.eta));
    spec += fmt::format("{}({},{})", spec.empty() ? "" : " ", s.character.discriminant(), to_int(s.eta));
  }
  const double c = mixed_coefficient(lchis, etas);

  BiasReport report;
  report.x = x;
  report.spec = fmt::format("{} {}", spec, to_string(options.convention));
  report.count = run(true);
  report.total = run(false);
  report.normalizer = std::ldexp(1.0, -k);
  report.empirical = ratio_of(report.count, report.normalizer, report.total);
  report.predicted = predicted_if_defined(x, Formula::mixed, {.k = k, .c = c});
  report.lchi = c;
  return report;
}

double WeightedRaceResult::ratio(ClassLabel num, ClassLabel den) const {
  auto pick = [&](ClassLabel l) { return require_sign(l) == ClassLabel::plus ? s_plus : s_minus; };
  return pick(num) / pick(den);
}

WeightedRaceResult weighted_race(const ClassifiedPrimeCounts& counts, std::uint64_t x, double lchi,
                                 unsigned workers) {
  if (x < 7) throw DomainError(fmt::format("the weighted race needs x >= 7, got {}", x));
  const PrimeStore& store = counts.store();
  require_store(store, x, x);
  const std::size_t n = store.pi(x);

  constexpr std::size_t kBlock = std::size_t{1} << 16;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::array<double, 2>> partial(blocks);
  auto sum_block = [&](std::size_t b) {
    CompensatedSum plus;
    CompensatedSum minus;
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
      const ClassLabel label = counts.label_at(i);
      if (label == ClassLabel::plus) plus += 1.0 / static_cast<double>(store[i]);
      if (label == ClassLabel::minus) minus += 1.0 / static_cast<double>(store[i]);
    }
    partial[b] = {plus.value(), minus.value()};
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
  if (workers == 1) {
    for (std::size_t b = 0; b < blocks; ++b) sum_block(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < blocks; b += workers) sum_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }
  CompensatedSum plus;
  CompensatedSum minus;
  for (const auto& [p, m] : partial) {
    plus += p;
    minus += m;
  }

  WeightedRaceResult out;
  out.x = x;
  out.discriminant = counts.character().discriminant();
  out.s_plus = plus.value();
  out.s_minus = minus.value();
  out.lchi = lchi;
  out.predicted = predicted_if_defined(x, Formula::weighted, {.eta = 1, .lchi = lchi});
  return out;
}

ResidueClassSet::ResidueClassSet(std::uint64_t modulus, std::span<const std::int64_t> residues) : modulus_(modulus) {
  if (residues.empty()) throw UsageError(fmt::format("empty residue class set mod {}", modulus));
  for (const auto a : residues) residues_.push_back(ResidueClassPredicate(modulus, a).residue());
  std::sort(residues_.begin(), residues_.end());
  residues_.erase(std::unique(residues_.begin(), residues_.end()), residues_.end());
}

ResidueClassSet::ResidueClassSet(std::span<const ResidueClassPredicate> classes) {
  if (classes.empty()) throw UsageError("empty residue class set");
  modulus_ = classes.front().modulus();
  for (const auto& c : classes) {
    if (c.modulus() != modulus_) throw UsageError("residue classes in one set must share a modulus");
    residues_.push_back(c.residue());
  }
  std::sort(residues_.begin(), residues_.end());
  residues_.erase(std::unique(residues_.begin(), residues_.end()), residues_.end());
}

bool ResidueClassSet::contains(std::uint64_t n) const {
  return std::binary_search(residues_.begin(), residues_.end(), n % modulus_);
}

bool ResidueClassSet::coprime(std::uint64_t n) const { return std::gcd(n, modulus_) == 1; }

std::string ResidueClassSet::describe() const { return fmt::format("{{{}}} mod {}", fmt::join(residues_, ","), modulus_); }

BiasReport progression_pair_ratio(const PrimeStore& store, std::uint64_t x, const ResidueClassSet& A,
                                  const ResidueClassSet& B, const CountOptions& options) {
  if (x < 4) throw DomainError(fmt::format("progression pairs need x >= 4, got {}", x));
  require_store(store, x / 2, x);
  const bool strict = options.convention == PairConvention::strict;
  const bool symmetric = A == B;

  // Prefix counts over the primes up to x/2 of "in B" and "coprime to n".
  const std::size_t n = store.pi(x / 2);
  std::vector<std::uint32_t> in_b(n + 1, 0);
  std::vector<std::uint32_t> coprime_b(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    in_b[i + 1] = in_b[i] + (B.contains(store[i]) ? 1 : 0);
    coprime_b[i + 1] = coprime_b[i] + (B.coprime(store[i]) ? 1 : 0);
  }
  auto between = [](const std::vector<std::uint32_t>& prefix, std::size_t lo, std::size_t hi) -> std::uint64_t {
    return hi > lo ? prefix[hi] - prefix[lo] : 0;
  };

  CountPair tally;
  if (symmetric) {
    tally = detail::interleaved_reduce<CountPair>(primes_up_to_root(store, x), options.workers,
                                                  [&](std::size_t i, CountPair& acc) {
                                                    const std::uint64_t p = store[i];
                                                    const std::size_t hi = store.pi(x / p);
                                                    const std::size_t lo = strict ? i + 1 : i;
                                                    if (A.contains(p)) acc.count += between(in_b, lo, hi);
                                                    if (A.coprime(p)) acc.total += between(coprime_b, lo, hi);
                                                  });
  } else {
    tally = detail::interleaved_reduce<CountPair>(n, options.workers, [&](std::size_t i, CountPair& acc) {
      const std::uint64_t p = store[i];
      const std::size_t hi = store.pi(x / p);
      const bool square_fits = p <= x / p;
      if (A.contains(p)) acc.count += in_b[hi] - (strict && square_fits && B.contains(p) ? 1 : 0);
      if (A.coprime(p)) acc.total += coprime_b[hi] - (strict && square_fits && B.coprime(p) ? 1 : 0);
    });
  }

  BiasReport report;
  report.x = x;
  report.spec = fmt::format("A={} B={} {} {}", A.describe(), B.describe(), symmetric ? "unordered" : "ordered",
                            to_string(options.convention));
  report.count = tally.count;
  report.total = tally.total;
  report.normalizer = static_cast<double>(A.size() * B.size()) /
                      static_cast<double>(euler_phi(A.modulus()) * euler_phi(B.modulus()));
  report.empirical = ratio_of(report.count, report.normalizer, report.total);
  if (x >= 16) report.beta = (report.empirical - 1.0) * loglog(static_cast<double>(x));
  return report;
}

}  // namespace pqbias
