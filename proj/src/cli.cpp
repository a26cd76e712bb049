#include "pqbias/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pqbias/analytic.hpp"
#include "pqbias/errors.hpp"
#include "pqbias/prime_cache.hpp"
#include "pqbias/selftest.hpp"

namespace pqbias::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kSubcommands{"ratio", "lchi", "kfactor", "mixed", "race", "pairs", "constants",
                                            "selftest"};

// A rendered value: the text shown in pretty and CSV output and the JSON
// value, which is parsed back from that text so both agree exactly.
struct Cell {
  std::string text;
  json value;
};

Cell integer(std::int64_t v) { return {std::to_string(v), v}; }
Cell integer(std::uint64_t v) { return {std::to_string(v), v}; }

Cell real(double v, int decimals = 6) {
  std::string text = fmt::format("{:.{}f}", v, decimals);
  return {text, std::stod(text)};
}

Cell scientific(double v) {
  std::string text = fmt::format("{:.3e}", v);
  return {text, std::stod(text)};
}

Cell real(const std::optional<double>& v, int decimals = 6) { return v ? real(*v, decimals) : Cell{"", nullptr}; }

Cell text(std::string s) { return {s, s}; }

struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json row_extra = json::object();
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (const char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::string_view format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::pretty:
      return "pretty";
    case OutputFormat::csv:
      return "csv";
    case OutputFormat::json:
      return "json";
  }
  return "?";
}

json config_echo(const RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["x"] = c.xs;
  j["disc"] = c.discriminants;
  j["eta"] = c.eta;
  j["k"] = c.k;
  json specs = json::array();
  for (const auto& s : c.mixed) specs.push_back({{"disc", s.discriminant}, {"eta", s.eta}});
  j["spec"] = specs;
  j["mod_a"] = c.modulus_a;
  j["set_a"] = c.set_a;
  j["mod_b"] = c.modulus_b;
  j["set_b"] = c.set_b;
  j["convention"] = std::string(to_string(c.convention));
  j["format"] = std::string(format_name(c.format));
  j["tolerance"] = c.tolerance;
  j["cache_dir"] = c.cache_dir ? json(*c.cache_dir) : json(nullptr);
  return j;
}

void render(const Table& table, const RunConfig& config, std::ostream& out) {
  switch (config.format) {
    case OutputFormat::csv: {
      out << fmt::format("{}\n", fmt::join(table.columns, ","));
      for (const auto& row : table.rows) {
        std::vector<std::string> fields;
        for (const auto& cell : row) fields.push_back(csv_field(cell.text));
        out << fmt::format("{}\n", fmt::join(fields, ","));
      }
      break;
    }
    case OutputFormat::json: {
      json doc;
      doc["tool"] = "pqbias";
      doc["version"] = kVersion;
      doc["config"] = config_echo(config);
      json rows = json::array();
      for (const auto& row : table.rows) {
        json r = json::object();
        for (std::size_t c = 0; c < table.columns.size(); ++c) r[table.columns[c]] = row[c].value;
        for (const auto& [key, value] : table.row_extra.items()) r[key] = value;
        rows.push_back(std::move(r));
      }
      doc["rows"] = std::move(rows);
      out << doc.dump(2) << '\n';
      break;
    }
    case OutputFormat::pretty: {
      std::vector<std::size_t> width(table.columns.size());
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        width[c] = table.columns[c].size();
        for (const auto& row : table.rows) width[c] = std::max(width[c], row[c].text.size());
      }
      if (!table.title.empty()) out << table.title << '\n';
      std::string line;
      for (std::size_t c = 0; c < table.columns.size(); ++c) line += fmt::format("  {:>{}}", table.columns[c], width[c]);
      out << line << '\n';
      for (const auto& row : table.rows) {
        line.clear();
        for (std::size_t c = 0; c < row.size(); ++c) line += fmt::format("  {:>{}}", row[c].text, width[c]);
        out << line << '\n';
      }
      break;
    }
  }
}

std::optional<std::filesystem::path> cache_dir(const RunConfig& config) {
  if (!config.cache_dir) return std::nullopt;
  if (const char* env = std::getenv(kCacheDirEnv); env != nullptr && *env != '\0') return std::filesystem::path(env);
  return std::filesystem::path(*config.cache_dir);
}

std::shared_ptr<const PrimeStore> primes_for(const RunConfig& config, std::uint64_t limit) {
  SieveOptions options;
  options.workers = config.workers;
  return std::make_shared<const PrimeStore>(load_or_build_primes(std::max<std::uint64_t>(limit, 2), options,
                                                                 cache_dir(config)));
}

CountOptions count_options(const RunConfig& config) { return {config.convention, config.workers}; }

std::string eta_text(int eta) { return eta > 0 ? "+1" : "-1"; }

std::optional<double> s_if_defined(std::uint64_t x) {
  if (x < 16) return std::nullopt;
  return s_of_x(static_cast<double>(x));
}

json row_extra(const RunConfig& config) {
  return {{"convention", std::string(to_string(config.convention))}, {"tolerance", config.tolerance}};
}

Table ratio_table(const RunConfig& config) {
  Table t;
  t.columns = {"x", "disc", "eta", "count", "total", "ratio", "predicted", "s_of_x", "lchi"};
  t.row_extra = row_extra(config);
  const auto store = primes_for(config, config.xs.back() / 2);
  for (const auto D : config.discriminants) {
    const QuadraticCharacter chi(D);
    const double L = lchi(chi, config.tolerance).value;
    const ClassifiedPrimeCounts counts(store, chi);
    t.title += fmt::format("{}r(x) for D = {}, eta = {}, {}, L_chi = {:.6f}", t.title.empty() ? "" : "; ", D,
                           eta_text(config.eta), to_string(config.convention), L);
    for (const auto x : config.xs) {
      const auto r = ratio_r(counts, x, label_from_int(config.eta), L, count_options(config));
      t.rows.push_back({integer(x), integer(D), integer(std::int64_t{config.eta}), integer(r.count), integer(r.total),
                        real(r.empirical), real(r.predicted), real(s_if_defined(x)), real(L)});
    }
  }
  return t;
}

Table lchi_table(const RunConfig& config) {
  Table t;
  t.title = fmt::format("L_chi = sum_p chi(p)/p = log L(1, chi) + E(chi), tolerance {:g}", config.tolerance);
  t.columns = {"disc", "lchi", "bound", "L1", "E", "terms", "E_lower", "E_upper"};
  t.row_extra = {{"tolerance", config.tolerance}};
  for (const auto D : config.discriminants) {
    const QuadraticCharacter chi(D);
    const auto est = lchi(chi, config.tolerance);
    const auto bounds = corrected_e_bounds(chi);
    t.rows.push_back({integer(D), real(est.value, 12), scientific(est.truncation_bound), real(est.L1, 12),
                      real(est.E, 12), integer(std::int64_t{est.terms_used}), real(bounds.lower, 12),
                      real(bounds.upper, 12)});
  }
  return t;
}

Table kfactor_table(const RunConfig& config) {
  Table t;
  t.columns = {"x", "disc", "eta", "k", "count", "total", "ratio", "predicted", "lchi"};
  t.row_extra = row_extra(config);
  const auto store = primes_for(config, required_prime_limit(config.xs.back(), config.k));
  for (const auto D : config.discriminants) {
    const QuadraticCharacter chi(D);
    const double L = lchi(chi, config.tolerance).value;
    const ClassifiedPrimeCounts counts(store, chi);
    t.title += fmt::format("{}k = {} prime factors, D = {}, eta = {}, {}", t.title.empty() ? "" : "; ", config.k, D,
                           eta_text(config.eta), to_string(config.convention));
    for (const auto x : config.xs) {
      const auto r = count_k_almost(counts, x, config.k, label_from_int(config.eta), L, count_options(config));
      t.rows.push_back({integer(x), integer(D), integer(std::int64_t{config.eta}), integer(std::int64_t{config.k}),
                        integer(r.count), integer(r.total), real(r.empirical), real(r.predicted), real(L)});
    }
  }
  return t;
}

Table mixed_table(const RunConfig& config) {
  Table t;
  t.columns = {"x", "spec", "k", "count", "total", "ratio", "predicted", "c"};
  t.row_extra = row_extra(config);
  std::vector<CharacterSpec> specs;
  std::vector<double> lchis;
  std::map<std::int64_t, double> seen;
  for (const auto& s : config.mixed) {
    specs.push_back({QuadraticCharacter(s.discriminant), label_from_int(s.eta)});
    auto it = seen.find(s.discriminant);
    if (it == seen.end()) it = seen.emplace(s.discriminant, lchi(specs.back().character, config.tolerance).value).first;
    lchis.push_back(it->second);
  }
  const int k = static_cast<int>(specs.size());
  const auto store = primes_for(config, required_prime_limit(config.xs.back(), k));
  t.title = fmt::format("ordered tuples, {} factors, {}", k, to_string(config.convention));
  for (const auto x : config.xs) {
    const auto r = count_mixed(store, x, specs, lchis, count_options(config));
    t.rows.push_back({integer(x), text(r.spec), integer(std::int64_t{k}), integer(r.count), integer(r.total),
                      real(r.empirical), real(r.predicted), real(r.lchi)});
  }
  return t;
}

Table race_table(const RunConfig& config) {
  Table t;
  t.columns = {"x", "disc", "s_plus", "s_minus", "ratio", "inverse", "predicted", "predicted_inverse", "lchi"};
  t.row_extra = {{"tolerance", config.tolerance}};
  const auto store = primes_for(config, config.xs.back());
  for (const auto D : config.discriminants) {
    const QuadraticCharacter chi(D);
    const double L = lchi(chi, config.tolerance).value;
    const ClassifiedPrimeCounts counts(store, chi);
    t.title += fmt::format("{}sum 1/p over chi(p) = +1 against chi(p) = -1, D = {}", t.title.empty() ? "" : "; ", D);
    for (const auto x : config.xs) {
      const auto r = weighted_race(counts, x, L, config.workers);
      std::optional<double> inverse_prediction;
      if (x >= 16) inverse_prediction = predict(Formula::weighted, static_cast<double>(x), {.eta = -1, .lchi = L}).ratio;
      t.rows.push_back({integer(x), integer(D), real(r.s_plus, 12), real(r.s_minus, 12), real(r.ratio()),
                        real(r.ratio(ClassLabel::minus, ClassLabel::plus)), real(r.predicted),
                        real(inverse_prediction), real(L)});
    }
  }
  return t;
}

Table pairs_table(const RunConfig& config) {
  Table t;
  t.columns = {"x", "A", "B", "count", "total", "normalizer", "ratio", "beta"};
  t.row_extra = row_extra(config);
  const ResidueClassSet A(config.modulus_a, config.set_a);
  const ResidueClassSet B(config.modulus_b, config.set_b);
  const auto store = primes_for(config, config.xs.back() / 2);
  t.title = fmt::format("p in {}, q in {} ({}), beta = (ratio - 1) log log x", A.describe(), B.describe(),
                        A == B ? "unordered pairs" : "ordered pairs");
  for (const auto x : config.xs) {
    const auto r = progression_pair_ratio(*store, x, A, B, count_options(config));
    t.rows.push_back({integer(x), text(A.describe()), text(B.describe()), integer(r.count), integer(r.total),
                      real(r.normalizer), real(r.empirical), real(r.beta)});
  }
  return t;
}

Table constants_table(const RunConfig& config) {
  Table t;
  const auto store = primes_for(config, config.prime_limit);
  const auto c = e_bound_constants(*store);
  t.title = fmt::format("bounds for E(chi) over all primes; prime sums to {} plus tail", c.prime_limit);
  t.columns = {"name", "closed_form", "prime_sum", "difference"};
  t.rows.push_back({text("sum log(1-1/p)+1/p"), real(c.closed_form.lower, 9), real(c.prime_sum.lower, 9),
                    scientific(c.prime_sum.lower - c.closed_form.lower)});
  t.rows.push_back({text("sum log(1+1/p)-1/p"), real(c.closed_form.upper, 9), real(c.prime_sum.upper, 9),
                    scientific(c.prime_sum.upper - c.closed_form.upper)});
  return t;
}

std::uint64_t parse_x(const std::string& s) {
  // Accepts 1000, 1e7 or 10^7.
  auto power = [&](std::string_view base, std::string_view exp) -> std::uint64_t {
    std::uint64_t b = std::stoull(std::string(base));
    const int e = std::stoi(std::string(exp));
    if (e < 0 || e > 64) throw UsageError(fmt::format("bad exponent in x value '{}'", s));
    if (b == 0) return e == 0 ? 1 : 0;
    std::uint64_t v = 1;
    for (int i = 0; i < e; ++i) {
      if (v > std::numeric_limits<std::uint64_t>::max() / b) throw UsageError(fmt::format("x value '{}' overflows", s));
      v *= b;
    }
    return v;
  };
  try {
    if (s.empty() || s.find_first_not_of("0123456789e^") != std::string::npos) throw std::invalid_argument(s);
    if (auto pos = s.find('^'); pos != std::string::npos) return power(s.substr(0, pos), s.substr(pos + 1));
    if (auto pos = s.find('e'); pos != std::string::npos) {
      return std::stoull(s.substr(0, pos)) * power("10", s.substr(pos + 1));
    }
    return std::stoull(s);
  } catch (const std::logic_error&) {
    throw UsageError(fmt::format("cannot read x value '{}'", s));
  }
}

MixedSpecArg parse_spec(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError(fmt::format("character spec '{}' must look like D:eta", s));
  try {
    return {std::stoll(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw UsageError(fmt::format("cannot read character spec '{}'", s));
  }
}

}  // namespace

void RunConfig::validate() const {
  if (std::find(kSubcommands.begin(), kSubcommands.end(), subcommand) == kSubcommands.end()) {
    throw UsageError(fmt::format("unknown subcommand '{}'", subcommand));
  }
  if (workers < 1) throw UsageError("worker count must be at least 1");
  if (!(tolerance > 0.0)) throw UsageError("tolerance must be positive");
  const bool needs_x = subcommand == "ratio" || subcommand == "kfactor" || subcommand == "mixed" ||
                       subcommand == "race" || subcommand == "pairs";
  if (needs_x) {
    if (xs.empty()) throw UsageError("at least one x value is required");
    if (xs.front() == 0) throw UsageError("x values must be positive");
    if (!std::is_sorted(xs.begin(), xs.end())) throw UsageError("x values must be nondecreasing");
  }
  if ((subcommand == "ratio" || subcommand == "kfactor") && eta != 1 && eta != -1) {
    throw UsageError("eta must be +1 or -1");
  }
  if (subcommand != "mixed" && subcommand != "pairs" && subcommand != "constants" && subcommand != "selftest" &&
      discriminants.empty()) {
    throw UsageError("at least one discriminant is required");
  }
  if (subcommand == "mixed" && mixed.empty()) throw UsageError("mixed needs at least one --spec D:eta");
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    if (config.subcommand == "selftest") return run_selftest(out, config.workers) ? 0 : 2;
    Table table;
    if (config.subcommand == "ratio") table = ratio_table(config);
    if (config.subcommand == "lchi") table = lchi_table(config);
    if (config.subcommand == "kfactor") table = kfactor_table(config);
    if (config.subcommand == "mixed") table = mixed_table(config);
    if (config.subcommand == "race") table = race_table(config);
    if (config.subcommand == "pairs") table = pairs_table(config);
    if (config.subcommand == "constants") table = constants_table(config);
    render(table, config, out);
    return 0;
  } catch (const UsageError& e) {
    err << "pqbias: usage error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "pqbias: domain error: " << e.what() << '\n';
  } catch (const RangeError& e) {
    err << "pqbias: range error: " << e.what() << '\n';
  } catch (const ResourceError& e) {
    err << "pqbias: resource error: " << e.what() << '\n';
    return 2;
  } catch (const ComputationError& e) {
    err << "pqbias: computation error: " << e.what() << '\n';
    return 2;
  } catch (const std::bad_alloc&) {
    err << "pqbias: resource error: out of memory\n";
    return 2;
  }
  return 1;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counts products of primes by quadratic-character class and compares the bias with L_chi."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  std::vector<std::string> x_text;
  std::vector<std::string> spec_text;
  bool strict = false;
  std::string format = "pretty";

  app.add_flag("--strict", strict, "count p < q only (default p <= q)");
  app.add_option("--format", format, "pretty, csv or json")->check(CLI::IsMember({"pretty", "csv", "json"}));
  app.add_option("--workers", config.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tol", config.tolerance, "tolerance for L_chi");
  app.add_option("--cache-dir", config.cache_dir,
                 fmt::format("cache sieved primes in this directory ({} overrides it)", kCacheDirEnv));

  auto add_x = [&](CLI::App* sub) {
    sub->add_option("--x", x_text, "x values, comma separated; 1e7 and 10^7 accepted")->delimiter(',');
  };
  auto add_disc = [&](CLI::App* sub) {
    sub->add_option("--disc", config.discriminants, "fundamental discriminant(s)")->delimiter(',');
  };

  auto* ratio = app.add_subcommand("ratio", "r(x): (eta, eta) semiprimes against a quarter of all coprime ones");
  add_x(ratio);
  add_disc(ratio);
  ratio->add_option("--eta", config.eta, "class +1 or -1");

  auto* lchi_cmd = app.add_subcommand("lchi", "L_chi, L(1, chi) and E(chi)");
  add_disc(lchi_cmd);

  auto* kfactor = app.add_subcommand("kfactor", "products of k primes of one class");
  add_x(kfactor);
  add_disc(kfactor);
  kfactor->add_option("--eta", config.eta, "class +1 or -1");
  kfactor->add_option("--k", config.k, "number of prime factors (2..8)");

  auto* mixed = app.add_subcommand("mixed", "ordered tuples with one character condition per position");
  add_x(mixed);
  mixed->add_option("--spec", spec_text, "D:eta per position, repeatable or comma separated")->delimiter(',');

  auto* race = app.add_subcommand("race", "sum of 1/p by class");
  add_x(race);
  add_disc(race);

  auto* pairs = app.add_subcommand("pairs", "pq with p in A mod m and q in B mod n");
  add_x(pairs);
  pairs->add_option("--mod-a", config.modulus_a, "modulus of A");
  pairs->add_option("--set-a", config.set_a, "residues of A")->delimiter(',');
  pairs->add_option("--mod-b", config.modulus_b, "modulus of B");
  pairs->add_option("--set-b", config.set_b, "residues of B")->delimiter(',');

  auto* constants_cmd = app.add_subcommand("constants", "E(chi) bound constants two ways");
  constants_cmd->add_option("--prime-limit", config.prime_limit, "prime-sum cutoff");

  app.add_subcommand("selftest", "oracle and invariant suite");

  std::ostringstream parse_out;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream parse_err;
    const int code = app.exit(e, parse_out, parse_err);
    out << parse_out.str();
    err << parse_err.str();
    return code == 0 ? 0 : 1;
  }

  try {
    config.subcommand = app.get_subcommands().front()->get_name();
    config.convention = strict ? PairConvention::strict : PairConvention::inclusive;
    config.format = format == "csv" ? OutputFormat::csv : format == "json" ? OutputFormat::json : OutputFormat::pretty;
    for (const auto& s : x_text) config.xs.push_back(parse_x(s));
    if (config.xs.empty()) config.xs = {1'000, 10'000, 100'000, 1'000'000, 10'000'000};
    for (const auto& s : spec_text) config.mixed.push_back(parse_spec(s));
  } catch (const UsageError& e) {
    err << "pqbias: usage error: " << e.what() << '\n';
    return 1;
  }
  return run(config, out, err);
}

}  // namespace pqbias::cli
