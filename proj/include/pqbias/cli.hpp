#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pqbias/counting.hpp"

namespace pqbias::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCacheDirEnv = "PQBIAS_CACHE_DIR";

enum class OutputFormat { pretty, csv, json };

struct MixedSpecArg {
  std::int64_t discriminant;
  int eta;
};

struct RunConfig {
  std::string subcommand;
  std::vector<std::uint64_t> xs;
  std::vector<std::int64_t> discriminants{-4};
  int eta = -1;
  int k = 3;
  std::vector<MixedSpecArg> mixed;
  std::uint64_t modulus_a = 4;
  std::vector<std::int64_t> set_a{3};
  std::uint64_t modulus_b = 4;
  std::vector<std::int64_t> set_b{3};
  PairConvention convention = PairConvention::inclusive;
  OutputFormat format = OutputFormat::pretty;
  unsigned workers = 1;
  double tolerance = 1e-9;
  std::uint64_t prime_limit = 10'000'000;  // `constants` only
  std::optional<std::string> cache_dir;

  /// Throws UsageError when the invariants of a run configuration fail.
  void validate() const;
};

/// Runs one subcommand. Returns 0 on success, 1 on a usage error and 2 on a
/// computation or resource error; diagnostics go to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv into a RunConfig and runs it.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pqbias::cli
