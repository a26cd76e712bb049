#pragma once

#include <filesystem>
#include <optional>

#include "pqbias/sieve.hpp"

namespace pqbias {

// On-disk prime list: an 8-byte little-endian prime count followed by the
// gaps between consecutive primes (starting from 0) as LEB128 varints.
// Files are keyed by limit through their name.

std::filesystem::path prime_cache_file(const std::filesystem::path& dir, std::uint64_t limit);

void write_prime_cache(const std::filesystem::path& file, const PrimeStore& store);

/// Throws ResourceError if the file is unreadable, truncated or not strictly
/// increasing, or if it holds a prime above `limit`.
PrimeStore read_prime_cache(const std::filesystem::path& file, std::uint64_t limit);

/// Reads the cached list for `limit` from `cache_dir` if present, otherwise
/// sieves and writes it there. Without a directory this is build_primes.
PrimeStore load_or_build_primes(std::uint64_t limit, const SieveOptions& options,
                                const std::optional<std::filesystem::path>& cache_dir);

}  // namespace pqbias
