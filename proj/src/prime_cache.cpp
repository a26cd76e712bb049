#include "pqbias/prime_cache.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "pqbias/errors.hpp"

namespace pqbias {

std::filesystem::path prime_cache_file(const std::filesystem::path& dir, std::uint64_t limit) {
  return dir / fmt::format("primes-{}.bin", limit);
}

void write_prime_cache(const std::filesystem::path& file, const PrimeStore& store) {
  std::vector<char> bytes;
  bytes.reserve(8 + store.size() * 2);
  const std::uint64_t count = store.size();
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((count >> (8 * i)) & 0xff));
  std::uint64_t previous = 0;
  for (const std::uint64_t p : store.primes()) {
    std::uint64_t delta = p - previous;
    previous = p;
    do {
      std::uint8_t byte = delta & 0x7f;
      delta >>= 7;
      if (delta != 0) byte |= 0x80;
      bytes.push_back(static_cast<char>(byte));
    } while (delta != 0);
  }
  const auto tmp = std::filesystem::path(file).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError(fmt::format("cannot write prime cache {}", tmp.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ResourceError(fmt::format("short write to prime cache {}", tmp.string()));
  }
  std::filesystem::rename(tmp, file);
}

PrimeStore read_prime_cache(const std::filesystem::path& file, std::uint64_t limit) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ResourceError(fmt::format("cannot open prime cache {}", file.string()));
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto corrupt = [&](std::string_view what) {
    return ResourceError(fmt::format("prime cache {} is corrupt: {}", file.string(), what));
  };
  if (bytes.size() < 8) throw corrupt("missing header");
  std::uint64_t count = 0;
  for (int i = 0; i < 8; ++i) count |= std::uint64_t{bytes[i]} << (8 * i);
  if (count > bytes.size() - 8) throw corrupt("count larger than payload");

  std::vector<std::uint32_t> primes;
  primes.reserve(count);
  std::size_t pos = 8;
  std::uint64_t value = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t delta = 0;
    int shift = 0;
    while (true) {
      if (pos >= bytes.size()) throw corrupt("truncated varint");
      if (shift > 56) throw corrupt("overlong varint");
      const std::uint8_t byte = bytes[pos++];
      delta |= std::uint64_t{byte & 0x7fu} << shift;
      shift += 7;
      if ((byte & 0x80) == 0) break;
    }
    if (delta == 0) throw corrupt("non-increasing sequence");
    value += delta;
    if (value > limit) throw corrupt(fmt::format("prime {} above limit {}", value, limit));
    primes.push_back(static_cast<std::uint32_t>(value));
  }
  if (pos != bytes.size()) throw corrupt("trailing bytes");
  return PrimeStore(limit, std::move(primes));
}

PrimeStore load_or_build_primes(std::uint64_t limit, const SieveOptions& options,
                                const std::optional<std::filesystem::path>& cache_dir) {
  if (!cache_dir) return build_primes(limit, options);
  const auto file = prime_cache_file(*cache_dir, limit);
  if (std::filesystem::exists(file)) return read_prime_cache(file, limit);
  PrimeStore store = build_primes(limit, options);
  std::error_code ec;
  std::filesystem::create_directories(*cache_dir, ec);
  if (ec) throw ResourceError(fmt::format("cannot create cache directory {}: {}", cache_dir->string(), ec.message()));
  write_prime_cache(file, store);
  return store;
}

}  // namespace pqbias
