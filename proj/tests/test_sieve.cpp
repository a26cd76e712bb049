#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "pqbias/errors.hpp"
#include "pqbias/prime_cache.hpp"
#include "pqbias/sieve.hpp"

using namespace pqbias;

namespace {

std::vector<std::uint64_t> as_u64(std::span<const std::uint32_t> v) { return {v.begin(), v.end()}; }

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pqbias-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("small prime lists") {
  CHECK(as_u64(build_primes(10).primes()) == std::vector<std::uint64_t>{2, 3, 5, 7});
  CHECK(build_primes(100).size() == 25);
  CHECK(as_u64(build_primes(100).primes()) == testing::primes_trial(100));
  CHECK(build_primes(0).size() == 0);
  CHECK(build_primes(1).size() == 0);
  CHECK(build_primes(2).size() == 1);
  CHECK(build_primes(3).size() == 2);
}

TEST_CASE("segmented sieve equals an unsegmented sieve") {
  const auto reference = testing::primes_eratosthenes(1'000'000);
  CHECK(reference.size() == 78498);
  CHECK(as_u64(build_primes(1'000'000).primes()) == reference);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> dist(2, 1'000'000);
  for (int i = 0; i < 100; ++i) {
    const auto limit = dist(rng);
    SieveOptions options;
    options.segment_size = 1000 + 2 * i;
    const auto got = build_primes(limit, options);
    const auto end = std::upper_bound(reference.begin(), reference.end(), limit);
    REQUIRE(as_u64(got.primes()) == std::vector<std::uint64_t>(reference.begin(), end));
  }
}

TEST_CASE("sieve output is independent of segment size and workers") {
  const auto reference = build_primes(2'000'003);
  for (const std::size_t seg : {64u, 1001u, 1u << 16, 1u << 20}) {
    for (const unsigned w : {1u, 2u, 5u}) {
      SieveOptions options;
      options.segment_size = seg;
      options.workers = w;
      CHECK(build_primes(2'000'003, options) == reference);
    }
  }
}

TEST_CASE("sieve ceiling") {
  SieveOptions options;
  options.ceiling = 1000;
  CHECK_THROWS_WITH_AS(build_primes(1001, options), doctest::Contains("ceiling 1000"), ResourceError);
  CHECK(build_primes(1000, options).size() == 168);
  CHECK_THROWS_AS(build_primes(std::uint64_t{1} << 33), ResourceError);
}

TEST_CASE("classified prime counts") {
  auto store20 = std::make_shared<const PrimeStore>(build_primes(20));
  const auto counts = classified_counts(store20, make_character(-4));
  CHECK(counts.query(20, ClassLabel::minus) == 4);
  CHECK(counts.query(20, ClassLabel::plus) == 3);
  CHECK(counts.query(20, ClassLabel::ramified) == 1);
  CHECK(counts.query(0, ClassLabel::plus) == 0);
  CHECK(counts.query(2, ClassLabel::ramified) == 1);
  CHECK_THROWS_AS(counts.query(21, ClassLabel::plus), RangeError);

  auto store = std::make_shared<const PrimeStore>(build_primes(100'000));
  const auto chi = make_character(-4);
  const auto big = classified_counts(store, chi);
  std::size_t expected = 0;
  for (const auto p : testing::primes_trial(100'000)) expected += (p % 4 == 3) ? 1 : 0;
  CHECK(big.query(100'000, ClassLabel::minus) == expected);

  for (const std::int64_t D : {5, -3, 8, -7, 12}) {
    const auto c = classified_counts(store, make_character(D));
    std::size_t prev[3] = {0, 0, 0};
    for (std::uint64_t B = 0; B <= 100'000; B += 1) {
      std::size_t sum = 0;
      for (const auto eta : {ClassLabel::minus, ClassLabel::ramified, ClassLabel::plus}) {
        const auto q = c.query(B, eta);
        const auto step = q - prev[to_int(eta) + 1];
        REQUIRE(step <= 1);
        REQUIRE((step == 1) == (testing::is_prime_trial(B) && c.character().classify(B) == eta));
        prev[to_int(eta) + 1] = q;
        sum += q;
      }
      REQUIRE(sum == store->pi(B));
    }
    CHECK(c.query(100'000, ClassLabel::ramified) == c.character().ramified_primes().size());
  }
}

TEST_CASE("prime cache file format") {
  const auto dir = scratch_dir("format");
  const auto file = dir / "gap.bin";
  write_prime_cache(file, PrimeStore(400, {2, 3, 300}));
  std::ifstream in(file, std::ios::binary);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // count 3, then gaps 2, 1, 297 = 0xa9 0x02
  const std::vector<unsigned char> expected{3, 0, 0, 0, 0, 0, 0, 0, 2, 1, 0xa9, 0x02};
  CHECK(bytes == expected);
  CHECK(read_prime_cache(file, 400) == PrimeStore(400, {2, 3, 300}));
  CHECK_THROWS_AS(read_prime_cache(file, 299), ResourceError);
}

TEST_CASE("prime cache round trip and corruption") {
  const auto dir = scratch_dir("cache");
  const auto store = build_primes(1'000'000);
  const auto loaded = load_or_build_primes(1'000'000, {}, dir);
  CHECK(loaded == store);
  const auto file = prime_cache_file(dir, 1'000'000);
  REQUIRE(std::filesystem::exists(file));
  CHECK(read_prime_cache(file, 1'000'000) == store);
  CHECK(load_or_build_primes(1'000'000, {}, dir) == store);

  std::filesystem::resize_file(file, std::filesystem::file_size(file) - 3);
  CHECK_THROWS_AS(read_prime_cache(file, 1'000'000), ResourceError);
  {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << "abc";
  }
  CHECK_THROWS_WITH_AS(read_prime_cache(file, 1'000'000), doctest::Contains("missing header"), ResourceError);
  CHECK_THROWS_AS(read_prime_cache(dir / "absent.bin", 10), ResourceError);
}
