#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "pqbias/cli.hpp"

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "pqbias");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = pqbias::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    rows.push_back(fields);
  }
  return rows;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"ratio", "--disc", "9", "--x", "1000"}).code == 1);
  CHECK(invoke({"ratio", "--disc", "-4", "--x", "1e4,1e3"}).code == 1);
  CHECK(invoke({"ratio", "--disc", "-4", "--eta", "0", "--x", "1000"}).code == 1);
  CHECK(invoke({"ratio", "--x", "12abc"}).code == 1);
  CHECK(invoke({"kfactor", "--k", "1", "--x", "1000"}).code == 1);
  CHECK(invoke({"mixed", "--x", "1000"}).code == 1);
  CHECK(invoke({"pairs", "--mod-a", "4", "--set-a", "2", "--x", "1000"}).code == 1);
  CHECK(invoke({"--workers", "0", "ratio", "--x", "1000"}).code == 1);
  CHECK(invoke({"--format", "xml", "ratio", "--x", "1000"}).code == 1);

  const auto big = invoke({"ratio", "--x", "2^33"});
  CHECK(big.code == 2);
  CHECK(big.err.find("resource error") != std::string::npos);
  CHECK(invoke({"--tol", "1e-13", "lchi", "--disc", "-4"}).code == 2);

  const auto version = invoke({"--version"});
  CHECK(version.code == 0);
  CHECK(version.out.find(pqbias::cli::kVersion) != std::string::npos);
}

TEST_CASE("ratio CSV") {
  const auto r = invoke({"--format", "csv", "ratio", "--disc", "5", "--eta", "-1", "--x", "1000,10^4"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"x", "disc", "eta", "count", "total", "ratio", "predicted", "s_of_x", "lchi"});
  CHECK(rows[1][0] == "1000");
  CHECK(rows[1][1] == "5");
  CHECK(rows[1][2] == "-1");
  CHECK(std::stod(rows[1][5]) == doctest::Approx(1.881).epsilon(5e-4));
  CHECK(rows[2][0] == "10000");
  CHECK(std::stod(rows[2][8]) == doctest::Approx(-1.007997).epsilon(1e-6));

  const auto strict = invoke({"--strict", "--format", "csv", "ratio", "--disc", "5", "--x", "1e3"});
  REQUIRE(strict.code == 0);
  CHECK(std::stod(parse_csv(strict.out)[1][5]) == doctest::Approx(1.860).epsilon(5e-4));
}

TEST_CASE("CSV and JSON carry the same values") {
  const std::vector<std::string> tail{"ratio", "--disc", "-4,-3", "--x", "1e3,1e5"};
  auto csv_args = tail;
  csv_args.insert(csv_args.begin(), {"--format", "csv"});
  auto json_args = tail;
  json_args.insert(json_args.begin(), {"--format", "json"});
  const auto c = invoke(csv_args);
  const auto j = invoke(json_args);
  REQUIRE(c.code == 0);
  REQUIRE(j.code == 0);

  const auto rows = parse_csv(c.out);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["tool"] == "pqbias");
  CHECK(doc["version"] == pqbias::cli::kVersion);
  CHECK(doc["config"]["subcommand"] == "ratio");
  CHECK(doc["config"]["convention"] == "p<=q");
  REQUIRE(doc["rows"].size() == rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = doc["rows"][i - 1];
    CHECK(row["convention"] == "p<=q");
    CHECK(row["tolerance"] == 1e-9);
    for (std::size_t col = 0; col < rows[0].size(); ++col) {
      const auto& v = row[rows[0][col]];
      if (v.is_string()) {
        CHECK(v.get<std::string>() == rows[i][col]);
      } else {
        CHECK(v.get<double>() == std::stod(rows[i][col]));
      }
    }
  }
}

TEST_CASE("output does not depend on the worker count") {
  for (const std::string cmd : {"ratio", "kfactor", "race"}) {
    const auto one = invoke({"--format", "json", "--workers", "1", cmd, "--x", "1e3,1e6"});
    const auto many = invoke({"--format", "json", "--workers", "6", cmd, "--x", "1e3,1e6"});
    REQUIRE(one.code == 0);
    CHECK(one.out == many.out);
  }
  const auto a = invoke({"--format", "csv", "--workers", "1", "mixed", "--x", "1e5", "--spec", "-4:-1,5:1,-3:-1"});
  const auto b = invoke({"--format", "csv", "--workers", "5", "mixed", "--x", "1e5", "--spec", "-4:-1,5:1,-3:-1"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("other subcommands") {
  const auto l = invoke({"--format", "csv", "lchi", "--disc", "-4,5"});
  REQUIRE(l.code == 0);
  const auto rows = parse_csv(l.out);
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(rows[1][1]) == doctest::Approx(-0.334981325).epsilon(1e-8));
  CHECK(std::stod(rows[2][1]) == doctest::Approx(-1.007996548).epsilon(1e-8));

  const auto p = invoke({"--format", "json", "pairs", "--mod-a", "4", "--set-a", "3", "--mod-b", "5", "--set-b", "2,3",
                         "--x", "1e4"});
  REQUIRE(p.code == 0);
  const auto doc = nlohmann::json::parse(p.out);
  CHECK(doc["rows"][0]["A"] == "{3} mod 4");
  CHECK(doc["rows"][0]["B"] == "{2,3} mod 5");

  const auto k = invoke({"constants", "--prime-limit", "1000000"});
  CHECK(k.code == 0);
  CHECK(k.out.find("-0.315718") != std::string::npos);

  const auto race = invoke({"race", "--x", "1e4"});
  CHECK(race.code == 0);
  CHECK(race.out.find("s_plus") != std::string::npos);

  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("prime cache directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "pqbias-cli-test-cache";
  const fs::path env_dir = fs::temp_directory_path() / "pqbias-cli-test-env";
  fs::remove_all(dir);
  fs::remove_all(env_dir);
  fs::create_directories(dir);
  fs::create_directories(env_dir);
  const auto count = [](const fs::path& d) {
    return std::distance(fs::directory_iterator(d), fs::directory_iterator{});
  };

  ::unsetenv(pqbias::cli::kCacheDirEnv);
  const auto first = invoke({"--format", "csv", "--cache-dir", dir.string(), "ratio", "--x", "1e5"});
  REQUIRE(first.code == 0);
  CHECK(count(dir) == 1);
  const auto second = invoke({"--format", "csv", "--cache-dir", dir.string(), "ratio", "--x", "1e5"});
  CHECK(second.out == first.out);
  CHECK(invoke({"--format", "csv", "ratio", "--x", "1e5"}).out == first.out);

  ::setenv(pqbias::cli::kCacheDirEnv, env_dir.c_str(), 1);
  CHECK(invoke({"--format", "csv", "--cache-dir", dir.string(), "ratio", "--x", "1e4"}).code == 0);
  CHECK(count(dir) == 1);
  CHECK(count(env_dir) == 1);
  ::unsetenv(pqbias::cli::kCacheDirEnv);

  fs::remove_all(dir);
  fs::remove_all(env_dir);
}
