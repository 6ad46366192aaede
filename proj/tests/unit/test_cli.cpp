#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(LEVY_PROCURE_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string temp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("levy_procure_cli_" + name)).string();
}

}  // namespace

TEST_CASE("validate exit codes") {
  CHECK(run("validate").code == 0);
  const Result bad = run("validate --alpha-s 1");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("salvage_value_bounded,") != std::string::npos);
  const std::string cfg = temp("bad.json");
  std::ofstream(cfg) << R"({"market": {"gamma": "x"}})";
  CHECK(run("validate --config " + cfg).code == 1);
  CHECK(run("validate --format yaml").code == 1);
  CHECK(run("bogus").code == 1);
}

TEST_CASE("validate reports no-invest as information") {
  const Result r = run("validate --format json");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("constants").at("no_invest") == false);
  CHECK(j.at("config").at("market").at("lambda") == 5.0);
}

TEST_CASE("simulate: header, first purchase and deterministic prices") {
  const Result r = run("simulate --horizon 0.01 --dt 0.001");
  REQUIRE(r.code == 0);
  const auto rows = csv(r.out);
  REQUIRE(rows.size() == 12);
  CHECK(r.out.rfind("path,t,price,base_inventory,control,inventory\n", 0) == 0);
  CHECK(std::stod(rows[2][4]) == doctest::Approx(24.87).epsilon(1e-3));

  const Result d = run("simulate --model deterministic --mu 0.7 --horizon 2 --dt 0.01");
  REQUIRE(d.code == 0);
  const auto drows = csv(d.out);
  for (std::size_t i = 1; i < drows.size(); ++i)
    REQUIRE(std::stod(drows[i][2]) == doctest::Approx(std::exp(0.7 * std::stod(drows[i][1]))).epsilon(1e-11));
}

TEST_CASE("simulate: no purchases in the no-invest regime") {
  const Result r = run("simulate --mu -0.5 --lambda 0.3 --paths 5 --horizon 3 --dt 0.01");
  REQUIRE(r.code == 0);
  const auto rows = csv(r.out);
  CHECK(rows.size() == 5 * 301 + 1);
  for (std::size_t i = 1; i < rows.size(); ++i) REQUIRE(std::stod(rows[i][4]) == 0.0);
}

TEST_CASE("I/O failure exits with 3") {
  CHECK(run("simulate --horizon 0.01 -o /nonexistent-dir/x.csv").code == 3);
}

TEST_CASE("value: three methods and bit-exact replay of the embedded config") {
  const std::string a = temp("value_a.json"), b = temp("value_b.json");
  const Result r = run("value --n-paths 300 --dt 0.02 --format json -o " + a);
  REQUIRE(r.code == 0);
  json ja;
  std::ifstream(a) >> ja;
  REQUIRE(ja.at("estimates").size() == 3);
  CHECK(ja.at("differences").size() == 3);
  CHECK(ja.at("constants").at("kappa").get<double>() == doctest::Approx(0.9757694135));

  REQUIRE(run("value --config " + a + " -o " + b).code == 0);
  json jb;
  std::ifstream(b) >> jb;
  CHECK(ja.at("estimates") == jb.at("estimates"));

  const Result threads = run("value --config " + a + " --threads 3 -o -");
  REQUIRE(threads.code == 0);
  CHECK(json::parse(threads.out).at("estimates") == ja.at("estimates"));
}

TEST_CASE("value: single method csv") {
  const Result r = run("value --method representation --n-paths 200 --dt 0.02");
  REQUIRE(r.code == 0);
  const auto rows = csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == "method");
  CHECK(rows[1][0] == "representation");
}

TEST_CASE("seed precedence: config < environment < flag") {
  const std::string cfg = temp("seed.json");
  std::ofstream(cfg) << R"({"mc": {"seed": 1}})";
  auto seed_of = [](const Result& r) { return json::parse(r.out).at("config").at("mc").at("seed").get<int>(); };
  CHECK(seed_of(run("validate --format json --config " + cfg)) == 1);
  CHECK(seed_of(run("validate --format json --config " + cfg + " --seed 3")) == 3);
  ::setenv("LEVY_PROCURE_SEED", "2", 1);
  CHECK(seed_of(run("validate --format json --config " + cfg)) == 2);
  CHECK(seed_of(run("validate --format json --config " + cfg + " --seed 3")) == 3);
  ::unsetenv("LEVY_PROCURE_SEED");
}

TEST_CASE("kappa, foc, newsvendor and sweep reports") {
  const Result k = run("kappa --n-paths 2000 --dt 0.01 --format json");
  REQUIRE(k.code == 0);
  const json jk = json::parse(k.out);
  CHECK(jk.at("kappa_formula").get<double>() == doctest::Approx(0.9757694135));
  CHECK(jk.contains("gap_se"));

  const Result f = run("foc --n-paths 200 --dt 0.02 --y-probe 0 --y-probe 60");
  REQUIRE(f.code == 0);
  CHECK(csv(f.out).size() == 3);

  const Result n = run("newsvendor --format json");
  REQUIRE(n.code == 0);
  const json jn = json::parse(n.out);
  CHECK(jn.at("eta").get<double>() == doctest::Approx(0.73671).epsilon(1e-5));
  CHECK(jn.at("y_star").get<double>() == doctest::Approx(26.690).epsilon(1e-4));

  const Result s = run("sweep --n-paths 200 --dt 0.02 --sigma-grid 0.05,0.5");
  REQUIRE(s.code == 0);
  const auto rows = csv(s.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][9] == rows[2][9]);
  CHECK(run("sweep --sigma-grid 0.1,abc").code == 1);
}

TEST_CASE("a horizon too short for the truncation bound is rejected") {
  CHECK(run("value --horizon 1 --n-paths 10").code == 1);
}
