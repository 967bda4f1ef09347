#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtps/verify.hpp"

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* env = std::getenv("GTPS_CLI");
  REQUIRE_MESSAGE(env != nullptr, "GTPS_CLI must point at the gtps binary");
  return env;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "gtps-cli-tests";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("toy-abelian: re-runs are byte-identical and theta column is pi/4") {
  const auto dir = work_dir();
  write_file(dir / "toy.json",
             R"({"schema_version":1,"seed":11,"eps":[1.0,1.0],"j":[1.0,1.0],)"
             R"("deps":[0.1,0.0],"dj":[0.0,0.2]})");
  const auto out1 = dir / "toy1.csv";
  const auto out2 = dir / "toy2.csv";
  REQUIRE(run("toy-abelian --config " + (dir / "toy.json").string() + " --out " + out1.string()) ==
          0);
  REQUIRE(run("toy-abelian --config " + (dir / "toy.json").string() + " --out " + out2.string()) ==
          0);
  const std::string a = slurp(out1), b = slurp(out2);
  CHECK(a == b);
  CHECK(a.find("0.78539816339744828") != std::string::npos);  // atan(1)
  CHECK(a.find("# seed=11") != std::string::npos);
  CHECK(a.find("# build=") != std::string::npos);
  CHECK(data_rows(a) == 2);
}

TEST_CASE("sweep-integrability: deterministic CSV and sidecar presence") {
  const auto dir = work_dir();
  write_file(dir / "si.json",
             R"({"schema_version":1,"seed":5,"n_sites":4,"n_steps":2,"delta":0.005})");
  const auto out1 = dir / "si1.csv";
  const auto out2 = dir / "si2.csv";
  REQUIRE(run("sweep-integrability --config " + (dir / "si.json").string() + " --out " +
              out1.string()) == 0);
  REQUIRE(run("sweep-integrability --config " + (dir / "si.json").string() + " --out " +
              out2.string()) == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(data_rows(slurp(out1)) == 5);
  CHECK(fs::exists(dir / "si1.json"));  // sidecar with plan + unitaries
  const std::string side = slurp(dir / "si1.json");
  CHECK(side.find("\"v_min\"") != std::string::npos);
  CHECK(side.find("\"bipartition\"") != std::string::npos);
}

TEST_CASE("sweep-disorder: row count is 2 n_steps + 1 and zero delta gives g = 0") {
  const auto dir = work_dir();
  write_file(dir / "sd.json",
             R"({"schema_version":1,"seed":9,"n_sites":4,"h":0.5,"j_center":1.05,)"
             R"("delta":0.0,"n_steps":3,"n_avg":2})");
  const auto out = dir / "sd.csv";
  REQUIRE(run("sweep-disorder --config " + (dir / "sd.json").string() + " --out " + out.string()) ==
          0);
  const std::string csv = slurp(out);
  CHECK(data_rows(csv) == 7);
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("strength", 0) == 0) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // strength
    std::getline(row, cell, ',');  // mean_g
    CHECK(std::stod(cell) == 0.0);
  }
}

TEST_CASE("otoc-probe: curve rows and seed override in the header") {
  const auto dir = work_dir();
  write_file(dir / "op.json",
             R"({"schema_version":1,"seed":3,"n_sites":2,"j":1.05,"h":0.5,)"
             R"("t_max":1.0,"n_t":4,"n_samples":16})");
  const auto out = dir / "op.csv";
  REQUIRE(run("otoc-probe --config " + (dir / "op.json").string() + " --out " + out.string() +
              " --seed 77") == 0);
  const std::string csv = slurp(out);
  CHECK(data_rows(csv) == 5);
  CHECK(csv.find("# seed=77") != std::string::npos);
}

TEST_CASE("config errors exit with code 2") {
  const auto dir = work_dir();
  CHECK(run("toy-abelian --config " + (dir / "missing.json").string() + " --out " +
            (dir / "x.csv").string()) == 2);

  write_file(dir / "unknown.json",
             R"({"schema_version":1,"eps":[1.0],"j":[0.5],"deps":[0],"dj":[0],"bogus":1})");
  CHECK(run("toy-abelian --config " + (dir / "unknown.json").string() + " --out " +
            (dir / "x.csv").string()) == 2);

  write_file(dir / "oldschema.json", R"({"schema_version":0,"eps":[1.0],"j":[0.5]})");
  CHECK(run("toy-abelian --config " + (dir / "oldschema.json").string() + " --out " +
            (dir / "x.csv").string()) == 2);

  write_file(dir / "odd.json", R"({"schema_version":1,"n_sites":5})");
  CHECK(run("sweep-integrability --config " + (dir / "odd.json").string() + " --out " +
            (dir / "x.csv").string()) == 2);

  CHECK(run("no-such-command") == 2);
}

TEST_CASE("mutation smoke test: a corrupted metric constant fails loudly") {
  const gtps::CheckResult bad = gtps::metric_oracle_check(123, -1.0);
  CHECK(!bad.pass);
  CHECK(bad.observed > 1.0);  // sign-flipped metric is off by 200%
  const gtps::CheckResult good = gtps::metric_oracle_check(123, 1.0);
  CHECK(good.pass);
}

TEST_CASE("sweep-disorder output does not depend on the thread count") {
  const auto dir = work_dir();
  write_file(dir / "sdt.json",
             R"({"schema_version":1,"seed":31,"n_sites":4,"h":0.5,"j_center":1.05,)"
             R"("delta":0.005,"n_steps":2,"n_avg":3})");
  const auto o1 = dir / "sdt1.csv";
  const auto o2 = dir / "sdt2.csv";
  REQUIRE(run("sweep-disorder --config " + (dir / "sdt.json").string() + " --out " + o1.string() +
              " --threads 1") == 0);
  REQUIRE(run("sweep-disorder --config " + (dir / "sdt.json").string() + " --out " + o2.string() +
              " --threads 3") == 0);
  CHECK(slurp(o1) == slurp(o2));
}

TEST_CASE("toy-abelian: zero differentials give a zero metric column") {
  const auto dir = work_dir();
  write_file(dir / "toyz.json",
             R"({"schema_version":1,"seed":2,"eps":[1.0,0.7],"j":[0.4,0.2],)"
             R"("deps":[0.0,0.0],"dj":[0.0,0.0]})");
  const auto out = dir / "toyz.csv";
  REQUIRE(run("toy-abelian --config " + (dir / "toyz.json").string() + " --out " + out.string()) ==
          0);
  const std::string csv = slurp(out);
  std::istringstream in(csv);
  std::string line;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    CHECK(std::stod(cells[6]) == 0.0);  // metric_term
    CHECK(std::stod(cells[8]) == 0.0);  // metric_closed
    CHECK(std::stod(cells[9]) == 0.0);  // metric_fd
  }
}
