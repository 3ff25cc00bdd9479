#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const char* cli_path() {
  const char* p = std::getenv("WSKDE_CLI");
  REQUIRE_MESSAGE(p != nullptr, "WSKDE_CLI must point at the wskde binary");
  return p;
}

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("wskde_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = work_dir() / "cli.log";
  const std::string cmd = std::string("\"") + cli_path() + "\" " + args +
                          " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(bool(in), ("cannot open " + path.string()));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

}  // namespace

TEST_CASE("version flag") {
  std::string out;
  CHECK(run_cli("--version", &out) == 0);
  CHECK(out.find("wskde") != std::string::npos);
}

TEST_CASE("config errors exit with code 2 and name the field") {
  const fs::path dir = work_dir();
  std::string out;

  write_file(dir / "bad_spacing.json", R"({"kind": "bo", "spacing": -1})");
  CHECK(run_cli("bo --config " + (dir / "bad_spacing.json").string(), &out) ==
        2);
  CHECK(out.find("spacing") != std::string::npos);

  write_file(dir / "unknown.json", R"({"kind": "bo", "bogus": 1})");
  CHECK(run_cli("bo --config " + (dir / "unknown.json").string(), &out) == 2);
  CHECK(out.find("bogus") != std::string::npos);

  write_file(dir / "mismatch.json", R"({"kind": "coverage"})");
  CHECK(run_cli("bo --config " + (dir / "mismatch.json").string(), &out) == 2);

  write_file(dir / "notjson.json", "kind = bo");
  CHECK(run_cli("bo --config " + (dir / "notjson.json").string(), &out) == 2);
  CHECK(out.find("parse") != std::string::npos);

  CHECK(run_cli("bo --config " + (dir / "does_not_exist.json").string(),
                &out) == 2);

  CHECK(run_cli("frobnicate", &out) == 2);
}

TEST_CASE("minimal bo config applies the documented defaults") {
  const fs::path dir = work_dir() / "defaults";
  fs::create_directories(dir);
  write_file(dir / "bo.json", R"({"kind": "bo"})");
  CHECK(run_cli("bo --config " + (dir / "bo.json").string() + " --out " +
                (dir / "out").string() + " --replications 1 --seed 4") == 0);

  std::ifstream meta_in(dir / "out" / "metadata.json");
  json meta = json::parse(meta_in);
  CHECK(meta["config"]["budget"] == 10000);
  CHECK(meta["config"]["bandwidth"][0] == 0.02);
  CHECK(meta["config"]["z"] == 1.96);
  CHECK(meta["config"]["noise"]["type"] == "bernoulli");
  CHECK(meta["config"]["estimator"] == "wskde");
  CHECK(meta["rng"] == "splitmix64");
  CHECK(meta["derived_seeds"].size() == 1);

  const auto trace = read_lines(dir / "out" / "trace.csv");
  CHECK(trace.size() == 2 + 10000);  // comment + header + one row per iteration
  CHECK(trace[0].rfind("# wskde", 0) == 0);
  CHECK(trace[1] ==
        "estimator,replication,iteration,x,y,lcb_max_fraction,i_tot,i_false");
}

TEST_CASE("named confidence level resolves to the z constant") {
  const fs::path dir = work_dir() / "conf";
  fs::create_directories(dir);
  write_file(dir / "cov.json",
             R"({"kind": "coverage", "confidence": "95%", "samples": 20,
                 "replications": 2, "eval_points": 101})");
  CHECK(run_cli("coverage --config " + (dir / "cov.json").string() + " --out " +
                (dir / "out").string()) == 0);
  std::ifstream meta_in(dir / "out" / "metadata.json");
  json meta = json::parse(meta_in);
  CHECK(meta["config"]["z"] == 1.96);
  CHECK(meta["sample_placement"] == "uniform-random");

  write_file(dir / "bad.json", R"({"kind": "coverage", "confidence": "97%"})");
  std::string out;
  CHECK(run_cli("coverage --config " + (dir / "bad.json").string(), &out) == 2);
  CHECK(out.find("confidence") != std::string::npos);
}

TEST_CASE("estimate on an empty data file yields prior estimates") {
  const fs::path dir = work_dir() / "est_empty";
  fs::create_directories(dir);
  write_file(dir / "data.txt", "# nothing but comments\n");
  write_file(dir / "est.json",
             R"({"kind": "estimate", "data": ")" + (dir / "data.txt").string() +
                 R"(", "domain": [0, 1], "bandwidth": 0.25})");
  CHECK(run_cli("estimate --config " + (dir / "est.json").string() +
                " --out " + (dir / "out").string()) == 0);
  const auto lines = read_lines(dir / "out" / "estimates.csv");
  CHECK(lines[1] == "x,m_h,n_h,p_ws,sigma_ws,lcb,ucb");
  CHECK(lines.size() == 2 + 5);  // spacing 0.25 on [0,1]
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    REQUIRE(cells.size() == 7);
    CHECK(cells[1] == "nan");      // m_h undefined
    CHECK(cells[3] == "0.5");      // p_ws
    CHECK(cells[4] == "0.5");      // sigma_ws
    CHECK(cells[5] == "0");
    CHECK(cells[6] == "1");
  }
}

TEST_CASE("estimate reproduces the single-sample closed form") {
  const fs::path dir = work_dir() / "est_one";
  fs::create_directories(dir);
  write_file(dir / "data.txt", "0 1\n");
  write_file(dir / "est.json",
             R"({"kind": "estimate", "data": ")" + (dir / "data.txt").string() +
                 R"(", "bandwidth": 0.02})");
  CHECK(run_cli("estimate --config " + (dir / "est.json").string() +
                " --out " + (dir / "out").string()) == 0);
  const auto lines = read_lines(dir / "out" / "estimates.csv");
  const auto cells = split(lines[2]);  // grid point at x = 0
  REQUIRE(cells.size() == 7);
  CHECK(std::stod(cells[0]) == 0.0);
  CHECK(std::stod(cells[1]) == doctest::Approx(1.0).epsilon(1e-12));
  const double root2 = std::sqrt(2.0);
  CHECK(std::stod(cells[2]) == doctest::Approx(root2).epsilon(1e-12));
  const double z2 = 1.96 * 1.96;
  const double center = (root2 + z2 / 2) / (root2 + z2);
  const double hw = 1.96 / (root2 + z2) * std::sqrt(z2 / 4);
  CHECK(std::stod(cells[3]) == doctest::Approx(center).epsilon(1e-12));
  CHECK(std::stod(cells[4]) == doctest::Approx(hw).epsilon(1e-12));
}

TEST_CASE("two-dimensional estimates match a direct computation") {
  const fs::path dir = work_dir() / "est_2d";
  fs::create_directories(dir);
  write_file(dir / "data.txt", "0.2 0.3 1\n0.8, 0.6, 0\n");
  write_file(dir / "est.json",
             R"({"kind": "estimate", "data": ")" + (dir / "data.txt").string() +
                 R"(", "domain": [[0, 1], [0, 1]],
                     "bandwidth": [0.5, 0.8], "spacing": 0.5})");
  CHECK(run_cli("estimate --config " + (dir / "est.json").string() +
                " --out " + (dir / "out").string()) == 0);
  const auto lines = read_lines(dir / "out" / "estimates.csv");
  CHECK(lines[1] == "x1,x2,m_h,n_h,p_ws,sigma_ws,lcb,ucb");
  REQUIRE(lines.size() == 2 + 9);  // 3 x 3 query grid

  // Multivariate closed forms evaluated by hand for the grid point (0.5, 0.5).
  const double pi = 3.14159265358979323846;
  auto weight = [&](double x1, double x2, double s1, double s2) {
    const double u1 = (x1 - s1) / 0.5;
    const double u2 = (x2 - s2) / 0.8;
    return 1.0 / (0.5 * 0.8) / (2.0 * pi) *
           std::exp(-0.5 * (u1 * u1 + u2 * u2));
  };
  const double w1 = weight(0.5, 0.5, 0.2, 0.3);
  const double w2 = weight(0.5, 0.5, 0.8, 0.6);
  const double m = (w1 * 1.0 + w2 * 0.0) / (w1 + w2);
  const double n_eff = (0.5 * 0.8) * (4.0 * pi) * (w1 + w2);
  const double z2 = 1.96 * 1.96;
  const double center = (n_eff * m + z2 / 2) / (n_eff + z2);
  const double hw =
      1.96 / (n_eff + z2) * std::sqrt(n_eff * m * (1.0 - m) + z2 / 4);

  bool found = false;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    REQUIRE(cells.size() == 8);
    if (std::stod(cells[0]) == 0.5 && std::stod(cells[1]) == 0.5) {
      found = true;
      CHECK(std::stod(cells[2]) == doctest::Approx(m).epsilon(1e-12));
      CHECK(std::stod(cells[3]) == doctest::Approx(n_eff).epsilon(1e-12));
      CHECK(std::stod(cells[4]) == doctest::Approx(center).epsilon(1e-12));
      CHECK(std::stod(cells[5]) == doctest::Approx(hw).epsilon(1e-12));
    }
  }
  CHECK(found);
}

TEST_CASE("estimate rejects out-of-range outcomes naming the row") {
  const fs::path dir = work_dir() / "est_bad";
  fs::create_directories(dir);
  write_file(dir / "data.txt", "0.5 0.5\n0.25 1.25\n");
  write_file(dir / "est.json",
             R"({"kind": "estimate", "data": ")" + (dir / "data.txt").string() +
                 R"(", "domain": [0, 1], "bandwidth": 0.1})");
  std::string out;
  CHECK(run_cli("estimate --config " + (dir / "est.json").string() +
                    " --out " + (dir / "out").string(),
                &out) == 2);
  CHECK(out.find("row 2") != std::string::npos);
}

TEST_CASE("a zero-budget bo run emits the prior grid") {
  const fs::path dir = work_dir() / "budget0";
  fs::create_directories(dir);
  write_file(dir / "bo.json", R"({"kind": "bo", "budget": 0,
                                  "replications": 1})");
  CHECK(run_cli("bo --config " + (dir / "bo.json").string() + " --out " +
                (dir / "out").string()) == 0);
  const auto trace = read_lines(dir / "out" / "trace.csv");
  CHECK(trace.size() == 2);  // header only
  const auto grid = read_lines(dir / "out" / "grid_final.csv");
  CHECK(grid.size() == 2 + 315);
  for (std::size_t i = 2; i < grid.size(); ++i) {
    const auto cells = split(grid[i]);
    REQUIRE(cells.size() == 8);
    CHECK(cells[5] == "0.5");  // p_ws
    CHECK(cells[6] == "0.5");  // sigma
    CHECK(cells[7] == "0");    // pruned
  }
}

TEST_CASE("identical configs give byte-identical outputs across jobs") {
  const fs::path dir = work_dir() / "determinism";
  fs::create_directories(dir);
  write_file(dir / "cov.json",
             R"({"kind": "coverage", "samples": 60, "replications": 3,
                 "estimator": "both", "eval_points": 201, "seed": 99})");
  const std::string base = "coverage --config " + (dir / "cov.json").string();
  CHECK(run_cli(base + " --out " + (dir / "a").string() + " --jobs 1") == 0);
  CHECK(run_cli(base + " --out " + (dir / "b").string() + " --jobs 3") == 0);
  CHECK(same_bytes(dir / "a" / "coverage.csv", dir / "b" / "coverage.csv"));

  write_file(dir / "bo.json", R"({"kind": "bo", "budget": 150,
                                  "replications": 2, "seed": 5})");
  const std::string bo = "bo --config " + (dir / "bo.json").string();
  CHECK(run_cli(bo + " --out " + (dir / "c").string() + " --jobs 1") == 0);
  CHECK(run_cli(bo + " --out " + (dir / "d").string() + " --jobs 2") == 0);
  CHECK(same_bytes(dir / "c" / "trace.csv", dir / "d" / "trace.csv"));
  CHECK(same_bytes(dir / "c" / "grid_final.csv", dir / "d" / "grid_final.csv"));
  CHECK(same_bytes(dir / "c" / "peaks.csv", dir / "d" / "peaks.csv"));
}

TEST_CASE("peak table aggregates bo outputs and checks digests") {
  const fs::path dir = work_dir() / "peak_table";
  fs::create_directories(dir);
  write_file(dir / "bo1.json", R"({"kind": "bo", "budget": 100,
                                   "replications": 2, "estimator": "both",
                                   "seed": 1})");
  write_file(dir / "bo2.json",
             R"({"kind": "bo", "budget": 100, "replications": 2,
                 "estimator": "both", "noise": {"type": "beta",
                 "concentration": 5}, "seed": 2})");
  CHECK(run_cli("bo --config " + (dir / "bo1.json").string() + " --out " +
                (dir / "out1").string()) == 0);
  CHECK(run_cli("bo --config " + (dir / "bo2.json").string() + " --out " +
                (dir / "out2").string()) == 0);

  write_file(dir / "table.json",
             R"({"kind": "peak-table", "inputs": [")" +
                 (dir / "out1").string() + R"(", ")" +
                 (dir / "out2").string() + R"("]})");
  CHECK(run_cli("peak-table --config " + (dir / "table.json").string() +
                " --out " + (dir / "table_out").string()) == 0);
  const auto lines = read_lines(dir / "table_out" / "table.csv");
  CHECK(lines[1] == "noise,estimator,l1,l2,l3,gm");
  REQUIRE(lines.size() == 2 + 4);  // two estimators x two noise models
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    REQUIRE(cells.size() == 6);
    const int total = std::stoi(cells[2]) + std::stoi(cells[3]) +
                      std::stoi(cells[4]) + std::stoi(cells[5]);
    CHECK(total == 2);  // tally sums to the replication count
  }

  // Re-running the table is byte-stable.
  CHECK(run_cli("peak-table --config " + (dir / "table.json").string() +
                " --out " + (dir / "table_out2").string()) == 0);
  CHECK(same_bytes(dir / "table_out" / "table.csv",
                   dir / "table_out2" / "table.csv"));

  // A tampered digest is rejected.
  auto peaks = read_lines(dir / "out1" / "peaks.csv");
  peaks[0] = "# wskde 0.1.0 config=0000000000000000 rng=splitmix64";
  std::string joined;
  for (const auto& line : peaks) joined += line + "\n";
  write_file(dir / "out1" / "peaks.csv", joined);
  std::string out;
  CHECK(run_cli("peak-table --config " + (dir / "table.json").string() +
                    " --out " + (dir / "table_out3").string(),
                &out) == 2);
  CHECK(out.find("digest") != std::string::npos);

  write_file(dir / "missing.json",
             R"({"kind": "peak-table", "inputs": ["/nonexistent/dir"]})");
  CHECK(run_cli("peak-table --config " + (dir / "missing.json").string() +
                    " --out " + (dir / "table_out4").string(),
                &out) == 2);
}
