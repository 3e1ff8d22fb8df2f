#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/cli.hpp"
#include "cli/sweep.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run sbp_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = sbp::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_lines(const std::string& text) {
  std::size_t n = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++n;
  return n;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sbp_cli_" + std::to_string(std::rand()) + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("usage errors") {
  CHECK(sbp_run({}).code == sbp::cli::kUsageError);
  CHECK(sbp_run({"frobnicate"}).code == sbp::cli::kUsageError);
  const auto unknown = sbp_run({"synth", "--tasks", "3", "--out", "x.csv", "--bogus"});
  CHECK(unknown.code == sbp::cli::kUsageError);
  CHECK(unknown.err.find("--bogus") != std::string::npos);

  const auto missing = sbp_run({"evaluate", "--estimator", "gpa", "--tasks", "10", "--out", "x.csv"});
  CHECK(missing.code == sbp::cli::kUsageError);
  CHECK(missing.err.find("--rho") != std::string::npos);

  CHECK(sbp_run({"evaluate", "--estimator", "gpa", "--rho", "1.5", "--tasks", "10", "--out", "x.csv"}).code ==
        sbp::cli::kUsageError);
  CHECK(sbp_run({"evaluate", "--estimator", "gpa", "--rho", "0.1", "--out", "x.csv"}).code ==
        sbp::cli::kUsageError);
  CHECK(sbp_run({"evaluate", "--estimator", "gpa", "--rho", "0.1", "--tasks", "5", "--mix", "constant:0.3",
                 "--out", "x.csv"})
            .code == sbp::cli::kUsageError);
  CHECK(sbp_run({"sweep", "--estimators", "", "--tasks", "5", "--out", "x.csv"}).code == sbp::cli::kUsageError);
  CHECK(sbp_run({"sweep", "--estimators", "gpa:0.1", "--capacities", "0", "--tasks", "5", "--out", "x.csv"}).code ==
        sbp::cli::kUsageError);
  CHECK(sbp_run({"--version"}).out == "0.1.0\n");
  CHECK(sbp_run({"--help"}).code == sbp::cli::kOk);
}

TEST_CASE("data errors") {
  TempDir dir;
  CHECK(sbp_run({"ingest", "--usage", dir / "missing.csv", "--out", dir / "p.csv"}).code == sbp::cli::kDataError);
  std::ofstream(dir / "bad.csv") << "task_id,interval_index,inst_usage,avg_usage\nt1,0,abc,0.1\n";
  const auto bad = sbp_run({"ingest", "--usage", dir / "bad.csv", "--out", dir / "p.csv"});
  CHECK(bad.code == sbp::cli::kDataError);
  CHECK(bad.err.find("line 2") != std::string::npos);
}

TEST_CASE("synth is deterministic and writes a run header") {
  TempDir dir;
  const std::vector<std::string> base{"synth", "--tasks", "100", "--records", "500", "--mix", "constant:1.0",
                                      "--seed", "1", "--out"};
  auto a = base, b = base;
  a.push_back(dir / "a.csv");
  b.push_back(dir / "a2.csv");
  REQUIRE(sbp_run(a).code == 0);
  REQUIRE(sbp_run(b).code == 0);
  const auto ta = slurp(dir / "a.csv");
  auto tb = slurp(dir / "a2.csv");
  // Only the out= entry differs.
  const auto pos = tb.find("a2.csv");
  tb.replace(pos, 6, "a.csv");
  CHECK(ta == tb);
  CHECK(ta.starts_with("# sbp 0.1.0 synth "));
  CHECK(ta.find("seed=1") != std::string::npos);
  CHECK(data_lines(ta) == 101);

  REQUIRE(sbp_run({"synth", "--tasks", "100", "--records", "500", "--mix", "constant:1.0", "--seed", "1",
                   "--out", dir / "a.csv"})
              .code == 0);
  CHECK(slurp(dir / "a.csv") == ta);
}

TEST_CASE("evaluate") {
  TempDir dir;
  auto args = [&](const std::string& out, const std::string& jobs) {
    return std::vector<std::string>{"evaluate", "--estimator", "gpa", "--rho", "0.05", "--capacity", "1.0",
                                    "--algorithm", "bestfit", "--instances", "4", "--tasks", "200",
                                    "--realizations", "500", "--clairvoyance", "1.0", "--seed", "7",
                                    "--out", out, "--jobs", jobs};
  };
  const auto r = sbp_run(args(dir / "r.csv", "1"));
  REQUIRE(r.code == 0);
  CHECK(r.out.starts_with("evaluate:"));
  const auto text = slurp(dir / "r.csv");
  CHECK(text.starts_with("# sbp 0.1.0 evaluate "));
  CHECK(text.find("jobs=") == std::string::npos);
  CHECK(data_lines(text) == 5);  // header + 4 rows
  CHECK(text.find("instance_id,estimator,params,algorithm,signal,clairvoyance,capacity,m_abs,m_norm,m,q\n") !=
        std::string::npos);

  REQUIRE(sbp_run(args(dir / "r.csv", "3")).code == 0);
  CHECK(slurp(dir / "r.csv") == text);
}

TEST_CASE("sweep, determinism and checkpoints") {
  TempDir dir;
  auto args = [&](const std::string& jobs) {
    return std::vector<std::string>{"sweep", "--estimators", "gpa:0.1,gpa:0.05,gpa:0.01,gpa:0.001",
                                    "--capacities", "1", "--instances", "3", "--tasks", "150",
                                    "--realizations", "400", "--seed", "11", "--out", dir / "s.csv",
                                    "--jobs", jobs};
  };
  const auto first = sbp_run(args("1"));
  REQUIRE(first.code == 0);
  const auto text = slurp(dir / "s.csv");
  CHECK(data_lines(text) == 1 + 12);
  CHECK(fs::exists(dir / "s.csv.cells"));

  // Everything comes back from the checkpoints.
  const auto resumed = sbp_run(args("2"));
  REQUIRE(resumed.code == 0);
  CHECK(resumed.out.find("(4 cells resumed)") != std::string::npos);
  CHECK(slurp(dir / "s.csv") == text);

  // A torn checkpoint is recomputed from where it stopped.
  const auto cell = fs::path(dir / "s.csv.cells") / "cell_00002.csv";
  const auto content = slurp(cell);
  std::ofstream(cell, std::ios::trunc | std::ios::binary) << content.substr(0, content.size() - 9);
  // A checkpoint from another configuration is ignored.
  std::ofstream(fs::path(dir / "s.csv.cells") / "cell_00000.csv", std::ios::trunc) << "# cell something else\n";
  const auto repaired = sbp_run(args("1"));
  REQUIRE(repaired.code == 0);
  CHECK(repaired.out.find("(2 cells resumed)") != std::string::npos);
  CHECK(slurp(dir / "s.csv") == text);

  // Without checkpoints the output is the same.
  auto plain = args("3");
  plain.push_back("--no-checkpoint");
  plain[plain.size() - 4] = dir / "plain.csv";
  REQUIRE(sbp_run(plain).code == 0);
  auto p = slurp(dir / "plain.csv");
  CHECK(p.substr(p.find('\n')) == text.substr(text.find('\n')));
}

TEST_CASE("grid expansion") {
  sbp::cli::SweepGrid grid;
  grid.estimators = {sbp::cli::parse_estimator("gpa:0.05"), sbp::cli::parse_estimator("av:1.25")};
  grid.capacities = {0.5, 1.0};
  grid.clairvoyance = {1.0};
  grid.signals = {sbp::Signal::inst, sbp::Signal::avg};
  const auto cells = sbp::cli::expand_grid(grid, 3);
  REQUIRE(cells.size() == 8);
  CHECK(cells[0].config.packing.capacity == 0.5);
  CHECK(cells[1].config.signal == sbp::Signal::avg);
  CHECK(sbp::estimator_name(cells[4].config.packing.estimator) == "av");
  CHECK(cells[0].config.seed != cells[1].config.seed);
  CHECK(sbp::cli::expand_grid(grid, 3)[5].key() == cells[5].key());
  CHECK_THROWS_AS(sbp::cli::parse_estimator("gpa"), std::invalid_argument);
  CHECK_THROWS_AS(sbp::cli::parse_estimator("magic:1"), std::invalid_argument);
  grid.signals.clear();
  CHECK_THROWS_AS(sbp::cli::expand_grid(grid, 3), std::invalid_argument);
  CHECK(sbp::cli::resolve_jobs(3) == 3);
}

TEST_CASE("trace round trip through ingest, pack and the studies") {
  TempDir dir;
  REQUIRE(sbp_run({"synth", "--tasks", "60", "--records", "48", "--seed", "2", "--realizations", "300",
                   "--out", dir / "inst.csv", "--usage-out", dir / "usage.csv"})
              .code == 0);
  CHECK(fs::exists(dir / "inst.inst.bin"));
  CHECK(fs::exists(dir / "inst.avg.bin"));

  std::ofstream(dir / "events.csv") << "task_id,event_code\nt0,5\nt1,4\n";
  const auto ingest = sbp_run({"ingest", "--usage", dir / "usage.csv", "--events", dir / "events.csv",
                               "--invariance-window", "12", "--out", dir / "profiles.csv"});
  REQUIRE(ingest.code == 0);
  CHECK(ingest.out.find("1 failing") != std::string::npos);
  CHECK(data_lines(slurp(dir / "profiles.csv")) == 1 + 59);

  const auto pack = sbp_run({"pack", "--usage", dir / "usage.csv", "--estimator", "cantelli", "--b", "1.7",
                             "--out", dir / "assign.csv", "--machines-out", dir / "machines.csv"});
  REQUIRE(pack.code == 0);
  CHECK(data_lines(slurp(dir / "assign.csv")) == 61);
  CHECK(slurp(dir / "machines.csv").find("machine_index,n_tasks,mu_sum,sqrt_var_sum") != std::string::npos);

  const auto from_instance = sbp_run({"evaluate", "--instance", dir / "inst", "--estimator", "perc", "--k",
                                      "100", "--out", dir / "e.csv"});
  REQUIRE(from_instance.code == 0);
  const auto e = slurp(dir / "e.csv");
  CHECK(e.substr(e.rfind(',') + 1) == "0\n");

  REQUIRE(sbp_run({"study-normality", "--instance", dir / "inst", "--group-sizes", "10,20", "--trials", "20",
                   "--out", dir / "n.csv"})
              .code == 0);
  CHECK(data_lines(slurp(dir / "n.csv")) == 3);
  REQUIRE(sbp_run({"study-percentiles", "--tasks", "80", "--realizations", "300", "--group-size", "10",
                   "--percentiles", "95,99", "--trials", "15", "--out", dir / "p.csv"})
              .code == 0);
  CHECK(data_lines(slurp(dir / "p.csv")) <= 1 + 30);
  REQUIRE(sbp_run({"study-clusters", "--usage", dir / "usage.csv", "--k", "4", "--out", dir / "k.csv",
                   "--assignments-out", dir / "ka.csv"})
              .code == 0);
  CHECK(data_lines(slurp(dir / "k.csv")) == 5);
  CHECK(data_lines(slurp(dir / "ka.csv")) == 61);
}
