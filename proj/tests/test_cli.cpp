#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "csal-cli-tests";

std::string write_file(const std::string& name, const std::string& body) {
  fs::create_directories(kWork);
  auto path = kWork / name;
  std::ofstream out(path);
  out << body;
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// run the tool, return its exit code; stdout+stderr captured into `log`
int cli(const std::string& args, std::string* log = nullptr) {
  fs::create_directories(kWork);
  auto log_path = kWork / "last_invocation.log";
  std::string cmd = std::string(CSAL_CLI_PATH) + " " + args + " > " +
                    log_path.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  if (log) *log = slurp(log_path);
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

const char* kRunCfg = R"(
[problem]
family = ramp
dim = 1

[learner]
budget = 300
noise = bernoulli

[evaluation]
num_eval = 5000

[run]
seed = 11
)";

}  // namespace

TEST_CASE("run writes its artifacts and reports them") {
  auto cfg = write_file("run.ini", kRunCfg);
  auto out = (kWork / "run_out").string();
  std::string log;
  int rc = cli("run --config " + cfg + " --out " + out, &log);
  CHECK(rc == 0);
  CHECK(fs::exists(fs::path(out) / "trace.csv"));
  CHECK(fs::exists(fs::path(out) / "report.json"));
  CHECK(log.find("wrote") != std::string::npos);
  CHECK(log.find("report.json") != std::string::npos);

  auto trace = slurp(fs::path(out) / "trace.csv");
  CHECK(trace.rfind("t,used,action,depth,index,unclassified,classified,"
                    "max_depth\n", 0) == 0);
  // one line per step plus header; 300 interactions means > 300 steps
  auto lines = std::count(trace.begin(), trace.end(), '\n');
  CHECK(lines >= 301);
}

TEST_CASE("identical invocations produce byte-identical artifacts") {
  auto cfg = write_file("det.ini", kRunCfg);
  auto out1 = (kWork / "det1").string();
  auto out2 = (kWork / "det2").string();
  REQUIRE(cli("run --config " + cfg + " --out " + out1) == 0);
  REQUIRE(cli("run --config " + cfg + " --out " + out2) == 0);
  CHECK(slurp(fs::path(out1) / "trace.csv") ==
        slurp(fs::path(out2) / "trace.csv"));
  CHECK(slurp(fs::path(out1) / "report.json") ==
        slurp(fs::path(out2) / "report.json"));

  // a different seed changes the artifacts
  auto out3 = (kWork / "det3").string();
  REQUIRE(cli("run --config " + cfg + " --out " + out3 + " --seed 12") == 0);
  CHECK(slurp(fs::path(out1) / "trace.csv") !=
        slurp(fs::path(out3) / "trace.csv"));
}

TEST_CASE("sweep writes replicate tables with the pinned schema") {
  auto cfg = write_file("sweep.ini", R"(
[problem]
family = ramp
dim = 1
center = 0.33333333333333331

[learner]
budgets = 64, 128, 256
noise = zero

[evaluation]
num_eval = 2000
replicates = 2
bootstrap = 100

[run]
seed = 5
threads = 2
)");
  auto out = (kWork / "sweep_out").string();
  std::string log;
  int rc = cli("sweep --config " + cfg + " --out " + out, &log);
  CHECK(rc == 0);
  CHECK(log.find("slope") != std::string::npos);

  auto active = slurp(fs::path(out) / "active.csv");
  auto passive = slurp(fs::path(out) / "passive.csv");
  const std::string header =
      "budget,replicate,seed,excess_risk,max_depth,classified_mass,"
      "queries_total,queries_per_label\n";
  CHECK(active.rfind(header, 0) == 0);
  CHECK(passive.rfind(header, 0) == 0);
  CHECK(std::count(active.begin(), active.end(), '\n') == 7);   // 6 rows
  CHECK(std::count(passive.begin(), passive.end(), '\n') == 7);
  CHECK(fs::exists(fs::path(out) / "report.json"));

  // rerun into another directory: identical bytes (threads included)
  auto out2 = (kWork / "sweep_out2").string();
  REQUIRE(cli("sweep --config " + cfg + " --out " + out2) == 0);
  CHECK(active == slurp(fs::path(out2) / "active.csv"));
  CHECK(passive == slurp(fs::path(out2) / "passive.csv"));
  CHECK(slurp(fs::path(out) / "report.json") ==
        slurp(fs::path(out2) / "report.json"));
}

TEST_CASE("validate prints one verdict per check") {
  auto cfg = write_file("val.ini", R"(
[problem]
family = hard_instance
dim = 1

[run]
seed = 9
)");
  auto out = (kWork / "val_out").string();
  std::string log;
  int rc = cli("validate --config " + cfg + " --out " + out, &log);
  CHECK(rc == 0);
  CHECK(log.find("PASS") != std::string::npos);
  CHECK(log.find("holder") != std::string::npos);
  CHECK(log.find("all checks passed") != std::string::npos);
  CHECK(fs::exists(fs::path(out) / "validation.json"));
}

TEST_CASE("validate fails loudly on a broken construction") {
  auto cfg = write_file("val_bad.ini", R"(
[problem]
family = hard_instance
dim = 1
c2 = 0.5

[run]
seed = 9
)");
  auto out = (kWork / "val_bad_out").string();
  std::string log;
  int rc = cli("validate --config " + cfg + " --out " + out, &log);
  CHECK(rc == 3);
  CHECK(log.find("FAIL") != std::string::npos);
  CHECK(log.find("validation FAILED") != std::string::npos);
}

TEST_CASE("usage and error exit codes") {
  std::string log;
  CHECK(cli("help", &log) == 0);
  CHECK(log.find("usage") != std::string::npos);

  CHECK(cli("", &log) == 2);
  CHECK(cli("frobnicate --config x", &log) == 2);
  CHECK(log.find("unknown command") != std::string::npos);

  // missing config file
  CHECK(cli("run --config /nonexistent.ini", &log) == 2);
  CHECK(log.find("cannot open config file") != std::string::npos);

  // seed is mandatory: config without [run] seed and no --seed flag
  auto noseed = write_file("noseed.ini", R"(
[problem]
family = ramp

[learner]
budget = 10
)");
  CHECK(cli("run --config " + noseed, &log) == 2);
  CHECK(log.find("seed") != std::string::npos);

  // structurally infeasible problem surfaces as a config-stage failure
  auto bad = write_file("bad_problem.ini", R"(
[problem]
family = ramp
tau = 0.4
flat_width = 0.5
center = 0.9

[learner]
budget = 10

[run]
seed = 4
)");
  CHECK(cli("run --config " + bad, &log) == 2);

  // run needs a single budget, not a sweep list
  auto nolearner = write_file("nobudget.ini", R"(
[problem]
family = ramp

[learner]
budgets = 16, 32, 64

[run]
seed = 4
)");
  CHECK(cli("run --config " + nolearner, &log) == 2);
  CHECK(log.find("budget") != std::string::npos);
}
