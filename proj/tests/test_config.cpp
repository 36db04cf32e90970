#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "csal/config.hpp"
#include "csal/errors.hpp"

using namespace csal;

namespace {

std::string write_cfg(const std::string& name, const std::string& body) {
  auto dir = std::filesystem::temp_directory_path() / "csal-config-tests";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream out(path);
  out << body;
  out.close();
  return path.string();
}

std::string error_of(const std::string& body) {
  try {
    auto cfg = load_config(write_cfg("err.ini", body));
    build_problem(cfg);
    return "";
  } catch (const ConfigError& e) {
    return e.what();
  }
}

}  // namespace

TEST_CASE("full config round trip") {
  auto path = write_cfg("full.ini", R"(# experiment description
[problem]
family = ramp
dim = 1
tau = 0.3
flat_width = 0.5
center = 0.33333333333333331

[learner]
budgets = 512, 1024, 2048
noise = bernoulli
alpha = 0.9

[evaluation]
num_eval = 50000
replicates = 30
bootstrap = 800

[run]
seed = 7
threads = 2
out_dir = sweep_out
)");
  auto cfg = load_config(path);
  CHECK(cfg.family == "ramp");
  CHECK(cfg.budgets == std::vector<std::uint64_t>{512, 1024, 2048});
  CHECK_FALSE(cfg.budget.has_value());
  CHECK(cfg.noise == NoiseModel::kBernoulli);
  REQUIRE(cfg.alpha.has_value());
  CHECK(*cfg.alpha == 0.9);
  CHECK_FALSE(cfg.holder_L.has_value());
  CHECK(cfg.num_eval == 50000);
  CHECK(cfg.replicates == 30);
  CHECK(cfg.bootstrap == 800);
  REQUIRE(cfg.seed.has_value());
  CHECK(*cfg.seed == 7);
  CHECK(cfg.threads == 2);
  CHECK(cfg.out_dir == "sweep_out");

  auto p = build_problem(cfg);
  CHECK(p.family == "ramp");
  CHECK(p.traits.tau == 0.3);
  CHECK(p.noise == NoiseModel::kBernoulli);

  // learner params take the configured override, not the declared trait
  auto lp = make_learner_params(cfg, p, 512);
  CHECK(lp.alpha == 0.9);
  CHECK(lp.holder_L == p.traits.holder_L);
  CHECK(lp.budget == 512);
  CHECK(lp.geom.dim == 1);
}

TEST_CASE("zero-noise flag and geometry overrides") {
  auto path = write_cfg("zn.ini", R"(
[problem]
family = smoothstep
dim = 2

[learner]
budget = 100
noise = zero
rho = 0.6
nu2 = 2.5

[run]
seed = 1
)");
  auto cfg = load_config(path);
  CHECK(cfg.noise == NoiseModel::kZeroNoise);
  auto p = build_problem(cfg);
  CHECK(p.noise == NoiseModel::kZeroNoise);
  CHECK(p.dim == 2);
  auto lp = make_learner_params(cfg, p, 100);
  CHECK(lp.geom.rho == 0.6);
  CHECK(lp.geom.nu2 == 2.5);
  CHECK(lp.geom.nu1 == standard_geometry(2).nu1);  // untouched override
}

TEST_CASE("hard instance and constant gap families from config") {
  auto path = write_cfg("hard.ini", R"(
[problem]
family = hard_instance
dim = 1
L = 2.5
num_bumps = 4
tau = 0.05

[learner]
budget = 50

[run]
seed = 2
)");
  auto p = build_problem(load_config(path));
  CHECK(p.family == "hard_instance");
  CHECK(p.labels == 2);
  CHECK(p.traits.holder_L == 2.5);
  CHECK(p.traits.tau == 0.05);

  auto gap = write_cfg("gap.ini", R"(
[problem]
family = constant_gap
dim = 1
costs = 0.2, 0.5, 0.9

[learner]
budget = 10

[run]
seed = 3
)");
  auto g = build_problem(load_config(gap));
  CHECK(g.labels == 3);
  CHECK(g.family == "constant_gap");
}

TEST_CASE("diagnostics name the offending field") {
  CHECK(error_of("[problem]\nfamily = ramp\n[learner]\nbudgets = 512, 256\n"
                 "[run]\nseed = 1\n")
            .find("'budgets' must be strictly increasing") !=
        std::string::npos);
  CHECK(error_of("[problem]\nfamily = ramp\n[evaluation]\nreplicates = 0\n")
            .find("'replicates' must be positive") != std::string::npos);
  CHECK(error_of("[problem]\nfamily = ramp\n[learner]\nalpha = 1.5\n")
            .find("'alpha' must lie in (0,1]") != std::string::npos);
  CHECK(error_of("[problem]\ndim = 1\n").find("missing 'family'") !=
        std::string::npos);
  CHECK(error_of("[problem]\nfamily = ramp\n[learner]\nnoise = gauss\n")
            .find("invalid value for 'noise'") != std::string::npos);
  CHECK(error_of("[problem]\nfamily = ramp\n[learner]\nwidget = 3\n")
            .find("unknown key 'widget' in [learner]") != std::string::npos);
  CHECK(error_of("[oracle]\nx = 1\n").find("unknown section [oracle]") !=
        std::string::npos);
  CHECK(error_of("family = ramp\n").find("outside any section") !=
        std::string::npos);
  CHECK(error_of("[problem]\nfamily = ramp\n[learner]\nbudget = -4\n")
            .find("invalid unsigned integer for 'budget'") !=
        std::string::npos);
  CHECK(error_of("[problem]\nfamily = ramp\ndim = x\n")
            .find("invalid") != std::string::npos);
  CHECK(error_of("[problem]\nfamily = warp\n")
            .find("unknown problem family: 'warp'") != std::string::npos);
  CHECK(error_of("[problem]\nfamily = ramp\nwobble = 2\n")
            .find("unknown key 'wobble' for family 'ramp'") !=
        std::string::npos);
  CHECK(error_of("[problem]\nfamily = constant_gap\ndim = 1\n")
            .find("requires 'costs'") != std::string::npos);
}

TEST_CASE("missing config file reports the path") {
  try {
    load_config("/nonexistent/nowhere.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cannot open config file") !=
          std::string::npos);
  }
}

TEST_CASE("problem errors pass through build_problem") {
  auto path = write_cfg("bad_ramp.ini", R"(
[problem]
family = ramp
dim = 1
tau = 0.4
flat_width = 0.5
center = 0.9

[run]
seed = 1
)");
  auto cfg = load_config(path);
  CHECK_THROWS_AS(build_problem(cfg), ProblemError);
}
