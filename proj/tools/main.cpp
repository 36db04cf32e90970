#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "csal/config.hpp"
#include "csal/errors.hpp"
#include "csal/evaluation.hpp"
#include "csal/learner.hpp"
#include "csal/report.hpp"
#include "csal/util.hpp"

namespace {

using namespace csal;

const char* kUsage = R"(usage: csal <command> --config FILE [options]

commands:
  run        one learner run: writes trace.csv and report.json
  sweep      budgets x replicates, active and passive: writes active.csv,
             passive.csv and report.json
  validate   check the configured problem against its declared regularity,
             margin and density parameters: writes validation.json

options:
  --config FILE   experiment config (required)
  --out DIR       output directory (overrides [run] out_dir)
  --seed N        RNG seed (overrides [run] seed; required in one of the two)
  --threads N     worker threads for sweep (overrides [run] threads)
  --help          this text

exit codes: 0 ok, 1 runtime error, 2 bad usage/config, 3 validation failed
)";

struct Args {
  std::string command;
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

std::uint64_t arg_u64(const std::string& flag, const std::string& v) {
  try {
    std::size_t pos = 0;
    std::uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("invalid value for " + flag + ": " + v);
  }
}

Args parse_args(int argc, char** argv) {
  Args a;
  if (argc < 2) throw ConfigError("missing command");
  a.command = argv[1];
  if (a.command == "--help" || a.command == "help") {
    a.command = "help";
    return a;
  }
  if (a.command != "run" && a.command != "sweep" && a.command != "validate")
    throw ConfigError("unknown command: " + a.command);
  for (int i = 2; i < argc; ++i) {
    std::string flag = argv[i];
    if (flag == "--help") {
      a.command = "help";
      return a;
    }
    auto need_value = [&](const char* name) -> std::string {
      if (i + 1 >= argc) throw ConfigError(std::string(name) + " needs a value");
      return argv[++i];
    };
    if (flag == "--config")
      a.config = need_value("--config");
    else if (flag == "--out")
      a.out = need_value("--out");
    else if (flag == "--seed")
      a.seed = arg_u64("--seed", need_value("--seed"));
    else if (flag == "--threads")
      a.threads = static_cast<int>(arg_u64("--threads", need_value("--threads")));
    else
      throw ConfigError("unknown option: " + flag);
  }
  if (a.config.empty()) throw ConfigError("--config is required");
  return a;
}

ExperimentConfig load_with_overrides(const Args& a) {
  ExperimentConfig cfg = load_config(a.config);
  if (a.out) cfg.out_dir = *a.out;
  if (a.seed) cfg.seed = *a.seed;
  if (a.threads) {
    if (*a.threads < 1) throw ConfigError("--threads must be >= 1");
    cfg.threads = *a.threads;
  }
  if (!cfg.seed)
    throw ConfigError("a seed is required: set [run] seed or pass --seed");
  return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const char* name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void emit(const ExperimentConfig& cfg, const char* name,
          const std::string& content) {
  std::string path = out_path(cfg, name);
  write_text_file(path, content);
  std::cout << "wrote " << path << "\n";
}

int cmd_run(const Args& args) {
  ExperimentConfig cfg = load_with_overrides(args);
  if (!cfg.budget)
    throw ConfigError("'budget' in [learner] is required for run");
  Problem p = build_problem(cfg);
  LearnerParams lp = make_learner_params(cfg, p, *cfg.budget);
  std::uint64_t seed = *cfg.seed;

  std::vector<StepRecord> steps;
  RunResult res = run(p, lp, seed, [&](const LearnerState&, const StepRecord& r) {
    steps.push_back(r);
  });
  std::mt19937_64 eval_rng(mix_seed(seed, 2));
  RiskEstimate risk = excess_risk(
      [&](std::span<const double> x) { return res.classifier(x); }, p,
      cfg.num_eval, eval_rng);
  double mass = classified_mass(res.state, p, mix_seed(seed, 3));

  const LearnerState& s = res.state;
  std::cout << "problem " << p.family << " (" << problem_hash(p) << "), budget "
            << lp.budget << ", seed " << seed << "\n";
  std::cout << "steps " << s.steps << " (" << s.query_steps << " query, "
            << s.refine_steps << " refine), queries used " << s.used << "\n";
  std::cout << "leaves: " << s.classified.size() << " classified, "
            << s.active.size() << " unclassified; max depth " << s.max_depth
            << "; classified mass " << mass << "\n";
  if (s.depth_cap_hit) std::cout << "warning: depth cap reached, run stopped early\n";
  std::cout << "excess risk " << risk.mean << " (se " << risk.se << ", "
            << risk.samples << " samples)\n";

  emit(cfg, "trace.csv", trace_csv(steps));
  ojson rep = run_report(p, lp, seed, s, risk, mass);
  emit(cfg, "report.json", rep.dump(2) + "\n");
  return 0;
}

int cmd_sweep(const Args& args) {
  ExperimentConfig cfg = load_with_overrides(args);
  if (cfg.budgets.empty())
    throw ConfigError("'budgets' in [learner] is required for sweep");
  Problem p = build_problem(cfg);
  LearnerParams base = make_learner_params(cfg, p, cfg.budgets.front());
  SweepOptions opt;
  opt.budgets = cfg.budgets;
  opt.replicates = cfg.replicates;
  opt.num_eval = cfg.num_eval;
  opt.base_seed = *cfg.seed;
  opt.threads = cfg.threads;
  opt.bootstrap = cfg.bootstrap;

  std::cout << "problem " << p.family << " (" << problem_hash(p) << "), "
            << opt.budgets.size() << " budgets x " << opt.replicates
            << " replicates, base seed " << opt.base_seed << "\n";
  SweepResult result = run_sweep(p, base, opt);
  for (std::size_t i = 0; i < result.active_summary.size(); ++i) {
    const auto& a = result.active_summary[i];
    const auto& q = result.passive_summary[i];
    std::cout << "budget " << a.budget << ": active risk " << a.mean_risk
              << " (se " << a.se << "), passive risk " << q.mean_risk << " (se "
              << q.se << ")\n";
  }
  std::cout << "active slope " << result.active_fit.slope << " (95% CI ["
            << result.active_ci.lo << ", " << result.active_ci.hi << "])\n";
  std::cout << "passive slope " << result.passive_fit.slope << " (95% CI ["
            << result.passive_ci.lo << ", " << result.passive_ci.hi << "])\n";

  emit(cfg, "active.csv", replicate_csv(result.active_rows));
  emit(cfg, "passive.csv", replicate_csv(result.passive_rows));
  ojson rep = sweep_report(p, base, opt, result);
  emit(cfg, "report.json", rep.dump(2) + "\n");
  return 0;
}

int cmd_validate(const Args& args) {
  ExperimentConfig cfg = load_with_overrides(args);
  Problem p = build_problem(cfg);
  std::cout << "problem " << p.family << " (" << problem_hash(p) << "), seed "
            << *cfg.seed << "\n";
  auto checks = validate_problem(p, *cfg.seed);
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " -- " << c.detail
              << "\n";
    all = all && c.pass;
  }
  std::cout << (all ? "all checks passed" : "validation FAILED") << "\n";
  emit(cfg, "validation.json", validation_report(p, checks).dump(2) + "\n");
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    Args args = parse_args(argc, argv);
    if (args.command == "help") {
      std::cout << kUsage;
      return 0;
    }
    if (args.command == "run") return cmd_run(args);
    if (args.command == "sweep") return cmd_sweep(args);
    return cmd_validate(args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << kUsage;
    return 2;
  } catch (const ProblemError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
