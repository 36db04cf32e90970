#include "csal/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "csal/errors.hpp"

namespace csal {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    std::uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("invalid unsigned integer for '" + key + "': " + v);
  }
}

double parse_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for '" + key + "': " + v);
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for '" + key + "': " + v);
  }
}

std::vector<std::uint64_t> parse_u64_list(const std::string& key,
                                          const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("empty entry in list for '" + key + "'");
    out.push_back(parse_u64(key, item));
  }
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line, section;
  std::size_t lineno = 0;
  static const std::set<std::string> kSections = {"problem", "learner",
                                                  "evaluation", "run"};
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section))
        throw ConfigError("line " + std::to_string(lineno) +
                          ": unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value, got: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (val.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" +
                        key + "'");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key +
                        "' outside any section");

    if (section == "problem") {
      if (key == "family")
        cfg.family = val;
      else
        cfg.problem_params[key] = val;
    } else if (section == "learner") {
      if (key == "budget")
        cfg.budget = parse_u64(key, val);
      else if (key == "budgets")
        cfg.budgets = parse_u64_list(key, val);
      else if (key == "noise") {
        if (val == "bernoulli")
          cfg.noise = NoiseModel::kBernoulli;
        else if (val == "zero")
          cfg.noise = NoiseModel::kZeroNoise;
        else
          throw ConfigError("invalid value for 'noise': " + val +
                            " (expected bernoulli or zero)");
      } else if (key == "alpha")
        cfg.alpha = parse_f64(key, val);
      else if (key == "holder_L")
        cfg.holder_L = parse_f64(key, val);
      else if (key == "rho")
        cfg.rho = parse_f64(key, val);
      else if (key == "nu1")
        cfg.nu1 = parse_f64(key, val);
      else if (key == "nu2")
        cfg.nu2 = parse_f64(key, val);
      else
        throw ConfigError("unknown key '" + key + "' in [learner]");
    } else if (section == "evaluation") {
      if (key == "num_eval")
        cfg.num_eval = parse_u64(key, val);
      else if (key == "replicates")
        cfg.replicates = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "bootstrap")
        cfg.bootstrap = parse_u64(key, val);
      else
        throw ConfigError("unknown key '" + key + "' in [evaluation]");
    } else {  // run
      if (key == "seed")
        cfg.seed = parse_u64(key, val);
      else if (key == "threads")
        cfg.threads = parse_int(key, val);
      else if (key == "out_dir")
        cfg.out_dir = val;
      else
        throw ConfigError("unknown key '" + key + "' in [run]");
    }
  }

  if (cfg.family.empty())
    throw ConfigError("missing 'family' in [problem]");
  if (cfg.num_eval == 0) throw ConfigError("'num_eval' must be positive");
  if (cfg.replicates == 0) throw ConfigError("'replicates' must be positive");
  if (cfg.threads < 1) throw ConfigError("'threads' must be >= 1");
  if (cfg.budget && *cfg.budget == 0)
    throw ConfigError("'budget' must be positive");
  for (std::size_t i = 0; i + 1 < cfg.budgets.size(); ++i)
    if (cfg.budgets[i] >= cfg.budgets[i + 1])
      throw ConfigError("'budgets' must be strictly increasing");
  if (!cfg.budgets.empty() && cfg.budgets.front() == 0)
    throw ConfigError("'budgets' entries must be positive");
  if (cfg.alpha && !(*cfg.alpha > 0 && *cfg.alpha <= 1))
    throw ConfigError("'alpha' must lie in (0,1]");
  if (cfg.holder_L && !(*cfg.holder_L >= 0))
    throw ConfigError("'holder_L' must be >= 0");
  if (cfg.rho && !(*cfg.rho > 0 && *cfg.rho < 1))
    throw ConfigError("'rho' must lie in (0,1)");
  if (cfg.nu1 && !(*cfg.nu1 > 0)) throw ConfigError("'nu1' must be > 0");
  if (cfg.nu2 && !(*cfg.nu2 >= 1)) throw ConfigError("'nu2' must be >= 1");
  return cfg;
}

namespace {

class ParamReader {
 public:
  ParamReader(const std::string& family,
              const std::map<std::string, std::string>& params)
      : family_(family), params_(params) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    auto it = params_.find(key);
    if (it == params_.end()) return std::nullopt;
    return it->second;
  }
  int get_int(const std::string& key, int fallback) {
    auto v = raw(key);
    return v ? parse_int(key, *v) : fallback;
  }
  double get_f64(const std::string& key, double fallback) {
    auto v = raw(key);
    return v ? parse_f64(key, *v) : fallback;
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    auto v = raw(key);
    return v ? parse_u64(key, *v) : fallback;
  }
  std::vector<double> get_f64_list(const std::string& key) {
    auto v = raw(key);
    if (!v) return {};
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty())
        throw ConfigError("empty entry in list for '" + key + "'");
      out.push_back(parse_f64(key, item));
    }
    return out;
  }
  std::vector<int> get_int_list(const std::string& key) {
    auto v = raw(key);
    if (!v) return {};
    std::vector<int> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty())
        throw ConfigError("empty entry in list for '" + key + "'");
      out.push_back(parse_int(key, item));
    }
    return out;
  }
  void finish() const {
    for (const auto& [key, value] : params_)
      if (!used_.count(key))
        throw ConfigError("unknown key '" + key + "' for family '" + family_ +
                          "'");
  }

 private:
  std::string family_;
  const std::map<std::string, std::string>& params_;
  std::set<std::string> used_;
};

}  // namespace

Problem build_problem(const ExperimentConfig& cfg) {
  ParamReader rd(cfg.family, cfg.problem_params);
  Problem p;
  if (cfg.family == "ramp") {
    int dim = rd.get_int("dim", 1);
    double tau = rd.get_f64("tau", 0.0);
    double flat_width = rd.get_f64("flat_width", -1.0);
    double center = rd.get_f64("center", 0.5);
    rd.finish();
    p = make_ramp(dim, tau, flat_width, center);
  } else if (cfg.family == "constant_gap") {
    int dim = rd.get_int("dim", 1);
    auto costs = rd.get_f64_list("costs");
    rd.finish();
    if (costs.empty())
      throw ConfigError("family 'constant_gap' requires 'costs'");
    p = make_constant_gap(dim, costs);
  } else if (cfg.family == "smoothstep") {
    int dim = rd.get_int("dim", 1);
    rd.finish();
    p = make_smoothstep(dim);
  } else if (cfg.family == "classification_ramp") {
    int dim = rd.get_int("dim", 1);
    rd.finish();
    p = convert_classification(make_classification_ramp(dim));
  } else if (cfg.family == "hard_instance") {
    HardInstanceParams hp;
    hp.dim = rd.get_int("dim", hp.dim);
    hp.alpha = rd.get_f64("alpha", hp.alpha);
    hp.beta = rd.get_f64("beta", hp.beta);
    hp.holder_L = rd.get_f64("L", hp.holder_L);
    hp.r_bar = rd.get_f64("r_bar", hp.r_bar);
    hp.r = rd.get_f64("r", hp.r);
    hp.num_bumps = rd.get_int("num_bumps", hp.num_bumps);
    hp.bump_mass = rd.get_f64("bump_mass", hp.bump_mass);
    hp.tau = rd.get_f64("tau", hp.tau);
    hp.c0 = rd.get_f64("c0", hp.c0);
    hp.c1 = rd.get_f64("c1", hp.c1);
    hp.c2 = rd.get_f64("c2", hp.c2);
    hp.sigma = rd.get_int_list("sigma");
    hp.sigma_seed = rd.get_u64("sigma_seed", hp.sigma_seed);
    hp.packing_seed = rd.get_u64("packing_seed", hp.packing_seed);
    rd.finish();
    p = make_hard_instance(hp);
  } else {
    throw ConfigError("unknown problem family: '" + cfg.family + "'");
  }
  p.noise = cfg.noise;
  return p;
}

LearnerParams make_learner_params(const ExperimentConfig& cfg,
                                  const Problem& p, std::uint64_t budget) {
  LearnerParams lp = default_learner_params(p, budget);
  if (cfg.alpha) lp.alpha = *cfg.alpha;
  if (cfg.holder_L) lp.holder_L = *cfg.holder_L;
  if (cfg.rho) lp.geom.rho = *cfg.rho;
  if (cfg.nu1) lp.geom.nu1 = *cfg.nu1;
  if (cfg.nu2) lp.geom.nu2 = *cfg.nu2;
  return lp;
}

}  // namespace csal
