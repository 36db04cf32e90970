#include "csal/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "csal/util.hpp"

namespace csal {

namespace {

ojson num_or_null(double v) {
  if (v == kInf || v == -kInf) return nullptr;
  return v;
}

const char* noise_name(NoiseModel m) {
  return m == NoiseModel::kZeroNoise ? "zero" : "bernoulli";
}

ojson traits_json(const ProblemTraits& t) {
  ojson j;
  j["alpha"] = t.alpha;
  j["holder_L"] = t.holder_L;
  j["beta"] = t.beta;
  j["c_beta"] = t.c_beta;
  j["c_beta_prime"] = t.c_beta_prime;
  j["tau"] = t.tau;
  j["mu_min"] = t.mu_min;
  j["mu_max"] = t.mu_max;
  return j;
}

ojson problem_json(const Problem& p) {
  ojson j;
  j["family"] = p.family;
  j["dim"] = p.dim;
  j["labels"] = p.labels;
  j["noise"] = noise_name(p.noise);
  j["hash"] = problem_hash(p);
  j["traits"] = traits_json(p.traits);
  j["descriptor"] = ojson::parse(p.descriptor);
  return j;
}

ojson geom_json(const PartitionGeometry& g) {
  ojson j;
  j["dim"] = g.dim;
  j["rho"] = g.rho;
  j["nu1"] = g.nu1;
  j["nu2"] = g.nu2;
  return j;
}

ojson learner_json(const LearnerParams& lp) {
  ojson j;
  j["budget"] = lp.budget;
  j["alpha"] = lp.alpha;
  j["holder_L"] = lp.holder_L;
  j["geometry"] = geom_json(lp.geom);
  return j;
}

ojson fit_json(const RateFit& f) {
  ojson j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["slope_se"] = f.slope_se;
  j["points_used"] = f.points_used;
  j["points_dropped"] = f.points_dropped;
  return j;
}

ojson ci_json(const BootstrapCI& ci) {
  ojson j;
  j["lo"] = ci.lo;
  j["hi"] = ci.hi;
  j["resamples"] = ci.resamples;
  return j;
}

ojson summary_json(const BudgetSummary& s) {
  ojson j;
  j["budget"] = s.budget;
  j["mean_risk"] = s.mean_risk;
  j["se"] = s.se;
  j["replicates"] = s.replicates;
  j["max_depth"] = s.max_depth;
  j["classified_mass"] = s.classified_mass;
  j["depth_active_counts"] = s.depth_active_counts;
  j["tau0"] = s.tau0;
  j["regime"] = s.regime;
  return j;
}

}  // namespace

std::string problem_hash(const Problem& p) {
  return hex64(fnv1a(p.descriptor));
}

std::string trace_csv(std::span<const StepRecord> steps) {
  std::ostringstream os;
  os << "t,used,action,depth,index,unclassified,classified,max_depth\n";
  for (const auto& r : steps) {
    os << r.t << ',' << r.used << ',' << to_string(r.action) << ',' << r.depth
       << ',' << r.index << ',' << r.unclassified << ',' << r.classified << ','
       << r.max_depth << '\n';
  }
  return os.str();
}

std::string replicate_csv(std::span<const ReplicateRow> rows) {
  std::ostringstream os;
  os << "budget,replicate,seed,excess_risk,max_depth,classified_mass,"
        "queries_total,queries_per_label\n";
  for (const auto& r : rows) {
    os << r.budget << ',' << r.replicate << ',' << r.seed << ','
       << format_double(r.excess_risk) << ',' << r.max_depth << ','
       << format_double(r.classified_mass) << ',' << r.queries_total << ',';
    for (std::size_t y = 0; y < r.queries_per_label.size(); ++y) {
      if (y) os << ';';
      os << r.queries_per_label[y];
    }
    os << '\n';
  }
  return os.str();
}

ojson leaves_json(const LearnerState& s) {
  ojson leaves = ojson::array();
  auto bounds_json = [](const ConfidenceRecord& rec,
                        std::span<const int> candidates) {
    ojson arr = ojson::array();
    for (int y : candidates) {
      const auto& b = rec.labels[static_cast<std::size_t>(y - 1)];
      ojson e;
      e["label"] = y;
      e["mean"] = b.mean;
      e["lower"] = num_or_null(b.lower);
      e["upper"] = num_or_null(b.upper);
      arr.push_back(std::move(e));
    }
    return arr;
  };
  for (const auto& [key, ac] : s.active) {
    ojson e;
    e["depth"] = key.depth;
    e["index"] = key.index;
    e["lo"] = ac.cell.lo;
    e["hi"] = ac.cell.hi;
    e["status"] = "active";
    e["count"] = ac.record.count;
    e["candidates"] = ac.candidates;
    e["bounds"] = bounds_json(ac.record, ac.candidates);
    leaves.push_back(std::move(e));
  }
  for (const auto& cc : s.classified) {
    ojson e;
    e["depth"] = cc.cell.depth;
    e["index"] = cc.cell.index;
    e["lo"] = cc.cell.lo;
    e["hi"] = cc.cell.hi;
    e["status"] = "classified";
    e["count"] = cc.record.count;
    e["label"] = cc.label;
    std::vector<int> only{cc.label};
    e["bounds"] = bounds_json(cc.record, only);
    leaves.push_back(std::move(e));
  }
  return leaves;
}

ojson run_report(const Problem& p, const LearnerParams& params,
                 std::uint64_t seed, const LearnerState& s,
                 const RiskEstimate& risk, double classified_mass_value) {
  ojson j;
  j["command"] = "run";
  j["seed"] = seed;
  j["problem"] = problem_json(p);
  j["learner"] = learner_json(params);
  ojson r;
  r["queries_used"] = s.used;
  r["steps"] = s.steps;
  r["query_steps"] = s.query_steps;
  r["refine_steps"] = s.refine_steps;
  r["max_depth"] = s.max_depth;
  r["depth_cap_hit"] = s.depth_cap_hit;
  r["unclassified_cells"] = s.active.size();
  r["classified_cells"] = s.classified.size();
  r["classified_mass"] = classified_mass_value;
  ojson rk;
  rk["mean"] = risk.mean;
  rk["se"] = risk.se;
  rk["samples"] = risk.samples;
  r["excess_risk"] = rk;
  r["depth_active_counts"] = s.depth_active_counts;
  r["label_query_counts"] = s.label_query_counts;
  j["result"] = r;
  j["leaves"] = leaves_json(s);
  return j;
}

ojson sweep_report(const Problem& p, const LearnerParams& base,
                   const SweepOptions& opt, const SweepResult& result) {
  ojson j;
  j["command"] = "sweep";
  j["base_seed"] = opt.base_seed;
  j["problem"] = problem_json(p);
  ojson lj = learner_json(base);
  lj.erase("budget");  // budget varies over the sweep
  j["learner"] = lj;
  ojson o;
  o["budgets"] = opt.budgets;
  o["replicates"] = opt.replicates;
  o["num_eval"] = opt.num_eval;
  o["threads"] = opt.threads;
  o["bootstrap"] = opt.bootstrap;
  j["options"] = o;
  ojson act;
  act["summary"] = ojson::array();
  for (const auto& s : result.active_summary)
    act["summary"].push_back(summary_json(s));
  act["fit"] = fit_json(result.active_fit);
  act["slope_ci"] = ci_json(result.active_ci);
  j["active"] = act;
  ojson pas;
  pas["summary"] = ojson::array();
  for (const auto& s : result.passive_summary)
    pas["summary"].push_back(summary_json(s));
  pas["fit"] = fit_json(result.passive_fit);
  pas["slope_ci"] = ci_json(result.passive_ci);
  j["passive"] = pas;
  return j;
}

ojson validation_report(const Problem& p,
                        const std::vector<CheckResult>& checks) {
  ojson j;
  j["command"] = "validate";
  j["problem"] = problem_json(p);
  ojson arr = ojson::array();
  bool all = true;
  for (const auto& c : checks) {
    ojson e;
    e["name"] = c.name;
    e["pass"] = c.pass;
    e["detail"] = c.detail;
    arr.push_back(std::move(e));
    all = all && c.pass;
  }
  j["checks"] = arr;
  j["pass"] = all;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path fp(path);
  if (fp.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(fp.parent_path(), ec);
    if (ec)
      throw std::runtime_error("cannot create directory " +
                               fp.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(fp, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace csal
