#include "csal/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "csal/util.hpp"

namespace csal {

namespace {

RiskEstimate mc_mean(std::size_t num_eval,
                     const std::function<double(std::mt19937_64&)>& draw,
                     std::mt19937_64& rng) {
  if (num_eval == 0) throw std::invalid_argument("num_eval must be positive");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < num_eval; ++k) {
    double v = draw(rng);
    sum += v;
    sum2 += v * v;
  }
  RiskEstimate est;
  est.samples = num_eval;
  est.mean = sum / double(num_eval);
  double var = std::max(0.0, sum2 / double(num_eval) - est.mean * est.mean);
  est.se = num_eval > 1 ? std::sqrt(var / double(num_eval - 1)) : 0.0;
  return est;
}

}  // namespace

RiskEstimate excess_risk(const ClassifierFn& g, const Problem& p,
                         std::size_t num_eval, std::mt19937_64& rng) {
  return mc_mean(
      num_eval,
      [&](std::mt19937_64& r) {
        auto x = p.sample_x(r);
        return p.cost_fn(x, g(x)) - p.min_cost(x);
      },
      rng);
}

RiskEstimate classification_excess_risk(const ClassifierFn& g,
                                        const LabelProblem& lp,
                                        std::size_t num_eval,
                                        std::mt19937_64& rng) {
  return mc_mean(
      num_eval,
      [&](std::mt19937_64& r) {
        auto x = lp.draw_x(r);
        auto probs = lp.cond_prob(x);
        double best = *std::max_element(probs.begin(), probs.end());
        return best - probs[static_cast<std::size_t>(g(x) - 1)];
      },
      rng);
}

int PassiveClassifier::operator()(std::span<const double> x) const {
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("point outside [0,1]^d");
  std::uint32_t h = depth;
  CellKey k = descend(
      x, dim, [h](const CellKey& c) { return c.depth == h; }, h);
  auto it = cell_labels.find(k.index);
  return it == cell_labels.end() ? 1 : it->second;
}

std::uint32_t passive_depth(std::uint64_t n, double alpha,
                            const PartitionGeometry& geom) {
  if (n == 0) throw std::invalid_argument("passive_depth: n must be positive");
  double denom = (2 * alpha + geom.dim) * std::log(1.0 / geom.rho);
  double h = std::log(double(n)) / denom;
  long long r = std::llround(h);
  return static_cast<std::uint32_t>(std::max(0LL, r));
}

namespace {

PassiveClassifier passive_fit_at_depth(std::uint64_t n, const Problem& p,
                                       std::uint32_t depth,
                                       std::mt19937_64& rng) {
  PassiveClassifier g;
  g.dim = p.dim;
  g.depth = depth;
  std::uint32_t h = g.depth;
  struct Acc {
    std::vector<double> cost_sum;
    std::uint64_t count = 0;
  };
  std::unordered_map<std::uint64_t, Acc> table;
  for (std::uint64_t k = 0; k < n; ++k) {
    auto x = p.sample_x(rng);
    auto costs = p.sample_cost(x, rng);
    CellKey key = descend(
        x, p.dim, [h](const CellKey& c) { return c.depth == h; }, h);
    auto& acc = table[key.index];
    if (acc.cost_sum.empty()) acc.cost_sum.resize(costs.size(), 0.0);
    for (std::size_t y = 0; y < costs.size(); ++y) acc.cost_sum[y] += costs[y];
    acc.count += 1;
  }
  for (const auto& [index, acc] : table) {
    std::size_t arg = 0;
    for (std::size_t y = 1; y < acc.cost_sum.size(); ++y)
      if (acc.cost_sum[y] < acc.cost_sum[arg]) arg = y;
    g.cell_labels.emplace(index, static_cast<int>(arg + 1));
  }
  return g;
}

}  // namespace

PassiveClassifier passive_baseline(std::uint64_t n, const Problem& p,
                                   std::mt19937_64& rng) {
  return passive_fit_at_depth(
      n, p, passive_depth(n, p.traits.alpha, standard_geometry(p.dim)), rng);
}

RateFit rate_fit(std::span<const double> budgets,
                 std::span<const double> risks) {
  if (budgets.size() != risks.size())
    throw std::invalid_argument("rate_fit: size mismatch");
  std::vector<double> lx, ly;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(risks[i] > 0.0)) {
      ++dropped;
      continue;
    }
    lx.push_back(std::log(budgets[i]));
    ly.push_back(std::log(risks[i]));
  }
  if (lx.size() < 3)
    throw std::invalid_argument(
        "rate_fit: need at least 3 positive risks, have " +
        std::to_string(lx.size()));
  std::size_t m = lx.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(m);
  my /= double(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("rate_fit: budgets are all equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double resid = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += resid * resid;
  }
  fit.slope_se = m > 2 ? std::sqrt(ssr / double(m - 2) / sxx) : 0.0;
  fit.points_used = m;
  fit.points_dropped = dropped;
  return fit;
}

BootstrapCI bootstrap_slope_ci(const std::vector<double>& budgets,
                               const std::vector<std::vector<double>>& risks,
                               std::size_t resamples, std::uint64_t seed) {
  if (budgets.size() != risks.size())
    throw std::invalid_argument("bootstrap_slope_ci: size mismatch");
  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<double> means(budgets.size());
  for (std::size_t k = 0; k < resamples; ++k) {
    std::mt19937_64 rng(mix_seed(seed, k));
    for (std::size_t i = 0; i < budgets.size(); ++i) {
      const auto& r = risks[i];
      if (r.empty())
        throw std::invalid_argument("bootstrap_slope_ci: empty replicate set");
      std::uniform_int_distribution<std::size_t> pick(0, r.size() - 1);
      double sum = 0;
      for (std::size_t j = 0; j < r.size(); ++j) sum += r[pick(rng)];
      means[i] = sum / double(r.size());
    }
    try {
      slopes.push_back(rate_fit(budgets, means).slope);
    } catch (const std::invalid_argument&) {
      // resample collapsed to < 3 positive means; skip it
    }
  }
  if (slopes.empty())
    throw std::invalid_argument("bootstrap_slope_ci: no valid resamples");
  std::sort(slopes.begin(), slopes.end());
  auto quantile = [&](double q) {
    double pos = q * double(slopes.size() - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    double frac = pos - double(i);
    if (i + 1 >= slopes.size()) return slopes.back();
    return slopes[i] * (1 - frac) + slopes[i + 1] * frac;
  };
  BootstrapCI ci;
  ci.lo = quantile(0.025);
  ci.hi = quantile(0.975);
  ci.resamples = slopes.size();
  return ci;
}

double classified_mass(const LearnerState& s, const Problem& p,
                       std::uint64_t seed) {
  if (p.has_box_mass()) {
    double mass = 0;
    for (const auto& cc : s.classified) mass += p.box_mass_fn(cc.cell.lo, cc.cell.hi);
    return mass;
  }
  std::mt19937_64 rng(mix_seed(seed, 7));
  std::size_t K = 4096, hits = 0;
  for (std::size_t k = 0; k < K; ++k) {
    auto x = p.sample_x(rng);
    for (const auto& cc : s.classified)
      if (cc.cell.contains(x)) {
        ++hits;
        break;
      }
  }
  return double(hits) / double(K);
}

ReplicateRow active_replicate(const Problem& p, const LearnerParams& params,
                              std::uint32_t replicate, std::uint64_t seed,
                              std::size_t num_eval) {
  RunResult res = run(p, params, mix_seed(seed, 1));
  std::mt19937_64 eval_rng(mix_seed(seed, 2));
  auto est = excess_risk([&](std::span<const double> x) { return res.classifier(x); },
                         p, num_eval, eval_rng);
  ReplicateRow row;
  row.budget = params.budget;
  row.replicate = replicate;
  row.seed = seed;
  row.excess_risk = est.mean;
  row.max_depth = res.state.max_depth;
  row.classified_mass = classified_mass(res.state, p, mix_seed(seed, 3));
  row.queries_total = res.state.used;
  row.queries_per_label = res.state.label_query_counts;
  return row;
}

ReplicateRow passive_replicate(const Problem& p, std::uint64_t budget,
                               double alpha, const PartitionGeometry& geom,
                               std::uint32_t replicate, std::uint64_t seed,
                               std::size_t num_eval) {
  std::mt19937_64 rng(mix_seed(seed, 1));
  PassiveClassifier g =
      passive_fit_at_depth(budget, p, passive_depth(budget, alpha, geom), rng);
  std::mt19937_64 eval_rng(mix_seed(seed, 2));
  auto est = excess_risk([&](std::span<const double> x) { return g(x); }, p,
                         num_eval, eval_rng);
  ReplicateRow row;
  row.budget = budget;
  row.replicate = replicate;
  row.seed = seed;
  row.excess_risk = est.mean;
  row.max_depth = g.depth;
  row.classified_mass = 1.0;
  row.queries_total = budget;
  row.queries_per_label.assign(static_cast<std::size_t>(p.labels), budget);
  return row;
}

namespace {

struct ActiveExtra {
  std::vector<std::uint64_t> depth_active_counts;
};

BudgetSummary summarize(std::uint64_t budget,
                        std::span<const ReplicateRow> rows,
                        std::span<const ActiveExtra> extras, const Problem& p) {
  BudgetSummary s;
  s.budget = budget;
  s.replicates = static_cast<std::uint32_t>(rows.size());
  double sum = 0, sum2 = 0, mass = 0;
  for (const auto& r : rows) {
    sum += r.excess_risk;
    sum2 += r.excess_risk * r.excess_risk;
    mass += r.classified_mass;
    s.max_depth = std::max(s.max_depth, r.max_depth);
  }
  double n = double(rows.size());
  s.mean_risk = sum / n;
  double var = std::max(0.0, sum2 / n - s.mean_risk * s.mean_risk);
  s.se = rows.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  s.classified_mass = mass / n;
  std::size_t depth_len = 0;
  for (const auto& e : extras)
    depth_len = std::max(depth_len, e.depth_active_counts.size());
  s.depth_active_counts.assign(depth_len, 0.0);
  for (const auto& e : extras)
    for (std::size_t h = 0; h < e.depth_active_counts.size(); ++h)
      s.depth_active_counts[h] += double(e.depth_active_counts[h]) / n;
  double nn = double(budget);
  double log_term = std::log(2.0 * nn * nn * nn * double(p.labels));
  const auto& t = p.traits;
  double expo = t.alpha * t.beta / (2 * t.alpha + p.dim - t.alpha * t.beta);
  s.tau0 = std::pow(log_term / nn, expo);
  s.regime = t.tau >= s.tau0 ? "tau>=tau0" : "tau<tau0";
  return s;
}

}  // namespace

SweepResult run_sweep(const Problem& p, const LearnerParams& base,
                      const SweepOptions& opt) {
  if (opt.budgets.empty())
    throw std::invalid_argument("run_sweep: no budgets");
  if (opt.replicates == 0)
    throw std::invalid_argument("run_sweep: replicates must be positive");
  std::size_t nb = opt.budgets.size(), nr = opt.replicates;
  std::size_t n_active = nb * nr, n_tasks = 2 * n_active;

  SweepResult out;
  out.active_rows.resize(n_active);
  out.passive_rows.resize(n_active);
  std::vector<ActiveExtra> extras(n_active);

  auto run_task = [&](std::size_t t) {
    std::size_t bi = (t % n_active) / nr, rep = (t % n_active) % nr;
    std::uint64_t seed = opt.base_seed + t;
    std::uint64_t budget = opt.budgets[bi];
    if (t < n_active) {
      LearnerParams params = base;
      params.budget = budget;
      RunResult res = run(p, params, mix_seed(seed, 1));
      std::mt19937_64 eval_rng(mix_seed(seed, 2));
      auto est = excess_risk(
          [&](std::span<const double> x) { return res.classifier(x); }, p,
          opt.num_eval, eval_rng);
      ReplicateRow row;
      row.budget = budget;
      row.replicate = static_cast<std::uint32_t>(rep);
      row.seed = seed;
      row.excess_risk = est.mean;
      row.max_depth = res.state.max_depth;
      row.classified_mass = classified_mass(res.state, p, mix_seed(seed, 3));
      row.queries_total = res.state.used;
      row.queries_per_label = res.state.label_query_counts;
      out.active_rows[t] = row;
      extras[t].depth_active_counts = res.state.depth_active_counts;
    } else {
      out.passive_rows[t - n_active] =
          passive_replicate(p, budget, base.alpha, base.geom,
                            static_cast<std::uint32_t>(rep), seed, opt.num_eval);
    }
  };

  int threads = std::max(1, opt.threads);
  if (threads == 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto worker = [&] {
      for (;;) {
        std::size_t t = next.fetch_add(1);
        if (t >= n_tasks) return;
        try {
          run_task(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<double> budgets_d(opt.budgets.begin(), opt.budgets.end());
  std::vector<double> active_means, passive_means;
  std::vector<std::vector<double>> active_mat(nb), passive_mat(nb);
  for (std::size_t bi = 0; bi < nb; ++bi) {
    std::span<const ReplicateRow> arows(&out.active_rows[bi * nr], nr);
    std::span<const ActiveExtra> aext(&extras[bi * nr], nr);
    std::span<const ReplicateRow> prows(&out.passive_rows[bi * nr], nr);
    out.active_summary.push_back(summarize(opt.budgets[bi], arows, aext, p));
    out.passive_summary.push_back(summarize(opt.budgets[bi], prows, {}, p));
    active_means.push_back(out.active_summary.back().mean_risk);
    passive_means.push_back(out.passive_summary.back().mean_risk);
    for (std::size_t r = 0; r < nr; ++r) {
      active_mat[bi].push_back(arows[r].excess_risk);
      passive_mat[bi].push_back(prows[r].excess_risk);
    }
  }
  out.active_fit = rate_fit(budgets_d, active_means);
  out.passive_fit = rate_fit(budgets_d, passive_means);
  out.active_ci =
      bootstrap_slope_ci(budgets_d, active_mat, opt.bootstrap,
                         mix_seed(opt.base_seed, 9001));
  out.passive_ci =
      bootstrap_slope_ci(budgets_d, passive_mat, opt.bootstrap,
                         mix_seed(opt.base_seed, 9002));
  return out;
}

}  // namespace csal
