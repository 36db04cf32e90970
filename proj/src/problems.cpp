#include "csal/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "csal/confidence.hpp"
#include "csal/errors.hpp"
#include "csal/util.hpp"

namespace csal {

namespace {

using ojson = nlohmann::ordered_json;

double sq_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

double dist(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(sq_norm(a, b));
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

std::vector<double> ball_uniform(std::span<const double> center, double radius,
                                 int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(d);
  for (;;) {
    double n2 = 0;
    for (int j = 0; j < d; ++j) {
      x[j] = gauss(rng);
      n2 += x[j] * x[j];
    }
    if (n2 > 0) {
      double scale = radius * std::pow(unif(rng), 1.0 / d) / std::sqrt(n2);
      for (int j = 0; j < d; ++j) x[j] = center[j] + scale * x[j];
      return x;
    }
  }
}

}  // namespace

// ---- Problem members ----------------------------------------------------

std::vector<double> Problem::cost_vector(std::span<const double> x) const {
  std::vector<double> c(static_cast<std::size_t>(labels));
  for (int y = 1; y <= labels; ++y)
    c[static_cast<std::size_t>(y - 1)] = cost_fn(x, y);
  return c;
}

double Problem::min_cost(std::span<const double> x) const {
  double m = kInf;
  for (int y = 1; y <= labels; ++y) m = std::min(m, cost_fn(x, y));
  return m;
}

int Problem::bayes_label(std::span<const double> x) const {
  double best = kInf;
  int arg = 1;
  for (int y = 1; y <= labels; ++y) {
    double c = cost_fn(x, y);
    if (c < best) {
      best = c;
      arg = y;
    }
  }
  return arg;
}

double Problem::gap_prime(std::span<const double> x) const {
  auto c = cost_vector(x);
  double m = *std::min_element(c.begin(), c.end());
  double g = kInf;
  for (double v : c)
    if (v > m) g = std::min(g, v - m);
  return g == kInf ? 0.0 : g;  // every label optimal -> tie, gap' = 0
}

std::vector<double> Problem::sample_cost(std::span<const double> x,
                                         std::mt19937_64& rng) const {
  if (noise == NoiseModel::kZeroNoise) return cost_vector(x);
  if (noisy_cost_fn) return noisy_cost_fn(x, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(labels));
  for (int y = 1; y <= labels; ++y) {
    double f = cost_fn(x, y);
    c[static_cast<std::size_t>(y - 1)] = unif(rng) < f ? 1.0 : 0.0;
  }
  return c;
}

// ---- ramp family ---------------------------------------------------------

Problem make_ramp(int dim, double tau, double flat_width, double center) {
  if (dim < 1) throw ProblemError("ramp: dim must be >= 1");
  if (!(tau >= 0.0 && tau < 1.0)) throw ProblemError("ramp: tau must lie in [0,1)");
  double w = flat_width < 0 ? tau : flat_width;
  if (!(w >= 0.0 && w < 1.0))
    throw ProblemError("ramp: flat_width must lie in [0,1)");
  if (tau > 0.0 && w == 0.0)
    throw ProblemError("ramp: flat_width must be positive when tau > 0");

  double a = center - w / 2, b = center + w / 2;
  if (!(a >= 0.0 && b <= 1.0 && center > 0.0 && center < 1.0))
    throw ProblemError("ramp: flat interval must lie inside (0,1)");
  auto sdist = [a, b](double x0) {
    if (x0 < a) return x0 - a;
    if (x0 > b) return x0 - b;
    return 0.0;
  };

  Problem p;
  p.dim = dim;
  p.labels = 2;
  p.family = "ramp";
  p.cost_fn = [sdist](std::span<const double> x, int y) {
    double f1 = std::min(1.0, std::max(0.0, 0.5 + sdist(x[0])));
    return y == 1 ? f1 : 1.0 - f1;
  };
  double out_density = (1.0 - tau) / (1.0 - w);
  double in_density = w > 0 ? tau / w : 0.0;
  p.pdf = [a, b, in_density, out_density, w](std::span<const double> x) {
    if (w > 0 && x[0] >= a && x[0] <= b) return in_density;
    return out_density;
  };
  p.draw_x = [dim, a, w, tau](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> x(dim);
    double u = unif(rng), v = unif(rng);
    if (u < tau) {
      x[0] = a + v * w;
    } else {
      double t = v * (1.0 - w);
      x[0] = t < a ? t : t + w;
    }
    for (int j = 1; j < dim; ++j) x[j] = unif(rng);
    return x;
  };
  p.box_mass_fn = [a, b, w, tau, out_density](std::span<const double> lo,
                                              std::span<const double> hi) {
    double len = hi[0] - lo[0];
    double overlap = std::max(0.0, std::min(hi[0], b) - std::max(lo[0], a));
    double m = out_density * (len - overlap);
    if (w > 0) m += tau * overlap / w;
    for (std::size_t j = 1; j < lo.size(); ++j) m *= hi[j] - lo[j];
    return m;
  };

  p.traits.alpha = 1.0;
  p.traits.holder_L = 1.0;
  p.traits.beta = 1.0;
  p.traits.c_beta = p.traits.c_beta_prime = out_density;
  p.traits.tau = tau;
  double dmin = kInf, dmax = 0.0;
  if (tau < 1.0) { dmin = std::min(dmin, out_density); dmax = std::max(dmax, out_density); }
  if (tau > 0.0) { dmin = std::min(dmin, in_density); dmax = std::max(dmax, in_density); }
  p.traits.mu_min = dmin;
  p.traits.mu_max = dmax;

  std::vector<double> mid(static_cast<std::size_t>(dim), 0.5);
  auto probe = [&](double x0) {
    auto q = mid;
    q[0] = x0;
    return q;
  };
  p.probe_points = {probe(a), probe(b), probe(center)};
  if (a - 0.5 >= 0.0) p.probe_points.push_back(probe(a - 0.5));  // f1 = 0 kink
  if (b + 0.5 <= 1.0) p.probe_points.push_back(probe(b + 0.5));  // f1 = 1 kink
  p.probe_scales = {std::max(w, 0.05) / 2, 0.1};

  ojson desc;
  desc["family"] = "ramp";
  desc["dim"] = dim;
  desc["tau"] = tau;
  desc["flat_width"] = w;
  desc["center"] = center;
  p.descriptor = desc.dump();

  auto draw = p.draw_x;
  p.structural_checks.push_back([a, b, tau, draw](std::mt19937_64& rng) {
    CheckResult r;
    r.name = "flat-region-mass";
    std::size_t K = 100000, hits = 0;
    for (std::size_t k = 0; k < K; ++k) {
      auto x = draw(rng);
      if (x[0] >= a && x[0] <= b) ++hits;
    }
    double emp = double(hits) / double(K);
    double sigma = std::sqrt(std::max(tau * (1 - tau), 1e-8) / double(K));
    double tol = 4 * sigma + 1e-3;
    r.pass = std::abs(emp - tau) <= tol;
    std::ostringstream os;
    os << "empirical " << emp << " vs nominal " << tau << " (tol " << tol << ")";
    r.detail = os.str();
    return r;
  });
  auto bm = p.box_mass_fn;
  p.structural_checks.push_back([bm, dim](std::mt19937_64&) {
    CheckResult r;
    r.name = "total-mass";
    std::vector<double> lo(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> hi(static_cast<std::size_t>(dim), 1.0);
    double m = bm(lo, hi);
    r.pass = std::abs(m - 1.0) <= 1e-12;
    r.detail = "box mass of [0,1]^d = " + format_double(m);
    return r;
  });
  return p;
}

// ---- constant-gap family --------------------------------------------------

Problem make_constant_gap(int dim, std::vector<double> costs) {
  if (dim < 1) throw ProblemError("constant_gap: dim must be >= 1");
  if (costs.size() < 2) throw ProblemError("constant_gap: need >= 2 costs");
  for (double c : costs)
    if (!(c >= 0.0 && c <= 1.0))
      throw ProblemError("constant_gap: costs must lie in [0,1]");

  Problem p;
  p.dim = dim;
  p.labels = static_cast<int>(costs.size());
  p.family = "constant_gap";
  p.cost_fn = [costs](std::span<const double>, int y) {
    return costs[static_cast<std::size_t>(y - 1)];
  };
  p.pdf = [](std::span<const double>) { return 1.0; };
  p.draw_x = [dim](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> x(dim);
    for (auto& v : x) v = unif(rng);
    return x;
  };
  p.box_mass_fn = [](std::span<const double> lo, std::span<const double> hi) {
    double m = 1.0;
    for (std::size_t j = 0; j < lo.size(); ++j) m *= hi[j] - lo[j];
    return m;
  };

  double mn = *std::min_element(costs.begin(), costs.end());
  double gap = kInf;
  for (double c : costs)
    if (c > mn) gap = std::min(gap, c - mn);
  p.traits.alpha = 1.0;
  p.traits.holder_L = 0.0;  // costs do not vary with x
  p.traits.beta = 1.0;
  if (gap == kInf) {  // all labels tie everywhere
    p.traits.tau = 1.0;
    p.traits.c_beta = p.traits.c_beta_prime = 1.0;
  } else {
    p.traits.tau = 0.0;
    p.traits.c_beta = p.traits.c_beta_prime = 1.0 / gap;
  }
  p.traits.mu_min = p.traits.mu_max = 1.0;

  ojson desc;
  desc["family"] = "constant_gap";
  desc["dim"] = dim;
  desc["costs"] = costs;
  p.descriptor = desc.dump();
  return p;
}

// ---- smoothstep family -----------------------------------------------------

Problem make_smoothstep(int dim) {
  if (dim < 1) throw ProblemError("smoothstep: dim must be >= 1");
  Problem p;
  p.dim = dim;
  p.labels = 2;
  p.family = "smoothstep";
  p.cost_fn = [](std::span<const double> x, int y) {
    double t = x[0];
    double f1 = t * t * (3.0 - 2.0 * t);
    return y == 1 ? f1 : 1.0 - f1;
  };
  p.pdf = [](std::span<const double>) { return 1.0; };
  p.draw_x = [dim](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> x(dim);
    for (auto& v : x) v = unif(rng);
    return x;
  };
  p.box_mass_fn = [](std::span<const double> lo, std::span<const double> hi) {
    double m = 1.0;
    for (std::size_t j = 0; j < lo.size(); ++j) m *= hi[j] - lo[j];
    return m;
  };
  p.traits.alpha = 1.0;
  p.traits.holder_L = 1.5;  // max slope of 3t^2 - 2t^3 at t = 1/2
  p.traits.beta = 1.0;
  p.traits.c_beta = p.traits.c_beta_prime = 1.0;
  p.traits.tau = 0.0;
  p.traits.mu_min = p.traits.mu_max = 1.0;
  std::vector<double> mid(static_cast<std::size_t>(dim), 0.5);
  p.probe_points = {mid};
  p.probe_scales = {0.1};
  ojson desc;
  desc["family"] = "smoothstep";
  desc["dim"] = dim;
  p.descriptor = desc.dump();
  return p;
}

// ---- conversion ------------------------------------------------------------

Problem convert_classification(const LabelProblem& lp) {
  Problem p;
  p.dim = lp.dim;
  p.labels = lp.labels;
  p.family = lp.family;
  p.traits = lp.traits;
  auto eta = lp.cond_prob;
  int M = lp.labels;
  p.cost_fn = [eta](std::span<const double> x, int y) {
    return 1.0 - eta(x)[static_cast<std::size_t>(y - 1)];
  };
  p.noisy_cost_fn = [eta, M](std::span<const double> x, std::mt19937_64& rng) {
    auto probs = eta(x);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng), cum = 0.0;
    int label = M;
    for (int y = 1; y <= M; ++y) {
      cum += probs[static_cast<std::size_t>(y - 1)];
      if (u < cum) {
        label = y;
        break;
      }
    }
    std::vector<double> c(static_cast<std::size_t>(M), 1.0);
    c[static_cast<std::size_t>(label - 1)] = 0.0;
    return c;
  };
  p.cond_prob = eta;
  p.draw_x = lp.draw_x;
  p.pdf = lp.pdf;
  p.box_mass_fn = lp.box_mass_fn;
  p.probe_points = lp.probe_points;
  p.probe_scales = lp.probe_scales;
  p.structural_checks = lp.structural_checks;
  ojson desc;
  desc["conversion"] = "misclassification-costs";
  desc["base"] = ojson::parse(lp.descriptor);
  p.descriptor = desc.dump();
  return p;
}

LabelProblem make_classification_ramp(int dim) {
  if (dim < 1) throw ProblemError("classification_ramp: dim must be >= 1");
  LabelProblem lp;
  lp.dim = dim;
  lp.labels = 2;
  lp.family = "classification_ramp";
  lp.cond_prob = [](std::span<const double> x) {
    double e1 = 0.8 - 0.6 * x[0];
    return std::vector<double>{e1, 1.0 - e1};
  };
  lp.draw_x = [dim](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> x(dim);
    for (auto& v : x) v = unif(rng);
    return x;
  };
  lp.pdf = [](std::span<const double>) { return 1.0; };
  lp.box_mass_fn = [](std::span<const double> lo, std::span<const double> hi) {
    double m = 1.0;
    for (std::size_t j = 0; j < lo.size(); ++j) m *= hi[j] - lo[j];
    return m;
  };
  lp.traits.alpha = 1.0;
  lp.traits.holder_L = 0.6;
  lp.traits.beta = 1.0;
  lp.traits.c_beta = lp.traits.c_beta_prime = 1.0 / 0.6;
  lp.traits.tau = 0.0;
  lp.traits.mu_min = lp.traits.mu_max = 1.0;
  std::vector<double> mid(static_cast<std::size_t>(dim), 0.5);
  lp.probe_points = {mid};
  lp.probe_scales = {0.1};
  ojson desc;
  desc["family"] = "classification_ramp";
  desc["dim"] = dim;
  lp.descriptor = desc.dump();
  return lp;
}

// ---- hard instance ---------------------------------------------------------

namespace {

// Greedy farthest-point selection from a seeded candidate cloud in the
// closed ball B(center, radius); stops when the next best point is closer
// than min_sep to the chosen set.
std::vector<std::vector<double>> greedy_packing(std::span<const double> center,
                                                double radius, double min_sep,
                                                int want, int d,
                                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t n_cand = std::max<std::size_t>(4096, 512 * std::size_t(want));
  std::vector<std::vector<double>> cand;
  cand.reserve(n_cand + 1);
  cand.emplace_back(center.begin(), center.end());
  for (std::size_t k = 0; k < n_cand; ++k)
    cand.push_back(ball_uniform(center, radius, d, rng));

  std::vector<std::vector<double>> picked;
  std::vector<double> best(cand.size(), kInf);  // dist to picked set
  picked.push_back(cand[0]);
  while (static_cast<int>(picked.size()) < want) {
    double far = -1.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      best[k] = std::min(best[k], dist(cand[k], picked.back()));
      if (best[k] > far) {
        far = best[k];
        arg = k;
      }
    }
    if (far < min_sep) break;
    picked.push_back(cand[arg]);
  }
  return picked;
}

}  // namespace

double HardInstance::eta(std::span<const double> x) const {
  const auto& pr = params;
  std::vector<double> xbar(static_cast<std::size_t>(pr.dim), 0.5);
  double rc = dist(x, xbar);
  double dstar = std::pow(double(pr.dim), pr.dim / (2.0 * pr.beta));
  if (rc <= r_star) {
    for (std::size_t i = 0; i < centers.size(); ++i) {
      double del = dist(x, centers[i]);
      if (del < pr.r / 2) {
        double u = 2.0 * del / pr.r;
        double phi = std::min(std::max(2.0 - 3.0 * u, 0.0), 1.0);
        return 0.5 + sigma[i] * bump_amp * phi;
      }
    }
    return 0.5;
  }
  if (rc <= r_star + annulus_width) {
    double dd = rc - r_star;
    return 0.5 + (pr.holder_L / dstar) * std::pow(dd, pr.dim / pr.beta);
  }
  return 0.5 + outer_level;
}

double HardInstance::density(std::span<const double> x) const {
  const auto& pr = params;
  std::vector<double> xbar(static_cast<std::size_t>(pr.dim), 0.5);
  double min_del = kInf;
  for (const auto& c : centers) min_del = std::min(min_del, dist(x, c));
  if (min_del <= pr.r / 6) return pr.bump_mass > 0 ? pr.bump_mass / vol_bump : 0.0;
  double rc = dist(x, xbar);
  if (rc <= r_star && min_del >= pr.r / 3)
    return pr.tau > 0 ? pr.tau / vol_a1 : 0.0;
  if (dist(x, anchor) <= annulus_width)
    return mass_a2 > 0 ? mass_a2 / vol_a2 : 0.0;
  return 0.0;
}

std::vector<double> HardInstance::draw(std::mt19937_64& rng) const {
  const auto& pr = params;
  std::vector<double> xbar(static_cast<std::size_t>(pr.dim), 0.5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  if (u < mass_bumps) {
    auto i = std::min<std::size_t>(
        static_cast<std::size_t>(u / pr.bump_mass), centers.size() - 1);
    return ball_uniform(centers[i], pr.r / 6, pr.dim, rng);
  }
  if (u < mass_bumps + mass_a1) {
    for (int tries = 0; tries < 100000; ++tries) {
      auto x = ball_uniform(xbar, r_star, pr.dim, rng);
      double min_del = kInf;
      for (const auto& c : centers) min_del = std::min(min_del, dist(x, c));
      if (min_del >= pr.r / 3) return x;
    }
    throw std::runtime_error("hard instance: tie-region rejection sampling stalled");
  }
  return ball_uniform(anchor, annulus_width, pr.dim, rng);
}

HardInstance build_hard_instance(const HardInstanceParams& params) {
  HardInstanceParams pr = params;
  int d = pr.dim;
  if (d < 1) throw ProblemError("hard instance: dim must be >= 1");
  if (!(pr.alpha > 0 && pr.alpha <= 1))
    throw ProblemError("hard instance: alpha must lie in (0,1]");
  if (!(pr.beta > 0)) throw ProblemError("hard instance: beta must be > 0");
  if (pr.alpha * pr.beta > d)
    throw ProblemError("hard instance: requires alpha*beta <= dim");
  if (!(pr.holder_L > 1))
    throw ProblemError("hard instance: Holder constant must be > 1");
  if (!(pr.r_bar > 0 && pr.r_bar <= 0.25))
    throw ProblemError("hard instance: r_bar must lie in (0, 0.25]");
  if (!(pr.r > 0 && pr.r <= pr.r_bar))
    throw ProblemError("hard instance: r must lie in (0, r_bar]");
  if (pr.num_bumps < 1) throw ProblemError("hard instance: num_bumps must be >= 1");
  if (!(pr.tau >= 0 && pr.tau < 1))
    throw ProblemError("hard instance: tau must lie in [0,1)");

  double L = pr.holder_L;
  if (pr.c2 < 0) pr.c2 = 1.0 / (12.0 * L);
  if (pr.c0 < 0)
    pr.c0 = std::min(1.0 / (12.0 * L), std::pow(1.0 / (4.0 * L), pr.beta / d));
  if (pr.c1 < 0) pr.c1 = std::min(0.9, 2.0 * pr.c0);
  if (!(pr.c2 > 0)) throw ProblemError("hard instance: c2 must be > 0");
  if (!(pr.c0 > 0 && pr.c0 < 1))
    throw ProblemError("hard instance: c0 must lie in (0,1)");
  if (!(pr.c1 > 0 && pr.c1 < 1))
    throw ProblemError("hard instance: c1 must lie in (0,1)");
  if (pr.bump_mass < 0)
    pr.bump_mass = std::pow(pr.r, pr.alpha * pr.beta) / pr.num_bumps;
  double mw = pr.bump_mass * pr.num_bumps;
  if (mw + pr.tau > 1.0)
    throw ProblemError("hard instance: num_bumps*bump_mass + tau exceeds 1");

  HardInstance hi;
  hi.params = pr;
  std::vector<double> xbar(static_cast<std::size_t>(d), 0.5);
  hi.centers = greedy_packing(xbar, pr.r_bar, pr.r, pr.num_bumps, d,
                              pr.packing_seed);
  if (static_cast<int>(hi.centers.size()) < pr.num_bumps)
    throw ProblemError("hard instance: packing infeasible, only " +
                       std::to_string(hi.centers.size()) + " of " +
                       std::to_string(pr.num_bumps) +
                       " bump centers fit at separation r");

  if (pr.sigma.empty()) {
    std::mt19937_64 rng(pr.sigma_seed);
    for (int i = 0; i < pr.num_bumps; ++i)
      hi.sigma.push_back((rng() & 1) ? 1 : -1);
  } else {
    if (static_cast<int>(pr.sigma.size()) != pr.num_bumps)
      throw ProblemError("hard instance: sigma size != num_bumps");
    for (int s : pr.sigma)
      if (s != 1 && s != -1)
        throw ProblemError("hard instance: sigma entries must be +-1");
    hi.sigma = pr.sigma;
  }

  double far = 0;
  for (const auto& c : hi.centers) far = std::max(far, dist(c, xbar));
  hi.r_star = far + pr.r / 2;

  double R = std::pow(pr.r, pr.alpha * pr.beta / d);
  hi.annulus_width = pr.c0 * R;
  if (hi.r_star + hi.annulus_width > 0.5)
    throw ProblemError("hard instance: r_star + annulus width exceeds 0.5");

  hi.anchor.assign(static_cast<std::size_t>(d), 1.0 - hi.annulus_width);
  double need = hi.r_star + hi.annulus_width + pr.c1 * R;
  if (!(dist(hi.anchor, xbar) > need))
    throw ProblemError("hard instance: anchor ball is not disjoint from the bump region");

  double dstar = std::pow(double(d), d / (2.0 * pr.beta));
  hi.bump_amp = (pr.c2 / dstar) * L * std::pow(pr.r, pr.alpha);
  hi.outer_level = (L / dstar) * std::pow(pr.c0, d / pr.beta) *
                   std::pow(pr.r, pr.alpha);
  if (hi.bump_amp > 0.5 || hi.outer_level > 0.5)
    throw ProblemError("hard instance: conditional probability leaves [0,1]");

  hi.mass_bumps = mw;
  hi.mass_a1 = pr.tau;
  hi.mass_a2 = 1.0 - mw - pr.tau;

  double vd = unit_ball_volume(d);
  hi.vol_bump = vd * std::pow(pr.r / 6, d);
  hi.vol_a1 = vd * (std::pow(hi.r_star, d) -
                    pr.num_bumps * std::pow(pr.r / 3, d));
  hi.vol_a2 = vd * std::pow(hi.annulus_width, d);
  if (!(hi.vol_a1 > 0))
    throw ProblemError("hard instance: tie region has no volume");
  return hi;
}

LabelProblem hard_instance_label_problem(const HardInstance& hi) {
  LabelProblem lp;
  const auto& pr = hi.params;
  lp.dim = pr.dim;
  lp.labels = 2;
  lp.family = "hard_instance";

  lp.cond_prob = [hi](std::span<const double> x) {
    double e = hi.eta(x);
    return std::vector<double>{e, 1.0 - e};
  };
  lp.draw_x = [hi](std::mt19937_64& rng) { return hi.draw(rng); };
  lp.pdf = [hi](std::span<const double> x) { return hi.density(x); };

  lp.traits.alpha = pr.alpha;
  lp.traits.holder_L = pr.holder_L;
  lp.traits.beta = pr.beta;
  lp.traits.tau = pr.tau;
  // tight margin envelope over the two (possibly merged) gap' atoms
  {
    std::vector<std::pair<double, double>> atoms;  // (gap' level, mass)
    if (hi.mass_bumps > 0) atoms.push_back({2 * hi.bump_amp, hi.mass_bumps});
    if (hi.mass_a2 > 0) atoms.push_back({2 * hi.outer_level, hi.mass_a2});
    std::sort(atoms.begin(), atoms.end());
    double c = 0.0, cum = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      cum += atoms[i].second;
      if (i + 1 < atoms.size() && atoms[i + 1].first == atoms[i].first)
        continue;
      c = std::max(c, cum / std::pow(atoms[i].first, pr.beta));
    }
    lp.traits.c_beta = lp.traits.c_beta_prime = c;
  }
  {
    double mn = kInf, mx = 0.0;
    auto add = [&](double mass, double vol) {
      if (mass > 0) {
        mn = std::min(mn, mass / vol);
        mx = std::max(mx, mass / vol);
      }
    };
    add(pr.bump_mass, hi.vol_bump);
    add(hi.mass_a1, hi.vol_a1);
    add(hi.mass_a2, hi.vol_a2);
    lp.traits.mu_min = mn;
    lp.traits.mu_max = mx;
  }

  std::vector<double> xbar(static_cast<std::size_t>(pr.dim), 0.5);
  lp.probe_points.push_back(xbar);
  for (const auto& c : hi.centers) {
    lp.probe_points.push_back(c);
    auto q = c;
    q[0] += pr.r / 4;
    lp.probe_points.push_back(q);
    q[0] = c[0] - pr.r / 4;
    lp.probe_points.push_back(q);
  }
  auto sphere = xbar;
  sphere[0] += hi.r_star;
  lp.probe_points.push_back(sphere);
  sphere[0] = 0.5 + hi.r_star + hi.annulus_width / 2;
  lp.probe_points.push_back(sphere);
  lp.probe_points.push_back(hi.anchor);
  lp.probe_scales = {pr.r / 12, pr.r / 6, pr.r / 3,
                     hi.annulus_width / 2, hi.annulus_width};

  ojson desc;
  desc["family"] = "hard_instance";
  desc["dim"] = pr.dim;
  desc["alpha"] = pr.alpha;
  desc["beta"] = pr.beta;
  desc["L"] = pr.holder_L;
  desc["r_bar"] = pr.r_bar;
  desc["r"] = pr.r;
  desc["num_bumps"] = pr.num_bumps;
  desc["bump_mass"] = pr.bump_mass;
  desc["tau"] = pr.tau;
  desc["c0"] = pr.c0;
  desc["c1"] = pr.c1;
  desc["c2"] = pr.c2;
  desc["sigma"] = hi.sigma;
  desc["centers"] = hi.centers;
  desc["r_star"] = hi.r_star;
  desc["anchor"] = hi.anchor;
  lp.descriptor = desc.dump();

  // feasibility: deterministic re-check of the geometric constraints
  lp.structural_checks.push_back([hi](std::mt19937_64&) {
    CheckResult r;
    r.name = "feasibility";
    const auto& pr = hi.params;
    std::vector<double> xbar(static_cast<std::size_t>(pr.dim), 0.5);
    double min_sep = kInf;
    for (std::size_t i = 0; i < hi.centers.size(); ++i)
      for (std::size_t j = i + 1; j < hi.centers.size(); ++j)
        min_sep = std::min(min_sep, dist(hi.centers[i], hi.centers[j]));
    bool sep_ok = hi.centers.size() < 2 || min_sep >= pr.r * (1 - 1e-12);
    bool inside_ok = true;
    for (const auto& c : hi.centers)
      inside_ok = inside_ok && dist(c, xbar) <= pr.r_bar * (1 + 1e-12);
    double R = std::pow(pr.r, pr.alpha * pr.beta / pr.dim);
    bool disjoint_ok =
        dist(hi.anchor, xbar) > hi.r_star + hi.annulus_width + pr.c1 * R;
    bool domain_ok = hi.r_star + hi.annulus_width <= 0.5 &&
                     hi.anchor[0] - hi.annulus_width >= 0.0;
    bool mass_ok =
        std::abs(hi.mass_bumps + hi.mass_a1 + hi.mass_a2 - 1.0) <= 1e-12 &&
        hi.mass_a1 == pr.tau;
    r.pass = sep_ok && inside_ok && disjoint_ok && domain_ok && mass_ok;
    std::ostringstream os;
    os << "sep " << sep_ok << " inside " << inside_ok << " disjoint "
       << disjoint_ok << " domain " << domain_ok << " mass " << mass_ok;
    r.detail = os.str();
    return r;
  });

  // total mass: bump and anchor regions are exact ball masses; the tie
  // region volume is cross-checked by Monte Carlo against its closed form
  lp.structural_checks.push_back([hi](std::mt19937_64& rng) {
    CheckResult r;
    r.name = "total-mass";
    const auto& pr = hi.params;
    std::vector<double> xbar(static_cast<std::size_t>(pr.dim), 0.5);
    double est = hi.mass_bumps + hi.mass_a2;
    if (pr.tau > 0) {
      std::size_t K = 100000, acc = 0;
      for (std::size_t k = 0; k < K; ++k) {
        auto x = ball_uniform(xbar, hi.r_star, pr.dim, rng);
        double min_del = kInf;
        for (const auto& c : hi.centers)
          min_del = std::min(min_del, dist(x, c));
        if (min_del >= pr.r / 3) ++acc;
      }
      double vol_ball = unit_ball_volume(pr.dim) * std::pow(hi.r_star, pr.dim);
      double vol_mc = vol_ball * double(acc) / double(K);
      est += pr.tau * vol_mc / hi.vol_a1;
    } else {
      est += pr.tau;
    }
    r.pass = std::abs(est - 1.0) <= 1e-3;
    r.detail = "MC total mass " + format_double(est);
    return r;
  });

  // tie-region mass equals tau: nominal exactly, empirical within MC noise
  lp.structural_checks.push_back([hi](std::mt19937_64& rng) {
    CheckResult r;
    r.name = "tie-mass";
    const auto& pr = hi.params;
    bool nominal = hi.mass_a1 == pr.tau;
    std::size_t K = 100000, ties = 0;
    for (std::size_t k = 0; k < K; ++k) {
      auto x = hi.draw(rng);
      if (hi.eta(x) == 0.5) ++ties;
    }
    double emp = double(ties) / double(K);
    double sigma = std::sqrt(std::max(pr.tau * (1 - pr.tau), 1e-8) / double(K));
    r.pass = nominal && std::abs(emp - pr.tau) <= 4 * sigma + 1e-3;
    r.detail = "nominal " + format_double(hi.mass_a1) + ", empirical " +
               format_double(emp) + " vs tau " + format_double(pr.tau);
    return r;
  });

  return lp;
}

Problem make_hard_instance(const HardInstanceParams& params) {
  return convert_classification(
      hard_instance_label_problem(build_hard_instance(params)));
}

// ---- validation -------------------------------------------------------------

namespace {

void clamp_cube(std::vector<double>& x) {
  for (auto& v : x) v = std::min(1.0, std::max(0.0, v));
}

CheckResult holder_check(const Problem& p, std::mt19937_64& rng,
                         const ValidateOptions& opt) {
  CheckResult r;
  r.name = "holder";
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = -kInf;
  std::size_t violations = 0;
  auto test_pair = [&](const std::vector<double>& x,
                       const std::vector<double>& z) {
    double dd = dist(x, z);
    double cap = p.traits.holder_L * std::pow(dd, p.traits.alpha);
    for (int y = 1; y <= p.labels; ++y) {
      double diff = std::abs(p.cost_fn(x, y) - p.cost_fn(z, y));
      double excess = diff - cap;
      worst = std::max(worst, excess);
      if (excess > opt.holder_tol) ++violations;
    }
  };
  int d = p.dim;
  std::vector<double> x(d), z(d);
  for (std::size_t k = 0; k < opt.pairs; ++k) {
    for (int j = 0; j < d; ++j) x[j] = unif(rng);
    for (int j = 0; j < d; ++j) z[j] = unif(rng);
    test_pair(x, z);
  }
  for (const auto& probe : p.probe_points) {
    for (double s : p.probe_scales) {
      for (std::size_t k = 0; k < opt.local_pairs; ++k) {
        for (int j = 0; j < d; ++j)
          x[j] = probe[j] + s * (2 * unif(rng) - 1);
        for (int j = 0; j < d; ++j)
          z[j] = x[j] + 0.5 * s * (2 * unif(rng) - 1);
        clamp_cube(x);
        clamp_cube(z);
        test_pair(x, z);
      }
    }
  }
  r.pass = violations == 0;
  std::ostringstream os;
  os << violations << " violating pairs, max excess " << worst << " (tol "
     << opt.holder_tol << ")";
  r.detail = os.str();
  return r;
}

// worst excess of the empirical CDF of positive gaps over C * t^beta
// (plus binomial slack), evaluated at its jump points; gaps get sorted
double envelope_excess(std::vector<double>& gaps, std::size_t draws, double c,
                       double beta) {
  std::sort(gaps.begin(), gaps.end());
  // uniform DKW-style band: declared envelopes are often exactly tight
  // (e.g. a linear gap law under a uniform marginal), so a pointwise
  // binomial slack would fail on ordinary fluctuations somewhere along
  // the curve. 2.5/sqrt(K) keeps the false-alarm rate below 1e-5.
  double slack = 2.5 / std::sqrt(double(draws)) + 1e-6;
  double worst = -kInf;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    double emp = double(i + 1) / double(draws);
    double cap = c * std::pow(gaps[i], beta);
    worst = std::max(worst, emp - cap - slack);
  }
  return worst;
}

CheckResult margin_check(const Problem& p, std::mt19937_64& rng,
                         const ValidateOptions& opt) {
  CheckResult r;
  r.name = "margin";
  std::size_t K = opt.draws;
  std::vector<double> gaps;  // min positive gap per draw
  gaps.reserve(K);
  std::vector<std::vector<double>> label_gaps(
      static_cast<std::size_t>(p.labels));
  std::size_t ties = 0;
  for (std::size_t k = 0; k < K; ++k) {
    auto x = p.sample_x(rng);
    auto c = p.cost_vector(x);
    double mn = *std::min_element(c.begin(), c.end());
    double g = kInf;
    for (std::size_t y = 0; y < c.size(); ++y)
      if (c[y] > mn) {
        g = std::min(g, c[y] - mn);
        label_gaps[y].push_back(c[y] - mn);
      }
    if (g == kInf)
      ++ties;
    else
      gaps.push_back(g);
  }
  double tau = p.traits.tau;
  double emp_tau = double(ties) / double(K);
  double sig_tau = std::sqrt(std::max(tau * (1 - tau), 1e-8) / double(K));
  bool tau_ok = std::abs(emp_tau - tau) <= 4 * sig_tau + opt.mass_tol;

  double worst = envelope_excess(gaps, K, p.traits.c_beta_prime, p.traits.beta);
  for (auto& lg : label_gaps)
    worst = std::max(worst,
                     envelope_excess(lg, K, p.traits.c_beta, p.traits.beta));
  bool env_ok = worst <= 0;
  r.pass = tau_ok && env_ok;
  std::ostringstream os;
  os << "empirical tau " << emp_tau << " vs " << tau
     << (tau_ok ? " (ok)" : " (FAIL)") << "; envelope max excess " << worst
     << (env_ok ? " (ok)" : " (FAIL)");
  r.detail = os.str();
  return r;
}

CheckResult density_check(const Problem& p, std::mt19937_64& rng,
                          const ValidateOptions& opt) {
  CheckResult r;
  r.name = "density-bounds";
  std::size_t K = std::min<std::size_t>(opt.draws, 20000);
  bool ok = true;
  double lo_seen = kInf, hi_seen = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    auto x = p.sample_x(rng);
    double v = p.pdf(x);
    lo_seen = std::min(lo_seen, v);
    hi_seen = std::max(hi_seen, v);
    if (v < p.traits.mu_min * (1 - 1e-9) - 1e-12 ||
        v > p.traits.mu_max * (1 + 1e-9) + 1e-12)
      ok = false;
  }
  r.pass = ok;
  std::ostringstream os;
  os << "pdf on support in [" << lo_seen << ", " << hi_seen
     << "], declared [" << p.traits.mu_min << ", " << p.traits.mu_max << "]";
  r.detail = os.str();
  return r;
}

CheckResult probabilities_check(const Problem& p, std::mt19937_64& rng) {
  CheckResult r;
  r.name = "label-probabilities";
  bool ok = true;
  for (std::size_t k = 0; k < 2000; ++k) {
    auto x = p.sample_x(rng);
    auto probs = p.cond_prob(x);
    double sum = 0;
    for (double v : probs) {
      sum += v;
      if (v < -1e-12 || v > 1 + 1e-12) ok = false;
    }
    if (std::abs(sum - 1.0) > 1e-9) ok = false;
  }
  r.pass = ok;
  r.detail = ok ? "conditional laws sum to 1" : "invalid conditional law";
  return r;
}

}  // namespace

std::vector<CheckResult> validate_problem(const Problem& p, std::uint64_t seed,
                                          const ValidateOptions& opt) {
  std::vector<CheckResult> out;
  {
    std::mt19937_64 rng(mix_seed(seed, 1));
    out.push_back(holder_check(p, rng, opt));
  }
  {
    std::mt19937_64 rng(mix_seed(seed, 2));
    out.push_back(margin_check(p, rng, opt));
  }
  {
    std::mt19937_64 rng(mix_seed(seed, 3));
    out.push_back(density_check(p, rng, opt));
  }
  if (p.is_converted()) {
    std::mt19937_64 rng(mix_seed(seed, 4));
    out.push_back(probabilities_check(p, rng));
  }
  if (p.has_box_mass()) {
    CheckResult r;
    r.name = "total-mass-closed-form";
    std::vector<double> lo(static_cast<std::size_t>(p.dim), 0.0);
    std::vector<double> hi(static_cast<std::size_t>(p.dim), 1.0);
    double m = p.box_mass_fn(lo, hi);
    r.pass = std::abs(m - 1.0) <= 1e-12;
    r.detail = "box mass of [0,1]^d = " + format_double(m);
    out.push_back(r);
  }
  std::uint64_t tag = 16;
  for (const auto& chk : p.structural_checks) {
    std::mt19937_64 rng(mix_seed(seed, tag++));
    out.push_back(chk(rng));
  }
  return out;
}

}  // namespace csal
