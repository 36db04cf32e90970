#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace csal {

enum class NoiseModel { kBernoulli, kZeroNoise };

// Regularity / margin / density parameters a generated problem declares
// about itself. Margin constants are the tight envelopes of the actual
// construction, so validation against them is meaningful for any
// parameter choice.
struct ProblemTraits {
  double alpha = 1.0;     // Holder exponent of every f(.; y)
  double holder_L = 1.0;  // Holder constant
  double beta = 1.0;      // margin exponent
  double c_beta = 1.0;        // per-label gap envelope constant
  double c_beta_prime = 1.0;  // min positive gap envelope constant
  double tau = 0.0;           // P_X(all labels optimal, i.e. gap' == 0)
  double mu_min = 1.0;        // density bounds on the support
  double mu_max = 1.0;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// A cost-sensitive problem instance on [0,1]^d with labels 1..M.
// expected cost f(x; y) in [0,1]; sample_cost draws one cost vector whose
// conditional mean is f; draw_x samples the marginal.
struct Problem {
  int dim = 1;
  int labels = 2;  // M
  NoiseModel noise = NoiseModel::kBernoulli;
  std::string family;
  std::string descriptor;  // canonical JSON text describing the instance
  ProblemTraits traits;

  std::function<double(std::span<const double>, int)> cost_fn;  // f(x; y)
  std::function<std::vector<double>(std::span<const double>, std::mt19937_64&)>
      noisy_cost_fn;  // family cost law; per-label Bernoulli(f) by default
  std::function<std::vector<double>(std::mt19937_64&)> draw_x;
  std::function<double(std::span<const double>)> pdf;
  // exact P_X mass of an axis box; empty when no closed form exists
  std::function<double(std::span<const double>, std::span<const double>)>
      box_mass_fn;
  // P(Y = y | x) for problems converted from label classification
  std::function<std::vector<double>(std::span<const double>)> cond_prob;

  // validation support: landmark points / length scales for local pair
  // sampling, and family-specific re-runnable structural checks
  std::vector<std::vector<double>> probe_points;
  std::vector<double> probe_scales;
  std::vector<std::function<CheckResult(std::mt19937_64&)>> structural_checks;

  double expected_cost(std::span<const double> x, int label) const {
    return cost_fn(x, label);
  }
  std::vector<double> cost_vector(std::span<const double> x) const;
  double min_cost(std::span<const double> x) const;
  // smallest label attaining min_cost
  int bayes_label(std::span<const double> x) const;
  // min positive gap f(x;y) - min_cost(x); 0 when every label is optimal
  double gap_prime(std::span<const double> x) const;
  std::vector<double> sample_cost(std::span<const double> x,
                                  std::mt19937_64& rng) const;
  std::vector<double> sample_x(std::mt19937_64& rng) const {
    return draw_x(rng);
  }
  bool has_box_mass() const { return static_cast<bool>(box_mass_fn); }
  bool is_converted() const { return static_cast<bool>(cond_prob); }
  Problem with_noise(NoiseModel m) const {
    Problem p = *this;
    p.noise = m;
    return p;
  }
};

// ---- smooth families -------------------------------------------------

// Binary ramp along axis 0 with a flat tie region of P_X-mass tau.
// f(x;1) = clamp(1/2 + s(x0), 0, 1), f(x;2) = 1 - f(x;1) where s is the
// signed distance to the flat interval centred at `center`. flat_width < 0
// means "equal to tau", which makes the marginal uniform; otherwise the
// density is piecewise-constant: tau/flat_width inside, (1-tau)/(1-flat_width)
// outside. Defaults give exactly f(x;1) = x0, f(x;2) = 1 - x0; the decision
// boundary sits at `center`, so a non-dyadic center (e.g. 1/3) keeps the
// boundary off every cell edge of the learner's partition.
Problem make_ramp(int dim, double tau = 0.0, double flat_width = -1.0,
                  double center = 0.5);

// Costs independent of x; uniform marginal.
Problem make_constant_gap(int dim, std::vector<double> costs);

// Binary smoothstep crossing along axis 0: f(x;1) = 3t^2 - 2t^3 at t = x0.
Problem make_smoothstep(int dim);

// ---- label classification problems and conversion ---------------------

struct LabelProblem {
  int dim = 1;
  int labels = 2;
  std::string family;
  std::string descriptor;
  ProblemTraits traits;  // stated in converted-cost terms
  std::function<std::vector<double>(std::span<const double>)> cond_prob;
  std::function<std::vector<double>(std::mt19937_64&)> draw_x;
  std::function<double(std::span<const double>)> pdf;
  std::function<double(std::span<const double>, std::span<const double>)>
      box_mass_fn;
  std::vector<std::vector<double>> probe_points;
  std::vector<double> probe_scales;
  std::vector<std::function<CheckResult(std::mt19937_64&)>> structural_checks;
};

// Misclassification costs c(y) = 1{y != Y}: expected cost 1 - P(Y=y|x),
// noisy law draws Y from cond_prob and emits the indicator vector.
Problem convert_classification(const LabelProblem& lp);

// Binary linear conditional law P(Y=1|x) = 0.8 - 0.6 x0, uniform marginal.
LabelProblem make_classification_ramp(int dim);

// ---- hard instance -----------------------------------------------------

// Bump-family binary classification instance: a packing of m bumps of
// scale r inside B(xbar, r_bar), a tie region A1 of mass tau, and a
// remote mass anchor A2 near the (1,...,1) corner. The packing is greedy
// farthest-point (a 2-approximation), so bump counts near the theoretical
// maximum for the ball may be rejected as infeasible; the defaults leave
// a factor-2 margin.
struct HardInstanceParams {
  int dim = 1;
  double alpha = 1.0;
  double beta = 1.0;
  double holder_L = 2.0;  // must be > 1
  double r_bar = 1.0 / 128;
  double r = 1.0 / 512;
  int num_bumps = 4;       // m
  double bump_mass = -1;   // w; -1 selects r^(alpha*beta) / m
  double tau = 0.0;
  double c0 = -1;  // -1 selects min(1/(12L), (1/(4L))^(beta/d))
  double c1 = -1;  // -1 selects min(0.9, 2*c0)
  double c2 = -1;  // -1 selects 1/(12L)
  std::vector<int> sigma;        // Rademacher signs; empty -> from sigma_seed
  std::uint64_t sigma_seed = 1;
  std::uint64_t packing_seed = 1;
};

struct HardInstance {
  HardInstanceParams params;  // with defaults resolved
  std::vector<std::vector<double>> centers;
  std::vector<int> sigma;
  double r_star = 0;        // max_i ||x_i - xbar|| + r/2
  std::vector<double> anchor;
  double annulus_width = 0;  // c0 * r^(alpha*beta/d)
  double bump_amp = 0;       // (c2 / d^(d/2beta)) * L * r^alpha
  double outer_level = 0;    // (L / d^(d/2beta)) * c0^(d/beta) * r^alpha
  double mass_bumps = 0, mass_a1 = 0, mass_a2 = 0;
  double vol_bump = 0, vol_a1 = 0, vol_a2 = 0;  // Lebesgue volumes

  double eta(std::span<const double> x) const;  // P(Y = 1 | x)
  double density(std::span<const double> x) const;
  std::vector<double> draw(std::mt19937_64& rng) const;
};

// Realize the geometry: greedy farthest-point packing (deterministic given
// packing_seed), r_star, corner anchor, masses. Throws ProblemError on
// structural infeasibility (mass budget, packing size, region overlap,
// eta leaving [0,1], alpha*beta > d). Magnitude conditions on c0/c2 are
// deliberately NOT enforced here; validate_problem's Holder check is the
// enforcement point, so deliberately broken constants are observable.
HardInstance build_hard_instance(const HardInstanceParams& params);

LabelProblem hard_instance_label_problem(const HardInstance& hi);

Problem make_hard_instance(const HardInstanceParams& params);

// ---- validation --------------------------------------------------------

struct ValidateOptions {
  std::size_t pairs = 100000;       // Holder pair count (global)
  std::size_t local_pairs = 500;    // per probe point and scale
  std::size_t draws = 100000;       // margin / mass sample count
  double holder_tol = 1e-9;
  double mass_tol = 1e-3;
};

// Generic checks (Holder pairs, margin envelope, density bounds, total
// mass) plus the problem's structural checks. Deterministic given seed.
std::vector<CheckResult> validate_problem(const Problem& p,
                                          std::uint64_t seed,
                                          const ValidateOptions& opt = {});

}  // namespace csal
