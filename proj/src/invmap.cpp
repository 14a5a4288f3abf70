#include "hbary/invmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

#include "hbary/errors.hpp"
#include "hbary/sampling.hpp"

namespace hbary {

Tangent grad_cost(const Chart& chart, const CostProfile& profile, const Point& z, const Point& x) {
  const double r = chart.dist(z, x);
  if (r == 0.0) {
    if (!profile.origin().admissible()) {
      throw DiagonalError("cost gradient is undefined at a collision for this profile");
    }
    return Tangent::Zero(z.size());
  }
  return profile.deriv(r) * chart.grad_dist(z, x);
}

Eigen::MatrixXd hess_cost(const CostProfile& profile, const Chart& chart, const Point& z,
                          const Point& x) {
  const int m = chart.dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  const double r = chart.dist(z, x);
  if (r == 0.0) {
    if (!profile.origin().is_c2()) {
      throw DiagonalError("cost Hessian at a collision needs a C^2 origin");
    }
    return profile.origin().h2_at_zero * id;
  }
  const Eigen::VectorXd n = chart.to_frame(z, chart.grad_dist(z, x));
  const Eigen::MatrixXd radial = n * n.transpose();
  return profile.second_deriv(r) * radial +
         profile.deriv(r) * chart.hess_tangential_factor(r) * (id - radial);
}

void AnchorSlice::validate() const {
  if (anchors.empty()) throw InvalidArgument("anchor slice needs at least one anchor");
  if (weights.size() != anchors.size() + 1) {
    throw InvalidArgument("anchor slice needs one weight per configuration point");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidArgument("weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("weights must sum to 1");
  for (const auto& a : anchors) chart.validate(a);
}

Tangent anchor_field(const AnchorSlice& slice, const Point& z) {
  Tangent v = Tangent::Zero(z.size());
  for (std::size_t i = 0; i < slice.anchors.size(); ++i) {
    v -= slice.weights[i + 1] * grad_cost(slice.chart, slice.profile, z, slice.anchors[i]);
  }
  return v / slice.weights[0];
}

Point inverse_map(const AnchorSlice& slice, const Point& z) {
  const Tangent v = anchor_field(slice, z);
  const double n = slice.chart.norm(z, v);
  if (n == 0.0) return z;
  if (n > slice.profile.deriv(slice.profile.domain_max())) {
    throw InvDerivOverflow("anchor field exceeds h'(domain_max)");
  }
  const double t = slice.profile.inv_deriv(n);
  return slice.chart.exp(z, (-t / n) * v);
}

CollisionLimitReport hessian_collision_limit_check(const CostProfile& profile, const Chart& chart,
                                                   const Point& x, const std::vector<double>& radii,
                                                   std::uint64_t seed, int directions) {
  if (!profile.origin().is_c2()) {
    throw InvalidArgument("collision limit check needs a profile with a C^2 origin");
  }
  if (radii.size() < 2) throw InvalidArgument("collision limit check needs at least two radii");
  chart.validate(x);
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> dirs;
  for (int k = 0; k < directions; ++k) dirs.push_back(random_unit(rng, chart.dim()));

  CollisionLimitReport rep;
  rep.radii = radii;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(chart.dim(), chart.dim());
  for (double r : radii) {
    if (!(r > 0.0)) throw InvalidArgument("collision radii must be positive");
    double worst = 0.0;
    for (const auto& u : dirs) {
      const Point z = chart.exp(x, chart.from_frame(x, r * u));
      const Eigen::MatrixXd dev = hess_cost(profile, chart, z, x) - profile.origin().h2_at_zero * id;
      worst = std::max(worst, dev.operatorNorm());
    }
    rep.deviations.push_back(worst);
    rep.constant = std::max(rep.constant, worst / r);
  }

  // Sorted by decreasing radius the deviations must not grow.
  std::vector<std::size_t> order(radii.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return radii[a] > radii[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (rep.deviations[order[k]] > rep.deviations[order[k - 1]] * (1.0 + 1e-12)) {
      rep.decreasing = false;
    }
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(rep.deviations[i] > 0.0)) continue;
    const double lx = std::log(radii[i]);
    const double ly = std::log(rep.deviations[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt >= 2) rep.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return rep;
}

std::string to_string(ProbeRegime regime) {
  return regime == ProbeRegime::collision_free ? "omega_alpha" : "omega_1_alpha";
}

std::string ProbeReport::to_json() const {
  nlohmann::ordered_json j;
  j["alpha"] = alpha;
  j["regime"] = to_string(regime);
  j["constant"] = constant;
  j["n_pairs"] = n_pairs;
  j["seed"] = seed;
  return j.dump();
}

ProbeReport lipschitz_probe(const AnchorSlice& slice, const Ball& region, double alpha, int n_pairs,
                            ProbeRegime regime, std::uint64_t seed) {
  slice.validate();
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be non-negative");
  if (n_pairs < 1) throw InvalidArgument("probe needs at least one pair");
  if (!(region.radius > 0.0)) throw InvalidArgument("probe region needs a positive radius");
  const Chart& chart = slice.chart;
  chart.validate(region.center);

  const double v_floor = alpha > 0.0 ? slice.profile.deriv(alpha) : 0.0;
  auto admissible = [&](const Point& z) {
    if (regime == ProbeRegime::collision_free) {
      for (const auto& a : slice.anchors) {
        if (chart.dist(z, a) <= alpha) return false;
      }
    }
    return chart.norm(z, anchor_field(slice, z)) >= v_floor;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double diameter = 2.0 * region.radius;
  const double lo = std::min(1e-4, 0.5 * diameter);
  ProbeReport rep;
  rep.alpha = alpha;
  rep.regime = regime;
  rep.seed = seed;
  rep.min_pair_distance = std::numeric_limits<double>::infinity();

  const long budget = 200L * n_pairs + 1000;
  long attempts = 0;
  while (rep.n_pairs < n_pairs && attempts < budget) {
    ++attempts;
    try {
      const Point z = sample_ball(chart, region, rng);
      if (!admissible(z)) continue;
      const double s = lo * std::pow(diameter / lo, unif(rng));
      const Eigen::VectorXd u = random_unit(rng, chart.dim());
      const Point w = chart.exp(z, chart.from_frame(z, s * u));
      if (chart.dist(region.center, w) > region.radius || !admissible(w)) continue;
      const double d = chart.dist(z, w);
      if (d == 0.0) continue;
      const double ratio = chart.dist(inverse_map(slice, z), inverse_map(slice, w)) / d;
      rep.constant = std::max(rep.constant, ratio);
      rep.min_pair_distance = std::min(rep.min_pair_distance, d);
      ++rep.n_pairs;
    } catch (const CutLocusError&) {
      continue;
    }
  }
  if (rep.n_pairs < n_pairs) {
    std::ostringstream os;
    os << "probe region admits only " << rep.n_pairs << " of " << n_pairs
       << " pairs at alpha=" << alpha;
    throw RegionViolation(os.str());
  }
  return rep;
}

}  // namespace hbary
