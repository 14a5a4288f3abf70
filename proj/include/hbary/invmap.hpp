#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hbary/cost.hpp"
#include "hbary/geometry.hpp"

namespace hbary {

// Gradient in z of h(d(z, x)). Zero at z == x for profiles with h'(0) = 0.
// Throws DiagonalError at z == x for a quarantined profile, CutLocusError near the cut locus.
Tangent grad_cost(const Chart& chart, const CostProfile& profile, const Point& z, const Point& x);

// Hessian in z of h(d(z, x)) in the orthonormal frame at z:
//   h''(r) n n^T + h'(r) k(r) (I - n n^T),  n the unit radial direction.
// At z == x returns h''(0) I when the origin is C^2, otherwise throws DiagonalError.
Eigen::MatrixXd hess_cost(const CostProfile& profile, const Chart& chart, const Point& z,
                          const Point& x);

// The configuration with its first point removed: anchors x_2..x_n and all n weights.
struct AnchorSlice {
  Chart chart;
  CostProfile profile;
  std::vector<Point> anchors;
  std::vector<double> weights;  // lambda_1..lambda_n

  void validate() const;
};

// V(z) = -(1/lambda_1) sum_{i>=2} lambda_i grad_z h(d(z, x_i)).
Tangent anchor_field(const AnchorSlice& slice, const Point& z);

// F(z) = exp_z(-(h')^{-1}(|V|) V/|V|), and F(z) = z when V(z) = 0.
Point inverse_map(const AnchorSlice& slice, const Point& z);

struct CollisionLimitReport {
  std::vector<double> radii;
  std::vector<double> deviations;  // max_u |hess_cost(exp_x(r u), x) - h''(0) I|
  double slope = 0.0;              // least squares slope of log deviation against log r
  double constant = 0.0;           // max deviation / r
  bool decreasing = true;
};

// Requires a C^2 origin; throws InvalidArgument otherwise.
CollisionLimitReport hessian_collision_limit_check(const CostProfile& profile, const Chart& chart,
                                                   const Point& x, const std::vector<double>& radii,
                                                   std::uint64_t seed = 1, int directions = 16);

// Omega_alpha keeps every sample farther than alpha from all anchors and from x_1
// (through |V| >= h'(alpha)); Omega_{1,alpha} only imposes the |V| condition.
enum class ProbeRegime { collision_free, collision_allowed };

std::string to_string(ProbeRegime regime);

struct ProbeReport {
  double alpha = 0.0;
  ProbeRegime regime = ProbeRegime::collision_free;
  double constant = 0.0;
  int n_pairs = 0;
  std::uint64_t seed = 0;
  double min_pair_distance = 0.0;

  std::string to_json() const;
};

// Largest ratio d(F(z), F(z')) / d(z, z') over sampled pairs in `region`. Pair distances are
// log-uniform in [1e-4, diameter]. Throws RegionViolation when the regime leaves too few
// admissible samples in the region.
ProbeReport lipschitz_probe(const AnchorSlice& slice, const Ball& region, double alpha, int n_pairs,
                            ProbeRegime regime, std::uint64_t seed);

}  // namespace hbary
