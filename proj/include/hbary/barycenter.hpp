#pragma once

#include <vector>

#include "hbary/cost.hpp"
#include "hbary/errors.hpp"
#include "hbary/geometry.hpp"

namespace hbary {

struct Configuration {
  std::vector<Point> points;
  std::vector<double> weights;
};

// Throws InvalidArgument for fewer than two points, non-positive weights or weights not summing
// to 1 within 1e-12, and ChartMembershipError for invalid points.
void validate_configuration(const Chart& chart, const Configuration& config);

struct BarycenterOptions {
  // Quarantined profiles (h'(0) > 0) are refused unless this is set.
  bool allow_counterexample = false;
  // Multiplies the residual tolerance.
  double tol_scale = 1.0;
  // Lattice points per axis of the coarse grid; 0 picks a size from the dimension.
  int grid_per_dim = 0;
  // Number of best grid points used as extra descent seeds.
  int grid_seeds = 3;
};

struct BarycenterSolution {
  Point z;
  double value = 0.0;
  double grad_residual = 0.0;
  // injectivity radius - d(z, x_i), +inf off the sphere.
  std::vector<double> cut_margins;
  // Other local minimizers whose value is within the tie gap of the returned one.
  std::vector<Point> alternates;
  int iterations = 0;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, BarycenterSolution best)
      : Error(what), best_(std::move(best)) {}
  const BarycenterSolution& best() const { return best_; }

 private:
  BarycenterSolution best_;
};

// Phi(y) = sum_i lambda_i h(d(y, x_i)).
double objective_phi(const Chart& chart, const CostProfile& profile, const Configuration& config,
                     const Point& y);

// |sum_i lambda_i grad_z h(d(z, x_i))| with the terms of coinciding points set to 0.
double first_order_residual(const Chart& chart, const CostProfile& profile,
                            const Configuration& config, const Point& z);

// Distance from 0 to the subdifferential of Phi at z. Equals first_order_residual for profiles
// with h'(0) = 0; for quarantined profiles each collision contributes a ball of radius
// lambda_i h'(0+).
double subgradient_residual(const Chart& chart, const CostProfile& profile,
                            const Configuration& config, const Point& z);

// Global minimizer of Phi: multi-start Riemannian descent seeded by the configuration points
// and the best points of a coarse grid over the coercivity ball.
BarycenterSolution solve_barycenter(const Chart& chart, const CostProfile& profile,
                                    const Configuration& config,
                                    const BarycenterOptions& options = {});

// min_y Phi(y).
double barycenter_cost(const Chart& chart, const CostProfile& profile, const Configuration& config,
                       const BarycenterOptions& options = {});

struct SharedBarycenterCase {
  Configuration config;
  double grid_minimizer = 0.0;
  double grid_value = 0.0;
  // One-sided derivatives of Phi at 0: the subdifferential is [left, right].
  double left_derivative = 0.0;
  double right_derivative = 0.0;
  // Barycenter of the same configuration under h(t) = t^2/2.
  double quadratic_barycenter = 0.0;
};

struct SharedBarycenterReport {
  std::vector<SharedBarycenterCase> cases;
  double shared_point = 0.0;
  bool shared = false;
};

// Two distinct configurations on R with one common barycenter under h(t) = t^2 + t.
// The grid covers [-2, 2] with `grid_points` samples.
SharedBarycenterReport counterexample_shared_barycenter(int grid_points = 100001);

}  // namespace hbary
