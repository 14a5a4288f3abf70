#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "hbary/barycenter.hpp"
#include "hbary/cost.hpp"
#include "hbary/geometry.hpp"

namespace hbary {

struct DiscreteMeasure {
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  // Weights positive and normalized within 1e-12, points valid and pairwise distinct (1e-10).
  void validate(const Chart& chart) const;
  static DiscreteMeasure dirac(const Point& x) { return {{x}, {1.0}}; }
};

struct PlanAtom {
  std::vector<int> idx;
  double mass = 0.0;
};

struct MultiPlan {
  std::vector<PlanAtom> support;  // positive-mass tuples in lexicographic order
  std::vector<DiscreteMeasure> marginals;
  double total_cost = 0.0;
  // One potential per marginal: sum_k phi_k(i_k) <= C(i) with equality on the support.
  std::vector<Eigen::VectorXd> potentials;
  // Smallest reduced cost among non-basic tuples; a positive value certifies a unique plan.
  double min_reduced_cost = 0.0;

  bool unique(double tol) const { return min_reduced_cost > tol; }
  // max over marginals and atoms of |projected mass - weight|.
  double marginal_error() const;
};

// Kantorovich potentials of a two-marginal problem: psi on the source, xi on the target.
struct Potential {
  Eigen::VectorXd psi;
  Eigen::VectorXd xi;
};

struct Ot2Result {
  MultiPlan plan;
  Potential potential;
};

// Exact optimal transport for c(x, y) = h(d(x, y)).
Ot2Result solve_ot2(const Chart& chart, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                    const CostProfile& profile, const Tolerances& tol = default_tolerances());

struct MmotOptions {
  std::size_t max_tuples = 100000;
  BarycenterOptions barycenter;
  int workers = 1;
};

using TupleCost = std::function<double(const std::vector<int>&)>;

// Barycenter cost of the configuration picked by an index tuple.
TupleCost barycenter_tuple_cost(const Chart& chart, const CostProfile& profile,
                                const std::vector<DiscreteMeasure>& measures,
                                const std::vector<double>& weights,
                                const BarycenterOptions& options = {});

Configuration tuple_configuration(const std::vector<DiscreteMeasure>& measures,
                                  const std::vector<double>& weights, const std::vector<int>& idx);

// Multi-marginal problem with the barycenter cost. Throws SizeLimit when the number of tuples
// exceeds options.max_tuples and ProfileViolatesAssumptions for quarantined profiles.
MultiPlan solve_mmot(const Chart& chart, const std::vector<DiscreteMeasure>& measures,
                     const std::vector<double>& weights, const CostProfile& profile,
                     const MmotOptions& options = {});

// Barycenters of every support tuple, in support order.
std::vector<BarycenterSolution> support_barycenters(const Chart& chart, const CostProfile& profile,
                                                    const MultiPlan& plan,
                                                    const std::vector<double>& weights,
                                                    const BarycenterOptions& options = {});

struct CTransform {
  Eigen::VectorXd values;
  // Indices of the minimising targets for each source point (ties within the tie tolerance).
  std::vector<std::vector<int>> active;
};

// psi(x) = min_y c(x, y) - xi(y). Throws InvalidArgument for an empty target set.
CTransform c_transform(const Chart& chart, const CostProfile& profile,
                       const std::vector<Point>& targets, const Eigen::VectorXd& xi,
                       const std::vector<Point>& sources, double tie_tol = 1e-9);

struct MongeImage {
  Point image;
  // False when two targets are active: psi is not differentiable at x.
  bool differentiable = true;
  int active = -1;
};

// T(x) = exp_x(-(h')^{-1}(|grad psi|) grad psi / |grad psi|), with grad psi taken from the
// active target of the c-transform, and T(x) = x when the gradient vanishes.
MongeImage monge_map_from_potential(const Chart& chart, const CostProfile& profile,
                                    const std::vector<Point>& targets, const Eigen::VectorXd& xi,
                                    const Point& x, double tie_tol = 1e-9);

// The unique partner of source atom `row` in a two-marginal plan, or nullopt when its mass
// splits between several targets.
std::optional<int> plan_partner(const MultiPlan& plan, int row);

// max over pairs of support tuples of C(x) + C(x~) - C(x_1, x~_2..) - C(x~_1, x_2..), floored at 0.
double check_cyclical_monotonicity(const MultiPlan& plan, const TupleCost& cost);

struct InjectivityWitness {
  std::size_t first = 0;
  std::size_t second = 0;
  double barycenter_distance = 0.0;
  double config_distance = 0.0;
};

struct InjectivityReport {
  std::size_t pairs_checked = 0;
  std::vector<InjectivityWitness> violations;
  bool ok() const { return violations.empty(); }
};

// Pairs of support tuples whose barycenters coincide within bary_tol must share every marginal
// point within config_tol.
InjectivityReport check_injectivity(const Chart& chart, const MultiPlan& plan,
                                    const std::vector<BarycenterSolution>& solutions,
                                    double bary_tol = 1e-6, double config_tol = 1e-5);

}  // namespace hbary
