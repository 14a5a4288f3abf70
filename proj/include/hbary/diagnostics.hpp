#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "hbary/barycenter.hpp"
#include "hbary/cost.hpp"
#include "hbary/geometry.hpp"
#include "hbary/transport.hpp"

namespace hbary {

// A marginal given either as the normalized volume measure of a geodesic ball or as atoms.
struct MeasureSpec {
  enum class Kind { uniform_ball, atoms };
  Kind kind = Kind::atoms;
  Ball ball;
  DiscreteMeasure atoms;

  static MeasureSpec uniform_ball(Point center, double radius) {
    MeasureSpec s;
    s.kind = Kind::uniform_ball;
    s.ball = {std::move(center), radius};
    return s;
  }
  static MeasureSpec atomic(DiscreteMeasure m) {
    MeasureSpec s;
    s.kind = Kind::atoms;
    s.atoms = std::move(m);
    return s;
  }
};

// Equal-mass quantization with 4^level atoms. Intervals are cut into equal pieces with atoms at
// the centers; two-dimensional balls use 2^level rings of equal mass increments with 2k+1
// sectors in ring k. Atom lists are returned unchanged.
DiscreteMeasure discretize(const Chart& chart, const MeasureSpec& spec, int level);

// Merges atoms closer than tol, summing their weights.
DiscreteMeasure merge_atoms(const Chart& chart, const DiscreteMeasure& m, double tol = 1e-10);

// Lower estimate of the bounded-Lipschitz distance: the largest gap of the integrals of a fixed
// family of clipped distance functions x -> clamp(d(x, p) - s, -1, 1).
class BlDictionary {
 public:
  BlDictionary(const Chart& chart, const Ball& region, int count = 200, std::uint64_t seed = 7);
  double distance(const DiscreteMeasure& a, const DiscreteMeasure& b) const;
  Eigen::VectorXd integrals(const DiscreteMeasure& m) const;

 private:
  Chart chart_;
  std::vector<Point> anchors_;
  std::vector<double> shifts_;
};

// Smallest ball around the weighted centroid containing every atom (radius scaled by 1.0001).
Ball support_ball(const Chart& chart, const DiscreteMeasure& m, double min_radius = 0.0);

struct EClassVerdict {
  bool pass = false;
  double mass = 0.0;         // mass carried by the densest cells of total volume delta
  double volume = 0.0;
  std::size_t worst_cell = 0;
  double worst_density = 0.0;
  std::size_t cells = 0;
};

// Greedy estimate of "Vol(N) < delta implies mu(N) <= epsilon" on a cell partition: the densest
// cells are accumulated (the last one fractionally) up to volume delta. Throws InvalidArgument
// when a cell is not smaller than delta.
EClassVerdict e_class_estimate(const Chart& chart, const DiscreteMeasure& m,
                               const CellPartition& cells, double epsilon, double delta);

// Same, on the coarsest partition of the support ball whose cells are all smaller than delta.
EClassVerdict e_class_estimate(const Chart& chart, const DiscreteMeasure& m, double epsilon,
                               double delta);

// The barycenter measure B#gamma: one atom per support tuple carrying its mass.
DiscreteMeasure barycenter_measure(const MultiPlan& plan,
                                   const std::vector<BarycenterSolution>& solutions);

// Plan mass on tuples whose barycenter lies within alpha of one of its points.
double collision_mass(const Chart& chart, const MultiPlan& plan,
                      const std::vector<BarycenterSolution>& solutions, double alpha);

struct ExperimentBase {
  Chart chart = Chart::euclidean(1);
  CostProfile profile = CostProfile::power(2.0);
  std::vector<MeasureSpec> measures;
  std::vector<double> weights;
  int levels = 5;
  std::size_t max_tuples = 2000000;
  int workers = 1;
  double tol_scale = 1.0;
  std::uint64_t seed = 1;
};

struct ConsistencySpec : ExperimentBase {
  // Optional analytic reference for the barycenter, compared by the BL dictionary.
  bool has_reference = false;
  MeasureSpec reference;
  int reference_level = 7;
};

struct ConsistencyRow {
  int level = 0;
  std::size_t atoms = 0;
  double cost = 0.0;
  double bl_to_final = 0.0;
  double bl_to_reference = std::numeric_limits<double>::quiet_NaN();
};

struct ConsistencyReport {
  std::vector<ConsistencyRow> rows;
  // Each BL column entry is at most `slack` times the previous one.
  bool monotone = false;
  double slack = 1.2;
};

// First marginal held at the finest level, the others discretized at levels 1..J.
ConsistencyReport consistency_experiment(const ConsistencySpec& spec);

struct AbsContinuitySpec : ExperimentBase {
  int which_case = 1;       // 1: C^2 origin, 2: all marginals diffuse
  int k_max = 4;            // epsilon ladder 2^-1 .. 2^-k_max
  double alpha = 0.2;       // probe exclusion radius
  int probe_pairs = 2000;
  int probe_anchors = 5;
};

struct LadderRow {
  int level = 0;
  int k = 0;
  double epsilon = 0.0;
  double delta_first = 0.0;  // calibrated on the first marginal
  double lipschitz = 0.0;
  double delta = 0.0;        // delta_first / L^m
  double mass = 0.0;
  // False when the discretized first marginal itself fails at every delta of the grid (its atoms
  // outweigh epsilon); such rows carry no verdict.
  bool resolved = true;
  bool pass = false;
};

struct AbsContinuityReport {
  std::vector<LadderRow> rows;
  double lipschitz = 0.0;
  bool final_pass = false;     // every row of the finest level passes
  bool resolved_pass = false;  // every resolved row of every level passes
};

// Throws InvalidArgument when the case preconditions fail (Case 1 needs a C^2 origin and a
// diffuse first marginal, Case 2 needs every marginal diffuse).
AbsContinuityReport abs_continuity_experiment(const AbsContinuitySpec& spec);

struct AnnulusPiece {
  DiscreteMeasure measure;  // renormalized
  double mass = 0.0;        // share of the original mass
  double inner = 0.0;
  double outer = 0.0;
};

// Splits the atoms into groups separated by empty shells: the distance range [0, max] is cut
// into `budget` shells and every maximal run of occupied shells becomes one piece, bounded by
// radii inside the empty shells.
std::vector<AnnulusPiece> annulus_decompose(const Chart& chart, const DiscreteMeasure& m,
                                            const Point& center, int budget = 64);

struct PlanPiece {
  MultiPlan plan;  // renormalized sub-plan
  double mass = 0.0;
};

// Same decomposition for a plan, by the distance of the first marginal point to `center`.
std::vector<PlanPiece> annulus_decompose(const Chart& chart, const MultiPlan& plan,
                                         const Point& center, int budget = 64);

}  // namespace hbary
