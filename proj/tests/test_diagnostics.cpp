#include "doctest.h"

#include <cmath>
#include <numbers>

#include "hbary/diagnostics.hpp"
#include "hbary/errors.hpp"

using namespace hbary;

namespace {

Point v1(double a) { return Point::Constant(1, a); }

}  // namespace

TEST_CASE("discretize") {
  const Chart line = Chart::euclidean(1);
  const DiscreteMeasure m = discretize(line, MeasureSpec::uniform_ball(v1(0.5), 0.5), 1);
  REQUIRE(m.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(m.points[i][0] == doctest::Approx(0.125 + 0.25 * i));
    CHECK(m.weights[i] == doctest::Approx(0.25));
  }
  const DiscreteMeasure atoms{{v1(1), v1(2)}, {0.4, 0.6}};
  for (int j : {0, 3, 7}) {
    const DiscreteMeasure d = discretize(line, MeasureSpec::atomic(atoms), j);
    CHECK(d.points == atoms.points);
    CHECK(d.weights == atoms.weights);
  }
  CHECK_THROWS_AS(discretize(line, MeasureSpec::uniform_ball(v1(0), 1.0), 13), InvalidArgument);

  // Sphere cap: 4^j atoms converging weakly.
  const Chart s = Chart::sphere(2);
  const MeasureSpec cap = MeasureSpec::uniform_ball(Eigen::Vector3d(0, 0, 1), 0.8);
  const DiscreteMeasure c3 = discretize(s, cap, 3);
  CHECK(c3.size() == 64);
  for (const auto& p : c3.points) CHECK(s.dist(p, Eigen::Vector3d(0, 0, 1)) <= 0.8);
  const DiscreteMeasure c1 = discretize(s, cap, 1), c5 = discretize(s, cap, 5), c7 = discretize(s, cap, 7);
  const BlDictionary dict(s, {Eigen::Vector3d(0, 0, 1), 1.0});
  CHECK(dict.distance(c5, c7) < dict.distance(c1, c7));
  CHECK(dict.distance(c7, c7) == 0.0);
}

TEST_CASE("ring quantization matches the cap mass profile") {
  // Mass within geodesic radius rho of the center equals the normalized cap area.
  const Chart s = Chart::sphere(2);
  const Point n = Eigen::Vector3d(0, 0, 1);
  const DiscreteMeasure m = discretize(s, MeasureSpec::uniform_ball(n, 1.0), 5);
  for (double rho : {0.3, 0.6, 0.9}) {
    double mass = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (s.dist(m.points[i], n) <= rho) mass += m.weights[i];
    }
    const double expected = (1.0 - std::cos(rho)) / (1.0 - std::cos(1.0));
    CHECK(std::abs(mass - expected) < 2.0 / 32);
  }
}

TEST_CASE("merge_atoms and support_ball") {
  const Chart line = Chart::euclidean(1);
  const DiscreteMeasure m{{v1(0), v1(1e-12), v1(2)}, {0.25, 0.25, 0.5}};
  const DiscreteMeasure merged = merge_atoms(line, m);
  REQUIRE(merged.size() == 2);
  CHECK(merged.weights[0] == doctest::Approx(0.5));
  const Ball b = support_ball(line, m);
  CHECK(b.center[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.radius == doctest::Approx(1.0001).epsilon(1e-9));
  CHECK(support_ball(line, DiscreteMeasure::dirac(v1(3))).radius == doctest::Approx(1e-3));
}

TEST_CASE("e_class_estimate") {
  const Chart line = Chart::euclidean(1);
  const DiscreteMeasure u = discretize(line, MeasureSpec::uniform_ball(v1(0.5), 0.5), 5);
  const CellPartition cells = uniform_cell_volumes(line, {v1(0.5), 0.5}, 64);
  const EClassVerdict v = e_class_estimate(line, u, cells, 0.1, 0.1);
  CHECK(v.pass);
  CHECK(v.mass == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(v.volume == doctest::Approx(0.1));
  CHECK_THROWS_AS(e_class_estimate(line, u, uniform_cell_volumes(line, {v1(0.5), 0.5}, 4), 0.1, 0.1),
                  InvalidArgument);
  // The automatic partition is not aligned with the atoms, so leave room above epsilon = delta.
  CHECK(e_class_estimate(line, u, 0.12, 0.1).pass);

  const DiscreteMeasure dirac = DiscreteMeasure::dirac(v1(0));
  for (double delta = 1.0; delta > 1e-6; delta /= 7.0) {
    const EClassVerdict d = e_class_estimate(line, dirac, 0.5, delta);
    CHECK_FALSE(d.pass);
    CHECK(d.mass == doctest::Approx(1.0));
  }
  const Chart plane = Chart::euclidean(2);
  for (double delta = 1.0; delta > 1e-4; delta /= 5.0) {
    CHECK_FALSE(e_class_estimate(plane, DiscreteMeasure::dirac(Eigen::Vector2d(1, 1)), 0.5, delta).pass);
  }
}

TEST_CASE("barycenter measure and collision mass") {
  const Chart line = Chart::euclidean(1);
  MultiPlan plan;
  plan.marginals = {DiscreteMeasure{{v1(0), v1(1)}, {0.5, 0.5}}, DiscreteMeasure::dirac(v1(4))};
  plan.support = {{{0, 0}, 0.5}, {{1, 0}, 0.5}};
  const auto sols = support_barycenters(line, CostProfile::power(2.0), plan, {0.5, 0.5});
  const DiscreteMeasure b = barycenter_measure(plan, sols);
  CHECK(b.points[0][0] == doctest::Approx(2.0));
  CHECK(b.points[1][0] == doctest::Approx(2.5));
  CHECK(collision_mass(line, plan, sols, 1.6) == doctest::Approx(0.5));
  CHECK(collision_mass(line, plan, sols, 0.1) == 0.0);
  CHECK_THROWS_AS(barycenter_measure(plan, {}), InvalidArgument);
}

TEST_CASE("consistency on atomic inputs is constant") {
  ConsistencySpec spec;
  spec.chart = Chart::euclidean(1);
  spec.profile = CostProfile::power(2.0);
  spec.measures = {MeasureSpec::atomic({{v1(0), v1(1)}, {0.5, 0.5}}), MeasureSpec::atomic({{v1(3)}, {1.0}})};
  spec.weights = {0.5, 0.5};
  spec.levels = 3;
  const ConsistencyReport rep = consistency_experiment(spec);
  REQUIRE(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    CHECK(r.bl_to_final == 0.0);
    CHECK(r.cost == doctest::Approx(rep.rows.front().cost));
  }
  CHECK(rep.monotone);
}

TEST_CASE("quadratic consistency ladder approaches the midpoint measure") {
  ConsistencySpec spec;
  spec.chart = Chart::euclidean(1);
  spec.profile = CostProfile::power(2.0);
  spec.measures = {MeasureSpec::uniform_ball(v1(0.5), 0.5), MeasureSpec::uniform_ball(v1(2.5), 0.5)};
  spec.weights = {0.5, 0.5};
  spec.levels = 3;
  spec.has_reference = true;
  spec.reference = MeasureSpec::uniform_ball(v1(1.5), 0.5);
  const ConsistencyReport rep = consistency_experiment(spec);
  CHECK(rep.monotone);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    CHECK(rep.rows[i].bl_to_reference < rep.rows[i - 1].bl_to_reference);
  }
  // Quadratic cost of the midpoint problem: W2^2 / 8 between uniform[0,1] and uniform[2,3] = 4/8.
  CHECK(rep.rows.back().cost == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("case 2 ladder on intervals and the exclusion witness") {
  AbsContinuitySpec spec;
  spec.chart = Chart::euclidean(1);
  spec.profile = CostProfile::power(1.5);
  spec.measures = {MeasureSpec::uniform_ball(v1(0.5), 0.5), MeasureSpec::uniform_ball(v1(2.5), 0.5)};
  spec.weights = {0.5, 0.5};
  spec.which_case = 2;
  spec.levels = 3;
  spec.k_max = 3;
  const AbsContinuityReport rep = abs_continuity_experiment(spec);
  CHECK(rep.final_pass);
  CHECK(rep.resolved_pass);
  CHECK(rep.lipschitz > 0.0);

  // Collision mass stays below twice the marginal mass of alpha-balls around the atoms.
  double prev = 1.0;
  for (int j = 1; j <= 4; ++j) {
    std::vector<DiscreteMeasure> ms = {discretize(spec.chart, spec.measures[0], j),
                                       discretize(spec.chart, spec.measures[1], j)};
    const MultiPlan plan = solve_mmot(spec.chart, ms, spec.weights, spec.profile);
    const auto sols = support_barycenters(spec.chart, spec.profile, plan, spec.weights);
    const double cm = collision_mass(spec.chart, plan, sols, 0.2);
    CHECK(cm <= prev + 1e-12);
    prev = cm;
  }
  CHECK(prev < 2.0 * 2 * 0.2);
}

TEST_CASE("experiment preconditions") {
  AbsContinuitySpec spec;
  spec.chart = Chart::euclidean(1);
  spec.profile = CostProfile::power(1.5);
  spec.measures = {MeasureSpec::uniform_ball(v1(0.5), 0.5), MeasureSpec::atomic(DiscreteMeasure::dirac(v1(3)))};
  spec.weights = {0.5, 0.5};
  spec.which_case = 1;
  CHECK_THROWS_AS(abs_continuity_experiment(spec), InvalidArgument);  // singular origin
  spec.which_case = 2;
  CHECK_THROWS_AS(abs_continuity_experiment(spec), InvalidArgument);  // atomic marginal
  spec.weights = {1.0};
  CHECK_THROWS_AS(abs_continuity_experiment(spec), InvalidArgument);
}

TEST_CASE("E-class closure surrogate on the Case 1 plane instance") {
  AbsContinuitySpec spec;
  spec.chart = Chart::euclidean(2);
  spec.profile = CostProfile::power(2.0);
  spec.measures = {MeasureSpec::uniform_ball(Eigen::Vector2d(0, 0), 1.0),
                   MeasureSpec::atomic(DiscreteMeasure::dirac(Eigen::Vector2d(3, 0)))};
  spec.weights = {0.5, 0.5};
  spec.levels = 4;
  const AbsContinuityReport rep = abs_continuity_experiment(spec);
  CHECK(rep.final_pass);
  // The barycenter is the disk of radius 1/2 around (1.5, 0): the inverse map has constant 2.
  CHECK(rep.lipschitz == doctest::Approx(2.0).epsilon(1e-9));
  bool all_resolved_pass = true;
  for (const auto& r : rep.rows) all_resolved_pass &= !r.resolved || r.pass;
  if (all_resolved_pass) {
    const DiscreteMeasure fine = discretize(spec.chart, spec.measures[0], 4);
    MultiPlan plan = solve_mmot(spec.chart, {fine, spec.measures[1].atoms}, spec.weights, spec.profile);
    const DiscreteMeasure bary = barycenter_measure(
        plan, support_barycenters(spec.chart, spec.profile, plan, spec.weights));
    for (const auto& r : rep.rows) {
      if (r.level == 4) CHECK(e_class_estimate(spec.chart, bary, r.epsilon, r.delta / 2).pass);
    }
  }
}

TEST_CASE("annulus decomposition") {
  const Chart plane = Chart::euclidean(2);
  const Point o = Eigen::Vector2d(0, 0);
  const DiscreteMeasure compact{{Eigen::Vector2d(0.1, 0), Eigen::Vector2d(0, 0.2)}, {0.5, 0.5}};
  const auto single = annulus_decompose(plane, compact, o, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0].mass == doctest::Approx(1.0));
  CHECK(single[0].measure.weights == compact.weights);

  DiscreteMeasure clusters;
  for (int i = 0; i < 3; ++i) {
    clusters.points.push_back(Eigen::Vector2d(0.1 * i, 0));
    clusters.weights.push_back(0.1);
  }
  for (int i = 0; i < 7; ++i) {
    clusters.points.push_back(Eigen::Vector2d(10 + 0.1 * i, 0));
    clusters.weights.push_back(0.1);
  }
  const auto two = annulus_decompose(plane, clusters, o);
  REQUIRE(two.size() == 2);
  CHECK(two[0].mass == doctest::Approx(0.3));
  CHECK(two[1].mass == doctest::Approx(0.7));
  CHECK(two[0].outer < two[1].inner);
  for (const auto& p : two) {
    double s = 0.0;
    for (double w : p.measure.weights) s += w;
    CHECK(s == doctest::Approx(1.0));
    // No atom sits on a boundary (radius 0 is the center, not a boundary).
    for (const auto& x : clusters.points) {
      if (p.inner > 0.0) CHECK(std::abs(x.norm() - p.inner) > 0.0);
      CHECK(std::abs(x.norm() - p.outer) > 0.0);
    }
  }

  MultiPlan plan;
  plan.marginals = {clusters, DiscreteMeasure::dirac(Eigen::Vector2d(5, 5))};
  for (int i = 0; i < 10; ++i) plan.support.push_back({{i, 0}, 0.1});
  const auto pieces = annulus_decompose(plane, plan, o);
  REQUIRE(pieces.size() == 2);
  CHECK(pieces[0].mass == doctest::Approx(0.3));
  CHECK(pieces[1].plan.marginals[0].size() == 7);
  CHECK(pieces[1].plan.marginal_error() < 1e-12);
}
