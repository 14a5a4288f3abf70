#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "hbary/barycenter.hpp"
#include "hbary/errors.hpp"
#include "hbary/sampling.hpp"
#include "oracles.hpp"

using namespace hbary;

namespace {

Point v1(double a) { return Point::Constant(1, a); }

}  // namespace

TEST_CASE("objective_phi") {
  const Chart line = Chart::euclidean(1);
  const Configuration c{{v1(0), v1(2)}, {0.5, 0.5}};
  CHECK(objective_phi(line, CostProfile::power(2.0), c, v1(1)) == doctest::Approx(0.5));
  const Configuration same{{v1(4), v1(4)}, {0.3, 0.7}};
  CHECK(objective_phi(line, CostProfile::power(1.5), same, v1(4)) == 0.0);

  const Chart s = Chart::sphere(2);
  std::mt19937_64 rng(4);
  Configuration sc;
  for (int k = 0; k < 4; ++k) sc.points.push_back(random_point(s, rng));
  sc.weights = {0.1, 0.2, 0.3, 0.4};
  const Point y = random_point(s, rng);
  double direct = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double d = std::acos(std::clamp(sc.points[k].dot(y), -1.0, 1.0));
    direct += sc.weights[k] * std::pow(d, 3.0) / 3.0;
  }
  CHECK(objective_phi(s, CostProfile::power(3.0), sc, y) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("validate_configuration") {
  const Chart line = Chart::euclidean(1);
  CHECK_THROWS_AS(validate_configuration(line, {{v1(0)}, {1.0}}), InvalidArgument);
  CHECK_THROWS_AS(validate_configuration(line, {{v1(0), v1(1)}, {0.5, 0.6}}), InvalidArgument);
  CHECK_THROWS_AS(validate_configuration(line, {{v1(0), v1(1)}, {1.0, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(validate_configuration(Chart::sphere(2), {{Eigen::Vector3d(1, 1, 0), Eigen::Vector3d(1, 0, 0)}, {0.5, 0.5}}),
                  ChartMembershipError);
}

TEST_CASE("euclidean barycenters") {
  const Chart line = Chart::euclidean(1);
  const auto sol = solve_barycenter(line, CostProfile::power(2.0), {{v1(0), v1(4)}, {0.25, 0.75}});
  CHECK(sol.z[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sol.grad_residual < 1e-8);
  CHECK(std::isinf(sol.cut_margins[0]));
  for (double p : {1.3, 1.5, 2.0, 3.0, 5.0}) {
    const auto s = solve_barycenter(line, CostProfile::power(p), {{v1(-1), v1(1)}, {0.5, 0.5}});
    CHECK(std::abs(s.z[0]) < 1e-8);
  }
  // Weighted mean in the plane.
  const Chart plane = Chart::euclidean(2);
  const Configuration c{{Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 0), Eigen::Vector2d(0, 6)},
                        {0.5, 0.25, 0.25}};
  const auto s = solve_barycenter(plane, CostProfile::power(2.0), c);
  CHECK((s.z - Eigen::Vector2d(0.75, 1.5)).norm() < 1e-10);
}

TEST_CASE("sphere midpoint by grid search along the geodesic") {
  const Chart s = Chart::sphere(2);
  const CostProfile h = CostProfile::power(1.5);
  const Point a(Eigen::Vector3d(1, 0, 0));
  const Point b = s.exp(a, Eigen::Vector3d(0, 1, 0));  // distance 1
  const Configuration c{{a, b}, {0.5, 0.5}};
  const auto sol = solve_barycenter(s, h, c);
  const Tangent dir = s.log(a, b);
  const double t = oracle::grid_argmin(
      [&](double t) { return objective_phi(s, h, c, s.exp(a, t * dir)); }, 0.0, 1.0, 10001);
  CHECK(s.dist(sol.z, s.exp(a, t * dir)) < 2e-4);
  CHECK(s.dist(sol.z, s.exp(a, 0.5 * dir)) < 1e-8);
  for (double m : sol.cut_margins) CHECK(m > 0.0);
}

TEST_CASE("hyperbolic barycenter is a critical point") {
  const Chart h = Chart::hyperbolic();
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    Configuration c;
    for (int k = 0; k < 3; ++k) c.points.push_back(random_point(h, rng));
    c.weights = {0.2, 0.3, 0.5};
    const auto sol = solve_barycenter(h, CostProfile::power(2.0), c);
    CHECK(first_order_residual(h, CostProfile::power(2.0), c, sol.z) < 1e-8);
    // No grid point does better.
    for (const auto& p : h.ball_grid({sol.z, 0.5}, 9)) {
      CHECK(objective_phi(h, CostProfile::power(2.0), c, p) >= sol.value - 1e-12);
    }
  }
}

TEST_CASE("barycenter_cost") {
  const Chart line = Chart::euclidean(1);
  CHECK(barycenter_cost(line, CostProfile::power(2.0), {{v1(0), v1(2)}, {0.5, 0.5}}) ==
        doctest::Approx(0.5));
  CHECK(barycenter_cost(line, CostProfile::power(2.0), {{v1(3), v1(3)}, {0.5, 0.5}}) ==
        doctest::Approx(0.0));
  // min_y y^2/4 + (y - d)^2/4 = d^2/8.
  for (double d : {0.5, 1.0, 4.0}) {
    CHECK(barycenter_cost(line, CostProfile::power(2.0), {{v1(0), v1(d)}, {0.5, 0.5}}) ==
          doctest::Approx(d * d / 8.0));
  }
}

TEST_CASE("first_order_residual") {
  const Chart line = Chart::euclidean(1);
  const Configuration c{{v1(0), v1(2)}, {0.5, 0.5}};
  CHECK(first_order_residual(line, CostProfile::power(2.0), c, v1(1)) == doctest::Approx(0.0));
  CHECK(first_order_residual(line, CostProfile::power(2.0), c, v1(0)) == doctest::Approx(1.0));

  const Chart s = Chart::sphere(2);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    Configuration sc;
    for (int k = 0; k < 3; ++k) sc.points.push_back(random_point(s, rng));
    sc.weights = {0.3, 0.3, 0.4};
    const CostProfile h = CostProfile::power(t % 2 ? 2.0 : 3.0);
    const auto sol = solve_barycenter(s, h, sc);
    CHECK(first_order_residual(s, h, sc, sol.z) <= 1e-7);
    for (double m : sol.cut_margins) CHECK(m > 1e-3);
  }
}

TEST_CASE("singular profile with a barycenter on a data point") {
  // p = 1.5 with a dominant weight: the barycenter sits on the heavy point.
  const Chart line = Chart::euclidean(1);
  const CostProfile h = CostProfile::power(1.5);
  const Configuration c{{v1(0), v1(1)}, {0.9, 0.1}};
  const auto sol = solve_barycenter(line, h, c);
  const double grid = oracle::grid_argmin([&](double y) { return objective_phi(line, h, c, v1(y)); },
                                          -0.5, 1.5, 200001);
  CHECK(sol.z[0] == doctest::Approx(grid).epsilon(1e-4));
  CHECK(sol.value <= objective_phi(line, h, c, v1(grid)) + 1e-12);
}

TEST_CASE("counterexample profile is quarantined") {
  const Chart line = Chart::euclidean(1);
  const Configuration c{{v1(0), v1(1)}, {0.8, 0.2}};
  CHECK_THROWS_AS(solve_barycenter(line, CostProfile::counterexample(), c), ProfileViolatesAssumptions);
  BarycenterOptions opt;
  opt.allow_counterexample = true;
  const auto sol = solve_barycenter(line, CostProfile::counterexample(), c, opt);
  CHECK(std::abs(sol.z[0]) < 1e-9);
  CHECK(subgradient_residual(line, CostProfile::counterexample(), c, sol.z) < 1e-12);
}

TEST_CASE("shared barycenter report") {
  const SharedBarycenterReport rep = counterexample_shared_barycenter();
  REQUIRE(rep.cases.size() == 2);
  CHECK(rep.shared);
  CHECK(rep.shared_point == doctest::Approx(0.0));
  // One-sided derivatives of 0.8 h(|y|) + 0.2 h(|a - y|) at 0 with h(t) = t^2 + t.
  const double expect_left[2] = {-1.4, -1.2};
  const double expect_right[2] = {0.2, 0.4};
  const double quad[2] = {0.2, 0.1};
  for (int c = 0; c < 2; ++c) {
    const auto& cs = rep.cases[c];
    const double a = cs.config.points[1][0];
    auto f = [a](double y) {
      auto h = [](double t) { return t * t + t; };
      return 0.8 * h(std::abs(y)) + 0.2 * h(std::abs(a - y));
    };
    const double step = 1e-7;
    CHECK((f(step) - f(0.0)) / step == doctest::Approx(cs.right_derivative).epsilon(1e-5));
    CHECK((f(0.0) - f(-step)) / step == doctest::Approx(cs.left_derivative).epsilon(1e-5));
    CHECK(cs.left_derivative == doctest::Approx(expect_left[c]));
    CHECK(cs.right_derivative == doctest::Approx(expect_right[c]));
    CHECK(std::abs(cs.grid_minimizer) <= 1e-4);
    CHECK(cs.quadratic_barycenter == doctest::Approx(quad[c]).epsilon(1e-12));
  }
}

TEST_CASE("barycenter cost is continuous in the configuration") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(0.0, 1e-3);
  for (const Chart& chart : {Chart::euclidean(2), Chart::sphere(2), Chart::hyperbolic()}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const CostProfile h = CostProfile::power(p);
      const Point c = random_point(chart, rng);
      for (int t = 0; t < 5; ++t) {
        Configuration config;
        for (int k = 0; k < 3; ++k) config.points.push_back(sample_ball(chart, {c, 0.6}, rng));
        config.weights = {0.2, 0.3, 0.5};
        Configuration moved = config;
        double delta = 0.0, diam = 0.0;
        for (auto& x : moved.points) {
          const double d = unif(rng);
          x = chart.exp(x, random_tangent(chart, x, d, rng));
          delta = std::max(delta, d);
        }
        for (const auto& a : moved.points) {
          for (const auto& b : moved.points) diam = std::max(diam, chart.dist(a, b));
        }
        for (const auto& a : config.points) {
          for (const auto& b : config.points) diam = std::max(diam, chart.dist(a, b));
        }
        // L_h = max h' over the instance diameter.
        const double lh = h.deriv(diam + delta);
        const double gap = std::abs(barycenter_cost(chart, h, moved) - barycenter_cost(chart, h, config));
        CHECK(gap <= lh * delta + 1e-12);
      }
    }
  }
}
