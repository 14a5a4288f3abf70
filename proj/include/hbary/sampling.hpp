#pragma once

#include <cmath>
#include <random>

#include "hbary/geometry.hpp"

namespace hbary {

// Uniform direction in R^dim.
inline Eigen::VectorXd random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(dim);
  do {
    for (int k = 0; k < dim; ++k) u[k] = normal(rng);
  } while (u.norm() < 1e-12);
  return u / u.norm();
}

// exp of a point drawn uniformly from the tangent ball at the center (not volume-uniform on
// curved charts).
inline Point sample_ball(const Chart& chart, const Ball& ball, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::VectorXd dir = random_unit(rng, chart.dim());
  const double rho = ball.radius * std::pow(unif(rng), 1.0 / chart.dim());
  return chart.exp(ball.center, chart.from_frame(ball.center, rho * dir));
}

// Random point: uniform on the sphere, uniform in the disk of Euclidean radius 0.8 for the
// hyperbolic chart, standard normal with the given scale on euclidean charts.
inline Point random_point(const Chart& chart, std::mt19937_64& rng, double scale = 1.0) {
  switch (chart.kind()) {
    case ChartKind::sphere:
      return chart.project(random_unit(rng, chart.ambient_dim()));
    case ChartKind::hyperbolic: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      return 0.8 * std::sqrt(unif(rng)) * random_unit(rng, 2);
    }
    case ChartKind::euclidean: {
      std::normal_distribution<double> normal;
      Point p(chart.dim());
      for (int k = 0; k < chart.dim(); ++k) p[k] = scale * normal(rng);
      return p;
    }
  }
  return {};
}

// Tangent vector at `base` with Riemannian norm `length` in a uniform direction.
inline Tangent random_tangent(const Chart& chart, const Point& base, double length,
                              std::mt19937_64& rng) {
  return chart.from_frame(base, length * random_unit(rng, chart.dim()));
}

}  // namespace hbary
