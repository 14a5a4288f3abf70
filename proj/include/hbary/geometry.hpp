#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hbary/tolerances.hpp"

namespace hbary {

// Points and tangent vectors are stored in chart coordinates:
//  - euclidean(m): R^m
//  - sphere(d, K): ambient R^{d+1}, on the sphere of radius 1/sqrt(K)
//  - hyperbolic(K): Poincare unit disk in R^2, metric 4|dx|^2 / ((1-|x|^2)^2 |K|)
// Tangent vectors at a sphere point are ambient vectors orthogonal to it.
using Point = Eigen::VectorXd;
using Tangent = Eigen::VectorXd;

enum class ChartKind { euclidean, sphere, hyperbolic };

std::string to_string(ChartKind kind);

// A geodesic ball, used as the region argument of cell partitions, grids and probes.
struct Ball {
  Point center;
  double radius = 0.0;
};

// Closed-form geometry of a constant-curvature model space. Immutable.
class Chart {
 public:
  static Chart euclidean(int dim);
  static Chart sphere(int dim, double curvature = 1.0);
  static Chart hyperbolic(double curvature = -1.0);

  ChartKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int ambient_dim() const;
  double curvature() const { return curvature_; }
  // Radius of the model sphere (1/sqrt(K)); infinity otherwise.
  double sphere_radius() const;
  bool compact() const { return kind_ == ChartKind::sphere; }

  const Tolerances& tolerances() const { return tol_; }
  Chart with_tolerances(const Tolerances& tol) const;

  bool contains(const Point& x) const;
  // Throws ChartMembershipError when x is not a valid point.
  void validate(const Point& x) const;
  // Nearest valid point (renormalization on the sphere, clamping in the disk).
  Point project(const Point& x) const;
  Tangent project_tangent(const Point& base, const Tangent& v) const;

  double dist(const Point& x, const Point& y) const;
  Point exp(const Point& base, const Tangent& v) const;
  // Inverse of exp. Throws CutLocusError when dist >= injectivity radius - guard.
  Tangent log(const Point& base, const Point& y) const;
  // Gradient in z of d(z, x), as a tangent vector at z. Unit norm.
  Tangent grad_dist(const Point& z, const Point& x) const;
  // Hessian in z of d(z, x) in the orthonormal frame at z.
  Eigen::MatrixXd hess_dist(const Point& z, const Point& x) const;
  double injectivity_radius(const Point& x) const;

  // Tangential eigenvalue of the distance Hessian at radius r: 1/r, sqrt(K) cot, sqrt|K| coth.
  double hess_tangential_factor(double r) const;

  double inner(const Point& base, const Tangent& u, const Tangent& v) const;
  double norm(const Point& base, const Tangent& v) const;

  // Orthonormal basis of T_x M; columns are tangent vectors in chart coordinates.
  Eigen::MatrixXd frame(const Point& base) const;
  Eigen::VectorXd to_frame(const Point& base, const Tangent& v) const;
  Tangent from_frame(const Point& base, const Eigen::VectorXd& coeffs) const;

  // Riemannian volume of a geodesic ball of radius r.
  double ball_volume(double r) const;

  // Deterministic candidate points covering a geodesic ball: a cubic lattice with
  // `per_dim` points per axis in the tangent ball at the center, pushed through exp.
  std::vector<Point> ball_grid(const Ball& ball, int per_dim) const;

  bool operator==(const Chart& other) const {
    return kind_ == other.kind_ && dim_ == other.dim_ && curvature_ == other.curvature_;
  }

 private:
  Chart(ChartKind kind, int dim, double curvature) : kind_(kind), dim_(dim), curvature_(curvature) {}

  ChartKind kind_;
  int dim_;
  double curvature_;
  Tolerances tol_{};
};

struct Cell {
  Point center;
  double volume = 0.0;
};

// A partition of a geodesic ball into cells with exact (or near exact) volumes.
class CellPartition {
 public:
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  const Ball& region() const { return region_; }
  double total_volume() const;
  double max_volume() const;
  // Index of the cell containing p, or nullopt when p lies outside the region.
  std::optional<std::size_t> locate(const Chart& chart, const Point& p) const;

 private:
  friend CellPartition uniform_cell_volumes(const Chart&, const Ball&, int);

  enum class Layout { interval, polar, cubes };
  Layout layout_ = Layout::interval;
  Ball region_;
  int resolution_ = 0;
  std::vector<Cell> cells_;
  std::vector<long> cube_lookup_;
};

// Partitions a metric ball into cells. Dimension 1 uses equal intervals, dimension 2 a
// geodesic polar layout with `resolution` rings of 2k+1 sectors, higher Euclidean
// dimensions a cube lattice. Throws InvalidArgument for radius <= 0, resolution < 2,
// or a ball reaching the cut locus of its center.
CellPartition uniform_cell_volumes(const Chart& chart, const Ball& region, int resolution);

// max_volume() of uniform_cell_volumes(chart, region, resolution) without building the cells
// (an upper bound for the cube layout).
double partition_max_volume(const Chart& chart, const Ball& region, int resolution);

}  // namespace hbary
