#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hbary/tolerances.hpp"

namespace hbary {

// A basic cell of a transportation tableau.
struct Flow {
  int row = 0;
  int col = 0;
  double mass = 0.0;
};

struct TransportSolution {
  std::vector<Flow> basis;  // m + n - 1 basic cells, degenerate ones included
  double cost = 0.0;
  Eigen::VectorXd u;        // row potentials
  Eigen::VectorXd v;        // column potentials, u_i + v_j <= c_ij
  // Smallest reduced cost over non-basic cells; +inf when every cell is basic.
  double min_reduced_cost = 0.0;
  int pivots = 0;
};

// Transportation simplex on a spanning-tree basis with u-v potentials. Starts from the
// north-west corner; the entering cell is the first improving one in row-major order and ties
// on the leaving cell go to the lowest index. Supplies and demands must have equal totals.
TransportSolution solve_transportation(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                       const Eigen::MatrixXd& cost,
                                       const Tolerances& tol = default_tolerances());

// A sparse column of an equality-form LP.
struct LpColumn {
  std::vector<std::pair<int, double>> entries;
  double cost = 0.0;
};

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd duals;  // y with c_j - y^T A_j >= 0 at the optimum
  std::vector<int> basis;
  double min_reduced_cost = 0.0;  // over non-basic structural columns
  int pivots = 0;
};

// min c^T x subject to A x = b, x >= 0, with b >= 0. Two-phase revised simplex with an explicit,
// periodically refactorized basis inverse and Bland's rule. Throws NumericalFailure when the
// problem is infeasible or unbounded.
LpSolution solve_lp(int rows, const std::vector<LpColumn>& columns, const Eigen::VectorXd& rhs,
                    const Tolerances& tol = default_tolerances());

}  // namespace hbary
