#include "hbary/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

#include "hbary/errors.hpp"

namespace hbary {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Spanning tree over row nodes 0..m-1 and column nodes m..m+n-1, one edge per basic cell.
class BasisTree {
 public:
  BasisTree(int m, int n) : m_(m), adj_(m + n) {}

  void rebuild(const std::vector<Flow>& basis) {
    for (auto& a : adj_) a.clear();
    for (int k = 0; k < static_cast<int>(basis.size()); ++k) {
      adj_[basis[k].row].push_back(k);
      adj_[m_ + basis[k].col].push_back(k);
    }
  }

  void potentials(const std::vector<Flow>& basis, const Eigen::MatrixXd& cost, Eigen::VectorXd& u,
                  Eigen::VectorXd& v) const {
    const int n = static_cast<int>(adj_.size()) - m_;
    u.setConstant(m_, kInf);
    v.setConstant(n, kInf);
    u[0] = 0.0;
    std::deque<int> queue{0};
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      for (int k : adj_[node]) {
        const Flow& f = basis[k];
        if (node < m_) {
          if (v[f.col] == kInf) {
            v[f.col] = cost(f.row, f.col) - u[f.row];
            queue.push_back(m_ + f.col);
          }
        } else if (u[f.row] == kInf) {
          u[f.row] = cost(f.row, f.col) - v[f.col];
          queue.push_back(f.row);
        }
      }
    }
  }

  // Basic cells on the tree path from column node `col` to row node `row`, in that order.
  std::vector<int> path(const std::vector<Flow>& basis, int row, int col) const {
    const int start = m_ + col;
    std::vector<int> via(adj_.size(), -1);
    std::vector<char> seen(adj_.size(), 0);
    std::deque<int> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      if (node == row) break;
      for (int k : adj_[node]) {
        const int other = node < m_ ? m_ + basis[k].col : basis[k].row;
        if (seen[other]) continue;
        seen[other] = 1;
        via[other] = k;
        queue.push_back(other);
      }
    }
    std::vector<int> edges;
    for (int node = row; node != start;) {
      const int k = via[node];
      if (k < 0) throw NumericalFailure("transportation basis is not a spanning tree");
      edges.push_back(k);
      node = node < m_ ? m_ + basis[k].col : basis[k].row;
    }
    std::reverse(edges.begin(), edges.end());
    return edges;
  }

 private:
  int m_;
  std::vector<std::vector<int>> adj_;
};

}  // namespace

TransportSolution solve_transportation(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                       const Eigen::MatrixXd& cost, const Tolerances& tol) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (m == 0 || n == 0) throw InvalidArgument("transportation problem needs non-empty marginals");
  if (cost.rows() != m || cost.cols() != n) throw InvalidArgument("cost matrix shape mismatch");
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any()) {
    throw InvalidArgument("marginal masses must be non-negative");
  }
  if (std::abs(supply.sum() - demand.sum()) > 1e-9 * std::max(1.0, supply.sum())) {
    throw InvalidArgument("marginals carry different total mass");
  }
  if (!cost.allFinite()) throw InvalidArgument("cost matrix has non-finite entries");

  // North-west corner. When a row and a column run out together only the row advances, which
  // leaves a zero-mass basic cell and keeps the basis a spanning tree.
  TransportSolution sol;
  std::vector<Flow>& basis = sol.basis;
  Eigen::VectorXd a = supply;
  Eigen::VectorXd b = demand;
  for (int i = 0, j = 0;;) {
    if (i == m - 1 && j == n - 1) {
      basis.push_back({i, j, std::max(0.0, std::min(a[i], b[j]))});
      break;
    }
    if (j == n - 1 || (i < m - 1 && a[i] <= b[j])) {
      basis.push_back({i, j, a[i]});
      b[j] = std::max(0.0, b[j] - a[i]);
      ++i;
    } else {
      basis.push_back({i, j, b[j]});
      a[i] = std::max(0.0, a[i] - b[j]);
      ++j;
    }
  }

  std::vector<int> slot(static_cast<std::size_t>(m) * n, -1);
  for (int k = 0; k < static_cast<int>(basis.size()); ++k) {
    slot[static_cast<std::size_t>(basis[k].row) * n + basis[k].col] = k;
  }

  const double opt_tol = tol.lp_optimality * std::max(1.0, cost.cwiseAbs().maxCoeff());
  BasisTree tree(m, n);
  const long max_pivots = 50L * (m + n) * (m + n) + 1000;
  while (true) {
    tree.rebuild(basis);
    tree.potentials(basis, cost, sol.u, sol.v);

    int enter_i = -1, enter_j = -1;
    for (int i = 0; i < m && enter_i < 0; ++i) {
      for (int j = 0; j < n; ++j) {
        if (slot[static_cast<std::size_t>(i) * n + j] >= 0) continue;
        if (cost(i, j) - sol.u[i] - sol.v[j] < -opt_tol) {
          enter_i = i;
          enter_j = j;
          break;
        }
      }
    }
    if (enter_i < 0) break;
    if (sol.pivots >= max_pivots) throw NumericalFailure("transportation simplex pivot limit");

    const std::vector<int> cycle = tree.path(basis, enter_i, enter_j);
    // Edges alternate -, +, -, ... starting next to the entering column.
    double theta = kInf;
    int leave = -1;
    long leave_index = std::numeric_limits<long>::max();
    for (std::size_t e = 0; e < cycle.size(); e += 2) {
      const Flow& f = basis[cycle[e]];
      const long idx = static_cast<long>(f.row) * n + f.col;
      if (f.mass < theta || (f.mass == theta && idx < leave_index)) {
        theta = f.mass;
        leave = cycle[e];
        leave_index = idx;
      }
    }
    for (std::size_t e = 0; e < cycle.size(); ++e) {
      Flow& f = basis[cycle[e]];
      f.mass = e % 2 == 0 ? std::max(0.0, f.mass - theta) : f.mass + theta;
    }
    slot[static_cast<std::size_t>(leave_index)] = -1;
    basis[leave] = {enter_i, enter_j, theta};
    slot[static_cast<std::size_t>(enter_i) * n + enter_j] = leave;
    ++sol.pivots;
  }

  sol.cost = 0.0;
  for (const Flow& f : basis) sol.cost += f.mass * cost(f.row, f.col);
  sol.min_reduced_cost = kInf;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (slot[static_cast<std::size_t>(i) * n + j] >= 0) continue;
      sol.min_reduced_cost = std::min(sol.min_reduced_cost, cost(i, j) - sol.u[i] - sol.v[j]);
    }
  }
  return sol;
}

LpSolution solve_lp(int rows, const std::vector<LpColumn>& columns, const Eigen::VectorXd& rhs,
                    const Tolerances& tol) {
  const int n = static_cast<int>(columns.size());
  if (rows <= 0 || rhs.size() != rows) throw InvalidArgument("LP right-hand side shape mismatch");
  if ((rhs.array() < 0.0).any()) throw InvalidArgument("LP right-hand side must be non-negative");
  for (const auto& c : columns) {
    for (const auto& [r, val] : c.entries) {
      if (r < 0 || r >= rows) throw InvalidArgument("LP column entry out of range");
      (void)val;
    }
  }

  // Columns n..n+rows-1 are the artificials of the first phase.
  auto column_dot = [&](int j, const Eigen::VectorXd& y) {
    if (j >= n) return y[j - n];
    double s = 0.0;
    for (const auto& [r, val] : columns[j].entries) s += y[r] * val;
    return s;
  };
  auto column_solve = [&](int j, const Eigen::MatrixXd& binv) {
    if (j >= n) return Eigen::VectorXd(binv.col(j - n));
    Eigen::VectorXd a = Eigen::VectorXd::Zero(rows);
    for (const auto& [r, val] : columns[j].entries) a += val * binv.col(r);
    return a;
  };

  std::vector<int> basis(rows);
  std::vector<char> in_basis(n + rows, 0);
  for (int r = 0; r < rows; ++r) {
    basis[r] = n + r;
    in_basis[n + r] = 1;
  }
  Eigen::MatrixXd binv = Eigen::MatrixXd::Identity(rows, rows);
  Eigen::VectorXd xb = rhs;
  int pivots = 0;
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());

  auto refactor = [&]() {
    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(rows, rows);
    for (int r = 0; r < rows; ++r) {
      const int j = basis[r];
      if (j >= n) {
        bmat(j - n, r) = 1.0;
      } else {
        for (const auto& [i, val] : columns[j].entries) bmat(i, r) += val;
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
    binv = lu.inverse();
    xb = binv * rhs;
    for (int r = 0; r < rows; ++r) xb[r] = std::max(0.0, xb[r]);
  };

  auto pivot = [&](int r, int j, const Eigen::VectorXd& alpha) {
    const double theta = xb[r] / alpha[r];
    xb -= theta * alpha;
    xb[r] = theta;
    for (int i = 0; i < rows; ++i) xb[i] = std::max(0.0, xb[i]);
    const Eigen::RowVectorXd prow = binv.row(r) / alpha[r];
    for (int i = 0; i < rows; ++i) {
      if (i != r && alpha[i] != 0.0) binv.row(i) -= alpha[i] * prow;
    }
    binv.row(r) = prow;
    in_basis[basis[r]] = 0;
    basis[r] = j;
    in_basis[j] = 1;
    if (++pivots % 50 == 0) refactor();
  };

  const long max_pivots = 200L * (n + rows) + 1000;
  auto run_phase = [&](const std::function<double(int)>& cost, bool allow_artificial) {
    const double cscale = [&] {
      double s = 1.0;
      for (int j = 0; j < n; ++j) s = std::max(s, std::abs(cost(j)));
      return s;
    }();
    const double opt_tol = tol.lp_optimality * cscale;
    while (true) {
      Eigen::VectorXd cb(rows);
      for (int r = 0; r < rows; ++r) cb[r] = cost(basis[r]);
      const Eigen::VectorXd y = binv.transpose() * cb;
      int enter = -1;
      const int limit = allow_artificial ? n + rows : n;
      for (int j = 0; j < limit; ++j) {
        if (in_basis[j]) continue;
        if (cost(j) - column_dot(j, y) < -opt_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return y;
      if (pivots >= max_pivots) throw NumericalFailure("revised simplex pivot limit");
      const Eigen::VectorXd alpha = column_solve(enter, binv);
      double best = kInf;
      for (int r = 0; r < rows; ++r) {
        if (alpha[r] > tol.lp_pivot) best = std::min(best, xb[r] / alpha[r]);
      }
      // Bland: among the minimising rows the basic variable with the lowest index leaves.
      int leave = -1;
      for (int r = 0; r < rows; ++r) {
        if (alpha[r] <= tol.lp_pivot || xb[r] / alpha[r] > best + 1e-14 * scale) continue;
        if (leave < 0 || basis[r] < basis[leave]) leave = r;
      }
      if (leave < 0) throw NumericalFailure("LP is unbounded");
      pivot(leave, enter, alpha);
    }
  };

  // Phase one: minimise the artificial mass.
  run_phase([&](int j) { return j >= n ? 1.0 : 0.0; }, false);
  double infeasibility = 0.0;
  for (int r = 0; r < rows; ++r) {
    if (basis[r] >= n) infeasibility += xb[r];
  }
  if (infeasibility > 1e-9 * scale) throw NumericalFailure("LP is infeasible");

  // Drive zero-level artificials out where a structural column can replace them.
  for (int r = 0; r < rows; ++r) {
    if (basis[r] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (in_basis[j]) continue;
      const Eigen::VectorXd alpha = column_solve(j, binv);
      if (std::abs(alpha[r]) > 1e-9) {
        xb[r] = 0.0;
        pivot(r, j, alpha);
        break;
      }
    }
  }

  const auto real_cost = [&](int j) { return j >= n ? 0.0 : columns[j].cost; };
  const Eigen::VectorXd y = run_phase(real_cost, false);

  LpSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < rows; ++r) {
    if (basis[r] < n) sol.x[basis[r]] = xb[r];
  }
  sol.objective = 0.0;
  for (int j = 0; j < n; ++j) sol.objective += columns[j].cost * sol.x[j];
  sol.duals = y;
  sol.basis = basis;
  sol.pivots = pivots;
  sol.min_reduced_cost = kInf;
  for (int j = 0; j < n; ++j) {
    if (in_basis[j]) continue;
    sol.min_reduced_cost = std::min(sol.min_reduced_cost, columns[j].cost - column_dot(j, y));
  }
  return sol;
}

}  // namespace hbary
