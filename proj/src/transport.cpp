#include "hbary/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "hbary/errors.hpp"
#include "hbary/simplex.hpp"

namespace hbary {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassFloor = 1e-15;

// Degenerate bases leave zero-mass cells tight, which ties the c-transform at source points
// that have a unique partner. Each connected component of the positive-mass support can shift
// its potentials (u += t, v -= t) without changing the dual objective; move every component to
// the middle of its feasible range so that off-support cells get slack where possible.
void center_potentials(const Eigen::MatrixXd& cost, const std::vector<PlanAtom>& support,
                       Eigen::VectorXd& u, Eigen::VectorXd& v) {
  const int m = static_cast<int>(u.size()), n = static_cast<int>(v.size());
  std::vector<int> parent(m + n);
  for (int k = 0; k < m + n; ++k) parent[k] = k;
  std::function<int(int)> find = [&](int k) { return parent[k] == k ? k : parent[k] = find(parent[k]); };
  for (const auto& a : support) parent[find(a.idx[0])] = find(m + a.idx[1]);
  std::vector<int> comp(m + n);
  for (int k = 0; k < m + n; ++k) comp[k] = find(k);
  std::vector<int> roots(comp.begin(), comp.end());
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  if (roots.size() < 2) return;
  // Simultaneous midpoint moves stay feasible: for a cross cell, the row side moves by at most
  // half its slack upwards and the column side by at most half downwards.
  std::vector<double> lo(m + n), hi(m + n);
  for (int sweep = 0; sweep < 3; ++sweep) {
    std::fill(lo.begin(), lo.end(), -kInf);
    std::fill(hi.begin(), hi.end(), kInf);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const int a = comp[i], b = comp[m + j];
        if (a == b) continue;
        const double slack = cost(i, j) - u[i] - v[j];
        hi[a] = std::min(hi[a], slack);
        lo[b] = std::max(lo[b], -slack);
      }
    }
    std::vector<double> shift(m + n, 0.0);
    for (int c : roots) {
      if (c == comp[0] || !std::isfinite(lo[c]) || !std::isfinite(hi[c]) || hi[c] < lo[c]) continue;
      shift[c] = 0.5 * (lo[c] + hi[c]);
    }
    for (int i = 0; i < m; ++i) u[i] += shift[comp[i]];
    for (int j = 0; j < n; ++j) v[j] -= shift[comp[m + j]];
  }
}

// Runs fn(k) for k in [0, count) over `workers` threads in contiguous blocks.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t w = std::clamp<std::size_t>(workers < 1 ? 1 : workers, 1, std::max<std::size_t>(count, 1));
  if (w == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  const std::size_t block = (count + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k = t * block; k < std::min(count, (t + 1) * block); ++k) fn(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::size_t tuple_count(const std::vector<DiscreteMeasure>& measures) {
  std::size_t total = 1;
  for (const auto& m : measures) {
    if (m.size() == 0) return 0;
    if (total > std::numeric_limits<std::size_t>::max() / m.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= m.size();
  }
  return total;
}

// Lexicographic decoding with the first index varying slowest.
std::vector<int> decode(std::size_t lin, const std::vector<DiscreteMeasure>& measures) {
  std::vector<int> idx(measures.size());
  for (std::size_t k = measures.size(); k-- > 0;) {
    idx[k] = static_cast<int>(lin % measures[k].size());
    lin /= measures[k].size();
  }
  return idx;
}

void check_weights(const std::vector<double>& weights, std::size_t n) {
  if (weights.size() != n) throw InvalidArgument("need one barycenter weight per measure");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidArgument("barycenter weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("barycenter weights must sum to 1");
}

}  // namespace

void DiscreteMeasure::validate(const Chart& chart) const {
  if (points.empty()) throw InvalidArgument("measure has no atoms");
  if (points.size() != weights.size()) throw InvalidArgument("measure needs one weight per atom");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidArgument("measure weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("measure weights must sum to 1");
  for (const auto& p : points) chart.validate(p);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (chart.dist(points[i], points[j]) <= 1e-10) {
        throw InvalidArgument("measure atoms " + std::to_string(i) + " and " + std::to_string(j) +
                              " coincide");
      }
    }
  }
}

double MultiPlan::marginal_error() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < marginals.size(); ++k) {
    std::vector<double> mass(marginals[k].size(), 0.0);
    for (const auto& a : support) mass[a.idx[k]] += a.mass;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      worst = std::max(worst, std::abs(mass[i] - marginals[k].weights[i]));
    }
  }
  return worst;
}

Ot2Result solve_ot2(const Chart& chart, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                    const CostProfile& profile, const Tolerances& tol) {
  mu.validate(chart);
  nu.validate(chart);
  const int m = static_cast<int>(mu.size());
  const int n = static_cast<int>(nu.size());
  Eigen::MatrixXd cost(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) cost(i, j) = profile.eval(chart.dist(mu.points[i], nu.points[j]));
  }
  const TransportSolution ts = solve_transportation(
      Eigen::Map<const Eigen::VectorXd>(mu.weights.data(), m),
      Eigen::Map<const Eigen::VectorXd>(nu.weights.data(), n), cost, tol);

  Ot2Result res;
  res.plan.marginals = {mu, nu};
  for (const Flow& f : ts.basis) {
    if (f.mass > kMassFloor) res.plan.support.push_back({{f.row, f.col}, f.mass});
  }
  std::sort(res.plan.support.begin(), res.plan.support.end(),
            [](const PlanAtom& a, const PlanAtom& b) { return a.idx < b.idx; });
  Eigen::VectorXd u = ts.u, v = ts.v;
  center_potentials(cost, res.plan.support, u, v);
  res.plan.total_cost = ts.cost;
  res.plan.potentials = {u, v};
  res.plan.min_reduced_cost = ts.min_reduced_cost;
  res.potential = {u, v};
  return res;
}

Configuration tuple_configuration(const std::vector<DiscreteMeasure>& measures,
                                  const std::vector<double>& weights, const std::vector<int>& idx) {
  Configuration c;
  c.weights = weights;
  for (std::size_t k = 0; k < measures.size(); ++k) c.points.push_back(measures[k].points[idx[k]]);
  return c;
}

TupleCost barycenter_tuple_cost(const Chart& chart, const CostProfile& profile,
                                const std::vector<DiscreteMeasure>& measures,
                                const std::vector<double>& weights,
                                const BarycenterOptions& options) {
  return [=](const std::vector<int>& idx) {
    return barycenter_cost(chart, profile, tuple_configuration(measures, weights, idx), options);
  };
}

MultiPlan solve_mmot(const Chart& chart, const std::vector<DiscreteMeasure>& measures,
                     const std::vector<double>& weights, const CostProfile& profile,
                     const MmotOptions& options) {
  if (measures.size() < 2) throw InvalidArgument("multi-marginal problem needs n >= 2");
  check_weights(weights, measures.size());
  if (!profile.origin().admissible() && !options.barycenter.allow_counterexample) {
    throw ProfileViolatesAssumptions("profile " + profile.name() +
                                     " violates h'(0) = 0 and is refused by the MMOT solver");
  }
  for (const auto& m : measures) m.validate(chart);
  const std::size_t total = tuple_count(measures);
  if (total > options.max_tuples) {
    throw SizeLimit("multi-marginal problem has " + std::to_string(total) + " tuples, limit is " +
                    std::to_string(options.max_tuples));
  }

  std::vector<double> cvals(total);
  parallel_for(total, options.workers, [&](std::size_t lin) {
    cvals[lin] = barycenter_cost(chart, profile,
                                 tuple_configuration(measures, weights, decode(lin, measures)),
                                 options.barycenter);
  });

  MultiPlan plan;
  plan.marginals = measures;
  const Tolerances& tol = chart.tolerances();

  if (measures.size() == 2) {
    const int m = static_cast<int>(measures[0].size());
    const int n = static_cast<int>(measures[1].size());
    Eigen::MatrixXd cost(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) cost(i, j) = cvals[static_cast<std::size_t>(i) * n + j];
    }
    const TransportSolution ts = solve_transportation(
        Eigen::Map<const Eigen::VectorXd>(measures[0].weights.data(), m),
        Eigen::Map<const Eigen::VectorXd>(measures[1].weights.data(), n), cost, tol);
    for (const Flow& f : ts.basis) {
      if (f.mass > kMassFloor) plan.support.push_back({{f.row, f.col}, f.mass});
    }
    Eigen::VectorXd u = ts.u, v = ts.v;
    center_potentials(cost, plan.support, u, v);
    plan.total_cost = ts.cost;
    plan.potentials = {u, v};
    plan.min_reduced_cost = ts.min_reduced_cost;
  } else {
    // Rows: every atom of the first marginal, then all but the last atom of each other marginal
    // (the dropped rows are implied by total mass).
    std::vector<int> offset(measures.size(), 0);
    int rows = static_cast<int>(measures[0].size());
    for (std::size_t k = 1; k < measures.size(); ++k) {
      offset[k] = rows;
      rows += static_cast<int>(measures[k].size()) - 1;
    }
    Eigen::VectorXd rhs(rows);
    for (std::size_t i = 0; i < measures[0].size(); ++i) rhs[i] = measures[0].weights[i];
    for (std::size_t k = 1; k < measures.size(); ++k) {
      for (std::size_t i = 0; i + 1 < measures[k].size(); ++i) rhs[offset[k] + i] = measures[k].weights[i];
    }
    std::vector<LpColumn> cols(total);
    for (std::size_t lin = 0; lin < total; ++lin) {
      const std::vector<int> idx = decode(lin, measures);
      cols[lin].cost = cvals[lin];
      cols[lin].entries.emplace_back(idx[0], 1.0);
      for (std::size_t k = 1; k < measures.size(); ++k) {
        if (idx[k] + 1 < static_cast<int>(measures[k].size())) {
          cols[lin].entries.emplace_back(offset[k] + idx[k], 1.0);
        }
      }
    }
    const LpSolution lp = solve_lp(rows, cols, rhs, tol);
    for (std::size_t lin = 0; lin < total; ++lin) {
      if (lp.x[lin] > kMassFloor) plan.support.push_back({decode(lin, measures), lp.x[lin]});
    }
    plan.total_cost = lp.objective;
    plan.min_reduced_cost = lp.min_reduced_cost;
    plan.potentials.resize(measures.size());
    plan.potentials[0] = lp.duals.head(measures[0].size());
    for (std::size_t k = 1; k < measures.size(); ++k) {
      Eigen::VectorXd phi = Eigen::VectorXd::Zero(measures[k].size());
      for (std::size_t i = 0; i + 1 < measures[k].size(); ++i) phi[i] = lp.duals[offset[k] + i];
      plan.potentials[k] = phi;
    }
  }
  std::sort(plan.support.begin(), plan.support.end(),
            [](const PlanAtom& a, const PlanAtom& b) { return a.idx < b.idx; });
  return plan;
}

std::vector<BarycenterSolution> support_barycenters(const Chart& chart, const CostProfile& profile,
                                                    const MultiPlan& plan,
                                                    const std::vector<double>& weights,
                                                    const BarycenterOptions& options) {
  std::vector<BarycenterSolution> out;
  out.reserve(plan.support.size());
  for (const auto& a : plan.support) {
    out.push_back(
        solve_barycenter(chart, profile, tuple_configuration(plan.marginals, weights, a.idx), options));
  }
  return out;
}

CTransform c_transform(const Chart& chart, const CostProfile& profile,
                       const std::vector<Point>& targets, const Eigen::VectorXd& xi,
                       const std::vector<Point>& sources, double tie_tol) {
  if (targets.empty()) throw InvalidArgument("c-transform needs a non-empty target set");
  if (xi.size() != static_cast<Eigen::Index>(targets.size())) {
    throw InvalidArgument("c-transform needs one value per target");
  }
  CTransform res;
  res.values.resize(sources.size());
  res.active.resize(sources.size());
  std::vector<double> vals(targets.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      vals[j] = profile.eval(chart.dist(sources[i], targets[j])) - xi[j];
      best = std::min(best, vals[j]);
    }
    res.values[i] = best;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (vals[j] <= best + tie_tol) res.active[i].push_back(static_cast<int>(j));
    }
  }
  return res;
}

MongeImage monge_map_from_potential(const Chart& chart, const CostProfile& profile,
                                    const std::vector<Point>& targets, const Eigen::VectorXd& xi,
                                    const Point& x, double tie_tol) {
  const CTransform ct = c_transform(chart, profile, targets, xi, {x}, tie_tol);
  MongeImage out;
  out.image = x;
  out.active = ct.active[0].front();
  if (ct.active[0].size() > 1) {
    out.differentiable = false;
    return out;
  }
  const Point& y = targets[out.active];
  if (chart.dist(x, y) == 0.0) return out;
  const Tangent grad = profile.deriv(chart.dist(x, y)) * chart.grad_dist(x, y);
  const double g = chart.norm(x, grad);
  if (g == 0.0) return out;
  out.image = chart.exp(x, (-profile.inv_deriv(g) / g) * grad);
  return out;
}

std::optional<int> plan_partner(const MultiPlan& plan, int row) {
  std::optional<int> partner;
  for (const auto& a : plan.support) {
    if (a.idx[0] != row) continue;
    if (partner) return std::nullopt;
    partner = a.idx[1];
  }
  return partner;
}

double check_cyclical_monotonicity(const MultiPlan& plan, const TupleCost& cost) {
  const std::size_t s = plan.support.size();
  std::vector<double> own(s);
  for (std::size_t a = 0; a < s; ++a) own[a] = cost(plan.support[a].idx);
  double worst = 0.0;
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a + 1; b < s; ++b) {
      std::vector<int> first = plan.support[b].idx;
      first[0] = plan.support[a].idx[0];
      std::vector<int> second = plan.support[a].idx;
      second[0] = plan.support[b].idx[0];
      worst = std::max(worst, own[a] + own[b] - cost(first) - cost(second));
    }
  }
  return worst;
}

InjectivityReport check_injectivity(const Chart& chart, const MultiPlan& plan,
                                    const std::vector<BarycenterSolution>& solutions,
                                    double bary_tol, double config_tol) {
  if (solutions.size() != plan.support.size()) {
    throw InvalidArgument("need one barycenter per support tuple");
  }
  InjectivityReport rep;
  for (std::size_t a = 0; a < solutions.size(); ++a) {
    for (std::size_t b = a + 1; b < solutions.size(); ++b) {
      ++rep.pairs_checked;
      const double dz = chart.dist(solutions[a].z, solutions[b].z);
      if (dz > bary_tol) continue;
      double dx = 0.0;
      for (std::size_t k = 0; k < plan.marginals.size(); ++k) {
        dx = std::max(dx, chart.dist(plan.marginals[k].points[plan.support[a].idx[k]],
                                     plan.marginals[k].points[plan.support[b].idx[k]]));
      }
      if (dx > config_tol) rep.violations.push_back({a, b, dz, dx});
    }
  }
  return rep;
}

}  // namespace hbary
