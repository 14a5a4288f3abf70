#include "hbary/barycenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hbary/invmap.hpp"

namespace hbary {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Points closer than this to a configuration point count as collisions.
bool collides(double d, const Point& x) { return d <= 1e-12 * std::max(1.0, x.norm()); }

struct Subgradient {
  Eigen::VectorXd smooth;   // frame coordinates of the sum over non-colliding terms
  double kink = 0.0;        // sum of lambda_i h'(0+) over collisions
  bool singular_collision = false;
};

Subgradient subgradient(const Chart& chart, const CostProfile& profile, const Configuration& config,
                        const Point& z) {
  Subgradient s;
  Tangent g = Tangent::Zero(z.size());
  for (std::size_t i = 0; i < config.points.size(); ++i) {
    const Point& x = config.points[i];
    const double d = chart.dist(z, x);
    if (collides(d, x)) {
      s.kink += config.weights[i] * profile.deriv(0.0);
      if (!profile.origin().is_c2()) s.singular_collision = true;
      continue;
    }
    g += config.weights[i] * profile.deriv(d) * chart.grad_dist(z, x);
  }
  s.smooth = chart.to_frame(z, g);
  return s;
}

struct Run {
  Point z;
  double value = kInf;
  double residual = kInf;
  int iterations = 0;
  bool converged = false;
};

// A few undamped Newton steps past the stopping tolerance, kept while the residual shrinks.
// Downstream inverse-map checks need the first-order condition far below the stopping test.
void polish(const Chart& chart, const CostProfile& profile, const Configuration& config, Run& run) {
  const int m = chart.dim();
  for (int k = 0; k < 3 && run.residual > 1e-14; ++k) {
    const Subgradient s = subgradient(chart, profile, config, run.z);
    if (s.singular_collision || s.kink != 0.0) return;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < config.points.size(); ++i) {
      h += config.weights[i] * hess_cost(profile, chart, run.z, config.points[i]);
    }
    if (!h.allFinite()) return;
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) return;
    const Eigen::VectorXd dir = -llt.solve(s.smooth);
    if (!dir.allFinite()) return;
    const Point cand = chart.exp(run.z, chart.from_frame(run.z, dir));
    const Subgradient sc = subgradient(chart, profile, config, cand);
    if (sc.singular_collision || sc.kink != 0.0) return;
    const double res = sc.smooth.norm();
    if (!(res < run.residual)) return;
    run.z = cand;
    run.residual = res;
    run.value = objective_phi(chart, profile, config, cand);
    ++run.iterations;
  }
}

// Riemannian descent with Armijo backtracking. The planned direction is a Newton step when the
// Hessian of Phi is positive definite and the negative minimal subgradient otherwise.
Run descend(const Chart& chart, const CostProfile& profile, const Configuration& config,
            Point z, double tol) {
  const Tolerances& t = chart.tolerances();
  const int m = chart.dim();
  const double step_cap = chart.compact() ? 0.5 * chart.injectivity_radius(z) : kInf;
  Run run;
  run.z = z;
  run.value = objective_phi(chart, profile, config, z);
  bool nudged = false;

  for (int it = 0; it <= t.max_iterations; ++it) {
    run.iterations = it;
    const Subgradient s = subgradient(chart, profile, config, run.z);
    const double gn = s.smooth.norm();
    run.residual = std::max(0.0, gn - s.kink);
    if (run.residual <= tol) {
      run.converged = true;
      polish(chart, profile, config, run);
      return run;
    }
    if (it == t.max_iterations) break;
    if (s.singular_collision && !nudged) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
      e[0] = t.collision_nudge;
      run.z = chart.exp(run.z, chart.from_frame(run.z, e));
      run.value = objective_phi(chart, profile, config, run.z);
      nudged = true;
      continue;
    }
    const Eigen::VectorXd sub = s.smooth * (run.residual / gn);

    std::vector<Eigen::VectorXd> plans;
    if (!s.singular_collision && s.kink == 0.0) {
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
      for (std::size_t i = 0; i < config.points.size(); ++i) {
        h += config.weights[i] * hess_cost(profile, chart, run.z, config.points[i]);
      }
      if (h.allFinite()) {
        Eigen::LLT<Eigen::MatrixXd> llt(h);
        if (llt.info() == Eigen::Success) {
          Eigen::VectorXd dir = -llt.solve(sub);
          if (dir.allFinite() && dir.dot(sub) < 0.0) plans.push_back(std::move(dir));
        }
      }
    }
    plans.push_back(-sub);

    bool moved = false;
    for (Eigen::VectorXd dir : plans) {
      const double len = dir.norm();
      if (len > step_cap) dir *= step_cap / len;
      const double slope = sub.dot(dir);
      double step = t.step_init;
      for (int k = 0; k < 60; ++k, step *= t.step_contraction) {
        const Point cand = chart.exp(run.z, chart.from_frame(run.z, step * dir));
        const double v = objective_phi(chart, profile, config, cand);
        if (v <= run.value + t.armijo * step * slope) {
          moved = v < run.value || (cand - run.z).norm() > 0.0;
          run.z = cand;
          run.value = v;
          break;
        }
      }
      if (moved) break;
    }
    if (!moved) break;
  }
  return run;
}

bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

int default_grid(int dim) {
  switch (dim) {
    case 1:
      return 41;
    case 2:
      return 15;
    case 3:
      return 7;
    default:
      return 5;
  }
}

}  // namespace

void validate_configuration(const Chart& chart, const Configuration& config) {
  if (config.points.size() < 2) throw InvalidArgument("configuration needs at least two points");
  if (config.points.size() != config.weights.size()) {
    throw InvalidArgument("configuration needs one weight per point");
  }
  double total = 0.0;
  for (double w : config.weights) {
    if (!(w > 0.0)) throw InvalidArgument("configuration weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("configuration weights must sum to 1");
  for (const auto& x : config.points) chart.validate(x);
}

double objective_phi(const Chart& chart, const CostProfile& profile, const Configuration& config,
                     const Point& y) {
  double v = 0.0;
  for (std::size_t i = 0; i < config.points.size(); ++i) {
    v += config.weights[i] * profile.eval(chart.dist(y, config.points[i]));
  }
  return v;
}

double first_order_residual(const Chart& chart, const CostProfile& profile,
                            const Configuration& config, const Point& z) {
  return subgradient(chart, profile, config, z).smooth.norm();
}

double subgradient_residual(const Chart& chart, const CostProfile& profile,
                            const Configuration& config, const Point& z) {
  const Subgradient s = subgradient(chart, profile, config, z);
  return std::max(0.0, s.smooth.norm() - s.kink);
}

BarycenterSolution solve_barycenter(const Chart& chart, const CostProfile& profile,
                                    const Configuration& config, const BarycenterOptions& options) {
  validate_configuration(chart, config);
  if (!profile.origin().admissible() && !options.allow_counterexample) {
    throw ProfileViolatesAssumptions("profile " + profile.name() +
                                     " violates h'(0) = 0; barycenters are not well posed");
  }
  const Tolerances& tol = chart.tolerances();
  const double res_tol =
      (chart.compact() ? tol.grad_residual_sphere : tol.grad_residual) * options.tol_scale;

  std::vector<Point> seeds;
  auto add_seed = [&](const Point& p) {
    for (const auto& s : seeds) {
      if (s == p) return;
    }
    seeds.push_back(p);
  };

  double best_seed_value = kInf;
  std::size_t best_seed = 0;
  for (std::size_t i = 0; i < config.points.size(); ++i) {
    const double v = objective_phi(chart, profile, config, config.points[i]);
    if (v < best_seed_value) {
      best_seed_value = v;
      best_seed = i;
    }
  }

  // On charts of non-positive curvature Phi is geodesically convex, so one descent from the best
  // configuration point reaches the global minimum and no grid is needed.
  const bool convex = chart.kind() != ChartKind::sphere;
  if (convex) {
    add_seed(config.points[best_seed]);
  } else {
    for (const auto& x : config.points) add_seed(x);
    // Every y with Phi(y) <= best_seed_value satisfies lambda_i h(d(y, x_i)) <= best_seed_value.
    std::size_t heavy = 0;
    for (std::size_t i = 1; i < config.weights.size(); ++i) {
      if (config.weights[i] > config.weights[heavy]) heavy = i;
    }
    const double radius = profile.inverse(best_seed_value / config.weights[heavy]);
    if (radius > 0.0 && options.grid_seeds > 0) {
      const int per_dim = options.grid_per_dim > 0 ? options.grid_per_dim : default_grid(chart.dim());
      const Ball ball{config.points[heavy], radius * (1.0 + 1e-9)};
      std::vector<std::pair<double, Point>> scored;
      for (auto& p : chart.ball_grid(ball, per_dim)) {
        scored.emplace_back(objective_phi(chart, profile, config, p), std::move(p));
      }
      const std::size_t keep = std::min<std::size_t>(options.grid_seeds, scored.size());
      std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t k = 0; k < keep; ++k) add_seed(scored[k].second);
    }
  }

  std::vector<Run> runs;
  for (const auto& s : seeds) {
    try {
      runs.push_back(descend(chart, profile, config, s, res_tol));
    } catch (const CutLocusError&) {
      // A seed antipodal to a configuration point; the other seeds cover it.
    }
  }
  if (runs.empty()) throw NumericalFailure("every descent seed sits on a cut locus");

  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.value < b.value; });
  const double best_value = runs.front().value;

  // Distinct minimizers within the tie gap; the lexicographically smallest one wins.
  std::vector<const Run*> ties;
  for (const auto& r : runs) {
    if (r.value > best_value + tol.tie_gap) break;
    if (!r.converged) continue;
    bool dup = false;
    for (const Run* o : ties) {
      if (chart.dist(o->z, r.z) <= 1e-7) dup = true;
    }
    if (!dup) ties.push_back(&r);
  }

  auto make_solution = [&](const Run& r) {
    BarycenterSolution sol;
    sol.z = r.z;
    sol.value = r.value;
    sol.grad_residual = r.residual;
    sol.iterations = r.iterations;
    for (const auto& x : config.points) {
      sol.cut_margins.push_back(chart.injectivity_radius(x) - chart.dist(r.z, x));
    }
    return sol;
  };

  if (ties.empty()) {
    throw NonConvergence("barycenter descent did not reach the residual tolerance",
                         make_solution(runs.front()));
  }
  std::sort(ties.begin(), ties.end(), [](const Run* a, const Run* b) { return lex_less(a->z, b->z); });
  BarycenterSolution sol = make_solution(*ties.front());
  for (std::size_t k = 1; k < ties.size(); ++k) sol.alternates.push_back(ties[k]->z);
  return sol;
}

double barycenter_cost(const Chart& chart, const CostProfile& profile, const Configuration& config,
                       const BarycenterOptions& options) {
  return solve_barycenter(chart, profile, config, options).value;
}

SharedBarycenterReport counterexample_shared_barycenter(int grid_points) {
  if (grid_points < 3) throw InvalidArgument("grid needs at least three points");
  const Chart line = Chart::euclidean(1);
  const CostProfile h = CostProfile::counterexample();
  const CostProfile quad = CostProfile::power(2.0);
  auto pt = [](double v) { return Point::Constant(1, v); };

  SharedBarycenterReport rep;
  rep.shared_point = 0.0;
  rep.shared = true;
  for (double far : {1.0, 0.5}) {
    SharedBarycenterCase c;
    c.config.points = {pt(0.0), pt(far)};
    c.config.weights = {0.8, 0.2};

    c.grid_value = kInf;
    for (int k = 0; k < grid_points; ++k) {
      const double y = -2.0 + 4.0 * k / (grid_points - 1);
      const double v = objective_phi(line, h, c.config, pt(y));
      if (v < c.grid_value) {
        c.grid_value = v;
        c.grid_minimizer = y;
      }
    }

    // One-sided derivatives of y -> h(|y - x|) at y = 0.
    c.left_derivative = 0.0;
    c.right_derivative = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double x = c.config.points[i][0];
      const double w = c.config.weights[i];
      if (x == 0.0) {
        c.left_derivative -= w * h.deriv(0.0);
        c.right_derivative += w * h.deriv(0.0);
      } else {
        const double slope = (0.0 > x ? 1.0 : -1.0) * h.deriv(std::abs(x));
        c.left_derivative += w * slope;
        c.right_derivative += w * slope;
      }
    }
    c.quadratic_barycenter = solve_barycenter(line, quad, c.config).z[0];

    const bool contains_zero = c.left_derivative <= 0.0 && c.right_derivative >= 0.0;
    if (!contains_zero || std::abs(c.grid_minimizer - rep.shared_point) > 1e-4) rep.shared = false;
    rep.cases.push_back(std::move(c));
  }
  return rep;
}

}  // namespace hbary
