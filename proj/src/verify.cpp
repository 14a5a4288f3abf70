#include "hbary/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "hbary/barycenter.hpp"
#include "hbary/errors.hpp"
#include "hbary/invmap.hpp"
#include "hbary/sampling.hpp"
#include "hbary/simplex.hpp"
#include "hbary/transport.hpp"

namespace hbary {

namespace {

constexpr double kPi = 3.14159265358979323846;

class Tally {
 public:
  Tally(std::string name, double limit) : name_(std::move(name)), limit_(limit) {}
  void add(double err) {
    ++n_;
    if (!(err <= worst_)) worst_ = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
  }
  CheckRow row() const { return {name_, n_, worst_, limit_, n_ > 0 && worst_ <= limit_}; }

 private:
  std::string name_;
  double limit_;
  int n_ = 0;
  double worst_ = 0.0;
};

std::vector<Chart> test_charts() {
  return {Chart::euclidean(2), Chart::sphere(2), Chart::hyperbolic()};
}

DiscreteMeasure random_measure(const Chart& chart, const Ball& cap, int atoms, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.2, 1.0);
  DiscreteMeasure m;
  double total = 0.0;
  for (int a = 0; a < atoms; ++a) {
    m.points.push_back(sample_ball(chart, cap, rng));
    m.weights.push_back(w(rng));
    total += m.weights.back();
  }
  for (double& x : m.weights) x /= total;
  return m;
}

std::vector<double> random_weights(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.2, 1.0);
  std::vector<double> out(n);
  double total = 0.0;
  for (double& x : out) total += (x = w(rng));
  for (double& x : out) x /= total;
  return out;
}

// Brute force over the vertices of the transportation polytope: every set of m+n-1 cells whose
// equality system has a unique nonnegative solution.
double vertex_enumeration_cost(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                               const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  const int cells = m * n;
  const int k = m + n - 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, cells);
  Eigen::VectorXd b(k);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, i * n + j) = 1.0;
    b[i] = supply[i];
  }
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i < m; ++i) a(m + j, i * n + j) = 1.0;
    b[m + j] = demand[j];
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(k);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      Eigen::MatrixXd sub(k, k);
      for (int c = 0; c < k; ++c) sub.col(c) = a.col(pick[c]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
      if (lu.rank() < k) return;
      const Eigen::VectorXd x = lu.solve(b);
      if (x.minCoeff() < -1e-12) return;
      double v = 0.0;
      for (int c = 0; c < k; ++c) v += x[c] * cost(pick[c] / n, pick[c] % n);
      best = std::min(best, v);
      return;
    }
    for (int c = start; c <= cells - (k - depth); ++c) {
      pick[depth] = c;
      rec(c + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Second derivative of f along the geodesic t -> exp_z(t u) at t = 0.
double geodesic_second_difference(const Chart& chart, const Point& z, const Tangent& u,
                                  const std::function<double(const Point&)>& f, double step) {
  return (f(chart.exp(z, step * u)) - 2.0 * f(z) + f(chart.exp(z, -step * u))) / (step * step);
}

// Hessian in the frame at z from polarized second differences along geodesics.
Eigen::MatrixXd geodesic_hessian(const Chart& chart, const Point& z,
                                 const std::function<double(const Point&)>& f, double step) {
  const int d = chart.dim();
  const Eigen::MatrixXd frame = chart.frame(z);
  Eigen::MatrixXd h(d, d);
  for (int a = 0; a < d; ++a) {
    h(a, a) = geodesic_second_difference(chart, z, frame.col(a), f, step);
    for (int b = 0; b < a; ++b) {
      const double plus = geodesic_second_difference(chart, z, frame.col(a) + frame.col(b), f, step);
      const double minus = geodesic_second_difference(chart, z, frame.col(a) - frame.col(b), f, step);
      h(a, b) = h(b, a) = 0.25 * (plus - minus);
    }
  }
  return h;
}

double max_length(const Chart& chart) {
  return chart.compact() ? 0.9 * kPi * chart.sphere_radius() : 3.0;
}

// Pair at distance drawn uniformly in [lo, hi].
std::pair<Point, Point> random_pair(const Chart& chart, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(lo, hi);
  const Point z = random_point(chart, rng);
  return {z, chart.exp(z, random_tangent(chart, z, r(rng), rng))};
}

}  // namespace

std::vector<CheckRow> verify_geometry(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Tally round_trip("exp_log_round_trip", 1e-8);
  Tally symmetry("dist_symmetry", 1e-12);
  Tally exp_length("exp_geodesic_length", 1e-9);
  Tally grad("grad_dist_central_difference", 1e-6);
  Tally hess("hess_dist_second_difference", 1e-5);
  Tally cut("sphere_log_refuses_cut_locus", 0.0);
  Tally cells("cell_volumes_sum_to_ball_volume", 1e-2);

  for (const Chart& chart : test_charts()) {
    for (int t = 0; t < 100; ++t) {
      const Point z = random_point(chart, rng);
      const double len = max_length(chart) * (0.01 + 0.99 * unif(rng));
      const Tangent v = random_tangent(chart, z, len, rng);
      const Point y = chart.exp(z, v);
      round_trip.add(chart.norm(z, chart.log(z, y) - v));
      exp_length.add(std::abs(chart.dist(z, y) - len) / std::max(1.0, len));
      const Point w = random_point(chart, rng);
      symmetry.add(std::abs(chart.dist(z, w) - chart.dist(w, z)));

      auto [a, b] = random_pair(chart, 0.05, max_length(chart), rng);
      const Tangent u = random_tangent(chart, a, 1.0, rng);
      auto f = [&chart, &b = b](const Point& p) { return chart.dist(p, b); };
      const double step = 1e-5;
      const double fd = (f(chart.exp(a, step * u)) - f(chart.exp(a, -step * u))) / (2.0 * step);
      grad.add(std::abs(fd - chart.inner(a, chart.grad_dist(a, b), u)));
      const double r = chart.dist(a, b);
      const Eigen::MatrixXd h = geodesic_hessian(chart, a, f, 1e-3 * std::min(1.0, r));
      hess.add((h - chart.hess_dist(a, b)).cwiseAbs().maxCoeff());
    }
  }

  const Chart sphere = Chart::sphere(2);
  for (int t = 0; t < 20; ++t) {
    const Point z = random_point(sphere, rng);
    const Point anti = sphere.exp(z, random_tangent(sphere, z, kPi * (1.0 - 1e-9 * unif(rng)), rng));
    bool refused = false;
    try {
      sphere.log(z, anti);
    } catch (const CutLocusError&) {
      refused = true;
    }
    cut.add(refused ? 0.0 : 1.0);
  }

  for (const Chart& chart : test_charts()) {
    for (double radius : {0.3, 1.0}) {
      const Ball ball{random_point(chart, rng), radius};
      const CellPartition part = uniform_cell_volumes(chart, ball, 24);
      const double vol = chart.ball_volume(radius);
      cells.add(std::abs(part.total_volume() - vol) / vol);
    }
  }
  return {round_trip.row(), exp_length.row(), symmetry.row(), grad.row(), hess.row(), cut.row(),
          cells.row()};
}

std::vector<CheckRow> verify_transport(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Tally exact("lp_matches_vertex_enumeration", 1e-9);
  Tally gap("duality_gap", 1e-8);
  Tally feasible("dual_feasibility", 1e-9);
  Tally slack("support_in_c_superdifferential", 1e-8);
  Tally marg("marginal_certificate", 1e-10);
  Tally lipschitz("c_transform_lipschitz", 1e-12);
  Tally idempotent("c_transform_idempotent", 1e-12);
  Tally tangency("monge_map_matches_plan", 1e-7);
  Tally monotone("mmot_cyclical_monotonicity", 1e-8);
  Tally injective("mmot_injectivity_violations", 0.0);
  Tally margins("barycenter_cut_margin", 0.0);

  for (auto [m, n] : {std::pair{2, 2}, std::pair{2, 3}, std::pair{3, 3}}) {
    for (int t = 0; t < 30; ++t) {
      Eigen::MatrixXd cost(m, n);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) cost(i, j) = unif(rng);
      }
      const auto s = random_weights(m, rng);
      const auto d = random_weights(n, rng);
      const Eigen::VectorXd supply = Eigen::Map<const Eigen::VectorXd>(s.data(), m);
      const Eigen::VectorXd demand = Eigen::Map<const Eigen::VectorXd>(d.data(), n);
      const TransportSolution sol = solve_transportation(supply, demand, cost);
      exact.add(std::abs(sol.cost - vertex_enumeration_cost(supply, demand, cost)));
      gap.add(std::abs(sol.cost - sol.u.dot(supply) - sol.v.dot(demand)));
      double worst = 0.0;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) worst = std::max(worst, sol.u[i] + sol.v[j] - cost(i, j));
      }
      feasible.add(worst);
      double comp = 0.0;
      for (const Flow& f : sol.basis) {
        if (f.mass > 1e-15) comp = std::max(comp, std::abs(sol.u[f.row] + sol.v[f.col] - cost(f.row, f.col)));
      }
      slack.add(comp);
    }
  }

  const Chart sphere = Chart::sphere(2);
  for (int t = 0; t < 20; ++t) {
    const CostProfile profile = CostProfile::power(t % 3 == 0 ? 1.5 : (t % 3 == 1 ? 2.0 : 3.0));
    const Ball cap{random_point(sphere, rng), 1.0};
    const DiscreteMeasure mu = random_measure(sphere, cap, 4, rng);
    const DiscreteMeasure nu = random_measure(sphere, cap, 4, rng);
    const Ot2Result res = solve_ot2(sphere, mu, nu, profile);
    marg.add(res.plan.marginal_error());

    // Lipschitz bound of a c-transform by h'(diameter).
    const CTransform ct = c_transform(sphere, profile, nu.points, res.potential.xi, mu.points);
    double diam = 0.0;
    for (const auto& x : mu.points) {
      for (const auto& y : nu.points) diam = std::max(diam, sphere.dist(x, y));
      for (const auto& y : mu.points) diam = std::max(diam, sphere.dist(x, y));
    }
    for (std::size_t a = 0; a < mu.size(); ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        const double d = sphere.dist(mu.points[a], mu.points[b]);
        lipschitz.add(std::max(0.0, std::abs(ct.values[a] - ct.values[b]) - profile.deriv(diam) * d));
      }
    }
    const CTransform back = c_transform(sphere, profile, mu.points, ct.values, nu.points);
    const CTransform again = c_transform(sphere, profile, nu.points, back.values, mu.points);
    idempotent.add((again.values - ct.values).cwiseAbs().maxCoeff());

    for (int i = 0; i < static_cast<int>(mu.size()); ++i) {
      const auto partner = plan_partner(res.plan, i);
      if (!partner || sphere.dist(mu.points[i], nu.points[*partner]) < 1e-6) continue;
      const MongeImage img =
          monge_map_from_potential(sphere, profile, nu.points, res.potential.xi, mu.points[i]);
      if (!img.differentiable) continue;
      tangency.add(sphere.dist(img.image, nu.points[*partner]));
    }
  }

  const std::vector<Chart> charts = {Chart::sphere(2), Chart::euclidean(2)};
  for (int t = 0; t < 24; ++t) {
    const Chart& chart = charts[t % 2];
    const CostProfile profile = CostProfile::power(t % 3 == 0 ? 1.5 : (t % 3 == 1 ? 2.0 : 3.0));
    const int n = 2 + (t / 2) % 2;
    const Ball cap{random_point(chart, rng), 1.2};
    std::vector<DiscreteMeasure> measures;
    for (int k = 0; k < n; ++k) measures.push_back(random_measure(chart, cap, 2 + (t + k) % 3, rng));
    const auto weights = random_weights(n, rng);
    const MultiPlan plan = solve_mmot(chart, measures, weights, profile);
    monotone.add(check_cyclical_monotonicity(plan, barycenter_tuple_cost(chart, profile, measures, weights)));
    const auto sols = support_barycenters(chart, profile, plan, weights);
    injective.add(static_cast<double>(check_injectivity(chart, plan, sols).violations.size()));
    if (chart.compact()) {
      for (const auto& s : sols) {
        for (double cm : s.cut_margins) margins.add(std::max(0.0, 1e-3 - cm));
      }
    }
  }
  return {exact.row(),      gap.row(),        feasible.row(),   slack.row(),
          marg.row(),       lipschitz.row(),  idempotent.row(), tangency.row(),
          monotone.row(),   injective.row(),  margins.row()};
}

std::vector<CheckRow> verify_invmap(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Tally round_trip("inverse_map_round_trip", 1e-7);
  Tally hess("hess_cost_second_difference", 1e-4);
  Tally field("anchor_field_gradient", 1e-6);
  Tally slope("collision_limit_slope_p3", 0.1);
  Tally blowup("hessian_blowup_slope_p1.5", 0.05);
  Tally probe("lipschitz_probe_stability", 0.1);
  Tally probe_collide("lipschitz_probe_collision_regime_finite", 0.0);

  const std::vector<double> exponents = {1.5, 2.0, 3.0};
  for (const Chart& chart : test_charts()) {
    for (int t = 0; t < 30; ++t) {
      const CostProfile profile = CostProfile::power(exponents[t % 3]);
      const int n = 2 + t % 2;
      const Ball cap{random_point(chart, rng), chart.kind() == ChartKind::hyperbolic ? 0.8 : 1.2};
      Configuration config;
      for (int k = 0; k < n; ++k) config.points.push_back(sample_ball(chart, cap, rng));
      config.weights = random_weights(n, rng);
      const BarycenterSolution sol = solve_barycenter(chart, profile, config);
      if (chart.dist(sol.z, config.points[0]) <= 1e-4) continue;
      AnchorSlice slice{chart, profile, {config.points.begin() + 1, config.points.end()}, config.weights};
      round_trip.add(chart.dist(inverse_map(slice, sol.z), config.points[0]));

      // V is -(1/lambda_1) times the gradient of the anchor part of Phi.
      const Point z = sample_ball(chart, cap, rng);
      auto g = [&](const Point& p) {
        double v = 0.0;
        for (std::size_t k = 1; k < config.points.size(); ++k) {
          v += config.weights[k] * profile.eval(chart.dist(p, config.points[k]));
        }
        return -v / config.weights[0];
      };
      const Tangent u = random_tangent(chart, z, 1.0, rng);
      const double step = 1e-5;
      const double fd = (g(chart.exp(z, step * u)) - g(chart.exp(z, -step * u))) / (2.0 * step);
      field.add(std::abs(fd - chart.inner(z, anchor_field(slice, z), u)) / std::max(1.0, std::abs(fd)));
    }
  }

  for (int t = 0; t < 300; ++t) {
    const Chart chart = test_charts()[t % 3];
    const CostProfile profile = CostProfile::power(exponents[(t / 3) % 3]);
    const double hi = chart.compact() ? 0.9 * kPi * chart.sphere_radius() : 2.0;
    auto [z, x] = random_pair(chart, 0.05, hi, rng);
    auto f = [&chart, &profile, &x = x](const Point& p) { return profile.eval(chart.dist(p, x)); };
    const double r = chart.dist(z, x);
    const Eigen::MatrixXd fd = geodesic_hessian(chart, z, f, 1e-3 * std::min(1.0, r));
    hess.add((fd - hess_cost(profile, chart, z, x)).cwiseAbs().maxCoeff());
  }

  std::vector<double> radii;
  for (int k = 4; k <= 12; ++k) radii.push_back(std::ldexp(1.0, -k));
  for (const Chart& chart : test_charts()) {
    const Point x = random_point(chart, rng);
    const auto rep = hessian_collision_limit_check(CostProfile::power(3.0), chart, x, radii, seed);
    slope.add(std::abs(rep.slope - 1.0));

    const CostProfile p15 = CostProfile::power(1.5);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (double r : radii) {
      double worst = 0.0;
      for (int d = 0; d < 8; ++d) {
        const Point z = chart.exp(x, random_tangent(chart, x, r, rng));
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(hess_cost(p15, chart, z, x));
        worst = std::max(worst, svd.singularValues()[0]);
      }
      const double lx = std::log(r), ly = std::log(worst);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double m = static_cast<double>(radii.size());
    blowup.add(std::abs((m * sxy - sx * sy) / (m * sxx - sx * sx) + 0.5));
  }

  const Chart sphere = Chart::sphere(2);
  for (int t = 0; t < 3; ++t) {
    const Point c = random_point(sphere, rng);
    const Point x2 = sphere.exp(c, random_tangent(sphere, c, 1.0, rng));
    AnchorSlice slice{sphere, CostProfile::power(1.5), {x2}, {0.5, 0.5}};
    const Ball region{c, 0.6};
    const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
    const auto a = lipschitz_probe(slice, region, 0.2, 1000, ProbeRegime::collision_free, s);
    const auto b = lipschitz_probe(slice, region, 0.2, 2000, ProbeRegime::collision_free, s + 100);
    probe.add(std::abs(a.constant - b.constant) / std::max(a.constant, b.constant));
    AnchorSlice quad{sphere, CostProfile::power(2.0), {x2}, {0.5, 0.5}};
    const auto q = lipschitz_probe(quad, region, 0.2, 1000, ProbeRegime::collision_allowed, s);
    probe_collide.add(std::isfinite(q.constant) ? 0.0 : 1.0);
  }
  return {round_trip.row(), hess.row(), field.row(), slope.row(), blowup.row(), probe.row(),
          probe_collide.row()};
}

std::vector<CheckRow> verify_counterexample(std::uint64_t) {
  const SharedBarycenterReport rep = counterexample_shared_barycenter();
  const double expected_quadratic[2] = {0.2, 0.1};
  std::vector<CheckRow> rows;
  for (std::size_t c = 0; c < rep.cases.size() && c < 2; ++c) {
    const auto& cs = rep.cases[c];
    Tally t("F" + std::to_string(c + 1) + "_shared_minimizer", 1e-4);
    t.add(std::abs(cs.grid_minimizer));
    // 0 must lie in [left, right].
    t.add(std::max(0.0, cs.left_derivative));
    t.add(std::max(0.0, -cs.right_derivative));
    rows.push_back(t.row());
    Tally q("F" + std::to_string(c + 1) + "_quadratic_barycenter", 1e-9);
    q.add(std::abs(cs.quadratic_barycenter - expected_quadratic[c]));
    rows.push_back(q.row());
  }

  // The two configurations embedded as one plan: both tuples land on the same barycenter.
  const Chart line = Chart::euclidean(1);
  const CostProfile h = CostProfile::counterexample();
  MultiPlan plan;
  plan.marginals = {DiscreteMeasure::dirac(Point::Constant(1, 0.0)),
                    {{Point::Constant(1, 1.0), Point::Constant(1, 0.5)}, {0.5, 0.5}}};
  plan.support = {{{0, 0}, 0.5}, {{0, 1}, 0.5}};
  BarycenterOptions opt;
  opt.allow_counterexample = true;
  const auto sols = support_barycenters(line, h, plan, {0.8, 0.2}, opt);
  Tally inj("counterexample_injectivity_violation_detected", 0.0);
  inj.add(check_injectivity(line, plan, sols).ok() ? 1.0 : 0.0);
  rows.push_back(inj.row());

  Tally refused("counterexample_refused_by_mmot", 0.0);
  try {
    solve_mmot(line, plan.marginals, {0.8, 0.2}, h);
    refused.add(1.0);
  } catch (const ProfileViolatesAssumptions&) {
    refused.add(0.0);
  }
  rows.push_back(refused.row());
  return rows;
}

std::vector<CheckRow> run_verify_suite(const std::string& suite, std::uint64_t seed) {
  std::vector<CheckRow> rows;
  auto append = [&rows](std::vector<CheckRow> r) { rows.insert(rows.end(), r.begin(), r.end()); };
  const bool all = suite == "all";
  if (!all && suite != "geometry" && suite != "transport" && suite != "invmap" &&
      suite != "counterexample") {
    throw InvalidArgument("unknown verify suite \"" + suite + "\"");
  }
  if (all || suite == "geometry") append(verify_geometry(seed));
  if (all || suite == "transport") append(verify_transport(seed));
  if (all || suite == "invmap") append(verify_invmap(seed));
  if (all || suite == "counterexample") append(verify_counterexample(seed));
  return rows;
}

std::string verify_csv(const std::vector<CheckRow>& rows) {
  std::ostringstream out;
  out.precision(6);
  out << "check,instances,max_violation,verdict\n";
  for (const auto& r : rows) {
    out << r.check << ',' << r.instances << ',' << std::scientific << r.max_violation
        << std::defaultfloat << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
  }
  return out.str();
}

bool all_pass(const std::vector<CheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

}  // namespace hbary
