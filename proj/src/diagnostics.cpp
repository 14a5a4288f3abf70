#include "hbary/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "hbary/errors.hpp"
#include "hbary/invmap.hpp"
#include "hbary/sampling.hpp"

namespace hbary {

namespace {

constexpr double kPi = std::numbers::pi;

// Radius rho in [0, r] with ball_volume(rho) = target.
double radius_for_volume(const Chart& chart, double target, double r) {
  double lo = 0.0, hi = r;
  for (int i = 0; i < 200 && hi - lo > 1e-16 * r; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chart.ball_volume(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> normalized(std::vector<double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  for (double& v : w) v /= s;
  return w;
}

std::vector<DiscreteMeasure> discretize_all(const ExperimentBase& spec, int level_first,
                                            int level_rest) {
  std::vector<DiscreteMeasure> out;
  for (std::size_t k = 0; k < spec.measures.size(); ++k) {
    out.push_back(discretize(spec.chart, spec.measures[k], k == 0 ? level_first : level_rest));
  }
  return out;
}

void check_experiment(const ExperimentBase& spec) {
  if (spec.measures.size() < 2) throw InvalidArgument("experiment needs at least two marginals");
  if (spec.weights.size() != spec.measures.size()) {
    throw InvalidArgument("experiment needs one weight per marginal");
  }
  if (spec.levels < 1) throw InvalidArgument("experiment needs at least one level");
}

MmotOptions mmot_options(const ExperimentBase& spec) {
  MmotOptions o;
  o.max_tuples = spec.max_tuples;
  o.workers = spec.workers;
  o.barycenter.tol_scale = spec.tol_scale;
  return o;
}

// Largest delta on the grid eps * volume * 2^{-i/4} at which m passes the estimator, or 0 when
// none does (atoms heavier than eps).
double calibrate_delta(const Chart& chart, const DiscreteMeasure& m, double volume, double eps) {
  const double heaviest = *std::max_element(m.weights.begin(), m.weights.end());
  if (heaviest > eps * (1.0 + 1e-9)) return 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double delta = eps * volume * std::pow(2.0, -0.25 * i);
    if (e_class_estimate(chart, m, eps, delta).pass) return delta;
  }
  return 0.0;
}

}  // namespace

DiscreteMeasure discretize(const Chart& chart, const MeasureSpec& spec, int level) {
  if (spec.kind == MeasureSpec::Kind::atoms) return spec.atoms;
  if (level < 0 || level > 12) throw InvalidArgument("discretization level must lie in [0, 12]");
  const Ball& ball = spec.ball;
  chart.validate(ball.center);
  if (!(ball.radius > 0.0)) throw InvalidArgument("uniform ball needs a positive radius");
  if (ball.radius >= chart.injectivity_radius(ball.center)) {
    throw InvalidArgument("uniform ball reaches the cut locus of its center");
  }
  const Eigen::MatrixXd e = chart.frame(ball.center);
  const std::size_t count = std::size_t{1} << (2 * level);
  DiscreteMeasure out;
  out.weights.assign(count, 1.0 / static_cast<double>(count));

  if (chart.dim() == 1) {
    const double w = 2.0 * ball.radius / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) {
      Eigen::VectorXd c(1);
      c[0] = -ball.radius + (static_cast<double>(i) + 0.5) * w;
      out.points.push_back(chart.exp(ball.center, e * c));
    }
    return out;
  }
  if (chart.dim() != 2) {
    throw InvalidArgument("uniform ball quantization supports dimensions 1 and 2");
  }
  const int rings = 1 << level;
  const double total = chart.ball_volume(ball.radius);
  for (int k = 0; k < rings; ++k) {
    const int sectors = 2 * k + 1;
    const double mid = 0.5 * (double(k) * k + double(k + 1) * (k + 1)) / (double(rings) * rings);
    const double rho = k == 0 ? 0.0 : radius_for_volume(chart, total * mid, ball.radius);
    for (int s = 0; s < sectors; ++s) {
      const double phi = 2.0 * kPi * (s + 0.5) / sectors;
      Eigen::VectorXd c(2);
      c << rho * std::cos(phi), rho * std::sin(phi);
      out.points.push_back(chart.exp(ball.center, e * c));
    }
  }
  return out;
}

DiscreteMeasure merge_atoms(const Chart& chart, const DiscreteMeasure& m, double tol) {
  DiscreteMeasure out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    bool merged = false;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (chart.dist(out.points[j], m.points[i]) <= tol) {
        out.weights[j] += m.weights[i];
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.points.push_back(m.points[i]);
      out.weights.push_back(m.weights[i]);
    }
  }
  return out;
}

BlDictionary::BlDictionary(const Chart& chart, const Ball& region, int count, std::uint64_t seed)
    : chart_(chart) {
  if (count < 1) throw InvalidArgument("BL dictionary needs at least one function");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    anchors_.push_back(sample_ball(chart, region, rng));
    shifts_.push_back(2.0 * region.radius * unif(rng));
  }
}

Eigen::VectorXd BlDictionary::integrals(const DiscreteMeasure& m) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(anchors_.size()));
  for (std::size_t k = 0; k < anchors_.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double f = std::clamp(chart_.dist(m.points[i], anchors_[k]) - shifts_[k], -1.0, 1.0);
      s += m.weights[i] * f;
    }
    out[static_cast<Eigen::Index>(k)] = s;
  }
  return out;
}

double BlDictionary::distance(const DiscreteMeasure& a, const DiscreteMeasure& b) const {
  return (integrals(a) - integrals(b)).cwiseAbs().maxCoeff();
}

Ball support_ball(const Chart& chart, const DiscreteMeasure& m, double min_radius) {
  if (m.size() == 0) throw InvalidArgument("support ball of an empty measure");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m.points.front().size());
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    mean += m.weights[i] * m.points[i];
    total += m.weights[i];
  }
  mean /= total;
  Point center = mean;
  if (chart.kind() == ChartKind::sphere) {
    center = mean.norm() > 1e-12 ? chart.project(mean) : m.points.front();
  } else {
    center = chart.project(mean);
  }
  double r = 0.0;
  for (const auto& p : m.points) r = std::max(r, chart.dist(center, p));
  r = std::max(1.0001 * r, min_radius);
  if (r == 0.0) r = 1e-3;
  if (chart.compact()) r = std::min(r, 0.999 * chart.injectivity_radius(center));
  return {center, r};
}

EClassVerdict e_class_estimate(const Chart& chart, const DiscreteMeasure& m,
                               const CellPartition& cells, double epsilon, double delta) {
  if (!(delta > 0.0) || !(epsilon >= 0.0)) throw InvalidArgument("class estimate needs delta > 0");
  if (cells.max_volume() >= delta) {
    throw InvalidArgument("cell partition is too coarse for delta");
  }
  std::vector<double> mass(cells.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (auto c = cells.locate(chart, m.points[i])) mass[*c] += m.weights[i];
  }
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto& cs = cells.cells();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mass[a] / cs[a].volume > mass[b] / cs[b].volume;
  });

  EClassVerdict v;
  v.cells = cells.size();
  v.worst_cell = order.front();
  v.worst_density = mass[order.front()] / cs[order.front()].volume;
  for (std::size_t c : order) {
    const double vol = cs[c].volume;
    if (v.volume + vol <= delta) {
      v.volume += vol;
      v.mass += mass[c];
    } else {
      v.mass += mass[c] * (delta - v.volume) / vol;
      v.volume = delta;
      break;
    }
  }
  v.pass = v.mass <= epsilon * (1.0 + 1e-9) + 1e-15;
  return v;
}

EClassVerdict e_class_estimate(const Chart& chart, const DiscreteMeasure& m, double epsilon,
                               double delta) {
  const Ball region = support_ball(chart, m);
  const int cap = chart.dim() == 1 ? (1 << 24) : 4096;
  auto fine_enough = [&](int res) {
    return partition_max_volume(chart, region, res) < delta;
  };
  int hi = 2;
  while (!fine_enough(hi)) {
    if (hi >= cap) throw InvalidArgument("no partition resolution reaches cells below delta");
    hi = std::min(2 * hi, cap);
  }
  int lo = std::max(2, hi / 2);
  if (lo < hi && !fine_enough(lo)) {
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (fine_enough(mid) ? hi : lo) = mid;
    }
  } else {
    hi = lo;
  }
  return e_class_estimate(chart, m, uniform_cell_volumes(chart, region, hi), epsilon, delta);
}

DiscreteMeasure barycenter_measure(const MultiPlan& plan,
                                   const std::vector<BarycenterSolution>& solutions) {
  if (solutions.size() != plan.support.size()) {
    throw InvalidArgument("need one barycenter per support tuple");
  }
  DiscreteMeasure out;
  for (std::size_t a = 0; a < solutions.size(); ++a) {
    out.points.push_back(solutions[a].z);
    out.weights.push_back(plan.support[a].mass);
  }
  return out;
}

double collision_mass(const Chart& chart, const MultiPlan& plan,
                      const std::vector<BarycenterSolution>& solutions, double alpha) {
  double mass = 0.0;
  for (std::size_t a = 0; a < solutions.size(); ++a) {
    for (std::size_t k = 0; k < plan.marginals.size(); ++k) {
      if (chart.dist(solutions[a].z, plan.marginals[k].points[plan.support[a].idx[k]]) < alpha) {
        mass += plan.support[a].mass;
        break;
      }
    }
  }
  return mass;
}

ConsistencyReport consistency_experiment(const ConsistencySpec& spec) {
  check_experiment(spec);
  const int levels = spec.levels;
  const MmotOptions opts = mmot_options(spec);

  std::vector<DiscreteMeasure> bary(levels + 1);
  ConsistencyReport rep;
  for (int j = 1; j <= levels; ++j) {
    const auto ms = discretize_all(spec, levels, j);
    const MultiPlan plan = solve_mmot(spec.chart, ms, spec.weights, spec.profile, opts);
    const auto sols = support_barycenters(spec.chart, spec.profile, plan, spec.weights, opts.barycenter);
    bary[j] = barycenter_measure(plan, sols);
    ConsistencyRow row;
    row.level = j;
    row.atoms = bary[j].size();
    row.cost = plan.total_cost;
    rep.rows.push_back(row);
  }

  DiscreteMeasure reference;
  if (spec.has_reference) reference = discretize(spec.chart, spec.reference, spec.reference_level);
  Ball region = support_ball(spec.chart, bary[levels]);
  region.radius *= 1.25;
  if (spec.chart.compact()) {
    region.radius = std::min(region.radius, 0.99 * spec.chart.injectivity_radius(region.center));
  }
  const BlDictionary dict(spec.chart, region, 200, spec.seed);
  for (auto& row : rep.rows) {
    row.bl_to_final = dict.distance(bary[row.level], bary[levels]);
    if (spec.has_reference) row.bl_to_reference = dict.distance(bary[row.level], reference);
  }

  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const double prev = spec.has_reference ? rep.rows[i - 1].bl_to_reference : rep.rows[i - 1].bl_to_final;
    const double cur = spec.has_reference ? rep.rows[i].bl_to_reference : rep.rows[i].bl_to_final;
    if (cur > rep.slack * prev + 1e-15) rep.monotone = false;
  }
  return rep;
}

AbsContinuityReport abs_continuity_experiment(const AbsContinuitySpec& spec) {
  check_experiment(spec);
  if (spec.which_case != 1 && spec.which_case != 2) throw InvalidArgument("case must be 1 or 2");
  if (spec.measures[0].kind != MeasureSpec::Kind::uniform_ball) {
    throw InvalidArgument("the first marginal must be diffuse");
  }
  if (spec.which_case == 1 && !spec.profile.origin().is_c2()) {
    throw InvalidArgument("case 1 needs a profile with a C^2 origin");
  }
  if (spec.which_case == 2) {
    for (const auto& m : spec.measures) {
      if (m.kind != MeasureSpec::Kind::uniform_ball) {
        throw InvalidArgument("case 2 needs every marginal diffuse");
      }
    }
  }
  if (spec.k_max < 1) throw InvalidArgument("epsilon ladder needs k_max >= 1");
  const MmotOptions opts = mmot_options(spec);
  const int m_dim = spec.chart.dim();
  const double volume1 = spec.chart.ball_volume(spec.measures[0].ball.radius);

  struct Level {
    std::vector<DiscreteMeasure> marginals;
    MultiPlan plan;
    DiscreteMeasure bary;
  };
  std::vector<Level> levels;
  for (int j = 1; j <= spec.levels; ++j) {
    Level lv;
    lv.marginals = discretize_all(spec, j, j);
    lv.plan = solve_mmot(spec.chart, lv.marginals, spec.weights, spec.profile, opts);
    lv.bary = barycenter_measure(
        lv.plan, support_barycenters(spec.chart, spec.profile, lv.plan, spec.weights, opts.barycenter));
    levels.push_back(std::move(lv));
  }

  // Empirical Lipschitz constant of the inverse map over anchors taken from the finest plan.
  const Level& finest = levels.back();
  const Ball region = support_ball(spec.chart, finest.bary);
  const ProbeRegime regime =
      spec.which_case == 1 ? ProbeRegime::collision_allowed : ProbeRegime::collision_free;
  const std::size_t s = finest.plan.support.size();
  const std::size_t picks = std::min<std::size_t>(std::max(1, spec.probe_anchors), s);
  double lip = 0.0;
  int probed = 0;
  for (std::size_t q = 0; q < picks; ++q) {
    const std::size_t a = picks == 1 ? 0 : q * (s - 1) / (picks - 1);
    AnchorSlice slice{spec.chart, spec.profile, {}, spec.weights};
    for (std::size_t k = 1; k < spec.measures.size(); ++k) {
      slice.anchors.push_back(finest.marginals[k].points[finest.plan.support[a].idx[k]]);
    }
    try {
      lip = std::max(lip, lipschitz_probe(slice, region, spec.alpha, spec.probe_pairs, regime,
                                          spec.seed + q)
                              .constant);
      ++probed;
    } catch (const RegionViolation&) {
    }
  }
  if (probed == 0) throw RegionViolation("no anchor admits a Lipschitz probe in the region");

  AbsContinuityReport rep;
  rep.lipschitz = lip;
  rep.final_pass = true;
  rep.resolved_pass = true;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const Level& lv = levels[li];
    for (int k = 1; k <= spec.k_max; ++k) {
      LadderRow row;
      row.level = static_cast<int>(li) + 1;
      row.k = k;
      row.epsilon = std::ldexp(1.0, -k);
      row.delta_first = calibrate_delta(spec.chart, lv.marginals[0], volume1, row.epsilon);
      row.lipschitz = lip;
      row.delta = row.delta_first / std::pow(std::max(lip, 1.0), m_dim);
      row.resolved = row.delta > 0.0;
      if (row.resolved) {
        const EClassVerdict v = e_class_estimate(spec.chart, lv.bary, row.epsilon, row.delta);
        row.mass = v.mass;
        row.pass = v.pass;
      } else {
        row.mass = std::numeric_limits<double>::quiet_NaN();
      }
      if (row.level == spec.levels && !row.pass) rep.final_pass = false;
      if (row.resolved && !row.pass) rep.resolved_pass = false;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

std::vector<AnnulusPiece> annulus_decompose(const Chart& chart, const DiscreteMeasure& m,
                                            const Point& center, int budget) {
  if (budget < 1) throw InvalidArgument("annulus budget must be positive");
  chart.validate(center);
  std::vector<double> dist(m.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    dist[i] = chart.dist(center, m.points[i]);
    dmax = std::max(dmax, dist[i]);
  }
  const double width = dmax > 0.0 ? dmax * (1.0 + 1e-9) / budget : 1.0;
  std::vector<int> shell(m.size());
  std::vector<char> occupied(budget, 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    shell[i] = std::min(budget - 1, static_cast<int>(dist[i] / width));
    occupied[shell[i]] = 1;
  }

  std::vector<AnnulusPiece> pieces;
  std::vector<int> piece_of(budget, -1);
  for (int s = 0; s < budget;) {
    if (!occupied[s]) {
      ++s;
      continue;
    }
    int e = s;
    while (e + 1 < budget && occupied[e + 1]) ++e;
    AnnulusPiece p;
    p.inner = s == 0 ? 0.0 : (s - 0.5) * width;
    p.outer = e + 1 == budget ? std::numeric_limits<double>::infinity() : (e + 1.5) * width;
    for (int k = s; k <= e; ++k) piece_of[k] = static_cast<int>(pieces.size());
    pieces.push_back(p);
    s = e + 1;
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    AnnulusPiece& p = pieces[piece_of[shell[i]]];
    p.measure.points.push_back(m.points[i]);
    p.measure.weights.push_back(m.weights[i]);
    p.mass += m.weights[i];
  }
  double total = 0.0;
  for (const auto& p : pieces) total += p.mass;
  for (auto& p : pieces) {
    p.measure.weights = normalized(p.measure.weights);
    p.mass /= total;
  }
  return pieces;
}

std::vector<PlanPiece> annulus_decompose(const Chart& chart, const MultiPlan& plan,
                                         const Point& center, int budget) {
  // Decompose the first-marginal projection of the support, then split the tuples accordingly.
  DiscreteMeasure firsts;
  for (const auto& a : plan.support) {
    firsts.points.push_back(plan.marginals[0].points[a.idx[0]]);
    firsts.weights.push_back(a.mass);
  }
  const auto shells = annulus_decompose(chart, firsts, center, budget);
  std::vector<PlanPiece> out(shells.size());
  for (std::size_t a = 0; a < plan.support.size(); ++a) {
    const double d = chart.dist(center, firsts.points[a]);
    std::size_t piece = 0;
    while (piece + 1 < shells.size() && d >= shells[piece].outer) ++piece;
    out[piece].plan.support.push_back(plan.support[a]);
    out[piece].mass += plan.support[a].mass;
  }
  double total = 0.0;
  for (const auto& p : out) total += p.mass;
  for (auto& p : out) {
    MultiPlan& sub = p.plan;
    const std::size_t n = plan.marginals.size();
    sub.marginals.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::map<int, int> remap;
      for (auto& atom : sub.support) {
        const int old = atom.idx[k];
        auto it = remap.find(old);
        if (it == remap.end()) {
          it = remap.emplace(old, static_cast<int>(sub.marginals[k].size())).first;
          sub.marginals[k].points.push_back(plan.marginals[k].points[old]);
          sub.marginals[k].weights.push_back(0.0);
        }
        sub.marginals[k].weights[it->second] += atom.mass / p.mass;
        atom.idx[k] = it->second;
      }
    }
    for (auto& atom : sub.support) atom.mass /= p.mass;
    p.mass /= total;
  }
  return out;
}

}  // namespace hbary
