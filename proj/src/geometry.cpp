#include "hbary/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hbary/errors.hpp"

namespace hbary {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDiskEdge = 1.0 - 1e-15;

// Mobius addition in the unit Poincare ball.
Eigen::VectorXd mobius_add(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ab = a.dot(b);
  const double aa = a.squaredNorm();
  const double bb = b.squaredNorm();
  const double den = 1.0 + 2.0 * ab + aa * bb;
  return ((1.0 + 2.0 * ab + bb) * a + (1.0 - aa) * b) / den;
}

double conformal(const Point& x) { return 2.0 / (1.0 - x.squaredNorm()); }

}  // namespace

std::string to_string(ChartKind kind) {
  switch (kind) {
    case ChartKind::euclidean:
      return "euclidean";
    case ChartKind::sphere:
      return "sphere";
    case ChartKind::hyperbolic:
      return "hyperbolic";
  }
  return "unknown";
}

Chart Chart::euclidean(int dim) {
  if (dim < 1) throw InvalidArgument("euclidean chart needs dim >= 1");
  return Chart(ChartKind::euclidean, dim, 0.0);
}

Chart Chart::sphere(int dim, double curvature) {
  if (dim < 1) throw InvalidArgument("sphere chart needs dim >= 1");
  if (!(curvature > 0.0) || !std::isfinite(curvature)) {
    throw InvalidArgument("sphere chart needs curvature > 0");
  }
  return Chart(ChartKind::sphere, dim, curvature);
}

Chart Chart::hyperbolic(double curvature) {
  if (!(curvature < 0.0) || !std::isfinite(curvature)) {
    throw InvalidArgument("hyperbolic chart needs curvature < 0");
  }
  return Chart(ChartKind::hyperbolic, 2, curvature);
}

Chart Chart::with_tolerances(const Tolerances& tol) const {
  Chart copy = *this;
  copy.tol_ = tol;
  return copy;
}

int Chart::ambient_dim() const { return kind_ == ChartKind::sphere ? dim_ + 1 : dim_; }

double Chart::sphere_radius() const {
  return kind_ == ChartKind::sphere ? 1.0 / std::sqrt(curvature_) : kInf;
}

bool Chart::contains(const Point& x) const {
  if (x.size() != ambient_dim() || !x.allFinite()) return false;
  switch (kind_) {
    case ChartKind::euclidean:
      return true;
    case ChartKind::sphere: {
      const double r = sphere_radius();
      return std::abs(x.norm() - r) <= tol_.sphere_membership_rel * r;
    }
    case ChartKind::hyperbolic:
      return x.squaredNorm() < 1.0;
  }
  return false;
}

void Chart::validate(const Point& x) const {
  if (x.size() != ambient_dim()) {
    throw ChartMembershipError("point has " + std::to_string(x.size()) + " coordinates, " +
                               to_string(kind_) + " chart expects " +
                               std::to_string(ambient_dim()));
  }
  if (!contains(x)) {
    throw ChartMembershipError("point is not on the " + to_string(kind_) + " chart");
  }
}

Point Chart::project(const Point& x) const {
  switch (kind_) {
    case ChartKind::euclidean:
      return x;
    case ChartKind::sphere: {
      const double n = x.norm();
      if (n == 0.0) throw InvalidArgument("cannot project the origin onto a sphere");
      return x * (sphere_radius() / n);
    }
    case ChartKind::hyperbolic: {
      const double n = x.norm();
      return n < kDiskEdge ? x : Point(x * (kDiskEdge / n));
    }
  }
  return x;
}

Tangent Chart::project_tangent(const Point& base, const Tangent& v) const {
  if (kind_ != ChartKind::sphere) return v;
  return v - (base.dot(v) / base.squaredNorm()) * base;
}

double Chart::dist(const Point& x, const Point& y) const {
  switch (kind_) {
    case ChartKind::euclidean:
      return (x - y).norm();
    case ChartKind::sphere: {
      // 2 atan2(|x-y|, |x+y|) is accurate both near 0 and near the antipode.
      const double r = sphere_radius();
      return 2.0 * r * std::atan2((x - y).norm(), (x + y).norm());
    }
    case ChartKind::hyperbolic: {
      const double s = std::sqrt(-curvature_);
      const double den = std::sqrt((1.0 - x.squaredNorm()) * (1.0 - y.squaredNorm()));
      return 2.0 / s * std::asinh((x - y).norm() / den);
    }
  }
  return 0.0;
}

Point Chart::exp(const Point& base, const Tangent& v) const {
  switch (kind_) {
    case ChartKind::euclidean:
      return base + v;
    case ChartKind::sphere: {
      const Tangent t = project_tangent(base, v);
      const double n = t.norm();
      if (n == 0.0) return base;
      const double r = sphere_radius();
      const double theta = n / r;
      Point y = std::cos(theta) * base + (r * std::sin(theta) / n) * t;
      return y * (r / y.norm());
    }
    case ChartKind::hyperbolic: {
      const double n = v.norm();
      if (n == 0.0) return base;
      const Eigen::VectorXd w = (std::tanh(conformal(base) * n / 2.0) / n) * v;
      return project(mobius_add(base, w));
    }
  }
  return base;
}

Tangent Chart::log(const Point& base, const Point& y) const {
  switch (kind_) {
    case ChartKind::euclidean:
      return y - base;
    case ChartKind::sphere: {
      const double d = dist(base, y);
      const double r = sphere_radius();
      if (d >= kPi * r - tol_.cut_locus_guard) {
        throw CutLocusError("log on the sphere: point is antipodal to the base");
      }
      if (d == 0.0) return Tangent::Zero(base.size());
      const Eigen::VectorXd diff = y - base;
      const Tangent u = diff - (base.dot(diff) / (r * r)) * base;
      const double un = u.norm();
      if (un == 0.0) return Tangent::Zero(base.size());
      return (d / un) * u;
    }
    case ChartKind::hyperbolic: {
      const Eigen::VectorXd w = mobius_add(-base, y);
      const double n = w.norm();
      if (n == 0.0) return Tangent::Zero(base.size());
      return (2.0 / conformal(base) * std::atanh(std::min(n, kDiskEdge)) / n) * w;
    }
  }
  return Tangent::Zero(base.size());
}

Tangent Chart::grad_dist(const Point& z, const Point& x) const {
  const double d = dist(z, x);
  if (d == 0.0) throw DiagonalError("distance gradient requested at z == x");
  return -log(z, x) / d;
}

double Chart::hess_tangential_factor(double r) const {
  switch (kind_) {
    case ChartKind::euclidean:
      return 1.0 / r;
    case ChartKind::sphere: {
      const double s = std::sqrt(curvature_);
      return s / std::tan(s * r);
    }
    case ChartKind::hyperbolic: {
      const double s = std::sqrt(-curvature_);
      return s / std::tanh(s * r);
    }
  }
  return 0.0;
}

Eigen::MatrixXd Chart::hess_dist(const Point& z, const Point& x) const {
  const Tangent g = grad_dist(z, x);
  const double r = dist(z, x);
  const Eigen::VectorXd n = to_frame(z, g);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim_, dim_);
  return hess_tangential_factor(r) * (id - n * n.transpose());
}

double Chart::injectivity_radius(const Point&) const {
  return kind_ == ChartKind::sphere ? kPi * sphere_radius() : kInf;
}

double Chart::inner(const Point& base, const Tangent& u, const Tangent& v) const {
  if (kind_ == ChartKind::hyperbolic) {
    const double lam = conformal(base);
    return lam * lam / (-curvature_) * u.dot(v);
  }
  return u.dot(v);
}

double Chart::norm(const Point& base, const Tangent& v) const {
  return std::sqrt(std::max(0.0, inner(base, v, v)));
}

Eigen::MatrixXd Chart::frame(const Point& base) const {
  switch (kind_) {
    case ChartKind::euclidean:
      return Eigen::MatrixXd::Identity(dim_, dim_);
    case ChartKind::sphere: {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(base / base.norm());
      Eigen::MatrixXd q = qr.householderQ();
      return q.rightCols(dim_);
    }
    case ChartKind::hyperbolic:
      return Eigen::MatrixXd::Identity(2, 2) * (std::sqrt(-curvature_) / conformal(base));
  }
  return {};
}

Eigen::VectorXd Chart::to_frame(const Point& base, const Tangent& v) const {
  switch (kind_) {
    case ChartKind::euclidean:
      return v;
    case ChartKind::sphere:
      return frame(base).transpose() * v;
    case ChartKind::hyperbolic:
      return v * (conformal(base) / std::sqrt(-curvature_));
  }
  return v;
}

Tangent Chart::from_frame(const Point& base, const Eigen::VectorXd& coeffs) const {
  switch (kind_) {
    case ChartKind::euclidean:
      return coeffs;
    case ChartKind::sphere:
      return frame(base) * coeffs;
    case ChartKind::hyperbolic:
      return coeffs * (std::sqrt(-curvature_) / conformal(base));
  }
  return coeffs;
}

double Chart::ball_volume(double r) const {
  if (r <= 0.0) return 0.0;
  const int m = dim_;
  if (kind_ == ChartKind::euclidean) {
    return std::pow(kPi, m / 2.0) / std::tgamma(m / 2.0 + 1.0) * std::pow(r, m);
  }
  if (kind_ == ChartKind::hyperbolic) {
    const double c = -curvature_;
    return 2.0 * kPi * (std::cosh(std::sqrt(c) * r) - 1.0) / c;
  }
  const double s = std::sqrt(curvature_);
  const double rr = std::min(r, kPi / s);
  if (m == 1) return 2.0 * rr;
  if (m == 2) return 2.0 * kPi * (1.0 - std::cos(s * rr)) / curvature_;
  // Area of the unit (m-1)-sphere times int_0^r (sin(s t)/s)^{m-1} dt, by Simpson.
  const double omega = 2.0 * std::pow(kPi, m / 2.0) / std::tgamma(m / 2.0);
  const int steps = 2000;
  const double hstep = rr / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = i * hstep;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::pow(std::sin(s * t) / s, m - 1);
  }
  return omega * acc * hstep / 3.0;
}

std::vector<Point> Chart::ball_grid(const Ball& ball, int per_dim) const {
  if (per_dim < 2) throw InvalidArgument("ball_grid needs at least 2 points per axis");
  const double r = std::min(ball.radius, injectivity_radius(ball.center));
  const Eigen::MatrixXd e = frame(ball.center);
  std::vector<Point> out;
  out.push_back(ball.center);
  std::vector<int> idx(dim_, 0);
  const double stepw = 2.0 * r / (per_dim - 1);
  while (true) {
    Eigen::VectorXd c(dim_);
    for (int k = 0; k < dim_; ++k) c[k] = -r + stepw * idx[k];
    if (c.norm() <= r * (1.0 + 1e-12) && c.norm() > 0.0) {
      out.push_back(exp(ball.center, e * c));
    }
    int k = 0;
    while (k < dim_ && ++idx[k] == per_dim) idx[k++] = 0;
    if (k == dim_) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cell partitions

double CellPartition::total_volume() const {
  double s = 0.0;
  for (const auto& c : cells_) s += c.volume;
  return s;
}

double CellPartition::max_volume() const {
  double m = 0.0;
  for (const auto& c : cells_) m = std::max(m, c.volume);
  return m;
}

std::optional<std::size_t> CellPartition::locate(const Chart& chart, const Point& p) const {
  Tangent v;
  try {
    v = chart.log(region_.center, p);
  } catch (const CutLocusError&) {
    return std::nullopt;
  }
  const Eigen::VectorXd c = chart.to_frame(region_.center, v);
  const double r = region_.radius;
  const int res = resolution_;
  switch (layout_) {
    case Layout::interval: {
      const double t = c[0];
      if (std::abs(t) > r) return std::nullopt;
      const int i = std::clamp(static_cast<int>(std::floor((t + r) / (2.0 * r) * res)), 0, res - 1);
      return static_cast<std::size_t>(i);
    }
    case Layout::polar: {
      const double rho = c.norm();
      if (rho > r) return std::nullopt;
      const int k = std::clamp(static_cast<int>(std::floor(rho / r * res)), 0, res - 1);
      const int sectors = 2 * k + 1;
      double phi = std::atan2(c[1], c[0]);
      if (phi < 0.0) phi += 2.0 * kPi;
      const int s = std::clamp(static_cast<int>(std::floor(phi / (2.0 * kPi) * sectors)), 0,
                               sectors - 1);
      return static_cast<std::size_t>(k * k + s);
    }
    case Layout::cubes: {
      if (c.norm() > r) return std::nullopt;
      long lin = 0;
      for (int k = c.size() - 1; k >= 0; --k) {
        const int i = std::clamp(static_cast<int>(std::floor((c[k] + r) / (2.0 * r) * res)), 0,
                                 res - 1);
        lin = lin * res + i;
      }
      const long cell = cube_lookup_[static_cast<std::size_t>(lin)];
      if (cell < 0) return std::nullopt;
      return static_cast<std::size_t>(cell);
    }
  }
  return std::nullopt;
}

CellPartition uniform_cell_volumes(const Chart& chart, const Ball& region, int resolution) {
  if (!(region.radius > 0.0)) throw InvalidArgument("cell partition needs a positive radius");
  if (resolution < 2) throw InvalidArgument("cell partition needs at least 2 cells per dimension");
  chart.validate(region.center);
  if (region.radius >= chart.injectivity_radius(region.center)) {
    throw InvalidArgument("cell partition region reaches the cut locus of its center");
  }

  CellPartition part;
  part.region_ = region;
  part.resolution_ = resolution;
  const Eigen::MatrixXd e = chart.frame(region.center);
  const double r = region.radius;
  const int m = chart.dim();

  if (m == 1) {
    part.layout_ = CellPartition::Layout::interval;
    const double w = 2.0 * r / resolution;
    for (int i = 0; i < resolution; ++i) {
      Eigen::VectorXd c(1);
      c[0] = -r + (i + 0.5) * w;
      part.cells_.push_back({chart.exp(region.center, e * c), w});
    }
  } else if (m == 2) {
    part.layout_ = CellPartition::Layout::polar;
    for (int k = 0; k < resolution; ++k) {
      const double r0 = r * k / resolution;
      const double r1 = r * (k + 1) / resolution;
      const int sectors = 2 * k + 1;
      const double vol = (chart.ball_volume(r1) - chart.ball_volume(r0)) / sectors;
      for (int s = 0; s < sectors; ++s) {
        const double rho = k == 0 ? 0.0 : 0.5 * (r0 + r1);
        const double phi = 2.0 * kPi * (s + 0.5) / sectors;
        Eigen::VectorXd c(2);
        c << rho * std::cos(phi), rho * std::sin(phi);
        part.cells_.push_back({chart.exp(region.center, e * c), vol});
      }
    }
  } else {
    if (chart.kind() != ChartKind::euclidean) {
      throw InvalidArgument("cell partitions in dimension > 2 are only available on euclidean charts");
    }
    part.layout_ = CellPartition::Layout::cubes;
    long total = 1;
    for (int k = 0; k < m; ++k) total *= resolution;
    part.cube_lookup_.assign(static_cast<std::size_t>(total), -1);
    const double w = 2.0 * r / resolution;
    const int sub = 4;
    long subtotal = 1;
    for (int k = 0; k < m; ++k) subtotal *= sub;
    for (long lin = 0; lin < total; ++lin) {
      Eigen::VectorXd lo(m);
      long rem = lin;
      for (int k = 0; k < m; ++k) {
        lo[k] = -r + (rem % resolution) * w;
        rem /= resolution;
      }
      long inside = 0;
      for (long s = 0; s < subtotal; ++s) {
        long q = s;
        Eigen::VectorXd p(m);
        for (int k = 0; k < m; ++k) {
          p[k] = lo[k] + ((q % sub) + 0.5) * w / sub;
          q /= sub;
        }
        if (p.norm() <= r) ++inside;
      }
      if (inside == 0) continue;
      const Eigen::VectorXd mid = lo.array() + 0.5 * w;
      part.cube_lookup_[static_cast<std::size_t>(lin)] = static_cast<long>(part.cells_.size());
      part.cells_.push_back(
          {region.center + mid, std::pow(w, m) * static_cast<double>(inside) / subtotal});
    }
  }
  return part;
}

double partition_max_volume(const Chart& chart, const Ball& region, int resolution) {
  if (!(region.radius > 0.0) || resolution < 2) {
    throw InvalidArgument("cell partition needs a positive radius and resolution >= 2");
  }
  const double r = region.radius;
  if (chart.dim() == 1) return 2.0 * r / resolution;
  if (chart.dim() == 2) {
    double worst = 0.0;
    for (int k = 0; k < resolution; ++k) {
      const double vol = (chart.ball_volume(r * (k + 1) / resolution) -
                          chart.ball_volume(r * k / resolution)) / (2 * k + 1);
      worst = std::max(worst, vol);
    }
    return worst;
  }
  return std::pow(2.0 * r / resolution, chart.dim());
}

}  // namespace hbary
