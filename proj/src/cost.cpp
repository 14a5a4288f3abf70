#include "hbary/cost.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hbary/errors.hpp"

namespace hbary {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest upper bracket u = 2^j with f(u) >= target; +inf if it would exceed cap.
double bracket_increasing(const ScalarFn& f, double target, double start, double cap) {
  double hi = std::max(1.0, start);
  while (f(hi) < target) {
    if (hi >= cap) return kInf;
    hi = std::min(2.0 * hi, cap);
  }
  return hi;
}

}  // namespace

std::string to_string(OriginClass origin) {
  switch (origin.kind) {
    case OriginClass::Kind::c2_at_zero: {
      std::ostringstream os;
      os << "c2_at_zero(" << origin.h2_at_zero << ")";
      return os.str();
    }
    case OriginClass::Kind::singular_at_zero:
      return "singular_at_zero";
    case OriginClass::Kind::violates_h2:
      return "violates_h2";
  }
  return "unknown";
}

CostProfile CostProfile::power(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("power profile needs p > 1");
  CostProfile prof;
  prof.p_ = p;
  prof.h_ = [p](double t) { return std::pow(t, p) / p; };
  prof.dh_ = [p](double t) { return std::pow(t, p - 1.0); };
  prof.d2h_ = [p](double t) {
    if (t > 0.0) return (p - 1.0) * std::pow(t, p - 2.0);
    if (p > 2.0) return 0.0;
    if (p == 2.0) return 1.0;
    return kInf;
  };
  prof.inv_dh_ = [p](double s) { return s <= 0.0 ? 0.0 : std::pow(s, 1.0 / (p - 1.0)); };
  prof.domain_max_ = kInf;
  if (p > 2.0) {
    prof.origin_ = {OriginClass::Kind::c2_at_zero, 0.0};
  } else if (p == 2.0) {
    prof.origin_ = {OriginClass::Kind::c2_at_zero, 1.0};
  } else {
    prof.origin_ = {OriginClass::Kind::singular_at_zero, kInf};
  }
  std::ostringstream os;
  os << "power(" << p << ")";
  prof.name_ = os.str();
  return prof;
}

CostProfile CostProfile::counterexample() {
  CostProfile prof;
  prof.h_ = [](double t) { return t * t + t; };
  prof.dh_ = [](double t) { return 2.0 * t + 1.0; };
  prof.d2h_ = [](double) { return 2.0; };
  prof.inv_dh_ = [](double s) { return s <= 1.0 ? 0.0 : 0.5 * (s - 1.0); };
  prof.domain_max_ = kInf;
  prof.origin_ = {OriginClass::Kind::violates_h2, 2.0};
  prof.counterexample_ = true;
  prof.name_ = "counterexample(t^2+t)";
  return prof;
}

CostProfile CostProfile::custom(ScalarFn h, ScalarFn dh, ScalarFn d2h, double domain_max,
                                std::string name) {
  if (!h || !dh || !d2h) throw InvalidArgument("custom profile needs h, h' and h''");
  if (!(domain_max > 0.0)) throw InvalidArgument("custom profile needs domain_max > 0");

  if (std::abs(h(0.0)) > 1e-12) {
    throw AssumptionViolation("H1", 0.0, "h(0) must vanish");
  }
  const double lo = std::min(1e-6, 1e-6 * domain_max);
  const double hi = std::isfinite(domain_max) ? domain_max : 1e3;
  const int samples = 1000;
  for (int i = 0; i < samples; ++i) {
    const double t = lo * std::pow(hi / lo, static_cast<double>(i) / (samples - 1));
    const double d1 = dh(t);
    const double d2 = d2h(t);
    if (!(d1 > 0.0)) throw AssumptionViolation("H3", t, "h' must be positive");
    if (!(d2 > 0.0)) throw AssumptionViolation("H3", t, "h'' must be positive");
  }
  const ScalarFn ratio = [&h](double t) { return h(t) / t; };
  const double slope0 = dyadic_limit(ratio, 4, 24);
  if (!(std::abs(slope0) <= 1e-6 * std::max(1.0, std::abs(dh(1.0))))) {
    throw AssumptionViolation("H2", std::ldexp(1.0, -24), "lim h(t)/t must vanish");
  }

  CostProfile prof;
  prof.h_ = std::move(h);
  prof.dh_ = std::move(dh);
  prof.d2h_ = std::move(d2h);
  prof.domain_max_ = domain_max;
  prof.name_ = std::move(name);
  prof.origin_ = classify_origin(prof);
  return prof;
}

double CostProfile::eval(double t) const { return h_(t); }

double CostProfile::deriv(double t) const { return dh_(t); }

double CostProfile::second_deriv(double t) const {
  if (t > 0.0) return d2h_(t);
  if (origin_.kind == OriginClass::Kind::c2_at_zero) return origin_.h2_at_zero;
  if (origin_.kind == OriginClass::Kind::violates_h2) return d2h_(0.0);
  return kInf;
}

double CostProfile::inv_deriv(double s) const {
  if (s < 0.0 || std::isnan(s)) throw InvalidArgument("inv_deriv needs s >= 0");
  if (inv_dh_) return inv_dh_(s);
  if (s <= dh_(0.0)) return 0.0;
  const Tolerances& tol = default_tolerances();
  double hi = bracket_increasing(dh_, s, 1.0, domain_max_);
  if (!std::isfinite(hi)) {
    throw InvDerivOverflow("inv_deriv: value exceeds h'(domain_max)");
  }
  double lo = 0.0;
  for (int i = 0; i < tol.inv_deriv_bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dh_(mid) < s ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  // Newton on the monotone h'; keep the bisection answer if an iterate leaves the bracket.
  double newton = t;
  for (int i = 0; i < tol.inv_deriv_newton_steps; ++i) {
    const double slope = d2h_(newton);
    if (!(slope > 0.0) || !std::isfinite(slope)) break;
    const double next = newton - (dh_(newton) - s) / slope;
    if (!(next > 0.0) || !std::isfinite(next)) break;
    newton = next;
  }
  if (std::abs(dh_(newton) - s) <= std::abs(dh_(t) - s)) t = newton;
  return t;
}

double CostProfile::inverse(double v) const {
  if (v < 0.0 || std::isnan(v)) throw InvalidArgument("inverse needs v >= 0");
  if (v == 0.0) return 0.0;
  if (p_ > 0.0) return std::pow(p_ * v, 1.0 / p_);
  double hi = bracket_increasing(h_, v, 1.0, std::isfinite(domain_max_) ? domain_max_ : 1e300);
  if (!std::isfinite(hi)) return kInf;
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h_(mid) < v ? lo : hi) = mid;
  }
  return hi;
}

double dyadic_limit(const ScalarFn& f, int first, int last) {
  if (last - first < 2) throw InvalidArgument("dyadic ladder needs at least three rungs");
  const double f0 = f(std::ldexp(1.0, -first));
  const double a = f(std::ldexp(1.0, -(last - 2)));
  const double b = f(std::ldexp(1.0, -(last - 1)));
  const double c = f(std::ldexp(1.0, -last));
  if (!std::isfinite(c)) return kInf;
  const double scale = std::max(1.0, std::abs(c));
  const double d1 = b - a;
  const double d2 = c - b;
  if (std::abs(d2) <= 1e-12 * scale) return c;
  const double r = d2 / d1;
  if (d1 == 0.0 || !(r > 0.0)) return c;
  if (r >= 1.0) {
    // Differences do not shrink: the sequence diverges (or never settles).
    return std::abs(c) > std::abs(f0) ? kInf : c;
  }
  return c + d2 * r / (1.0 - r);
}

OriginClass classify_origin(const CostProfile& profile, const Tolerances& tol) {
  const int first = tol.origin_ladder_first;
  const int last = tol.origin_ladder_last;
  const double via_slope =
      dyadic_limit([&](double t) { return profile.deriv(t) / t; }, first, last);
  const double via_curvature =
      dyadic_limit([&](double t) { return profile.second_deriv(t); }, first, last);
  if (!std::isfinite(via_slope) || !std::isfinite(via_curvature)) {
    return {OriginClass::Kind::singular_at_zero, kInf};
  }
  const double scale = std::max({1.0, std::abs(via_slope), std::abs(via_curvature)});
  if (std::abs(via_slope - via_curvature) > tol.origin_match_rel * scale) {
    return {OriginClass::Kind::singular_at_zero, kInf};
  }
  double value = via_curvature;
  if (std::abs(value) < 1e-9) value = 0.0;
  return {OriginClass::Kind::c2_at_zero, value};
}

double coercivity_bound(const CostProfile& profile, double t) {
  if (!(t >= 1.0)) throw InvalidArgument("coercivity bound needs t >= 1");
  return profile.deriv(1.0) * (t - 1.0) + profile.eval(1.0);
}

}  // namespace hbary
