#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hbary/tolerances.hpp"

namespace hbary {

// Behaviour of the profile at the origin. Selects which regularity regime applies
// to the inverse map near collisions.
struct OriginClass {
  enum class Kind { c2_at_zero, singular_at_zero, violates_h2 };
  Kind kind = Kind::singular_at_zero;
  // lim h''(t) = lim h'(t)/t as t -> 0, meaningful only for c2_at_zero.
  double h2_at_zero = 0.0;

  bool is_c2() const { return kind == Kind::c2_at_zero; }
  bool admissible() const { return kind != Kind::violates_h2; }
};

std::string to_string(OriginClass origin);

using ScalarFn = std::function<double(double)>;

// A cost profile h with c(x, y) = h(d(x, y)). Immutable and cheap to copy.
class CostProfile {
 public:
  // h(t) = t^p / p, p > 1.
  static CostProfile power(double p);
  // h(t) = t^2 + t. Breaks h'(0) = 0; only the injectivity counterexample uses it.
  static CostProfile counterexample();
  // Validates H1-H3 by sampling and throws AssumptionViolation with the clause and witness.
  static CostProfile custom(ScalarFn h, ScalarFn dh, ScalarFn d2h, double domain_max,
                            std::string name = "custom");

  double operator()(double t) const { return eval(t); }
  double eval(double t) const;
  double deriv(double t) const;
  // Second derivative for t > 0; at t = 0 returns the origin limit (may be +inf).
  double second_deriv(double t) const;
  // (h')^{-1}(s) for s >= 0.
  double inv_deriv(double s) const;
  // h^{-1}(v) for v >= 0.
  double inverse(double v) const;

  const OriginClass& origin() const { return origin_; }
  double domain_max() const { return domain_max_; }
  const std::string& name() const { return name_; }
  // Exponent for power profiles, 0 otherwise.
  double power_exponent() const { return p_; }
  bool is_counterexample() const { return counterexample_; }

 private:
  CostProfile() = default;

  ScalarFn h_, dh_, d2h_;
  ScalarFn inv_dh_;  // closed form when available
  OriginClass origin_;
  double domain_max_ = 0.0;
  double p_ = 0.0;
  bool counterexample_ = false;
  std::string name_;
};

// Limit of f(t) as t -> 0 estimated on the dyadic ladder t = 2^-k (k = first..last), by
// Aitken extrapolation of the geometric tail. Returns +inf when the tail diverges.
double dyadic_limit(const ScalarFn& f, int first, int last);

// Compares lim h'(t)/t with lim h''(t) on the dyadic ladder.
OriginClass classify_origin(const CostProfile& profile, const Tolerances& tol = default_tolerances());

// h'(1)(t - 1) + h(1), a lower bound of h on [1, inf). Throws InvalidArgument for t < 1.
double coercivity_bound(const CostProfile& profile, double t);

}  // namespace hbary
