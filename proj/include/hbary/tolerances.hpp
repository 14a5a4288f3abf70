#pragma once

namespace hbary {

// Every numerical threshold used by the library, in one place.
struct Tolerances {
  // geometry
  double sphere_membership_rel = 1e-12;
  double tangent_orthogonality = 1e-10;
  double cut_locus_guard = 1e-7;

  // cost profiles
  double inv_deriv_rel = 1e-10;
  int inv_deriv_bisection_steps = 80;
  int inv_deriv_newton_steps = 5;
  int origin_ladder_first = 4;
  int origin_ladder_last = 24;
  double origin_match_rel = 1e-3;

  // barycenter solver
  double grad_residual = 1e-8;
  double grad_residual_sphere = 1e-7;
  double armijo = 1e-4;
  double step_init = 1.0;
  double step_contraction = 0.5;
  int max_iterations = 500;
  double tie_gap = 1e-9;
  double collision_nudge = 1e-9;

  // linear programs
  double lp_pivot = 1e-11;
  double lp_optimality = 1e-11;
  double plan_uniqueness = 1e-9;

  // certificates
  double marginal = 1e-10;
  double slackness = 1e-8;
  double injectivity_bary = 1e-6;
  double injectivity_config = 1e-5;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace hbary
