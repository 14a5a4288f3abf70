#include "doctest.h"

#include <cmath>

#include "hbary/cost.hpp"
#include "hbary/errors.hpp"

using namespace hbary;

TEST_CASE("power profiles") {
  const CostProfile p2 = CostProfile::power(2.0);
  CHECK(p2.eval(3.0) == doctest::Approx(4.5));
  CHECK(p2.deriv(1.7) == doctest::Approx(1.7));
  CHECK(p2.inv_deriv(0.3) == doctest::Approx(0.3));
  CHECK(p2.origin().kind == OriginClass::Kind::c2_at_zero);
  CHECK(p2.origin().h2_at_zero == doctest::Approx(1.0));

  const CostProfile p15 = CostProfile::power(1.5);
  CHECK(p15.inv_deriv(0.7) == doctest::Approx(0.49));
  CHECK(p15.origin().kind == OriginClass::Kind::singular_at_zero);

  const CostProfile p3 = CostProfile::power(3.0);
  CHECK(p3.origin().kind == OriginClass::Kind::c2_at_zero);
  CHECK(p3.origin().h2_at_zero == doctest::Approx(0.0));

  CHECK_THROWS_AS(CostProfile::power(1.0), InvalidArgument);
  CHECK_THROWS_AS(CostProfile::power(0.5), InvalidArgument);
}

TEST_CASE("inv_deriv inverts deriv") {
  for (double p : {1.2, 1.5, 2.0, 3.0, 4.5}) {
    const CostProfile h = CostProfile::power(p);
    for (double t : {1e-6, 1e-3, 0.1, 1.0, 7.0}) {
      CHECK(h.inv_deriv(h.deriv(t)) == doctest::Approx(t).epsilon(1e-10));
      CHECK(h.inverse(h.eval(t)) == doctest::Approx(t).epsilon(1e-10));
    }
    CHECK(h.inv_deriv(0.0) == 0.0);
    CHECK_THROWS_AS(h.inv_deriv(-1.0), InvalidArgument);
  }
}

TEST_CASE("counterexample profile") {
  const CostProfile h = CostProfile::counterexample();
  CHECK(h.eval(1.0) == doctest::Approx(2.0));
  CHECK(h.deriv(0.5) == doctest::Approx(2.0));
  CHECK(h.is_counterexample());
  CHECK(h.origin().kind == OriginClass::Kind::violates_h2);
  CHECK_FALSE(h.origin().admissible());
}

TEST_CASE("custom profiles are validated") {
  const CostProfile c = CostProfile::custom([](double t) { return std::cosh(t) - 1.0; },
                                            [](double t) { return std::sinh(t); },
                                            [](double t) { return std::cosh(t); }, 20.0, "cosh");
  CHECK(c.origin().kind == OriginClass::Kind::c2_at_zero);
  CHECK(c.origin().h2_at_zero == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(c.inv_deriv(std::sinh(1.3)) == doctest::Approx(1.3).epsilon(1e-10));
  CHECK(c.inv_deriv(std::sinh(1e-4)) == doctest::Approx(1e-4).epsilon(1e-8));
  CHECK_THROWS_AS(c.inv_deriv(std::sinh(25.0)), InvDerivOverflow);

  try {
    CostProfile::custom([](double t) { return t; }, [](double) { return 1.0; },
                        [](double) { return 0.0; }, 10.0);
    FAIL("linear profile accepted");
  } catch (const AssumptionViolation& e) {
    CHECK(e.clause() == "H3");
  }
  try {
    CostProfile::custom([](double t) { return t * t + t; }, [](double t) { return 2 * t + 1; },
                        [](double) { return 2.0; }, 10.0);
    FAIL("t^2 + t accepted");
  } catch (const AssumptionViolation& e) {
    CHECK(e.clause() == "H2");
    CHECK(e.witness() > 0.0);
  }
  try {
    CostProfile::custom([](double t) { return t * t + 1.0; }, [](double t) { return 2 * t; },
                        [](double) { return 2.0; }, 10.0);
    FAIL("h(0) != 0 accepted");
  } catch (const AssumptionViolation& e) {
    CHECK(e.clause() == "H1");
  }
}

TEST_CASE("classify_origin on the dyadic ladder") {
  const CostProfile quartic = CostProfile::custom(
      [](double t) { return t * t * t * t / 4.0 + t * t / 2.0; },
      [](double t) { return t * t * t + t; }, [](double t) { return 3 * t * t + 1.0; }, 10.0);
  const OriginClass o = classify_origin(quartic);
  CHECK(o.is_c2());
  CHECK(o.h2_at_zero == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(classify_origin(CostProfile::power(1.7)).kind == OriginClass::Kind::singular_at_zero);
}

TEST_CASE("dyadic_limit") {
  CHECK(dyadic_limit([](double t) { return 3.0 + t; }, 4, 24) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(dyadic_limit([](double t) { return 2.0 + std::sqrt(t); }, 4, 24) ==
        doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::isinf(dyadic_limit([](double t) { return 1.0 / std::sqrt(t); }, 4, 24)));
  CHECK(dyadic_limit([](double) { return 5.0; }, 4, 24) == 5.0);
}

TEST_CASE("coercivity_bound") {
  CHECK(coercivity_bound(CostProfile::power(2.0), 3.0) == doctest::Approx(2.5));
  CHECK(coercivity_bound(CostProfile::power(1.5), 1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(coercivity_bound(CostProfile::power(4.0), 2.0) == doctest::Approx(1.25));
  for (double p : {1.5, 2.0, 3.0}) {
    const CostProfile h = CostProfile::power(p);
    for (double t = 1.0; t < 50.0; t *= 1.7) CHECK(coercivity_bound(h, t) <= h.eval(t) + 1e-12);
  }
  CHECK_THROWS_AS(coercivity_bound(CostProfile::power(2.0), 0.5), InvalidArgument);
}

TEST_CASE("second derivative at the origin") {
  CHECK(CostProfile::power(2.0).second_deriv(0.0) == doctest::Approx(1.0));
  CHECK(CostProfile::power(3.0).second_deriv(0.0) == doctest::Approx(0.0));
  CHECK(std::isinf(CostProfile::power(1.5).second_deriv(0.0)));
  CHECK(CostProfile::power(1.5).second_deriv(0.01) == doctest::Approx(5.0));
}
