#include "doctest.h"

#include "hbary/errors.hpp"
#include "hbary/verify.hpp"

using namespace hbary;

TEST_CASE("every suite passes at the default seed") {
  for (const char* suite : {"geometry", "transport", "invmap", "counterexample"}) {
    const auto rows = run_verify_suite(suite, 1);
    CHECK_FALSE(rows.empty());
    for (const auto& r : rows) {
      INFO(suite << ": " << r.check << " " << r.max_violation);
      CHECK(r.pass);
      CHECK(r.instances > 0);
    }
  }
}

TEST_CASE("seed changes instances, not verdicts") {
  const auto a = run_verify_suite("all", 1);
  const auto b = run_verify_suite("all", 12345);
  REQUIRE(a.size() == b.size());
  bool some_differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].check == b[i].check);
    CHECK(a[i].pass == b[i].pass);
    some_differ |= a[i].max_violation != b[i].max_violation;
  }
  CHECK(some_differ);
  CHECK(verify_csv(a) == verify_csv(run_verify_suite("all", 1)));
}

TEST_CASE("csv layout") {
  const std::string csv = verify_csv({{"x", 3, 0.5, 1.0, true}, {"y", 1, 2.0, 1.0, false}});
  CHECK(csv == "check,instances,max_violation,verdict\nx,3,5.000000e-01,PASS\ny,1,2.000000e+00,FAIL\n");
  CHECK_THROWS_AS(run_verify_suite("nope", 1), InvalidArgument);
}
