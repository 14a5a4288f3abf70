#include "doctest.h"

#include <cmath>

#include "hbary/io.hpp"

using namespace hbary;

TEST_CASE("chart and profile documents") {
  for (const Chart& c : {Chart::euclidean(3), Chart::sphere(2, 4.0), Chart::hyperbolic(-2.0)}) {
    CHECK(chart_from_json(to_json(c)) == c);
  }
  CHECK(chart_from_json(Json::parse(R"({"kind":"sphere"})")) == Chart::sphere(2));
  CHECK_THROWS_AS(chart_from_json(Json::parse(R"({"kind":"torus"})")), SpecError);
  CHECK_THROWS_AS(chart_from_json(Json::parse(R"({"dim":2})")), SpecError);
  CHECK_THROWS_AS(chart_from_json(Json::parse(R"({"kind":"hyperbolic","dim":3})")), SpecError);

  const CostProfile p = profile_from_json(Json::parse(R"({"kind":"power","p":1.5})"));
  CHECK(p.power_exponent() == 1.5);
  CHECK(profile_from_json(profile_to_json(p)).power_exponent() == 1.5);
  CHECK(profile_from_json(Json::parse(R"({"kind":"counterexample"})")).is_counterexample());
  CHECK_THROWS_AS(profile_from_json(Json::parse(R"({"kind":"log"})")), SpecError);
}

TEST_CASE("measure documents round trip") {
  const Chart s = Chart::sphere(2);
  const Json j = Json::parse(R"({"manifold":{"kind":"sphere","dim":2,"curvature":1.0},
                                 "points":[[0,0,1],[1,0,0]],"weights":[0.25,0.75]})");
  const DiscreteMeasure m = measure_from_json(j, s);
  CHECK(m.size() == 2);
  const DiscreteMeasure back = measure_from_json(to_json(s, m), s);
  CHECK(back.points == m.points);
  CHECK(back.weights == m.weights);
  CHECK(to_json(s, back).dump() == to_json(s, m).dump());

  CHECK_THROWS_AS(measure_from_json(j, Chart::sphere(2, 2.0)), SpecError);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"points":[[0,0,2]],"weights":[1]})"), s), SpecError);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"points":[[0,0,1]],"weights":[0.5]})"), s), SpecError);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"points":[[0,0,1]]})"), s), SpecError);

  const Chart line = Chart::euclidean(1);
  const DiscreteMeasure l = measure_from_json(Json::parse(R"({"points":[0, 2.5],"weights":[0.5,0.5]})"), line);
  CHECK(l.points[1][0] == 2.5);
}

TEST_CASE("density documents") {
  const Chart s = Chart::sphere(2);
  const MeasureSpec spec =
      measure_spec_from_json(Json::parse(R"({"kind":"uniform_ball","center":[0,0,1],"radius":0.4})"), s);
  CHECK(spec.kind == MeasureSpec::Kind::uniform_ball);
  CHECK(spec.ball.radius == 0.4);
  const MeasureSpec again = measure_spec_from_json(to_json(spec), s);
  CHECK(again.ball.center == spec.ball.center);
  CHECK_THROWS_AS(measure_spec_from_json(Json::parse(R"({"kind":"uniform_ball","center":[0,0,1],"radius":0})"), s),
                  SpecError);
  CHECK_THROWS_AS(measure_spec_from_json(Json::parse(R"({"kind":"gaussian"})"), s), SpecError);
}

TEST_CASE("plans and solutions") {
  MultiPlan plan;
  plan.support = {{{0, 1}, 0.25}, {{1, 0}, 0.75}};
  const auto atoms = plan_atoms_from_json(plan_to_json(plan));
  REQUIRE(atoms.size() == 2);
  CHECK(atoms[1].idx == std::vector<int>{1, 0});
  CHECK(atoms[1].mass == 0.75);

  BarycenterSolution sol;
  sol.z = Eigen::Vector2d(1, 2);
  sol.cut_margins = {std::numeric_limits<double>::infinity(), 0.5};
  const Json j = to_json(sol);
  CHECK(j["cut_margins"][0].is_null());
  CHECK(j["cut_margins"][1] == 0.5);
  CHECK(j["z"][1] == 2.0);
}

TEST_CASE("files") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/spec.json"), SpecError);
}
