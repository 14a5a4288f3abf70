#include "hbary/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hbary {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw SpecError(std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

std::vector<double> doubles_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw SpecError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw SpecError(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Chart chart_from_json(const Json& j) {
  const Json& kind = require(j, "kind");
  if (!kind.is_string()) throw SpecError("manifold kind must be a string");
  const std::string k = kind.get<std::string>();
  const int dim = j.contains("dim") ? j.at("dim").get<int>() : 2;
  if (k == "euclidean") return Chart::euclidean(dim);
  if (k == "sphere") {
    return Chart::sphere(dim, j.contains("curvature") ? j.at("curvature").get<double>() : 1.0);
  }
  if (k == "hyperbolic") {
    if (dim != 2) throw SpecError("hyperbolic charts are two-dimensional");
    return Chart::hyperbolic(j.contains("curvature") ? j.at("curvature").get<double>() : -1.0);
  }
  throw SpecError("unknown manifold kind \"" + k + "\"");
}

Json to_json(const Chart& chart) {
  Json j;
  j["kind"] = to_string(chart.kind());
  j["dim"] = chart.dim();
  j["curvature"] = chart.curvature();
  return j;
}

CostProfile profile_from_json(const Json& j) {
  const std::string k = require(j, "kind").get<std::string>();
  if (k == "power") return CostProfile::power(require(j, "p").get<double>());
  if (k == "counterexample") return CostProfile::counterexample();
  throw SpecError("unknown profile kind \"" + k + "\"");
}

Json profile_to_json(const CostProfile& profile) {
  Json j;
  if (profile.is_counterexample()) {
    j["kind"] = "counterexample";
  } else if (profile.power_exponent() > 0.0) {
    j["kind"] = "power";
    j["p"] = profile.power_exponent();
  } else {
    j["kind"] = "custom";
    j["name"] = profile.name();
  }
  return j;
}

Point point_from_json(const Json& j, const Chart& chart) {
  Point p;
  if (j.is_number()) {
    p = Point::Constant(1, j.get<double>());
  } else {
    const auto v = doubles_from_json(j, "point");
    p = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  try {
    chart.validate(p);
  } catch (const ChartMembershipError& e) {
    throw SpecError(e.what());
  }
  return p;
}

Json to_json(const Point& p) {
  Json j = Json::array();
  for (Eigen::Index k = 0; k < p.size(); ++k) j.push_back(p[k]);
  return j;
}

DiscreteMeasure measure_from_json(const Json& j, const Chart& chart) {
  if (j.contains("manifold") && !(chart_from_json(j.at("manifold")) == chart)) {
    throw SpecError("measure manifold differs from the experiment manifold");
  }
  DiscreteMeasure m;
  const Json& pts = require(j, "points");
  if (!pts.is_array()) throw SpecError("points must be an array");
  for (const auto& p : pts) m.points.push_back(point_from_json(p, chart));
  m.weights = doubles_from_json(require(j, "weights"), "weights");
  try {
    m.validate(chart);
  } catch (const InvalidArgument& e) {
    throw SpecError(e.what());
  }
  return m;
}

Json to_json(const Chart& chart, const DiscreteMeasure& m) {
  Json j;
  j["manifold"] = to_json(chart);
  Json pts = Json::array();
  for (const auto& p : m.points) pts.push_back(to_json(p));
  j["points"] = pts;
  j["weights"] = m.weights;
  return j;
}

MeasureSpec measure_spec_from_json(const Json& j, const Chart& chart) {
  if (j.contains("kind")) {
    const std::string k = j.at("kind").get<std::string>();
    if (k != "uniform_ball") throw SpecError("unknown density kind \"" + k + "\"");
    const double r = require(j, "radius").get<double>();
    if (!(r > 0.0)) throw SpecError("uniform_ball radius must be positive");
    return MeasureSpec::uniform_ball(point_from_json(require(j, "center"), chart), r);
  }
  return MeasureSpec::atomic(measure_from_json(j, chart));
}

Json to_json(const MeasureSpec& spec) {
  if (spec.kind == MeasureSpec::Kind::uniform_ball) {
    Json j;
    j["kind"] = "uniform_ball";
    j["center"] = to_json(spec.ball.center);
    j["radius"] = spec.ball.radius;
    return j;
  }
  Json j;
  Json pts = Json::array();
  for (const auto& p : spec.atoms.points) pts.push_back(to_json(p));
  j["points"] = pts;
  j["weights"] = spec.atoms.weights;
  return j;
}

Json plan_to_json(const MultiPlan& plan) {
  Json arr = Json::array();
  for (const auto& a : plan.support) {
    Json e;
    e["idx"] = a.idx;
    e["mass"] = a.mass;
    arr.push_back(e);
  }
  return arr;
}

std::vector<PlanAtom> plan_atoms_from_json(const Json& j) {
  if (!j.is_array()) throw SpecError("plan must be an array");
  std::vector<PlanAtom> out;
  for (const auto& e : j) {
    PlanAtom a;
    a.idx = require(e, "idx").get<std::vector<int>>();
    a.mass = require(e, "mass").get<double>();
    out.push_back(std::move(a));
  }
  return out;
}

Json to_json(const BarycenterSolution& sol) {
  Json j;
  j["z"] = to_json(sol.z);
  j["value"] = sol.value;
  j["grad_residual"] = sol.grad_residual;
  Json margins = Json::array();
  for (double m : sol.cut_margins) {
    if (std::isfinite(m)) {
      margins.push_back(m);
    } else {
      margins.push_back(nullptr);
    }
  }
  j["cut_margins"] = margins;
  Json alts = Json::array();
  for (const auto& a : sol.alternates) alts.push_back(to_json(a));
  j["alternates"] = alts;
  j["iterations"] = sol.iterations;
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("spec file " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace hbary
