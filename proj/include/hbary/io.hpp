#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hbary/barycenter.hpp"
#include "hbary/diagnostics.hpp"
#include "hbary/errors.hpp"
#include "hbary/geometry.hpp"
#include "hbary/transport.hpp"

namespace hbary {

using Json = nlohmann::ordered_json;

// Malformed or inconsistent input documents.
class SpecError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// {"kind":"sphere","dim":2,"curvature":1.0}
Chart chart_from_json(const Json& j);
Json to_json(const Chart& chart);

// {"kind":"power","p":1.5} or {"kind":"counterexample"}
CostProfile profile_from_json(const Json& j);
Json profile_to_json(const CostProfile& profile);

// Points are coordinate arrays; a bare number is accepted on one-dimensional charts.
Point point_from_json(const Json& j, const Chart& chart);
Json to_json(const Point& p);

// {"manifold":{...},"points":[[...],...],"weights":[...]}; the manifold entry is optional when a
// chart is supplied and must agree with it otherwise.
DiscreteMeasure measure_from_json(const Json& j, const Chart& chart);
Json to_json(const Chart& chart, const DiscreteMeasure& m);

// An atom list or {"kind":"uniform_ball","center":[...],"radius":r}.
MeasureSpec measure_spec_from_json(const Json& j, const Chart& chart);
Json to_json(const MeasureSpec& spec);

// [{"idx":[i1,...,in],"mass":m}, ...]
Json plan_to_json(const MultiPlan& plan);
std::vector<PlanAtom> plan_atoms_from_json(const Json& j);

Json to_json(const BarycenterSolution& sol);

// Reads and parses a JSON file; throws SpecError on I/O or syntax errors.
Json read_json_file(const std::string& path);

// Required member access with SpecError messages naming the key.
const Json& require(const Json& j, const char* key);
std::vector<double> doubles_from_json(const Json& j, const char* what);

}  // namespace hbary
