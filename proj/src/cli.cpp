#include "hbary/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "hbary/barycenter.hpp"
#include "hbary/diagnostics.hpp"
#include "hbary/errors.hpp"
#include "hbary/io.hpp"
#include "hbary/transport.hpp"
#include "hbary/verify.hpp"

namespace hbary {

namespace {

struct Flags {
  std::string spec;
  std::string out;
  std::uint64_t seed = 1;
  bool seed_given = false;
  double tol_scale = 1.0;
  bool allow_counterexample = false;
  int workers = 0;
  std::string suite = "all";
};

int worker_count(const Flags& f) {
  if (f.workers > 0) return f.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

BarycenterOptions barycenter_options(const Flags& f) {
  BarycenterOptions opt;
  opt.allow_counterexample = f.allow_counterexample;
  opt.tol_scale = f.tol_scale;
  return opt;
}

std::vector<double> weights_of(const Json& spec) {
  return doubles_from_json(require(spec, "weights"), "weights");
}

// Writes `text` to <out>/<name> when --out is set, to the output stream otherwise.
void emit(const Flags& f, const std::string& name, const std::string& text, std::ostream& out) {
  if (f.out.empty()) {
    out << text;
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(f.out, ec);
  const std::filesystem::path path = std::filesystem::path(f.out) / name;
  std::ofstream file(path);
  if (!file) throw SpecError("cannot write " + path.string());
  file << text;
}

int cmd_solve(const Flags& f, std::ostream& out) {
  const Json spec = read_json_file(f.spec);
  const Chart chart = chart_from_json(require(spec, "manifold"));
  const CostProfile profile = profile_from_json(require(spec, "profile"));
  if (!profile.origin().admissible() && !f.allow_counterexample) {
    throw ProfileViolatesAssumptions("profile " + profile.name() +
                                     " violates h'(0) = 0; pass --allow-counterexample to solve it");
  }
  Configuration config;
  for (const auto& p : require(spec, "points")) config.points.push_back(point_from_json(p, chart));
  config.weights = weights_of(spec);
  try {
    validate_configuration(chart, config);
  } catch (const InvalidArgument& e) {
    throw SpecError(e.what());
  }
  const BarycenterSolution sol = solve_barycenter(chart, profile, config, barycenter_options(f));
  emit(f, "solution.json", to_json(sol).dump(2) + "\n", out);
  return exit_ok;
}

int cmd_mmot(const Flags& f, std::ostream& out) {
  const Json spec = read_json_file(f.spec);
  const Chart chart = chart_from_json(require(spec, "manifold"));
  const CostProfile profile = profile_from_json(require(spec, "profile"));
  std::vector<DiscreteMeasure> measures;
  for (const auto& m : require(spec, "marginals")) measures.push_back(measure_from_json(m, chart));
  const auto weights = weights_of(spec);
  if (weights.size() != measures.size()) throw SpecError("one weight per marginal is required");
  MmotOptions opt;
  opt.barycenter = barycenter_options(f);
  opt.workers = worker_count(f);
  if (spec.contains("max_tuples")) opt.max_tuples = spec.at("max_tuples").get<std::size_t>();
  MultiPlan plan;
  try {
    plan = solve_mmot(chart, measures, weights, profile, opt);
  } catch (const InvalidArgument& e) {
    throw SpecError(e.what());
  }
  const auto sols = support_barycenters(chart, profile, plan, weights, opt.barycenter);

  Json j;
  j["cost"] = plan.total_cost;
  j["plan"] = plan_to_json(plan);
  Json pots = Json::array();
  for (const auto& p : plan.potentials) pots.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  j["potentials"] = pots;
  j["min_reduced_cost"] = plan.min_reduced_cost;
  j["unique"] = plan.unique(chart.tolerances().plan_uniqueness);
  j["marginal_error"] = plan.marginal_error();
  Json bary = Json::array();
  for (const auto& s : sols) bary.push_back(to_json(s));
  j["barycenters"] = bary;
  emit(f, "mmot.json", j.dump(2) + "\n", out);
  return exit_ok;
}

int cmd_verify(const Flags& f, std::ostream& out) {
  const auto rows = run_verify_suite(f.suite, f.seed);
  emit(f, "verify_" + f.suite + ".csv", verify_csv(rows), out);
  return all_pass(rows) ? exit_ok : exit_verify_failed;
}

void fill_base(ExperimentBase& base, const Json& spec, const Flags& f) {
  base.chart = chart_from_json(require(spec, "manifold"));
  base.profile = profile_from_json(require(spec, "profile"));
  for (const auto& m : require(spec, "marginals")) {
    base.measures.push_back(measure_spec_from_json(m, base.chart));
  }
  base.weights = weights_of(spec);
  if (base.weights.size() != base.measures.size()) {
    throw SpecError("one weight per marginal is required");
  }
  if (spec.contains("levels")) base.levels = spec.at("levels").get<int>();
  if (spec.contains("max_tuples")) base.max_tuples = spec.at("max_tuples").get<std::size_t>();
  if (spec.contains("seed")) base.seed = spec.at("seed").get<std::uint64_t>();
  if (f.seed_given) base.seed = f.seed;
  base.workers = worker_count(f);
  base.tol_scale = f.tol_scale;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

int cmd_experiment(const Flags& f, std::ostream& out) {
  const Json spec = read_json_file(f.spec);
  const std::string kind = require(spec, "experiment").get<std::string>();
  std::ostringstream csv;
  bool ok = false;
  if (kind == "consistency") {
    ConsistencySpec cs;
    fill_base(cs, spec, f);
    if (spec.contains("reference")) {
      cs.has_reference = true;
      cs.reference = measure_spec_from_json(spec.at("reference"), cs.chart);
      if (spec.contains("reference_level")) cs.reference_level = spec.at("reference_level").get<int>();
    }
    const ConsistencyReport rep = consistency_experiment(cs);
    csv << "level,atoms,cost,bl_to_final,bl_to_reference\n";
    for (const auto& r : rep.rows) {
      csv << r.level << ',' << r.atoms << ',' << fmt(r.cost) << ',' << fmt(r.bl_to_final) << ','
          << fmt(r.bl_to_reference) << '\n';
    }
    ok = rep.monotone;
  } else if (kind == "case1" || kind == "case2") {
    AbsContinuitySpec as;
    fill_base(as, spec, f);
    as.which_case = kind == "case1" ? 1 : 2;
    if (spec.contains("k_max")) as.k_max = spec.at("k_max").get<int>();
    if (spec.contains("alpha")) as.alpha = spec.at("alpha").get<double>();
    if (spec.contains("probe_pairs")) as.probe_pairs = spec.at("probe_pairs").get<int>();
    if (spec.contains("probe_anchors")) as.probe_anchors = spec.at("probe_anchors").get<int>();
    const AbsContinuityReport rep = abs_continuity_experiment(as);
    csv << "level,k,epsilon,delta_first,lipschitz,delta,mass,verdict\n";
    for (const auto& r : rep.rows) {
      csv << r.level << ',' << r.k << ',' << fmt(r.epsilon) << ',' << fmt(r.delta_first) << ','
          << fmt(r.lipschitz) << ',' << fmt(r.delta) << ',' << fmt(r.mass) << ','
          << (!r.resolved ? "SKIP" : (r.pass ? "PASS" : "FAIL")) << '\n';
    }
    ok = rep.final_pass && rep.resolved_pass;
  } else {
    throw SpecError("unknown experiment \"" + kind + "\" (expected case1, case2 or consistency)");
  }
  emit(f, kind + ".csv", csv.str(), out);
  return ok ? exit_ok : exit_verify_failed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized barycenters and multi-marginal transport on model spaces", "bary"};
  app.require_subcommand(1);
  Flags f;
  auto* seed = app.add_option("--seed", f.seed, "random seed")->capture_default_str();
  app.add_option("--out", f.out, "output directory (default: standard output)");
  app.add_option("--tol-scale", f.tol_scale, "scale of the barycenter residual tolerance")
      ->check(CLI::PositiveNumber);
  app.add_flag("--allow-counterexample", f.allow_counterexample,
               "solve with profiles violating h'(0) = 0");
  app.add_option("--workers", f.workers, "worker threads (default: hardware concurrency)");

  auto* solve = app.add_subcommand("solve", "barycenter of one configuration");
  solve->add_option("--spec", f.spec, "JSON spec")->required();
  auto* mmot = app.add_subcommand("mmot", "multi-marginal transport with the barycenter cost");
  mmot->add_option("--spec", f.spec, "JSON spec")->required();
  auto* verify = app.add_subcommand("verify", "property checks, CSV table");
  verify->add_option("--suite", f.suite, "all|geometry|transport|invmap|counterexample")
      ->capture_default_str();
  auto* experiment = app.add_subcommand("experiment", "case1, case2 or consistency ladder");
  experiment->add_option("--spec", f.spec, "JSON spec")->required();
  // Global flags are also accepted after the subcommand.
  for (auto* sub : {solve, mmot, verify, experiment}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_input;
  }
  f.seed_given = seed->count() > 0;

  try {
    if (*solve) return cmd_solve(f, out);
    if (*mmot) return cmd_mmot(f, out);
    if (*verify) return cmd_verify(f, out);
    return cmd_experiment(f, out);
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return exit_nonconvergence;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return exit_nonconvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed spec: " << e.what() << '\n';
    return exit_input;
  }
}

}  // namespace hbary
