#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hbary/cli.hpp"
#include "hbary/io.hpp"

using namespace hbary;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "bary");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "hbary_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_spec(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

std::string spec_dir() {
  const char* d = std::getenv("HBARY_SPEC_DIR");
  return d ? d : "specs";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("solve") {
  const std::string spec = write_spec("solve.json", R"({
    "manifold": {"kind": "euclidean", "dim": 1},
    "profile": {"kind": "power", "p": 2},
    "points": [0, 4], "weights": [0.25, 0.75]})");
  const Run r = run({"solve", "--spec", spec});
  REQUIRE(r.code == exit_ok);
  const Json j = Json::parse(r.out);
  CHECK(j["z"][0].get<double>() == doctest::Approx(3.0));

  const std::string sphere = write_spec("sphere.json", R"({
    "manifold": {"kind": "sphere", "dim": 2},
    "profile": {"kind": "power", "p": 1.5},
    "points": [[1,0,0],[0,1,0],[0,0,1]], "weights": [0.2, 0.3, 0.5]})");
  const Run s = run({"solve", "--spec", sphere});
  REQUIRE(s.code == exit_ok);
  for (const auto& m : Json::parse(s.out)["cut_margins"]) CHECK(m.get<double>() > 0.0);
  CHECK(run({"solve", "--spec", sphere}).out == s.out);
}

TEST_CASE("counterexample needs the flag") {
  const std::string spec = write_spec("counter.json", R"({
    "manifold": {"kind": "euclidean", "dim": 1},
    "profile": {"kind": "counterexample"},
    "points": [0, 1], "weights": [0.8, 0.2]})");
  const Run refused = run({"solve", "--spec", spec});
  CHECK(refused.code == exit_input);
  CHECK(refused.err.find("allow-counterexample") != std::string::npos);
  const Run ok = run({"solve", "--spec", spec, "--allow-counterexample"});
  REQUIRE(ok.code == exit_ok);
  CHECK(std::abs(Json::parse(ok.out)["z"][0].get<double>()) < 1e-9);
}

TEST_CASE("mmot") {
  const std::string spec = write_spec("mmot.json", R"({
    "manifold": {"kind": "euclidean", "dim": 1},
    "profile": {"kind": "power", "p": 2},
    "marginals": [{"points": [0, 4], "weights": [0.5, 0.5]},
                  {"points": [1, 5], "weights": [0.5, 0.5]}],
    "weights": [0.5, 0.5]})");
  const Run r = run({"mmot", "--spec", spec, "--workers", "2"});
  REQUIRE(r.code == exit_ok);
  const Json j = Json::parse(r.out);
  CHECK(j["cost"].get<double>() == doctest::Approx(0.125));
  CHECK(j["plan"].size() == 2);
  CHECK(plan_atoms_from_json(j["plan"])[1].idx == std::vector<int>{1, 1});
  CHECK(j["marginal_error"].get<double>() < 1e-12);

  const std::string single = write_spec("single.json", R"({
    "manifold": {"kind": "euclidean", "dim": 1},
    "profile": {"kind": "power", "p": 2},
    "marginals": [{"points": [0], "weights": [1]}, {"points": [2], "weights": [1]}],
    "weights": [0.5, 0.5]})");
  const Run s = run({"mmot", "--spec", single});
  REQUIRE(s.code == exit_ok);
  CHECK(Json::parse(s.out)["cost"].get<double>() == doctest::Approx(0.5));

  const std::string big = write_spec("big.json", R"({
    "manifold": {"kind": "euclidean", "dim": 1},
    "profile": {"kind": "power", "p": 2},
    "marginals": [{"points": [0, 1, 2], "weights": [0.25, 0.25, 0.5]},
                  {"points": [0, 1, 2], "weights": [0.25, 0.25, 0.5]}],
    "weights": [0.5, 0.5], "max_tuples": 4})");
  const Run b = run({"mmot", "--spec", big});
  CHECK(b.code == exit_input);
  CHECK(b.err.find("limit") != std::string::npos);
}

TEST_CASE("input errors exit with 1") {
  CHECK(run({"solve", "--spec", "/nonexistent.json"}).code == exit_input);
  CHECK(run({"solve", "--spec", write_spec("bad.json", "{not json")}).code == exit_input);
  CHECK(run({"solve", "--spec", write_spec("noweights.json",
                                           R"({"manifold":{"kind":"euclidean","dim":1},"profile":{"kind":"power","p":2},"points":[0,1]})")})
            .code == exit_input);
  CHECK(run({"frobnicate"}).code == exit_input);
  CHECK(run({}).code == exit_input);
  CHECK(run({"--help"}).code == exit_ok);
}

TEST_CASE("verify") {
  const Run r = run({"verify", "--suite", "counterexample"});
  CHECK(r.code == exit_ok);
  CHECK(r.out.find("F1_shared_minimizer,3,0.000000e+00,PASS") != std::string::npos);
  CHECK(r.out.find("F2_shared_minimizer") != std::string::npos);
  const Run g = run({"verify", "--suite", "geometry", "--seed", "7"});
  CHECK(g.code == exit_ok);
  CHECK(g.out.find("FAIL") == std::string::npos);
  CHECK(run({"verify", "--suite", "bogus"}).code == exit_input);
}

TEST_CASE("experiments write CSV files") {
  const fs::path out = scratch() / "out";
  fs::remove_all(out);
  for (const char* name : {"case1_plane", "case2_line", "consistency_line"}) {
    const std::string spec = spec_dir() + "/" + name + ".json";
    const Run r = run({"experiment", "--spec", spec, "--out", out.string()});
    INFO(name << " " << r.err);
    CHECK(r.code == exit_ok);
  }
  const std::string case1 = slurp(out / "case1.csv");
  CHECK(case1.rfind("level,k,epsilon,delta_first,lipschitz,delta,mass,verdict\n", 0) == 0);
  CHECK(case1.find("FAIL") == std::string::npos);
  CHECK(case1.find("\n5,4,") != std::string::npos);
  const std::string cons = slurp(out / "consistency.csv");
  CHECK(cons.rfind("level,atoms,cost,bl_to_final,bl_to_reference\n", 0) == 0);

  // Byte-identical reruns.
  const Run again = run({"experiment", "--spec", spec_dir() + "/case2_line.json"});
  CHECK(again.out == slurp(out / "case2.csv"));

  const std::string unknown = write_spec("unknown.json", R"({"experiment": "case9"})");
  CHECK(run({"experiment", "--spec", unknown}).code == exit_input);
}
