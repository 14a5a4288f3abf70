#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hbary {

struct CheckRow {
  std::string check;
  int instances = 0;
  // Largest measured error of the check against its own tolerance scale; see `limit`.
  double max_violation = 0.0;
  double limit = 0.0;
  bool pass = false;
};

// Suites: all, geometry, transport, invmap, counterexample. Throws InvalidArgument for other
// names. Instances are drawn from a mt19937_64 seeded with `seed`.
std::vector<CheckRow> run_verify_suite(const std::string& suite, std::uint64_t seed);

// check,instances,max_violation,verdict
std::string verify_csv(const std::vector<CheckRow>& rows);

bool all_pass(const std::vector<CheckRow>& rows);

// Individual check families, also used by the acceptance runner.
std::vector<CheckRow> verify_geometry(std::uint64_t seed);
std::vector<CheckRow> verify_transport(std::uint64_t seed);
std::vector<CheckRow> verify_invmap(std::uint64_t seed);
std::vector<CheckRow> verify_counterexample(std::uint64_t seed);

}  // namespace hbary
