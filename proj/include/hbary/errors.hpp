#pragma once

#include <stdexcept>
#include <string>

namespace hbary {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ChartMembershipError : public Error {
 public:
  using Error::Error;
};

// A point pair lies on (or within the guard band of) the cut locus.
class CutLocusError : public Error {
 public:
  using Error::Error;
};

// A distance derivative was requested at coinciding points.
class DiagonalError : public Error {
 public:
  using Error::Error;
};

// A candidate profile failed one of the clauses H1, H2, H3.
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(std::string clause, double witness, const std::string& what)
      : Error(clause + " violated at t=" + std::to_string(witness) + ": " + what),
        clause_(std::move(clause)),
        witness_(witness) {}

  const std::string& clause() const { return clause_; }
  double witness() const { return witness_; }

 private:
  std::string clause_;
  double witness_;
};

// A quarantined (h'(0) != 0) profile reached an entry point that requires H1-H3.
class ProfileViolatesAssumptions : public Error {
 public:
  using Error::Error;
};

class SizeLimit : public Error {
 public:
  using Error::Error;
};

class InvDerivOverflow : public Error {
 public:
  using Error::Error;
};

class RegionViolation : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace hbary
