#pragma once

#include <stdexcept>
#include <string>

namespace harmeas {

enum class ErrorKind {
  Domain,            // invalid argument or violated precondition
  Singular,          // linear system without an absorbing set
  NonConvergence,    // iterative solve stopped above tolerance
  UnreachableTarget, // renormalizing a zero mass
  IsolatedAnchor,
  Resource,
  WindowClipped,
  ConstructionFailed,
  Consistency,       // internal cross-check failed
  Io,
  Validation,        // configuration / schema errors
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual, long iterations)
      : Error(ErrorKind::NonConvergence, what),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  long iterations_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::Domain, what);
}

}  // namespace harmeas
