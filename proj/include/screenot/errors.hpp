#pragma once

#include <stdexcept>
#include <string>

namespace screenot {

// Error categories map one-to-one onto CLI exit codes; see tools/.
enum class ErrorCategory {
  Io,          // unreadable or unwritable file
  Parse,       // malformed numbers or config fields
  Constraint,  // precondition violations (rank bounds, shapes, non-finite input)
  Degenerate,  // all-zero pseudo-noise CDF, no threshold exists
  Solver,      // bracketing or iteration failure
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Constraint: return "constraint";
    case ErrorCategory::Degenerate: return "degenerate";
    case ErrorCategory::Solver: return "solver";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCategory::Io, m) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(ErrorCategory::Parse, m) {}
};
struct ConstraintError : Error {
  explicit ConstraintError(const std::string& m) : Error(ErrorCategory::Constraint, m) {}
};
struct DegenerateCdfError : Error {
  explicit DegenerateCdfError(const std::string& m) : Error(ErrorCategory::Degenerate, m) {}
};
struct SolverError : Error {
  explicit SolverError(const std::string& m) : Error(ErrorCategory::Solver, m) {}
};

}  // namespace screenot
