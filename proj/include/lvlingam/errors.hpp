#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lvlingam {

enum class ErrorKind {
  InvalidArgument,
  CycleDetected,
  NotAPath,
  IllConditioned,
  ObservedColumnsDependent,
  NotLatent,
  NotAbsorbable,
  DegenerateCovariance,
  NonConvergence,
  ShapeMismatch,
  InconsistentVerdicts,
  NoMatchingColumn,
  AmbiguousColumn,
  StructureUnsupported,
  NonPositivePrice,
  Parse,
  Io,
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

/// Carries a vertex cycle (0-based) for CycleDetected and InconsistentVerdicts.
class CycleError : public Error {
 public:
  CycleError(ErrorKind kind, std::vector<int> cycle, const std::string& what)
      : Error(kind, what), cycle_(std::move(cycle)) {}

  const std::vector<int>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<int> cycle_;
};

/// Column or variable index (0-based) attached to matching failures.
class IndexError : public Error {
 public:
  IndexError(ErrorKind kind, int index, const std::string& what)
      : Error(kind, what), index_(index) {}

  int index() const noexcept { return index_; }

 private:
  int index_;
};

}  // namespace lvlingam
