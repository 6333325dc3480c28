#pragma once

#include <stdexcept>
#include <string>

namespace jcqoc {

/// Invalid user input (configuration, parameters out of range).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical accuracy guard tripped (norm or trace drift, indefinite
/// density matrix). Usually fixed by reducing the time step.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The lowest eigenvalue is degenerate within the gap tolerance.
class DegenerateGroundState : public std::runtime_error {
 public:
  DegenerateGroundState(const std::string& what, double gap)
      : std::runtime_error(what), gap_(gap) {}
  double gap() const { return gap_; }

 private:
  double gap_;
};

}  // namespace jcqoc
