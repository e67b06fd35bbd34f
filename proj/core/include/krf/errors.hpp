#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace krf {

// Bad user-supplied parameter (dimension, tolerance, config field, ...).
class parameter_error : public std::invalid_argument {
 public:
  explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

// A metric lost positive definiteness. Carries the first offending node and
// the eigenvalue that crossed the floor so callers can report where the flow
// degenerated.
class positivity_loss : public std::runtime_error {
 public:
  positivity_loss(const std::string& what, std::size_t node, double min_eig)
      : std::runtime_error(what), node_(node), min_eig_(min_eig) {}
  std::size_t node() const { return node_; }
  double min_eig() const { return min_eig_; }

 private:
  std::size_t node_;
  double min_eig_;
};

// Explicit time step exceeded its stability bound; the caller must reduce dt.
class stability_violation : public std::runtime_error {
 public:
  stability_violation(const std::string& what, double dt, double bound)
      : std::runtime_error(what), dt_(dt), bound_(bound) {}
  double dt() const { return dt_; }
  double bound() const { return bound_; }

 private:
  double dt_;
  double bound_;
};

// Evaluation outside the stored range of a trajectory or schedule.
class range_error : public std::out_of_range {
 public:
  explicit range_error(const std::string& what) : std::out_of_range(what) {}
};

}  // namespace krf
