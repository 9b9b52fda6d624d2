#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace robustcs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Seed = std::uint64_t;

// Error taxonomy. Everything derives from the std hierarchy so callers that
// only care about "bad input" can catch std::invalid_argument.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The nominal sensing matrix has an all-zero column.
class DegenerateModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Brute-force enumeration refused because the problem is too large.
class TooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// No point satisfies the constraint (e.g. 0·θ = y with y ≠ 0).
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input signal has fewer samples than one segment.
class TooShort : public InputError {
 public:
  using InputError::InputError;
};

enum class SolveStatus { converged, max_iter, degenerate };

const char* to_string(SolveStatus s);

/// Output of every recovery routine (convex and greedy).
struct RecoveryResult {
  Vector theta_hat;
  Vector x_hat;  // psi_bar * theta_hat, or theta_hat when no dictionary is given
  int iterations = 0;
  double objective = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  std::vector<Index> support;  // greedy solvers: selection order
};

}  // namespace robustcs
