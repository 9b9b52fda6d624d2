#pragma once

#include <functional>
#include <vector>

#include "robustcs/types.hpp"

namespace robustcs {

/// Reference answer from a brute-force or closed-form solver.
struct OracleSolution {
  Vector theta_star;
  double objective = 0.0;
  std::vector<Index> support;
  long long enumerated = 0;
};

/// Largest N accepted by exhaustive_l0.
inline constexpr Index kEnumerationGuard = 20;

/// Minimizes ‖Āθ − y‖² + λ₂θᵀPθ over all supports of size ≤ k_max.
/// Supports are visited by size, then lexicographically; a later support only
/// wins with a strictly smaller objective.
OracleSolution exhaustive_l0(const Matrix& a_bar, const Vector& y,
                             const Matrix& p, Index k_max, double lambda2);

enum class LineMode { l1, l1_plus_quadratic, l0 };

/// Exact minimizer over the line a_row·θ = y in the plane of ‖θ‖₁,
/// ‖θ‖₁ + θᵀPθ, or ‖θ‖₀ (ties broken by smaller ‖θ‖₁).
OracleSolution line_constrained_2d(const Eigen::Vector2d& a_row, double y,
                                   const Eigen::Matrix2d& p, LineMode mode);

using ScalarField = std::function<double(const Vector&)>;

/// Central-difference gradient.
Vector finite_diff_gradient(const ScalarField& f, const Vector& theta, double h);

}  // namespace robustcs
