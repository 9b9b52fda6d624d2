#pragma once

#include <optional>

#include "robustcs/types.hpp"

namespace robustcs {

/// The robust system B = ĀᵀĀ + P, z = Āᵀy obtained from the stationarity
/// condition of f(θ) = ‖y − Āθ‖² + θᵀPθ, i.e. Bθ = z.
struct TransformedSystem {
  Matrix b;
  Vector z;
  double y_norm_sq = 0.0;  // ‖y‖², lets f(θ) = ‖y‖² − 2zᵀθ + θᵀBθ be reported exactly
};

enum class CoeffMode {
  ls_on_b,            // minimize ‖z − B_Ω ϑ‖₂
  restricted_normal,  // solve B_{Ω,Ω} ϑ = z_Ω
};

struct GreedyConfig {
  int rho = 1;
  double epsilon = 0.0;
  int max_iter = 1000;
  CoeffMode coeff_mode = CoeffMode::ls_on_b;
  // When set, caps the iteration count at ⌈2·K/ρ⌉.
  std::optional<int> sparsity_estimate;
  // Stop once the relative residual decrease of one iteration falls below this.
  double min_relative_improvement = 1e-6;
};

TransformedSystem robust_transform(const Matrix& a_bar, const Vector& y,
                                   const Matrix& p);

/// f(θ) = ‖y − Āθ‖² + θᵀPθ.
double robust_fit(const Vector& theta, const Matrix& a_bar, const Vector& y,
                  const Matrix& p);

/// Robust orthogonal multiple matching pursuit on (B, z). The reported
/// objective is f(θ̂). `psi_bar` (may be null) maps θ̂ to x̂.
RecoveryResult solve_rommp(const TransformedSystem& system,
                           const Matrix* psi_bar, const GreedyConfig& config,
                           std::vector<double>* residual_trace = nullptr);

/// Classical OMP (ρ = 1) / OMMP (ρ > 1) on (Ā, y). The reported objective is
/// ‖y − Āθ̂‖².
RecoveryResult solve_pursuit(const Matrix& a_bar, const Vector& y,
                             const GreedyConfig& config,
                             const Matrix* psi_bar = nullptr,
                             std::vector<double>* residual_trace = nullptr);

}  // namespace robustcs
