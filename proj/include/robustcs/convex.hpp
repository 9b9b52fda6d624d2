#pragma once

#include <optional>

#include "robustcs/types.hpp"

namespace robustcs {

enum class StepRule { lipschitz, backtracking };

struct ConvexConfig {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int max_iter = 10000;
  double tol = 1e-8;
  StepRule step_rule = StepRule::backtracking;
};

/// CR-L1 objective  λ₁‖θ‖₁ + λ₂θᵀPθ + ‖Āθ − y‖².
double crl1_objective(const Vector& theta, const Matrix& a_bar, const Vector& y,
                      const Matrix& p, double lambda1, double lambda2);

/// Gradient of the smooth part g(θ) = ‖Āθ − y‖² + λ₂θᵀPθ.
Vector smooth_gradient(const Vector& theta, const Matrix& a_bar,
                       const Vector& y, const Matrix& p, double lambda2);

/// KKT violation of the CR-L1 problem at θ; zero certifies global optimality.
double optimality_residual(const Vector& theta, const Matrix& a_bar,
                           const Vector& y, const Matrix& p, double lambda1,
                           double lambda2);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration(const Matrix& sym, int max_iter = 500, double tol = 1e-10);

/// Monotone accelerated proximal gradient (FISTA with a monotone safeguard).
/// Pass P = 0 (or λ₂ = 0) for BPDN, P = δI for the elastic net.
/// `psi_bar`, when given, is used to fill x_hat.
RecoveryResult solve_crl1(const Matrix& a_bar, const Vector& y, const Matrix& p,
                          const ConvexConfig& config,
                          const Matrix* psi_bar = nullptr,
                          std::vector<double>* objective_trace = nullptr);

/// Plain BPDN: solve_crl1 with λ₂ = 0.
RecoveryResult solve_bpdn(const Matrix& a_bar, const Vector& y, double lambda1,
                          const ConvexConfig& config = {},
                          const Matrix* psi_bar = nullptr);

}  // namespace robustcs
