#pragma once

#include <optional>
#include <span>
#include <vector>

#include "robustcs/types.hpp"

namespace robustcs {

enum class CovarianceProvenance { sampled, diagonal, isotropic, explicit_ };

const char* to_string(CovarianceProvenance p);

/// Second-moment matrix P = E(EᵀE) of the sensing-matrix perturbation.
/// Always symmetric positive semidefinite.
struct CovarianceModel {
  Matrix p;
  CovarianceProvenance provenance = CovarianceProvenance::explicit_;
  std::optional<Vector> delta;  // per-column standard deviations (diagonal form)
};

/// Rejects asymmetric or indefinite input; eigenvalues that are negative only
/// by rounding (≥ −1e-10·‖P‖₂) are clamped to zero.
CovarianceModel make_covariance(Matrix p, CovarianceProvenance provenance);

/// Throws InvalidArgument unless P is square, symmetric and PSD within the
/// tolerances above. Cheap for diagonal matrices.
void require_psd(const Matrix& p, const char* who);

/// P = (1/L) Σ UₗᵀUₗ.
CovarianceModel sample_covariance(std::span<const Matrix> draws);

/// P = diag(δ₁..δ_N), so that θᵀPθ = ‖Δθ‖² with Δ = diag(√δᵢ).
CovarianceModel diagonal_covariance(const Vector& delta);

/// δ̂² = σ_min([Ā | y])², the total-least-squares noise-variance estimate.
/// For M < N + 1 the concatenation has a nontrivial null space and the
/// estimate is 0.
double isotropic_estimate(const Matrix& a_bar, const Vector& y);

/// Monte Carlo estimate of E‖E‖₂ (mean largest singular value).
double expected_spectral_norm(std::span<const Matrix> draws);

}  // namespace robustcs
