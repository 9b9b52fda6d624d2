#pragma once

#include <span>
#include <utility>
#include <vector>

#include "robustcs/model.hpp"
#include "robustcs/types.hpp"

namespace robustcs {

/// (true signal, estimate)
using SignalPair = std::pair<Vector, Vector>;

struct MetricReport {
  double e1 = 0.0;
  double e2 = 0.0;
  double coherence = 0.0;
  int trials = 0;
};

/// Constants of the sufficient-measurement bound.
struct TheoryParams {
  double c1 = 1.0;  // kernel-ratio constant
  double c2 = 0.0;  // E‖E‖₂
  double lambda2 = 0.0;
};

/// e_b = (1/(2L)) Σ ‖xₗ − x̂ₗ‖_b / ‖xₗ‖_b, b ∈ {1, 2}. The 1/(2L) factor is
/// kept as published, so a perfectly anti-correlated estimate scores 1.
double normalized_mean_error(std::span<const SignalPair> pairs, int b);

/// (1/L) Σ |xₗᵀx̂ₗ| / (‖xₗ‖‖x̂ₗ‖).
double mean_coherence(std::span<const SignalPair> pairs);

/// e1, e2 and coherence in one pass. Pairs with a zero estimate count as
/// coherence 0 instead of throwing, which is what a sweep needs when a
/// solver returns θ̂ = 0.
MetricReport score(std::span<const SignalPair> pairs);

/// ⌈((2√k + λ₂c₂)² / c₁²) · ln n⌉.
long long sufficient_measurements(long long k, long long n, const TheoryParams& params);

/// Smallest integer M ≥ 1 with M ≥ (ln n − ln M)·((2√k + λ₂c₂)/c₁)².
long long sufficient_measurements_tight(long long k, long long n, const TheoryParams& params);

struct TheoremStepReport {
  bool l1_chain = false;          // ‖α+v‖₁ ≥ ‖α‖₁ + ‖v‖₁ − 2√k‖v‖₂
  bool ellipsoid_chain = false;   // √((α+v)ᵀP(α+v)) ≥ √(αᵀPα) − C₂‖v‖₂
  bool ratio_bounds = false;      // 1 ≤ ‖v‖₁/‖v‖₂ ≤ √N (vacuous for v = 0)
  double l1_slack = 0.0;          // lhs − rhs, ≥ −1e-10 when the check passes
  double ellipsoid_slack = 0.0;
  double mean_perturbed_norm = 0.0;  // mean ‖Eₗ(α+v)‖₂, for reference
  double c2 = 0.0;

  bool all() const { return l1_chain && ellipsoid_chain && ratio_bounds; }
};

/// Evaluates the inequality chain behind the sufficient-measurement bound on
/// a concrete (α, v) and a sample of perturbation matrices.
TheoremStepReport verify_theorem_steps(const Vector& alpha, const Vector& v,
                                       std::span<const Matrix> e_draws);

/// Draws `trials` fresh perturbations (E drawn like the model's, scaled by
/// τ) and additive noise, and compares the sample mean of ‖y − y₀‖² with
/// ‖Āθ − y‖² + θᵀPθ + Mσ² for the observation y = Āθ. Returns the relative
/// error |mean − expected| / (θᵀPθ + Mσ²) (0 when both sides vanish).
///
/// `p_true` must be E[(τE)ᵀ(τE)] for the draw distribution used here:
/// E₁ ~ N(0, 1) and E₂ ~ U(−√3, √3) without column normalization, combined
/// as in sensing_error and scaled by model.tau.
double verify_expected_error(const SensingModel& model, const Vector& theta,
                             double sigma, const Matrix& p_true, int trials,
                             Seed seed);

/// Analytic E[EᵀE] of the unnormalized perturbation E = Φ̄E₂ + E₁Ψ̄ + E₁E₂
/// with E₁ i.i.d. variance v1 and E₂ i.i.d. variance v2 (scaled by τ²).
Matrix analytic_error_covariance(const Matrix& phi_bar, const Matrix& psi_bar,
                                 double tau, double v1 = 1.0, double v2 = 1.0);

struct KernelRatioReport {
  double max_ratio = 0.0;   // max ‖v‖₁/‖v‖₂ over sampled null-space vectors
  double fitted_c1 = 0.0;   // max_ratio · √(ln(N/M)) / √M
  int samples = 0;
};

/// Samples random vectors from ker(Ā) and fits the kernel-ratio constant C₁.
KernelRatioReport kernel_ratio(const Matrix& a_bar, int samples, Seed seed);

}  // namespace robustcs
