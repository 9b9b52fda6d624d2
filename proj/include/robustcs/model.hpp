#pragma once

#include <vector>

#include "robustcs/types.hpp"

namespace robustcs {

/// Sparse representation vector θ.
struct CoefficientVector {
  Vector values;
  std::vector<Index> support;  // sorted ascending

  Index k() const { return static_cast<Index>(support.size()); }
};

/// Nominal and perturbed sensing operators of the generalized signal model
///
///   A = (Φ̄ + E₁)(Ψ̄ + E₂) = Ā + E,  Ā = Φ̄Ψ̄,  E = Φ̄E₂ + E₁Ψ̄ + E₁E₂,
///
/// after column normalization of Ā and E, with the realized operator
/// A = Ā + τE.
struct SensingModel {
  Matrix phi_bar;  // M×N
  Matrix psi_bar;  // N×N
  Matrix e1;       // M×N
  Matrix e2;       // N×N
  Matrix a_bar;    // M×N, unit columns
  Matrix e;        // M×N, unit (or exactly zero) columns
  double tau = 0.0;
  Matrix a;        // a_bar + tau * e
  std::vector<Index> zero_error_columns;

  Index rows() const { return a_bar.rows(); }
  Index cols() const { return a_bar.cols(); }
};

struct Measurements {
  Vector y;
  double sigma = 0.0;
  Seed seed = 0;
};

CoefficientVector generate_sparse_coefficients(Index n, Index k, Seed seed);

Matrix gaussian_matrix(Index rows, Index cols, Seed seed);

/// i.i.d. uniform entries on [−√(3v), √(3v)], i.e. zero mean and variance v.
Matrix uniform_matrix(Index rows, Index cols, Seed seed, double variance = 1.0);

/// Perturbation E = Φ̄E₂ + E₁Ψ̄ + E₁E₂ before normalization.
Matrix sensing_error(const Matrix& phi_bar, const Matrix& psi_bar,
                     const Matrix& e1, const Matrix& e2);

/// Scales each column to unit ℓ2 norm; exactly-zero columns are left as zero
/// and their indices are returned through `zero_columns` when non-null.
void normalize_columns(Matrix& m, std::vector<Index>* zero_columns = nullptr);

SensingModel assemble_sensing_model(const Matrix& phi_bar,
                                    const Matrix& psi_bar, const Matrix& e1,
                                    const Matrix& e2, double tau);

Measurements measure(const SensingModel& model, const Vector& theta,
                     double sigma, Seed seed);

}  // namespace robustcs
