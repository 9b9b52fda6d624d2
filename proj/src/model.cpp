#include "robustcs/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robustcs/rng.hpp"

namespace robustcs {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::max_iter:
      return "max_iter";
    case SolveStatus::degenerate:
      return "degenerate";
  }
  return "unknown";
}

CoefficientVector generate_sparse_coefficients(Index n, Index k, Seed seed) {
  if (n <= 0) throw InvalidArgument("generate_sparse_coefficients: n must be positive");
  if (k < 0 || k > n)
    throw InvalidArgument("generate_sparse_coefficients: k must lie in [0, n]");

  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots become the support.
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }

  CoefficientVector out;
  out.support.assign(perm.begin(), perm.begin() + k);
  std::sort(out.support.begin(), out.support.end());
  out.values = Vector::Zero(n);
  for (Index idx : out.support) {
    double v = 0.0;
    while (v == 0.0) v = rng.normal();  // support entries must be nonzero
    out.values(idx) = v;
  }
  if (k > 0) out.values /= out.values.norm();
  return out;
}

Matrix gaussian_matrix(Index rows, Index cols, Seed seed) {
  if (rows <= 0 || cols <= 0)
    throw InvalidArgument("gaussian_matrix: dimensions must be positive");
  Rng rng(seed);
  return rng.normal_matrix(rows, cols);
}

Matrix uniform_matrix(Index rows, Index cols, Seed seed, double variance) {
  if (rows <= 0 || cols <= 0)
    throw InvalidArgument("uniform_matrix: dimensions must be positive");
  if (!(variance >= 0.0)) throw InvalidArgument("uniform_matrix: negative variance");
  Rng rng(seed);
  const double half = std::sqrt(3.0 * variance);
  return rng.uniform_matrix(rows, cols, -half, half);
}

Matrix sensing_error(const Matrix& phi_bar, const Matrix& psi_bar,
                     const Matrix& e1, const Matrix& e2) {
  // Φ̄E₂ + E₁Ψ̄ + E₁E₂ regrouped to save one product.
  Matrix e = e1 * psi_bar;
  if (!e2.isZero(0.0)) e.noalias() += (phi_bar + e1) * e2;
  return e;
}

void normalize_columns(Matrix& m, std::vector<Index>* zero_columns) {
  for (Index j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    if (norm == 0.0) {
      if (zero_columns) zero_columns->push_back(j);
      continue;
    }
    m.col(j) /= norm;
  }
}

SensingModel assemble_sensing_model(const Matrix& phi_bar,
                                    const Matrix& psi_bar, const Matrix& e1,
                                    const Matrix& e2, double tau) {
  const Index m = phi_bar.rows();
  const Index n = phi_bar.cols();
  if (m == 0 || n == 0) throw InvalidArgument("assemble_sensing_model: empty phi_bar");
  if (psi_bar.rows() != n || psi_bar.cols() != n)
    throw InvalidArgument("assemble_sensing_model: psi_bar must be N×N");
  if (e2.rows() != n || e2.cols() != n)
    throw InvalidArgument("assemble_sensing_model: e2 must be N×N");
  if (e1.rows() != m || e1.cols() != n)
    throw InvalidArgument("assemble_sensing_model: e1 must be M×N");
  if (!(tau >= 0.0)) throw InvalidArgument("assemble_sensing_model: tau must be >= 0");

  SensingModel model;
  model.phi_bar = phi_bar;
  model.psi_bar = psi_bar;
  model.e1 = e1;
  model.e2 = e2;
  model.tau = tau;

  model.a_bar = phi_bar * psi_bar;
  std::vector<Index> zero_a;
  normalize_columns(model.a_bar, &zero_a);
  if (!zero_a.empty())
    throw DegenerateModel("assemble_sensing_model: a_bar column " +
                          std::to_string(zero_a.front()) + " is zero");

  model.e = sensing_error(phi_bar, psi_bar, e1, e2);
  normalize_columns(model.e, &model.zero_error_columns);
  model.a = model.a_bar + tau * model.e;
  return model;
}

Measurements measure(const SensingModel& model, const Vector& theta,
                     double sigma, Seed seed) {
  if (theta.size() != model.cols())
    throw InvalidArgument("measure: theta length must equal the model column count");
  if (!(sigma >= 0.0)) throw InvalidArgument("measure: sigma must be >= 0");
  Rng rng(seed);
  Measurements out;
  out.y = model.a * theta + rng.normal_vector(model.rows(), sigma);
  out.sigma = sigma;
  out.seed = seed;
  return out;
}

}  // namespace robustcs
