#include "robustcs/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robustcs/covariance.hpp"

namespace robustcs {
namespace {

// Picks up to `count` indices outside `in_support` with the largest |score|;
// exact ties go to the lower index.
std::vector<Index> select_atoms(const Vector& score, const std::vector<bool>& in_support,
                                int count) {
  std::vector<Index> candidates;
  candidates.reserve(static_cast<std::size_t>(score.size()));
  for (Index i = 0; i < score.size(); ++i)
    if (!in_support[static_cast<std::size_t>(i)]) candidates.push_back(i);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(count), candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), [&](Index a, Index b) {
                      const double sa = std::abs(score(a));
                      const double sb = std::abs(score(b));
                      return sa != sb ? sa > sb : a < b;
                    });
  candidates.resize(take);
  return candidates;
}

struct Subproblem {
  Vector coeffs;
  bool rank_deficient = false;
};

Subproblem least_squares(const Matrix& lhs, const Vector& rhs) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(lhs);
  return {cod.solve(rhs), cod.rank() < lhs.cols()};
}

// Shared matching-pursuit loop. Selection correlates columns of `atoms` with
// the residual; `restricted` switches the coefficient update to the square
// system atoms(Ω, Ω) ϑ = target(Ω), which only makes sense when atoms is B.
RecoveryResult pursue(const Matrix& atoms, const Vector& target, bool restricted,
                      const GreedyConfig& config, std::vector<double>* residual_trace) {
  if (config.rho < 1) throw InvalidArgument("greedy: rho must be >= 1");
  if (config.max_iter < 1) throw InvalidArgument("greedy: max_iter must be >= 1");
  if (!(config.epsilon >= 0.0)) throw InvalidArgument("greedy: epsilon must be >= 0");

  const Index n = atoms.cols();
  int cap = config.max_iter;
  if (config.sparsity_estimate) {
    if (*config.sparsity_estimate < 0) throw InvalidArgument("greedy: negative sparsity estimate");
    const int est = (2 * *config.sparsity_estimate + config.rho - 1) / config.rho;
    cap = std::min(cap, std::max(1, est));
  }

  RecoveryResult result;
  result.theta_hat = Vector::Zero(n);
  result.status = SolveStatus::max_iter;

  std::vector<bool> in_support(static_cast<std::size_t>(n), false);
  Vector residual = target;
  double res_norm = residual.norm();
  if (residual_trace) residual_trace->push_back(res_norm);
  double fit_value = 0.0;

  if (res_norm <= config.epsilon) {
    result.status = SolveStatus::converged;
    return result;
  }

  for (int it = 1; it <= cap; ++it) {
    const Vector score = atoms.transpose() * residual;
    const auto picked = select_atoms(score, in_support, config.rho);
    if (picked.empty()) {
      result.status = SolveStatus::converged;
      break;
    }
    for (Index i : picked) {
      in_support[static_cast<std::size_t>(i)] = true;
      result.support.push_back(i);
    }
    result.iterations = it;

    const auto k = static_cast<Index>(result.support.size());
    Subproblem sub;
    if (restricted) {
      Matrix lhs(k, k);
      Vector rhs(k);
      for (Index c = 0; c < k; ++c) {
        rhs(c) = target(result.support[static_cast<std::size_t>(c)]);
        for (Index r = 0; r < k; ++r)
          lhs(r, c) = atoms(result.support[static_cast<std::size_t>(r)],
                            result.support[static_cast<std::size_t>(c)]);
      }
      sub = least_squares(lhs, rhs);
    } else {
      Matrix lhs(atoms.rows(), k);
      for (Index c = 0; c < k; ++c) lhs.col(c) = atoms.col(result.support[static_cast<std::size_t>(c)]);
      sub = least_squares(lhs, target);
    }

    result.theta_hat.setZero();
    for (Index c = 0; c < k; ++c)
      result.theta_hat(result.support[static_cast<std::size_t>(c)]) = sub.coeffs(c);
    residual = target - atoms * result.theta_hat;
    const double prev = res_norm;
    res_norm = residual.norm();
    if (residual_trace) residual_trace->push_back(res_norm);

    if (sub.rank_deficient) {
      result.status = SolveStatus::degenerate;
      break;
    }
    if (res_norm <= config.epsilon || k == n) {
      result.status = SolveStatus::converged;
      break;
    }
    // Stall test on the quantity each update rule decreases monotonically:
    // the residual for least squares, θᵀBθ − 2zᵀθ for the restricted system.
    double before = prev, after = res_norm;
    if (restricted) {
      before = fit_value;
      fit_value = result.theta_hat.dot(atoms * result.theta_hat) - 2.0 * target.dot(result.theta_hat);
      after = fit_value;
    }
    if (before - after < config.min_relative_improvement * std::abs(before)) {
      result.status = SolveStatus::converged;
      break;
    }
  }
  return result;
}

}  // namespace

TransformedSystem robust_transform(const Matrix& a_bar, const Vector& y,
                                   const Matrix& p) {
  if (y.size() != a_bar.rows())
    throw InvalidArgument("robust_transform: y length must equal the row count of a_bar");
  if (p.rows() != a_bar.cols() || p.cols() != a_bar.cols())
    throw InvalidArgument("robust_transform: P must be N×N");
  require_psd(p, "robust_transform");
  TransformedSystem sys;
  sys.b = a_bar.transpose() * a_bar + p;
  sys.b = 0.5 * (sys.b + sys.b.transpose()).eval();
  sys.z = a_bar.transpose() * y;
  sys.y_norm_sq = y.squaredNorm();
  return sys;
}

double robust_fit(const Vector& theta, const Matrix& a_bar, const Vector& y,
                  const Matrix& p) {
  if (theta.size() != a_bar.cols() || y.size() != a_bar.rows() ||
      p.rows() != a_bar.cols() || p.cols() != a_bar.cols())
    throw InvalidArgument("robust_fit: shape mismatch");
  return (y - a_bar * theta).squaredNorm() + theta.dot(p * theta);
}

RecoveryResult solve_rommp(const TransformedSystem& system,
                           const Matrix* psi_bar, const GreedyConfig& config,
                           std::vector<double>* residual_trace) {
  const Index n = system.b.cols();
  if (system.b.rows() != n || system.z.size() != n)
    throw InvalidArgument("solve_rommp: B must be N×N and z of length N");
  if (psi_bar && (psi_bar->rows() != n || psi_bar->cols() != n))
    throw InvalidArgument("solve_rommp: psi_bar must be N×N");

  RecoveryResult result = pursue(system.b, system.z,
                                 config.coeff_mode == CoeffMode::restricted_normal,
                                 config, residual_trace);
  const Vector& th = result.theta_hat;
  result.objective = system.y_norm_sq - 2.0 * system.z.dot(th) + th.dot(system.b * th);
  result.x_hat = psi_bar ? Vector(*psi_bar * th) : th;
  return result;
}

RecoveryResult solve_pursuit(const Matrix& a_bar, const Vector& y,
                             const GreedyConfig& config, const Matrix* psi_bar,
                             std::vector<double>* residual_trace) {
  if (y.size() != a_bar.rows())
    throw InvalidArgument("solve_pursuit: y length must equal the row count of a_bar");
  if (psi_bar && (psi_bar->rows() != a_bar.cols() || psi_bar->cols() != a_bar.cols()))
    throw InvalidArgument("solve_pursuit: psi_bar must be N×N");
  RecoveryResult result = pursue(a_bar, y, false, config, residual_trace);
  result.objective = (y - a_bar * result.theta_hat).squaredNorm();
  result.x_hat = psi_bar ? Vector(*psi_bar * result.theta_hat) : result.theta_hat;
  return result;
}

}  // namespace robustcs
