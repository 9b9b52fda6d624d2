#include "robustcs/convex.hpp"

#include <cmath>
#include <limits>

#include "robustcs/covariance.hpp"

namespace robustcs {
namespace {

void check_shapes(const Matrix& a_bar, const Vector& y, const Matrix& p,
                  const char* who) {
  if (y.size() != a_bar.rows())
    throw InvalidArgument(std::string(who) + ": y length must equal the row count of a_bar");
  if (p.rows() != a_bar.cols() || p.cols() != a_bar.cols())
    throw InvalidArgument(std::string(who) + ": P must be N×N");
}

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Smooth part expressed through the Gram form  g(θ) = θᵀQθ − 2bᵀθ + yᵀy,
// with Q = ĀᵀĀ + λ₂P and b = Āᵀy, so ∇g = 2(Qθ − b).
struct Quadratic {
  Matrix q;
  Vector b;
  double yty;

  double value(const Vector& theta, const Vector& q_theta) const {
    return theta.dot(q_theta) - 2.0 * b.dot(theta) + yty;
  }
};

double kkt_from_gradient(const Vector& theta, const Vector& grad, double lambda1) {
  double worst = 0.0;
  for (Index i = 0; i < theta.size(); ++i) {
    double r;
    if (theta(i) > 0.0)
      r = std::abs(grad(i) + lambda1);
    else if (theta(i) < 0.0)
      r = std::abs(grad(i) - lambda1);
    else
      r = std::max(0.0, std::abs(grad(i)) - lambda1);
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace

double crl1_objective(const Vector& theta, const Matrix& a_bar, const Vector& y,
                      const Matrix& p, double lambda1, double lambda2) {
  check_shapes(a_bar, y, p, "objective");
  if (theta.size() != a_bar.cols())
    throw InvalidArgument("objective: theta length must equal the column count of a_bar");
  const double fit = (a_bar * theta - y).squaredNorm();
  const double quad = lambda2 == 0.0 ? 0.0 : lambda2 * theta.dot(p * theta);
  return lambda1 * theta.lpNorm<1>() + quad + fit;
}

Vector smooth_gradient(const Vector& theta, const Matrix& a_bar,
                       const Vector& y, const Matrix& p, double lambda2) {
  check_shapes(a_bar, y, p, "smooth_gradient");
  if (theta.size() != a_bar.cols())
    throw InvalidArgument("smooth_gradient: theta length must equal the column count of a_bar");
  Vector g = 2.0 * (a_bar.transpose() * (a_bar * theta - y));
  if (lambda2 != 0.0) g += 2.0 * lambda2 * (p * theta);
  return g;
}

double optimality_residual(const Vector& theta, const Matrix& a_bar,
                           const Vector& y, const Matrix& p, double lambda1,
                           double lambda2) {
  return kkt_from_gradient(theta, smooth_gradient(theta, a_bar, y, p, lambda2), lambda1);
}

double power_iteration(const Matrix& sym, int max_iter, double tol) {
  const Index n = sym.rows();
  if (n == 0) return 0.0;
  Vector v(n);
  // Deterministic start with no special alignment to structured matrices.
  for (Index i = 0; i < n; ++i) v(i) = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = sym * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

RecoveryResult solve_crl1(const Matrix& a_bar, const Vector& y, const Matrix& p,
                          const ConvexConfig& config, const Matrix* psi_bar,
                          std::vector<double>* objective_trace) {
  check_shapes(a_bar, y, p, "solve_crl1");
  if (!(config.lambda1 >= 0.0) || !(config.lambda2 >= 0.0))
    throw InvalidArgument("solve_crl1: lambda1 and lambda2 must be nonnegative");
  if (!(config.tol > 0.0)) throw InvalidArgument("solve_crl1: tol must be positive");
  if (config.max_iter < 1) throw InvalidArgument("solve_crl1: max_iter must be >= 1");
  if (psi_bar && (psi_bar->rows() != a_bar.cols() || psi_bar->cols() != a_bar.cols()))
    throw InvalidArgument("solve_crl1: psi_bar must be N×N");
  require_psd(p, "solve_crl1");

  const Index n = a_bar.cols();
  const double lambda1 = config.lambda1;

  Quadratic g;
  g.q = a_bar.transpose() * a_bar;
  if (config.lambda2 != 0.0) g.q += config.lambda2 * p;
  g.b = a_bar.transpose() * y;
  g.yty = y.squaredNorm();

  bool degenerate = false;
  if (lambda1 == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g.q, Eigen::EigenvaluesOnly);
    const Vector& ev = eig.eigenvalues();
    degenerate = ev.minCoeff() <= 1e-12 * std::max(1.0, ev.maxCoeff());
  }

  const double lipschitz = 2.0 * power_iteration(g.q) * 1.01;
  double step_l = config.step_rule == StepRule::lipschitz
                      ? std::max(lipschitz, std::numeric_limits<double>::min())
                      : std::max(1e-3 * lipschitz, 1e-12);

  auto composite = [&](const Vector& th, const Vector& q_th) {
    return g.value(th, q_th) + lambda1 * th.lpNorm<1>();
  };

  Vector x = Vector::Zero(n);
  Vector qx = Vector::Zero(n);
  double fx = composite(x, qx);
  Vector yk = x;
  Vector qy = qx;
  double t = 1.0;

  RecoveryResult result;
  result.status = SolveStatus::max_iter;
  if (objective_trace) objective_trace->push_back(fx);

  if (kkt_from_gradient(x, 2.0 * (qx - g.b), lambda1) <= config.tol) {
    result.status = SolveStatus::converged;
  } else {
    Vector z(n), qz(n);
    for (int it = 1; it <= config.max_iter; ++it) {
      result.iterations = it;
      const Vector grad_y = 2.0 * (qy - g.b);
      const double gy = g.value(yk, qy);
      while (true) {
        for (Index i = 0; i < n; ++i)
          z(i) = soft(yk(i) - grad_y(i) / step_l, lambda1 / step_l);
        qz.noalias() = g.q * z;
        if (config.step_rule == StepRule::lipschitz) break;
        const Vector d = z - yk;
        const double model = gy + grad_y.dot(d) + 0.5 * step_l * d.squaredNorm();
        const double gz = g.value(z, qz);
        if (gz <= model + 1e-12 * std::max(1.0, std::abs(model))) break;
        step_l *= 2.0;
      }

      const double fz = composite(z, qz);
      const Vector x_prev = x;
      const Vector qx_prev = qx;
      if (fz <= fx) {
        x = z;
        qx = qz;
        fx = fz;
      }
      if (objective_trace) objective_trace->push_back(fx);

      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      yk = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
      qy = qx + (t / t_next) * (qz - qx) + ((t - 1.0) / t_next) * (qx - qx_prev);
      t = t_next;

      if (kkt_from_gradient(x, 2.0 * (qx - g.b), lambda1) <= config.tol) {
        result.status = SolveStatus::converged;
        break;
      }
    }
  }

  result.theta_hat = x;
  result.x_hat = psi_bar ? Vector(*psi_bar * x) : x;
  result.objective = crl1_objective(x, a_bar, y, p, lambda1, config.lambda2);
  if (degenerate) result.status = SolveStatus::degenerate;
  return result;
}

RecoveryResult solve_bpdn(const Matrix& a_bar, const Vector& y, double lambda1,
                          const ConvexConfig& config, const Matrix* psi_bar) {
  ConvexConfig c = config;
  c.lambda1 = lambda1;
  c.lambda2 = 0.0;
  const Matrix zero = Matrix::Zero(a_bar.cols(), a_bar.cols());
  return solve_crl1(a_bar, y, zero, c, psi_bar);
}

}  // namespace robustcs
