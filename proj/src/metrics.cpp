#include "robustcs/metrics.hpp"

#include <cmath>

#include "robustcs/covariance.hpp"
#include "robustcs/rng.hpp"

namespace robustcs {
namespace {

double norm_b(const Vector& v, int b) { return b == 1 ? v.lpNorm<1>() : v.norm(); }

double bound_factor(long long k, const TheoryParams& params) {
  if (!(params.c1 > 0.0)) throw InvalidArgument("theory: c1 must be positive");
  if (params.c2 < 0.0 || params.lambda2 < 0.0)
    throw InvalidArgument("theory: c2 and lambda2 must be nonnegative");
  if (k < 0) throw InvalidArgument("theory: k must be nonnegative");
  const double root = 2.0 * std::sqrt(static_cast<double>(k)) + params.lambda2 * params.c2;
  return root * root / (params.c1 * params.c1);
}

}  // namespace

double normalized_mean_error(std::span<const SignalPair> pairs, int b) {
  if (pairs.empty()) throw InvalidArgument("normalized_mean_error: no pairs");
  if (b != 1 && b != 2) throw InvalidArgument("normalized_mean_error: b must be 1 or 2");
  double acc = 0.0;
  for (const auto& [x, x_hat] : pairs) {
    if (x.size() != x_hat.size()) throw InvalidArgument("normalized_mean_error: length mismatch");
    const double denom = norm_b(x, b);
    if (denom == 0.0) throw InvalidArgument("normalized_mean_error: zero reference signal");
    acc += norm_b(x - x_hat, b) / denom;
  }
  return acc / (2.0 * static_cast<double>(pairs.size()));
}

double mean_coherence(std::span<const SignalPair> pairs) {
  if (pairs.empty()) throw InvalidArgument("mean_coherence: no pairs");
  double acc = 0.0;
  for (const auto& [x, x_hat] : pairs) {
    if (x.size() != x_hat.size()) throw InvalidArgument("mean_coherence: length mismatch");
    const double denom = x.norm() * x_hat.norm();
    if (denom == 0.0) throw InvalidArgument("mean_coherence: zero-norm vector");
    acc += std::abs(x.dot(x_hat)) / denom;
  }
  return acc / static_cast<double>(pairs.size());
}

MetricReport score(std::span<const SignalPair> pairs) {
  MetricReport r;
  r.e1 = normalized_mean_error(pairs, 1);
  r.e2 = normalized_mean_error(pairs, 2);
  double acc = 0.0;
  for (const auto& [x, x_hat] : pairs) {
    const double denom = x.norm() * x_hat.norm();
    if (denom > 0.0) acc += std::abs(x.dot(x_hat)) / denom;
  }
  r.coherence = acc / static_cast<double>(pairs.size());
  r.trials = static_cast<int>(pairs.size());
  return r;
}

long long sufficient_measurements(long long k, long long n, const TheoryParams& params) {
  if (n < 2) throw InvalidArgument("sufficient_measurements: n must be >= 2");
  const double bound = bound_factor(k, params) * std::log(static_cast<double>(n));
  return static_cast<long long>(std::ceil(bound));
}

long long sufficient_measurements_tight(long long k, long long n, const TheoryParams& params) {
  if (n < 2) throw InvalidArgument("sufficient_measurements_tight: n must be >= 2");
  const double q = bound_factor(k, params);
  const double log_n = std::log(static_cast<double>(n));
  // M − (ln n − ln M)·q is increasing in M, so bisect for the first M ≥ 1 where
  // it turns nonnegative; M = n always qualifies.
  auto ok = [&](long long m) {
    return static_cast<double>(m) >= (log_n - std::log(static_cast<double>(m))) * q;
  };
  long long lo = 1, hi = n;
  if (ok(lo)) return lo;
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

TheoremStepReport verify_theorem_steps(const Vector& alpha, const Vector& v,
                                       std::span<const Matrix> e_draws) {
  if (alpha.size() != v.size()) throw InvalidArgument("verify_theorem_steps: length mismatch");
  constexpr double slack = 1e-10;
  TheoremStepReport r;
  const double k = static_cast<double>((alpha.array() != 0.0).count());
  const double v2 = v.norm();
  const double v1 = v.lpNorm<1>();

  const double l1_lhs = (alpha + v).lpNorm<1>();
  const double l1_rhs = alpha.lpNorm<1>() + v1 - 2.0 * std::sqrt(k) * v2;
  r.l1_slack = l1_lhs - l1_rhs;
  r.l1_chain = r.l1_slack >= -slack * std::max(1.0, l1_lhs);

  if (v2 == 0.0) {
    r.ratio_bounds = true;
  } else {
    const double ratio = v1 / v2;
    const double root_n = std::sqrt(static_cast<double>(v.size()));
    r.ratio_bounds = ratio >= 1.0 - slack && ratio <= root_n * (1.0 + slack);
  }

  if (e_draws.empty()) {
    r.ellipsoid_chain = true;
    return r;
  }
  for (const Matrix& e : e_draws)
    if (e.cols() != alpha.size()) throw InvalidArgument("verify_theorem_steps: draw shape mismatch");
  const Matrix p = sample_covariance(e_draws).p;
  r.c2 = expected_spectral_norm(e_draws);
  const Vector sum = alpha + v;
  const double lhs = std::sqrt(std::max(0.0, sum.dot(p * sum)));
  const double rhs = std::sqrt(std::max(0.0, alpha.dot(p * alpha))) - r.c2 * v2;
  r.ellipsoid_slack = lhs - rhs;
  r.ellipsoid_chain = r.ellipsoid_slack >= -slack * std::max(1.0, lhs);

  double acc = 0.0;
  for (const Matrix& e : e_draws) acc += (e * sum).norm();
  r.mean_perturbed_norm = acc / static_cast<double>(e_draws.size());
  return r;
}

Matrix analytic_error_covariance(const Matrix& phi_bar, const Matrix& psi_bar,
                                 double tau, double v1, double v2) {
  const Index m = phi_bar.rows();
  const Index n = phi_bar.cols();
  // E[E₂ᵀGE₂] = v2·tr(G)·I, E[E₁ᵀE₁] = v1·M·I; cross terms vanish.
  Matrix p = v1 * static_cast<double>(m) * (psi_bar.transpose() * psi_bar);
  const double iso = v2 * phi_bar.squaredNorm() +
                     v1 * v2 * static_cast<double>(m) * static_cast<double>(n);
  p.diagonal().array() += iso;
  return tau * tau * p;
}

double verify_expected_error(const SensingModel& model, const Vector& theta,
                             double sigma, const Matrix& p_true, int trials,
                             Seed seed) {
  if (trials < 1) throw InvalidArgument("verify_expected_error: trials must be >= 1");
  const Index m = model.rows();
  const Index n = model.cols();
  if (theta.size() != n || p_true.rows() != n || p_true.cols() != n)
    throw InvalidArgument("verify_expected_error: shape mismatch");

  const Vector y = model.a_bar * theta;  // noiseless observation convention
  const double half = std::sqrt(3.0);
  Rng rng(seed);
  double acc = 0.0;
  for (int l = 0; l < trials; ++l) {
    const Matrix e1 = rng.normal_matrix(m, n);
    const Matrix e2 = rng.uniform_matrix(n, n, -half, half);
    const Matrix e = model.tau * sensing_error(model.phi_bar, model.psi_bar, e1, e2);
    const Vector y0 = (model.a_bar + e) * theta + rng.normal_vector(m, sigma);
    acc += (y - y0).squaredNorm();
  }
  const double mean = acc / trials;
  const double fit = (model.a_bar * theta - y).squaredNorm();
  const double spread = theta.dot(p_true * theta) + static_cast<double>(m) * sigma * sigma;
  const double expected = fit + spread;
  if (spread == 0.0) return std::abs(mean - expected) == 0.0 ? 0.0 : std::abs(mean - expected);
  return std::abs(mean - expected) / spread;
}

KernelRatioReport kernel_ratio(const Matrix& a_bar, int samples, Seed seed) {
  const Index m = a_bar.rows();
  const Index n = a_bar.cols();
  if (m >= n) throw InvalidArgument("kernel_ratio: Ā must be wide (M < N)");
  if (samples < 1) throw InvalidArgument("kernel_ratio: samples must be >= 1");
  Eigen::JacobiSVD<Matrix> svd(a_bar, Eigen::ComputeFullV);
  const Index rank = svd.rank();
  const Matrix basis = svd.matrixV().rightCols(n - rank);
  Rng rng(seed);
  KernelRatioReport r;
  r.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const Vector v = basis * rng.normal_vector(basis.cols());
    r.max_ratio = std::max(r.max_ratio, v.lpNorm<1>() / v.norm());
  }
  r.fitted_c1 = r.max_ratio * std::sqrt(std::log(static_cast<double>(n) / static_cast<double>(m))) /
                std::sqrt(static_cast<double>(m));
  return r;
}

}  // namespace robustcs
