#include "robustcs/covariance.hpp"

#include <string>

namespace robustcs {
namespace {

constexpr double kSymTol = 1e-12;
constexpr double kPsdTol = 1e-10;

bool is_diagonal(const Matrix& p) {
  for (Index j = 0; j < p.cols(); ++j)
    for (Index i = 0; i < p.rows(); ++i)
      if (i != j && p(i, j) != 0.0) return false;
  return true;
}

double sym_error(const Matrix& p) { return (p - p.transpose()).cwiseAbs().maxCoeff(); }

double sym_scale(const Matrix& p) { return std::max(1.0, p.cwiseAbs().maxCoeff()); }

}  // namespace

const char* to_string(CovarianceProvenance p) {
  switch (p) {
    case CovarianceProvenance::sampled:
      return "sampled";
    case CovarianceProvenance::diagonal:
      return "diagonal";
    case CovarianceProvenance::isotropic:
      return "isotropic";
    case CovarianceProvenance::explicit_:
      return "explicit";
  }
  return "unknown";
}

void require_psd(const Matrix& p, const char* who) {
  if (p.rows() != p.cols())
    throw InvalidArgument(std::string(who) + ": covariance must be square");
  if (p.size() == 0) return;
  if (is_diagonal(p)) {
    const double scale = p.diagonal().cwiseAbs().maxCoeff();
    if (p.diagonal().minCoeff() < -kPsdTol * scale)
      throw InvalidArgument(std::string(who) + ": covariance is not positive semidefinite");
    return;
  }
  if (sym_error(p) > kSymTol * sym_scale(p))
    throw InvalidArgument(std::string(who) + ": covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double norm2 = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -kPsdTol * norm2)
    throw InvalidArgument(std::string(who) + ": covariance is not positive semidefinite (min eigenvalue " +
                          std::to_string(ev.minCoeff()) + ")");
}

CovarianceModel make_covariance(Matrix p, CovarianceProvenance provenance) {
  if (p.rows() != p.cols()) throw InvalidArgument("covariance must be square");
  CovarianceModel out;
  out.provenance = provenance;
  if (p.size() == 0 || is_diagonal(p)) {
    if (p.size() > 0) {
      const double scale = p.diagonal().cwiseAbs().maxCoeff();
      if (p.diagonal().minCoeff() < -kPsdTol * scale)
        throw InvalidArgument("covariance is not positive semidefinite");
      p.diagonal() = p.diagonal().cwiseMax(0.0);
    }
    out.p = std::move(p);
    return out;
  }
  if (sym_error(p) > kSymTol * sym_scale(p))
    throw InvalidArgument("covariance is not symmetric");
  Matrix sym = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& ev = eig.eigenvalues();
  const double norm2 = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -kPsdTol * norm2)
    throw InvalidArgument("covariance is not positive semidefinite");
  if (ev.minCoeff() < 0.0) {
    const Matrix& v = eig.eigenvectors();
    sym = v * ev.cwiseMax(0.0).asDiagonal() * v.transpose();
    sym = 0.5 * (sym + sym.transpose());
  }
  out.p = std::move(sym);
  return out;
}

CovarianceModel sample_covariance(std::span<const Matrix> draws) {
  if (draws.empty()) throw InvalidArgument("sample_covariance: no draws");
  const Index m = draws.front().rows();
  const Index n = draws.front().cols();
  Matrix acc = Matrix::Zero(n, n);
  for (const Matrix& u : draws) {
    if (u.rows() != m || u.cols() != n)
      throw InvalidArgument("sample_covariance: draws differ in shape");
    acc.selfadjointView<Eigen::Lower>().rankUpdate(u.transpose());
  }
  Matrix p = acc.selfadjointView<Eigen::Lower>();
  p /= static_cast<double>(draws.size());
  return make_covariance(std::move(p), CovarianceProvenance::sampled);
}

CovarianceModel diagonal_covariance(const Vector& delta) {
  if (delta.size() > 0 && delta.minCoeff() < 0.0)
    throw InvalidArgument("diagonal_covariance: negative variance");
  CovarianceModel out;
  out.p = delta.asDiagonal();
  out.provenance = CovarianceProvenance::diagonal;
  out.delta = delta.cwiseSqrt();
  return out;
}

double isotropic_estimate(const Matrix& a_bar, const Vector& y) {
  if (a_bar.rows() < 1) throw InvalidArgument("isotropic_estimate: M must be >= 1");
  if (y.size() != a_bar.rows())
    throw InvalidArgument("isotropic_estimate: y length must equal row count");
  if (a_bar.rows() < a_bar.cols() + 1) return 0.0;
  Matrix aug(a_bar.rows(), a_bar.cols() + 1);
  aug << a_bar, y;
  Eigen::BDCSVD<Matrix> svd(aug);
  const double smin = svd.singularValues().minCoeff();
  return smin * smin;
}

double expected_spectral_norm(std::span<const Matrix> draws) {
  if (draws.empty()) throw InvalidArgument("expected_spectral_norm: no draws");
  double acc = 0.0;
  for (const Matrix& e : draws) {
    if (e.size() == 0) continue;
    Eigen::BDCSVD<Matrix> svd(e);
    acc += svd.singularValues()(0);
  }
  return acc / static_cast<double>(draws.size());
}

}  // namespace robustcs
