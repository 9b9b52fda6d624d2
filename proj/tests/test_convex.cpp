#include "doctest.h"

#include <cmath>
#include <vector>

#include "robustcs/convex.hpp"
#include "robustcs/covariance.hpp"
#include "robustcs/oracle.hpp"
#include "robustcs/rng.hpp"

using namespace robustcs;

namespace {

struct Instance {
  Matrix a;
  Vector y;
  Matrix p;
};

Instance random_instance(Index m, Index n, Seed seed) {
  Rng rng(seed);
  Instance in;
  in.a = rng.normal_matrix(m, n);
  in.a.colwise().normalize();
  Vector theta = Vector::Zero(n);
  for (int i = 0; i < 3; ++i) theta(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)))) = rng.normal();
  in.y = in.a * theta + 0.05 * rng.normal_vector(m);
  std::vector<Matrix> draws;
  for (int l = 0; l < 30; ++l) draws.push_back(rng.normal_matrix(m, n, 0.3 / std::sqrt(double(m))));
  in.p = sample_covariance(draws).p;
  return in;
}

}  // namespace

TEST_CASE("objective values") {
  const Vector y = Eigen::Vector2d(1, 1);
  CHECK(crl1_objective(Vector::Zero(2), Matrix::Identity(2, 2), y, Matrix::Identity(2, 2), 1, 1) ==
        doctest::Approx(2.0));
  CHECK(crl1_objective(Eigen::Vector2d(1, 1), Matrix::Identity(2, 2), y, Matrix::Identity(2, 2), 1, 1) ==
        doctest::Approx(4.0));

  const auto in = random_instance(6, 10, 1);
  const Vector theta = Rng(2).normal_vector(10);
  const double bpdn = 0.3 * theta.lpNorm<1>() + (in.a * theta - in.y).squaredNorm();
  CHECK(crl1_objective(theta, in.a, in.y, Matrix::Zero(10, 10), 0.3, 7.0) == doctest::Approx(bpdn));
  CHECK_THROWS_AS(crl1_objective(theta, in.a, Vector::Zero(3), in.p, 1, 1), InvalidArgument);
}

TEST_CASE("elastic-net reduction with isotropic P") {
  Rng rng(3);
  const auto in = random_instance(8, 12, 4);
  const double delta = 0.7;
  const Matrix p = delta * Matrix::Identity(12, 12);
  for (int t = 0; t < 20; ++t) {
    const Vector theta = rng.normal_vector(12);
    const double direct = 0.2 * theta.lpNorm<1>() + (in.a * theta - in.y).squaredNorm() +
                          0.5 * delta * theta.squaredNorm();
    const double obj = crl1_objective(theta, in.a, in.y, p, 0.2, 0.5);
    CHECK(std::abs(obj - direct) <= 1e-12 * std::max(1.0, direct));
  }
}

TEST_CASE("smooth gradient matches central differences") {
  for (Seed s = 0; s < 20; ++s) {
    const auto in = random_instance(7, 11, 100 + s);
    const Vector theta = Rng(200 + s).normal_vector(11);
    const double lambda2 = 0.8;
    const ScalarField g = [&](const Vector& t) {
      return (in.a * t - in.y).squaredNorm() + lambda2 * t.dot(in.p * t);
    };
    const Vector analytic = smooth_gradient(theta, in.a, in.y, in.p, lambda2);
    const Vector numeric = finite_diff_gradient(g, theta, 1e-5);
    CHECK((analytic - numeric).norm() / analytic.norm() <= 1e-6);
  }
}

TEST_CASE("optimality residual") {
  // Smooth stationarity: ridge solution with λ₁ = 0.
  const auto in = random_instance(10, 6, 5);
  const double lambda2 = 0.4;
  const Matrix q = in.a.transpose() * in.a + lambda2 * in.p;
  const Vector ridge = q.ldlt().solve(in.a.transpose() * in.y);
  CHECK(optimality_residual(ridge, in.a, in.y, in.p, 0.0, lambda2) <= 1e-10);

  // Soft threshold: min |θ| + (θ − 1)² at θ = 0.5.
  const Matrix one = Matrix::Ones(1, 1);
  const Vector y1 = Vector::Ones(1);
  CHECK(optimality_residual(Vector::Constant(1, 0.5), one, y1, Matrix::Zero(1, 1), 1.0, 0.0) <= 1e-12);
  CHECK(optimality_residual(Vector::Constant(1, 3.0), one, y1, Matrix::Zero(1, 1), 1.0, 0.0) > 0.1);
  CHECK(optimality_residual(Vector::Zero(1), one, y1, Matrix::Zero(1, 1), 1.0, 0.0) > 0.1);
  CHECK(optimality_residual(Vector::Zero(1), one, y1, Matrix::Zero(1, 1), 3.0, 0.0) == 0.0);
}

TEST_CASE("contour example: penalized solve on the sloped line") {
  Matrix a(1, 2);
  a << -1.2, 1.0;
  const Vector y = Vector::Constant(1, 5.0);
  ConvexConfig cfg;
  cfg.lambda1 = 0.01;
  for (StepRule rule : {StepRule::backtracking, StepRule::lipschitz}) {
    cfg.step_rule = rule;
    const auto r = solve_crl1(a, y, Matrix::Zero(2, 2), cfg);
    CHECK(r.status == SolveStatus::converged);
    // Closed form of min 0.01|θ₁| + (5 + 1.2θ₁)²: θ₁ = (0.01/2.4 − 5)/1.2.
    CHECK(r.theta_hat(0) == doctest::Approx((0.01 / 2.4 - 5.0) / 1.2).epsilon(1e-6));
    CHECK(std::abs(r.theta_hat(1)) <= 1e-6);
    CHECK(std::abs(r.theta_hat(0) - -4.1632) <= 1e-3);
    CHECK((r.theta_hat - Eigen::Vector2d(-25.0 / 6.0, 0.0)).norm() <= 5e-3);
  }
}

TEST_CASE("zero measurements give the zero solution") {
  const auto in = random_instance(5, 9, 6);
  ConvexConfig cfg;
  cfg.lambda1 = 0.1;
  cfg.lambda2 = 0.3;
  const auto r = solve_crl1(in.a, Vector::Zero(5), in.p, cfg);
  CHECK(r.theta_hat.isZero(0.0));
  CHECK(r.status == SolveStatus::converged);
}

TEST_CASE("solver certificate, objective bookkeeping and descent") {
  for (Seed s = 0; s < 25; ++s) {
    CAPTURE(s);
    const auto in = random_instance(10, 20, 300 + s);
    ConvexConfig cfg;
    cfg.lambda1 = 0.1;
    cfg.lambda2 = 0.5;
    cfg.step_rule = s % 2 ? StepRule::lipschitz : StepRule::backtracking;
    std::vector<double> trace;
    const Matrix psi = Matrix::Identity(20, 20);
    const auto r = solve_crl1(in.a, in.y, in.p, cfg, &psi, &trace);
    REQUIRE(r.status == SolveStatus::converged);
    CHECK(optimality_residual(r.theta_hat, in.a, in.y, in.p, 0.1, 0.5) <= cfg.tol);
    const double recomputed = crl1_objective(r.theta_hat, in.a, in.y, in.p, 0.1, 0.5);
    CHECK(std::abs(r.objective - recomputed) <= 1e-10 * std::abs(recomputed));
    CHECK(r.x_hat == r.theta_hat);
    for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1] + 1e-12);
  }
}

TEST_CASE("x_hat uses the dictionary") {
  const auto in = random_instance(8, 8, 7);
  Eigen::HouseholderQR<Matrix> qr(Rng(8).normal_matrix(8, 8));
  const Matrix psi = qr.householderQ();
  ConvexConfig cfg;
  cfg.lambda1 = 0.05;
  const auto r = solve_crl1(in.a, in.y, in.p, cfg, &psi);
  CHECK((r.x_hat - psi * r.theta_hat).norm() <= 1e-14);
}

TEST_CASE("bpdn path ignores P") {
  const auto in = random_instance(8, 16, 9);
  ConvexConfig cfg;
  cfg.lambda1 = 0.2;
  cfg.lambda2 = 0.0;
  const auto a = solve_crl1(in.a, in.y, in.p, cfg);
  const auto b = solve_crl1(in.a, in.y, 5.0 * Matrix::Identity(16, 16), cfg);
  const auto c = solve_bpdn(in.a, in.y, 0.2);
  CHECK(a.theta_hat == b.theta_hat);
  CHECK((a.theta_hat - c.theta_hat).norm() <= 1e-6);
}

TEST_CASE("degenerate and invalid configurations") {
  // λ₁ = 0 and a wide Ā: the smooth part is singular.
  const auto in = random_instance(4, 8, 10);
  ConvexConfig cfg;
  const auto r = solve_crl1(in.a, in.y, Matrix::Zero(8, 8), cfg);
  CHECK(r.status == SolveStatus::degenerate);
  CHECK((in.a * r.theta_hat - in.y).norm() <= 1e-5);

  Matrix indefinite = Matrix::Identity(8, 8);
  indefinite(0, 0) = -1.0;
  cfg.lambda1 = 0.1;
  CHECK_THROWS_AS(solve_crl1(in.a, in.y, indefinite, cfg), InvalidArgument);
  cfg.tol = 0.0;
  CHECK_THROWS_AS(solve_crl1(in.a, in.y, in.p, cfg), InvalidArgument);
  cfg.tol = 1e-8;
  cfg.lambda1 = -1.0;
  CHECK_THROWS_AS(solve_crl1(in.a, in.y, in.p, cfg), InvalidArgument);

  cfg.lambda1 = 1e-4;
  cfg.max_iter = 2;
  CHECK(solve_crl1(in.a, in.y, in.p, cfg).status == SolveStatus::max_iter);
}

TEST_CASE("power iteration") {
  const Matrix d = Eigen::Vector3d(1, 5, 2).asDiagonal();
  CHECK(power_iteration(d) == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(power_iteration(Matrix::Zero(3, 3)) == 0.0);
}
