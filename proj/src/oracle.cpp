#include "robustcs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace robustcs {
namespace {

// Advances `idx` (sorted, size k, values in [0, n)) to the next combination in
// lexicographic order. Returns false after the last one.
bool next_combination(std::vector<Index>& idx, Index n) {
  const auto k = static_cast<Index>(idx.size());
  for (Index i = k - 1; i >= 0; --i) {
    auto& v = idx[static_cast<std::size_t>(i)];
    if (v < n - k + i) {
      ++v;
      for (Index j = i + 1; j < k; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

bool strictly_better(double candidate, double best) {
  if (!std::isfinite(best)) return true;
  return candidate < best - 1e-12 * std::max(1.0, std::abs(best));
}

}  // namespace

OracleSolution exhaustive_l0(const Matrix& a_bar, const Vector& y,
                             const Matrix& p, Index k_max, double lambda2) {
  const Index n = a_bar.cols();
  if (n > kEnumerationGuard)
    throw TooLarge("exhaustive_l0: N = " + std::to_string(n) + " exceeds the enumeration guard of " +
                   std::to_string(kEnumerationGuard));
  if (y.size() != a_bar.rows() || p.rows() != n || p.cols() != n)
    throw InvalidArgument("exhaustive_l0: shape mismatch");
  if (k_max < 0 || k_max > n) throw InvalidArgument("exhaustive_l0: k_max must lie in [0, N]");
  if (!(lambda2 >= 0.0)) throw InvalidArgument("exhaustive_l0: lambda2 must be >= 0");

  auto fit = [&](const Vector& th) {
    double v = (a_bar * th - y).squaredNorm();
    if (lambda2 != 0.0) v += lambda2 * th.dot(p * th);
    return v;
  };

  OracleSolution best;
  best.theta_star = Vector::Zero(n);
  best.objective = fit(best.theta_star);
  best.enumerated = 1;

  Vector theta(n);
  for (Index size = 1; size <= k_max; ++size) {
    std::vector<Index> support(static_cast<std::size_t>(size));
    std::iota(support.begin(), support.end(), Index{0});
    do {
      ++best.enumerated;
      Matrix as(a_bar.rows(), size);
      Matrix ps(size, size);
      for (Index c = 0; c < size; ++c) {
        const Index jc = support[static_cast<std::size_t>(c)];
        as.col(c) = a_bar.col(jc);
        for (Index r = 0; r < size; ++r) ps(r, c) = p(support[static_cast<std::size_t>(r)], jc);
      }
      const Matrix lhs = as.transpose() * as + lambda2 * ps;
      const Vector rhs = as.transpose() * y;
      const Vector coeffs = Eigen::CompleteOrthogonalDecomposition<Matrix>(lhs).solve(rhs);
      theta.setZero();
      for (Index c = 0; c < size; ++c) theta(support[static_cast<std::size_t>(c)]) = coeffs(c);
      const double value = fit(theta);
      if (strictly_better(value, best.objective)) {
        best.objective = value;
        best.theta_star = theta;
        best.support = support;
      }
    } while (next_combination(support, n));
  }
  return best;
}

OracleSolution line_constrained_2d(const Eigen::Vector2d& a_row, double y,
                                   const Eigen::Matrix2d& p, LineMode mode) {
  OracleSolution out;
  if (a_row.isZero(0.0)) {
    if (y != 0.0) throw Infeasible("line_constrained_2d: 0·θ = y has no solution for y != 0");
    out.theta_star = Vector::Zero(2);
    out.enumerated = 1;
    return out;
  }

  auto l1 = [](const Eigen::Vector2d& t) { return t.lpNorm<1>(); };
  auto l0 = [](const Eigen::Vector2d& t) {
    return static_cast<double>((t.array() != 0.0).count());
  };
  auto value = [&](const Eigen::Vector2d& t) {
    switch (mode) {
      case LineMode::l1:
        return l1(t);
      case LineMode::l1_plus_quadratic:
        return l1(t) + t.dot(p * t);
      case LineMode::l0:
        return l0(t);
    }
    return 0.0;
  };

  // Points of the line on the coordinate axes, built exactly.
  std::vector<Eigen::Vector2d> candidates;
  for (int i = 0; i < 2; ++i) {
    const int other = 1 - i;
    if (a_row(other) != 0.0) {
      Eigen::Vector2d t = Eigen::Vector2d::Zero();
      t(other) = y / a_row(other);
      candidates.push_back(t);
    }
  }

  if (mode == LineMode::l1_plus_quadratic) {
    // θ(s) = θ0 + s·d; on each sign region the objective is a quadratic in s.
    const Eigen::Vector2d theta0 = a_row * (y / a_row.squaredNorm());
    const Eigen::Vector2d d(-a_row(1), a_row(0));
    std::vector<double> breaks;
    for (int i = 0; i < 2; ++i)
      if (d(i) != 0.0) breaks.push_back(-theta0(i) / d(i));
    std::sort(breaks.begin(), breaks.end());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> pieces;
    double lo = -inf;
    for (double b : breaks) {
      pieces.emplace_back(lo, b);
      lo = b;
    }
    pieces.emplace_back(lo, inf);
    const double curvature = d.dot(p * d);
    for (const auto& [a, b] : pieces) {
      if (!(curvature > 0.0)) continue;  // linear piece: minimum sits at a breakpoint
      double mid;
      if (std::isinf(a) && std::isinf(b)) mid = 0.0;
      else if (std::isinf(a)) mid = b - 1.0;
      else if (std::isinf(b)) mid = a + 1.0;
      else mid = 0.5 * (a + b);
      const Eigen::Vector2d at_mid = theta0 + mid * d;
      const Eigen::Vector2d sign(at_mid(0) > 0 ? 1.0 : (at_mid(0) < 0 ? -1.0 : 0.0),
                                 at_mid(1) > 0 ? 1.0 : (at_mid(1) < 0 ? -1.0 : 0.0));
      const double s = -(sign.dot(d) + 2.0 * d.dot(p * theta0)) / (2.0 * curvature);
      if (s > a && s < b) {
        Eigen::Vector2d t = theta0 + s * d;
        // Re-project onto the line to cancel rounding in θ0 + s·d.
        t += a_row * ((y - a_row.dot(t)) / a_row.squaredNorm());
        candidates.push_back(t);
      }
    }
  }

  out.enumerated = static_cast<long long>(candidates.size());
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d winner = Eigen::Vector2d::Zero();
  for (const auto& c : candidates) {
    const double v = value(c);
    const bool better = v < best - 1e-15 ||
                        (mode == LineMode::l0 && std::abs(v - best) <= 1e-15 && l1(c) < l1(winner));
    if (better) {
      best = v;
      winner = c;
    }
  }
  out.theta_star = winner;
  out.objective = best;
  for (Index i = 0; i < 2; ++i)
    if (winner(i) != 0.0) out.support.push_back(i);
  return out;
}

Vector finite_diff_gradient(const ScalarField& f, const Vector& theta, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite_diff_gradient: h must be positive");
  Vector grad(theta.size());
  Vector probe = theta;
  for (Index i = 0; i < theta.size(); ++i) {
    const double orig = probe(i);
    probe(i) = orig + h;
    const double fp = f(probe);
    probe(i) = orig - h;
    const double fm = f(probe);
    probe(i) = orig;
    grad(i) = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace robustcs
