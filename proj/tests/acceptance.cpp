// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                 run all criteria
//   acceptance --criterion 3   run one

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robustcs/convex.hpp"
#include "robustcs/covariance.hpp"
#include "robustcs/dictionary.hpp"
#include "robustcs/greedy.hpp"
#include "robustcs/harness.hpp"
#include "robustcs/metrics.hpp"
#include "robustcs/model.hpp"
#include "robustcs/oracle.hpp"
#include "robustcs/rng.hpp"

using namespace robustcs;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Matrix normalized_gaussian(Index m, Index n, Seed seed) {
  Matrix a = gaussian_matrix(m, n, seed);
  a.colwise().normalize();
  return a;
}

// τ²·E[EᵀE] over normalized Gaussian perturbations.
Matrix sampled_uncertainty(Index m, Index n, double tau, int draws, Seed seed) {
  Rng rng(seed);
  std::vector<Matrix> us;
  for (int l = 0; l < draws; ++l) {
    Matrix e = rng.normal_matrix(m, n);
    normalize_columns(e);
    us.push_back(tau * e);
  }
  return sample_covariance(us).p;
}

// ---------------------------------------------------------------------------

Outcome contour_example() {
  Outcome out;
  const Eigen::Matrix2d zero = Eigen::Matrix2d::Zero();
  const auto right = line_constrained_2d({-0.9, 1.0}, 5.0, zero, LineMode::l1);
  const auto wrong = line_constrained_2d({-1.2, 1.0}, 5.0, zero, LineMode::l1);
  out.require((right.theta_star - Eigen::Vector2d(0, 5)).cwiseAbs().maxCoeff() <= 1e-4,
              fmt("slope 0.9 -> (%.4f, %.4f)", right.theta_star(0), right.theta_star(1)));
  out.require((wrong.theta_star - Eigen::Vector2d(-4.1667, 0)).cwiseAbs().maxCoeff() <= 1e-4,
              fmt("slope 1.2 -> (%.4f, %.4f)", wrong.theta_star(0), wrong.theta_star(1)));

  Matrix a(1, 2);
  a << -1.2, 1.0;
  ConvexConfig cfg;
  cfg.lambda1 = 0.01;
  cfg.lambda2 = 0.0;
  const auto r = solve_crl1(a, Vector::Constant(1, 5.0), Matrix::Zero(2, 2), cfg);
  const double dist = (r.theta_hat - wrong.theta_star).norm();
  out.require(dist <= 5e-3, fmt("penalized solve (%.4f, %.4f), distance %.2e", r.theta_hat(0), r.theta_hat(1), dist));
  return out;
}

Outcome expected_error_identity() {
  Outcome out;
  const Index m = 16, n = 32;
  const double tau = 0.3, sigma = 0.5;
  const Matrix phi = gaussian_matrix(m, n, 201);
  const Matrix psi = Matrix::Identity(n, n);
  const auto model = assemble_sensing_model(phi, psi, gaussian_matrix(m, n, 202), uniform_matrix(n, n, 203), tau);
  const Vector theta = generate_sparse_coefficients(n, 4, 204).values;
  const Matrix p = analytic_error_covariance(phi, psi, tau);
  const double rel = verify_expected_error(model, theta, sigma, p, 5000, 205);
  out.require(rel <= 0.05, fmt("relative error %.4f (limit 0.05)", rel));
  return out;
}

json group_a_config() {
  json solvers = json::array();
  const double grid[] = {0.01, 0.1, 1.0};
  char label[64];
  for (double l1 : grid) {
    std::snprintf(label, sizeof label, "bpdn_%g", l1);
    solvers.push_back({{"name", "bpdn"}, {"label", label}, {"lambda1", l1}, {"tol", 1e-6}});
  }
  for (double l1 : grid)
    for (double l2 : grid) {
      std::snprintf(label, sizeof label, "crl1_%g_%g", l1, l2);
      solvers.push_back({{"name", "crl1"}, {"label", label}, {"lambda1", l1}, {"lambda2", l2}, {"tol", 1e-6}});
    }
  return {{"n", 200},          {"k", 10},
          {"m_list", {100}},   {"tau_list", {0.6, 1.0}},
          {"sigma", 0.1},      {"trials", 100},
          {"base_seed", 1},    {"dictionary", "identity"},
          {"covariance_mode", "sampled"}, {"covariance_trials", 500},
          {"solvers", solvers}};
}

Outcome group_a_trend() {
  Outcome out;
  const auto table = run_sweep(parse_experiment_config(group_a_config()));
  for (double tau : {0.6, 1.0}) {
    double best_bpdn = INFINITY, best_crl1 = INFINITY;
    std::string arg_bpdn, arg_crl1;
    for (const auto& r : table.rows) {
      if (r.tau != tau || r.failures) continue;
      if (r.solver.rfind("bpdn", 0) == 0 && r.e2 < best_bpdn) best_bpdn = r.e2, arg_bpdn = r.solver;
      if (r.solver.rfind("crl1", 0) == 0 && r.e2 < best_crl1) best_crl1 = r.e2, arg_crl1 = r.solver;
    }
    out.require(best_crl1 <= best_bpdn,
                fmt("tau=%.1f: ", tau) + "best " + arg_crl1 + fmt(" e2=%.6f vs best ", best_crl1) + arg_bpdn +
                    fmt(" e2=%.6f", best_bpdn));
  }
  return out;
}

json group_b_config() {
  json solvers = json::array();
  solvers.push_back({{"name", "omp"}, {"label", "omp"}, {"epsilon_scale", 0.5}});
  solvers.push_back({{"name", "ommp"}, {"label", "ommp"}, {"rho", 4}, {"epsilon_scale", 0.5}});
  solvers.push_back({{"name", "rommp"}, {"label", "rommp"}, {"rho", 4}, {"epsilon_scale", 0.5}});
  return {{"n", 256},
          {"k", 0},
          {"m_list", {128}},
          {"tau_list", {0.3}},
          {"sigma", 0.3},
          {"trials", 50},
          {"base_seed", 1},
          {"dictionary", "db4/4"},
          {"representation_error", false},
          {"covariance_mode", "sampled"},
          {"covariance_trials", 500},
          {"signal", {{"kind", "synth_ecg"}, {"beats", 8}}},
          {"solvers", solvers}};
}

Outcome group_b_trend() {
  Outcome out;
  const auto table = run_sweep(parse_experiment_config(group_b_config()));
  std::map<std::string, ResultRow> by;
  for (const auto& r : table.rows) by[r.solver] = r;
  const auto& omp = by.at("omp");
  const auto& ommp = by.at("ommp");
  const auto& rommp = by.at("rommp");
  out.require(omp.failures + ommp.failures + rommp.failures == 0, "no failed trials");
  out.require(rommp.e2 <= omp.e2, fmt("e2 rommp %.4f <= omp %.4f", rommp.e2, omp.e2));
  out.require(rommp.mean_iterations < ommp.mean_iterations && ommp.mean_iterations < omp.mean_iterations,
              fmt("iterations rommp %.2f < ommp %.2f < omp %.2f", rommp.mean_iterations, ommp.mean_iterations,
                  omp.mean_iterations));
  return out;
}

Outcome oracle_equivalence() {
  Outcome out;
  double worst_ratio = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Seed s = derive_seed({500, static_cast<std::uint64_t>(t)});
    const Matrix a = normalized_gaussian(8, 12, derive_seed({s, 1}));
    const Vector y = a * generate_sparse_coefficients(12, 2, derive_seed({s, 2})).values;
    const Matrix p = sampled_uncertainty(8, 12, 0.3, 200, derive_seed({s, 3}));
    GreedyConfig cfg;
    cfg.rho = 1;
    cfg.max_iter = 2;  // same support budget as the enumeration
    const auto r = solve_rommp(robust_transform(a, y, p), nullptr, cfg);
    const auto o = exhaustive_l0(a, y, p, 2, 1.0);
    const double f = robust_fit(r.theta_hat, a, y, p);
    worst_ratio = std::max(worst_ratio, f / o.objective);
  }
  out.require(worst_ratio <= 1.5, fmt("worst f(rommp)/f(oracle) over 50 instances %.4f", worst_ratio));

  double worst_kkt = 0.0;
  int unconverged = 0;
  for (int t = 0; t < 100; ++t) {
    const Seed s = derive_seed({501, static_cast<std::uint64_t>(t)});
    const Matrix a = normalized_gaussian(10, 20, derive_seed({s, 1}));
    const Vector y = a * generate_sparse_coefficients(20, 3, derive_seed({s, 2})).values +
                     Rng(derive_seed({s, 3})).normal_vector(10, 0.05);
    const Matrix p = sampled_uncertainty(10, 20, 0.3, 200, derive_seed({s, 4}));
    ConvexConfig cfg;
    cfg.lambda1 = 0.1;
    cfg.lambda2 = 0.5;
    const auto r = solve_crl1(a, y, p, cfg);
    if (r.status != SolveStatus::converged) ++unconverged;
    worst_kkt = std::max(worst_kkt, optimality_residual(r.theta_hat, a, y, p, 0.1, 0.5));
  }
  out.require(worst_kkt <= 1e-8 && unconverged == 0,
              fmt("worst CR-L1 KKT residual over 100 instances %.2e, unconverged %.0f", worst_kkt, unconverged));
  return out;
}

Outcome theory_machinery() {
  Outcome out;
  const long long a = sufficient_measurements(10, 200, {1.0, 0.0, 0.0});
  const long long b = sufficient_measurements(10, 200, {1.0, 1.0, 1.0});
  // Independent arithmetic.
  const long long a_ref = static_cast<long long>(std::ceil(40.0 * std::log(200.0)));
  const long long b_ref = static_cast<long long>(std::ceil(std::pow(2.0 * std::sqrt(10.0) + 1.0, 2) * std::log(200.0)));
  out.require(a == 212 && a == a_ref, fmt("M(lambda2=0) = %.0f", double(a)));
  out.require(b == 285 && b == b_ref, fmt("M(lambda2=1, C2=1) = %.0f", double(b)));

  Rng rng(600);
  int violations = 0;
  for (int t = 0; t < 500; ++t) {
    const Index n = 8 + static_cast<Index>(rng.below(24));
    const Index m = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 2)));
    const Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n / 2)));
    const Vector alpha = generate_sparse_coefficients(n, k, derive_seed({601, std::uint64_t(t)})).values *
                         (0.1 + 5.0 * rng.uniform());
    const Vector v = rng.normal_vector(n) * (2.0 * rng.uniform());
    std::vector<Matrix> draws;
    const double scale = rng.uniform();
    for (int l = 0; l < 20; ++l) draws.push_back(rng.normal_matrix(m, n, scale));
    if (!verify_theorem_steps(alpha, v, draws).all()) ++violations;
  }
  out.require(violations == 0, fmt("proof-step violations on 500 instances: %.0f", violations));
  return out;
}

Outcome numerical_hygiene() {
  Outcome out;
  double worst_grad = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Seed s = derive_seed({700, static_cast<std::uint64_t>(t)});
    Rng rng(s);
    const Index m = 3 + static_cast<Index>(rng.below(10));
    const Index n = 3 + static_cast<Index>(rng.below(20));
    const Matrix a = rng.normal_matrix(m, n);
    const Vector y = rng.normal_vector(m);
    const Matrix r = rng.normal_matrix(n, n);
    const Matrix p = r.transpose() * r / double(n);
    const double lambda2 = 2.0 * rng.uniform();
    const Vector theta = rng.normal_vector(n);
    const ScalarField g = [&](const Vector& x) { return (a * x - y).squaredNorm() + lambda2 * x.dot(p * x); };
    const Vector analytic = smooth_gradient(theta, a, y, p, lambda2);
    const Vector numeric = finite_diff_gradient(g, theta, 1e-5);
    worst_grad = std::max(worst_grad, (analytic - numeric).norm() / analytic.norm());
  }
  out.require(worst_grad <= 1e-6, fmt("worst gradient relative error %.2e", worst_grad));

  double worst_ortho = 0.0;
  const std::vector<DictionarySpec> specs = {{DictionaryKind::identity, 64},
                                             {DictionaryKind::dct, 2},
                                             {DictionaryKind::dct, 64},
                                             {DictionaryKind::daubechies, 256, 4, 4},
                                             {DictionaryKind::daubechies, 1024, 10, 5}};
  for (const auto& spec : specs) {
    const Matrix psi = build_dictionary(spec);
    worst_ortho = std::max(
        worst_ortho, (psi.transpose() * psi - Matrix::Identity(spec.n, spec.n)).cwiseAbs().maxCoeff());
  }
  out.require(worst_ortho <= 1e-8, fmt("worst dictionary orthonormality error %.2e", worst_ortho));

  int convex_bad = 0, greedy_bad = 0;
  for (int t = 0; t < 100; ++t) {
    const Seed s = derive_seed({701, static_cast<std::uint64_t>(t)});
    const Matrix a = normalized_gaussian(15, 30, derive_seed({s, 1}));
    const Vector y = a * generate_sparse_coefficients(30, 4, derive_seed({s, 2})).values +
                     Rng(derive_seed({s, 3})).normal_vector(15, 0.1);
    const Matrix p = sampled_uncertainty(15, 30, 0.5, 100, derive_seed({s, 4}));

    ConvexConfig cc;
    cc.lambda1 = 0.05;
    cc.lambda2 = 1.0;
    cc.step_rule = StepRule::backtracking;
    std::vector<double> trace;
    solve_crl1(a, y, p, cc, nullptr, &trace);
    for (std::size_t i = 1; i < trace.size(); ++i)
      if (trace[i] > trace[i - 1] + 1e-12) {
        ++convex_bad;
        break;
      }

    GreedyConfig gc;
    gc.rho = 2;
    gc.max_iter = 10;
    gc.min_relative_improvement = 0.0;
    std::vector<double> rtrace;
    solve_rommp(robust_transform(a, y, p), nullptr, gc, &rtrace);
    bool bad = false;
    for (std::size_t i = 1; i < rtrace.size(); ++i) bad |= rtrace[i] > rtrace[i - 1] + 1e-10;
    std::vector<double> ptrace;
    solve_pursuit(a, y, gc, nullptr, &ptrace);
    for (std::size_t i = 1; i < ptrace.size(); ++i) bad |= ptrace[i] > ptrace[i - 1] + 1e-10;
    // f descent under the stationarity update.
    gc.coeff_mode = CoeffMode::restricted_normal;
    const auto sys = robust_transform(a, y, p);
    double prev = INFINITY;
    for (int it = 1; it <= 8; ++it) {
      gc.max_iter = it;
      const double f = solve_rommp(sys, nullptr, gc).objective;
      bad |= f > prev + 1e-10;
      prev = f;
    }
    greedy_bad += bad;
  }
  out.require(convex_bad == 0, fmt("non-monotone CR-L1 runs: %.0f of 100", convex_bad));
  out.require(greedy_bad == 0, fmt("non-monotone greedy runs: %.0f of 100", greedy_bad));
  return out;
}

Outcome reproducibility() {
  Outcome out;
  const json cfg_json = json::parse(R"({
    "n": 64, "k": 4, "m_list": [24, 40], "tau_list": [0.0, 0.3, 0.8], "sigma": 0.1,
    "trials": 6, "base_seed": 77, "dictionary": "db2/3", "covariance_trials": 50,
    "solvers": [
      {"name": "bpdn", "lambda1": 0.1},
      {"name": "crl1", "lambda1": 0.1, "lambda2": 0.5},
      {"name": "omp", "epsilon_scale": 1.0},
      {"name": "ommp", "rho": 4, "epsilon_scale": 1.0},
      {"name": "rommp", "rho": 4, "epsilon_scale": 1.0}
    ]})");
  const auto cfg = parse_experiment_config(cfg_json);
  const auto dir = std::filesystem::temp_directory_path() / "robustcs_acceptance";
  std::filesystem::create_directories(dir);
  auto run = [&](int threads, const char* name) {
    const auto path = dir / name;
    emit_results(run_sweep(cfg, threads), path, {"config=" + to_json(cfg).dump()});
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = run(1, "a.csv");
  const std::string b = run(1, "b.csv");
  const std::string c = run(3, "c.csv");
  const std::string d = run(8, "d.csv");
  out.require(a == b, "repeat run byte-identical");
  out.require(a == c && a == d, "byte-identical across 1/3/8 threads");
  out.require(!a.empty(), fmt("%.0f bytes", double(a.size())));
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robustcs acceptance suite"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "contour example fidelity", 1.0, contour_example},
      {2, "expected fitting-error identity", 30.0, expected_error_identity},
      {3, "simulated sweep: CR-L1 vs BPDN under strong uncertainty", 600.0, group_a_trend},
      {4, "ECG-like sweep: greedy accuracy and iteration ordering", 600.0, group_b_trend},
      {5, "oracle equivalence", 120.0, oracle_equivalence},
      {6, "recovery-condition machinery", 60.0, theory_machinery},
      {7, "numerical hygiene", 120.0, numerical_hygiene},
      {8, "reproducibility", 1e9, reproducibility},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_s) o.require(false, fmt("runtime %.1f s over the %.0f s limit", secs, c.limit_s));
    std::printf("[%s] %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
