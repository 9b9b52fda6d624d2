#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robustcs/convex.hpp"
#include "robustcs/covariance.hpp"
#include "robustcs/dictionary.hpp"
#include "robustcs/greedy.hpp"
#include "robustcs/harness.hpp"
#include "robustcs/metrics.hpp"
#include "robustcs/model.hpp"
#include "robustcs/oracle.hpp"
#include "robustcs/rng.hpp"
#include "robustcs/version.hpp"

namespace py = pybind11;
using namespace robustcs;

namespace {

CoeffMode coeff_mode(const std::string& name) {
  if (name == "ls_on_b") return CoeffMode::ls_on_b;
  if (name == "restricted_normal") return CoeffMode::restricted_normal;
  throw InvalidArgument("coeff_mode must be 'ls_on_b' or 'restricted_normal'");
}

LineMode line_mode(const std::string& name) {
  if (name == "l1") return LineMode::l1;
  if (name == "l1_plus_quadratic") return LineMode::l1_plus_quadratic;
  if (name == "l0") return LineMode::l0;
  throw InvalidArgument("mode must be 'l1', 'l1_plus_quadratic' or 'l0'");
}

GreedyConfig greedy_config(int rho, double epsilon, int max_iter, const std::string& mode,
                           std::optional<int> sparsity_estimate) {
  GreedyConfig c;
  c.rho = rho;
  c.epsilon = epsilon;
  c.max_iter = max_iter;
  c.coeff_mode = coeff_mode(mode);
  c.sparsity_estimate = sparsity_estimate;
  return c;
}

const Matrix* opt_ptr(const std::optional<Matrix>& m) { return m ? &*m : nullptr; }

}  // namespace

PYBIND11_MODULE(_robustcs, m) {
  m.doc() = "Robust sparse recovery under sensing and dictionary uncertainty";
  m.attr("__version__") = kVersion;

  py::register_exception<DegenerateModel>(m, "DegenerateModel", PyExc_RuntimeError);
  py::register_exception<Infeasible>(m, "Infeasible", PyExc_RuntimeError);

  py::class_<RecoveryResult>(m, "RecoveryResult")
      .def_readonly("theta_hat", &RecoveryResult::theta_hat)
      .def_readonly("x_hat", &RecoveryResult::x_hat)
      .def_readonly("iterations", &RecoveryResult::iterations)
      .def_readonly("objective", &RecoveryResult::objective)
      .def_readonly("support", &RecoveryResult::support)
      .def_property_readonly("status", [](const RecoveryResult& r) { return to_string(r.status); })
      .def("__repr__", [](const RecoveryResult& r) {
        return "<RecoveryResult status=" + std::string(to_string(r.status)) +
               " iterations=" + std::to_string(r.iterations) + ">";
      });

  py::class_<OracleSolution>(m, "OracleSolution")
      .def_readonly("theta_star", &OracleSolution::theta_star)
      .def_readonly("objective", &OracleSolution::objective)
      .def_readonly("support", &OracleSolution::support)
      .def_readonly("enumerated", &OracleSolution::enumerated);

  m.def("derive_seed", [](std::vector<std::uint64_t> parts) {
    return derive_seed(std::span<const std::uint64_t>(parts));
  });
  m.def("sparse_coefficients",
        [](Index n, Index k, Seed seed) { return generate_sparse_coefficients(n, k, seed).values; },
        py::arg("n"), py::arg("k"), py::arg("seed"));
  m.def("gaussian_matrix", &gaussian_matrix, py::arg("rows"), py::arg("cols"), py::arg("seed"));
  m.def("normalize_columns", [](Matrix a) {
    normalize_columns(a);
    return a;
  });

  m.def("build_dictionary",
        [](const std::string& name, Index n) { return build_dictionary(parse_dictionary(name, n)); },
        py::arg("name"), py::arg("n"));
  m.def("energy_concentration", &energy_concentration, py::arg("psi_bar"), py::arg("x"),
        py::arg("fraction"));
  m.def("synth_ecg", &synth_ecg, py::arg("n"), py::arg("beats") = 8, py::arg("seed") = 0);

  m.def("sample_covariance", [](const std::vector<Matrix>& draws) {
    return sample_covariance(draws).p;
  });
  m.def("isotropic_estimate", &isotropic_estimate, py::arg("a_bar"), py::arg("y"));

  m.def("crl1_objective", &crl1_objective, py::arg("theta"), py::arg("a_bar"), py::arg("y"),
        py::arg("p"), py::arg("lambda1"), py::arg("lambda2"));
  m.def("optimality_residual", &optimality_residual, py::arg("theta"), py::arg("a_bar"),
        py::arg("y"), py::arg("p"), py::arg("lambda1"), py::arg("lambda2"));
  m.def(
      "solve_crl1",
      [](const Matrix& a, const Vector& y, const Matrix& p, double lambda1, double lambda2,
         int max_iter, double tol, const std::optional<Matrix>& psi_bar) {
        ConvexConfig c;
        c.lambda1 = lambda1;
        c.lambda2 = lambda2;
        c.max_iter = max_iter;
        c.tol = tol;
        return solve_crl1(a, y, p, c, opt_ptr(psi_bar));
      },
      py::arg("a_bar"), py::arg("y"), py::arg("p"), py::arg("lambda1"), py::arg("lambda2"),
      py::arg("max_iter") = 10000, py::arg("tol") = 1e-8, py::arg("psi_bar") = std::nullopt);
  m.def(
      "solve_bpdn",
      [](const Matrix& a, const Vector& y, double lambda1, int max_iter, double tol) {
        ConvexConfig c;
        c.max_iter = max_iter;
        c.tol = tol;
        return solve_bpdn(a, y, lambda1, c);
      },
      py::arg("a_bar"), py::arg("y"), py::arg("lambda1"), py::arg("max_iter") = 10000,
      py::arg("tol") = 1e-8);

  m.def("robust_fit", &robust_fit, py::arg("theta"), py::arg("a_bar"), py::arg("y"), py::arg("p"));
  m.def(
      "solve_rommp",
      [](const Matrix& a, const Vector& y, const Matrix& p, int rho, double epsilon, int max_iter,
         const std::string& mode, std::optional<int> k, const std::optional<Matrix>& psi_bar) {
        return solve_rommp(robust_transform(a, y, p), opt_ptr(psi_bar),
                           greedy_config(rho, epsilon, max_iter, mode, k));
      },
      py::arg("a_bar"), py::arg("y"), py::arg("p"), py::arg("rho") = 1, py::arg("epsilon") = 0.0,
      py::arg("max_iter") = 1000, py::arg("coeff_mode") = "ls_on_b",
      py::arg("sparsity_estimate") = std::nullopt, py::arg("psi_bar") = std::nullopt);
  m.def(
      "solve_pursuit",
      [](const Matrix& a, const Vector& y, int rho, double epsilon, int max_iter,
         std::optional<int> k) {
        return solve_pursuit(a, y, greedy_config(rho, epsilon, max_iter, "ls_on_b", k));
      },
      py::arg("a_bar"), py::arg("y"), py::arg("rho") = 1, py::arg("epsilon") = 0.0,
      py::arg("max_iter") = 1000, py::arg("sparsity_estimate") = std::nullopt);

  m.def("exhaustive_l0", &exhaustive_l0, py::arg("a_bar"), py::arg("y"), py::arg("p"),
        py::arg("k_max"), py::arg("lambda2"));
  m.def(
      "line_constrained_2d",
      [](const Eigen::Vector2d& a_row, double y, const Eigen::Matrix2d& p, const std::string& mode) {
        return line_constrained_2d(a_row, y, p, line_mode(mode));
      },
      py::arg("a_row"), py::arg("y"), py::arg("p"), py::arg("mode"));

  m.def(
      "sufficient_measurements",
      [](long long k, long long n, double c1, double c2, double lambda2) {
        return sufficient_measurements(k, n, TheoryParams{c1, c2, lambda2});
      },
      py::arg("k"), py::arg("n"), py::arg("c1") = 1.0, py::arg("c2") = 0.0,
      py::arg("lambda2") = 0.0);

  m.def(
      "run_sweep",
      [](const std::string& config_json, int threads) {
        const auto cfg = parse_experiment_config(nlohmann::json::parse(config_json));
        ResultTable table;
        {
          py::gil_scoped_release release;
          table = run_sweep(cfg, threads);
        }
        py::list rows;
        for (const auto& r : table.rows) {
          py::dict d;
          d["solver"] = r.solver;
          d["m"] = r.m;
          d["tau"] = r.tau;
          d["e1"] = r.e1;
          d["e2"] = r.e2;
          d["coherence"] = r.coherence;
          d["mean_iterations"] = r.mean_iterations;
          d["trials"] = r.trials;
          d["failures"] = r.failures;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config_json"), py::arg("threads") = 1);
}
