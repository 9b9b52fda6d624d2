#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "robustcs/convex.hpp"
#include "robustcs/dictionary.hpp"
#include "robustcs/greedy.hpp"
#include "robustcs/types.hpp"

namespace robustcs {

enum class CovarianceMode { sampled, diagonal, isotropic, explicit_ };
enum class SolverKind { bpdn, crl1, omp, ommp, rommp };

/// One solver column of a sweep.
struct SolverSpec {
  std::string label;
  SolverKind kind = SolverKind::bpdn;
  ConvexConfig convex;
  GreedyConfig greedy;
  // > 0: greedy ε = epsilon_scale × (expected additive-noise norm in the
  // solver's residual domain), i.e. σ√M for y and σ‖Ā‖_F for z = Āᵀy.
  double epsilon_scale = 0.0;

  bool uses_covariance() const { return kind == SolverKind::crl1 || kind == SolverKind::rommp; }
};

struct SignalSource {
  enum class Kind { sparse, synth_ecg, csv };
  Kind kind = Kind::sparse;
  int beats = 8;          // synth_ecg
  std::string path;       // csv
};

struct ExperimentConfig {
  Index n = 200;
  Index k = 10;
  std::vector<Index> m_list;
  std::vector<double> tau_list;
  double sigma = 0.1;
  int trials = 1;
  Seed base_seed = 0;
  DictionarySpec dictionary;
  std::vector<SolverSpec> solvers;
  CovarianceMode covariance_mode = CovarianceMode::sampled;
  int covariance_trials = 500;
  double e1_variance = 1.0;
  double e2_variance = 1.0;
  bool representation_error = true;  // false: E₂ = 0
  SignalSource signal;
  bool record_runtime = false;
};

/// Parses and validates a JSON experiment description; unknown keys are
/// rejected. Throws InvalidArgument.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);

SolverSpec parse_solver(const nlohmann::json& doc);
nlohmann::json to_json(const SolverSpec& solver);

struct ResultRow {
  std::string solver;
  Index m = 0;
  double tau = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  double coherence = 0.0;
  double mean_iterations = 0.0;
  double mean_runtime_ms = 0.0;  // NaN unless record_runtime
  int trials = 0;
  int failures = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

/// One fully generated problem instance.
struct ProblemInstance {
  Matrix a_bar;
  Matrix psi_bar;
  Matrix p;  // covariance handed to the robust solvers
  Vector theta;
  Vector x;
  Vector y;
  double tau = 0.0;
  double sigma = 0.0;
};

/// Generates trial `trial` of cell (m, tau) exactly as run_sweep does.
/// `psi_bar` must be the dictionary built from config.dictionary.
ProblemInstance make_instance(const ExperimentConfig& config, const Matrix& psi_bar,
                              const std::vector<Vector>& segments, Index m, double tau,
                              int trial, bool need_covariance = true);

/// Runs one solver on an instance.
RecoveryResult run_solver(const SolverSpec& solver, const ProblemInstance& instance);

/// Monte Carlo sweep over m_list × tau_list × solvers. `threads` = 0 uses
/// every hardware thread. Output is identical for any thread count.
ResultTable run_sweep(const ExperimentConfig& config, int threads = 1);

/// Reads one channel per column (optional non-numeric header row), cuts each
/// channel into ⌊samples/N⌋ segments, drops the remainder and scales each
/// segment to unit ℓ2 norm.
std::vector<Vector> load_signal_csv(const std::filesystem::path& path, Index segment_length);

/// Synthetic ECG-like trace: quasi-periodic P/QRS/T Gaussian bumps over a
/// slow baseline, unit ℓ2 norm. Requires n ≥ 32.
Vector synth_ecg(Index n, int beats, Seed seed);

/// CSV with the fixed header, rows sorted by (solver, m, tau), 9 significant
/// digits. Each provenance line is written as "# <line>" before the header.
void emit_results(const ResultTable& table, const std::filesystem::path& path,
                  const std::vector<std::string>& provenance = {});

/// Parses a file written by emit_results (comment lines skipped).
ResultTable read_results(const std::filesystem::path& path);

/// Serialization helpers for instance bundles (gen/solve subcommands).
nlohmann::json to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const nlohmann::json& doc);

}  // namespace robustcs
