#include "robustcs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "robustcs/covariance.hpp"
#include "robustcs/metrics.hpp"
#include "robustcs/model.hpp"
#include "robustcs/rng.hpp"

namespace robustcs {

using nlohmann::json;

namespace {

// Stream tags for the per-trial generators.
enum Stream : std::uint64_t {
  kSignal = 1,
  kPhi = 2,
  kE1 = 3,
  kE2 = 4,
  kNoise = 5,
  kCovariance = 6,
};

[[noreturn]] void config_error(const std::string& what) {
  throw InvalidArgument("config: " + what);
}

void reject_unknown(const json& doc, const std::set<std::string>& allowed, const char* where) {
  if (!doc.is_object()) config_error(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!allowed.contains(key)) config_error("unknown key '" + key + "' in " + where);
}

template <typename T>
T get(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

const char* kind_name(SolverKind k) {
  switch (k) {
    case SolverKind::bpdn: return "bpdn";
    case SolverKind::crl1: return "crl1";
    case SolverKind::omp: return "omp";
    case SolverKind::ommp: return "ommp";
    case SolverKind::rommp: return "rommp";
  }
  return "unknown";
}

SolverKind parse_kind(const std::string& s) {
  if (s == "bpdn") return SolverKind::bpdn;
  if (s == "crl1") return SolverKind::crl1;
  if (s == "omp") return SolverKind::omp;
  if (s == "ommp") return SolverKind::ommp;
  if (s == "rommp") return SolverKind::rommp;
  config_error("unknown solver '" + s + "'");
}

const char* mode_name(CovarianceMode m) {
  switch (m) {
    case CovarianceMode::sampled: return "sampled";
    case CovarianceMode::diagonal: return "diagonal";
    case CovarianceMode::isotropic: return "isotropic";
    case CovarianceMode::explicit_: return "explicit";
  }
  return "unknown";
}

CovarianceMode parse_mode(const std::string& s) {
  if (s == "sampled") return CovarianceMode::sampled;
  if (s == "diagonal") return CovarianceMode::diagonal;
  if (s == "isotropic") return CovarianceMode::isotropic;
  if (s == "explicit") return CovarianceMode::explicit_;
  config_error("unknown covariance_mode '" + s + "'");
}

const char* signal_name(SignalSource::Kind k) {
  switch (k) {
    case SignalSource::Kind::sparse: return "sparse";
    case SignalSource::Kind::synth_ecg: return "synth_ecg";
    case SignalSource::Kind::csv: return "csv";
  }
  return "unknown";
}

std::uint64_t tau_bits(double tau) { return std::bit_cast<std::uint64_t>(tau); }

Seed cell_seed(Seed base, Index m, double tau, int trial) {
  return derive_seed({base, static_cast<std::uint64_t>(m), tau_bits(tau),
                      static_cast<std::uint64_t>(trial)});
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& doc, const char* key) {
  const json& rows = doc.at(key);
  const auto r = static_cast<Index>(rows.size());
  const Index c = r == 0 ? 0 : static_cast<Index>(rows.at(0).size());
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    if (static_cast<Index>(rows.at(static_cast<std::size_t>(i)).size()) != c)
      throw InvalidArgument(std::string("bundle: ragged matrix '") + key + "'");
    for (Index j = 0; j < c; ++j)
      m(i, j) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

Vector vector_from_json(const json& doc, const char* key) {
  const json& arr = doc.at(key);
  Vector v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = arr.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

SolverSpec parse_solver(const json& doc) {
  reject_unknown(doc,
                 {"name", "label", "lambda1", "lambda2", "tol", "max_iter", "step_rule", "rho",
                  "epsilon", "epsilon_scale", "coeff_mode", "sparsity_estimate",
                  "min_relative_improvement"},
                 "solver");
  if (!doc.contains("name")) config_error("solver needs a 'name'");
  SolverSpec s;
  s.kind = parse_kind(doc.at("name").get<std::string>());
  s.label = get<std::string>(doc, "label", kind_name(s.kind));

  const bool convex = s.kind == SolverKind::bpdn || s.kind == SolverKind::crl1;
  const std::set<std::string> convex_keys = {"lambda1", "lambda2", "tol", "step_rule"};
  const std::set<std::string> greedy_keys = {"rho", "epsilon", "epsilon_scale", "coeff_mode",
                                             "sparsity_estimate", "min_relative_improvement"};
  for (const auto& [key, _] : doc.items()) {
    if (convex && greedy_keys.contains(key))
      config_error("key '" + key + "' does not apply to solver " + kind_name(s.kind));
    if (!convex && convex_keys.contains(key))
      config_error("key '" + key + "' does not apply to solver " + kind_name(s.kind));
  }

  if (convex) {
    s.convex.lambda1 = get<double>(doc, "lambda1", 0.1);
    s.convex.lambda2 = get<double>(doc, "lambda2", 0.0);
    if (s.kind == SolverKind::bpdn && s.convex.lambda2 != 0.0)
      config_error("bpdn does not take lambda2");
    s.convex.tol = get<double>(doc, "tol", 1e-8);
    s.convex.max_iter = get<int>(doc, "max_iter", 10000);
    const auto rule = get<std::string>(doc, "step_rule", "backtracking");
    if (rule == "backtracking") s.convex.step_rule = StepRule::backtracking;
    else if (rule == "lipschitz") s.convex.step_rule = StepRule::lipschitz;
    else config_error("unknown step_rule '" + rule + "'");
    if (s.convex.lambda1 < 0 || s.convex.lambda2 < 0 || !(s.convex.tol > 0) || s.convex.max_iter < 1)
      config_error("invalid convex solver parameters for '" + s.label + "'");
  } else {
    const int default_rho = s.kind == SolverKind::omp ? 1 : 4;
    s.greedy.rho = get<int>(doc, "rho", default_rho);
    if (s.kind == SolverKind::omp && s.greedy.rho != 1) config_error("omp selects one atom per iteration");
    s.greedy.epsilon = get<double>(doc, "epsilon", 0.0);
    s.epsilon_scale = get<double>(doc, "epsilon_scale", 0.0);
    s.greedy.max_iter = get<int>(doc, "max_iter", 1000);
    s.greedy.min_relative_improvement = get<double>(doc, "min_relative_improvement", 1e-6);
    if (doc.contains("sparsity_estimate"))
      s.greedy.sparsity_estimate = get<int>(doc, "sparsity_estimate", 0);
    const auto mode = get<std::string>(doc, "coeff_mode", "ls_on_b");
    if (mode == "ls_on_b") s.greedy.coeff_mode = CoeffMode::ls_on_b;
    else if (mode == "restricted_normal") s.greedy.coeff_mode = CoeffMode::restricted_normal;
    else config_error("unknown coeff_mode '" + mode + "'");
    if (s.kind != SolverKind::rommp && s.greedy.coeff_mode != CoeffMode::ls_on_b)
      config_error("coeff_mode applies to rommp only");
    if (s.greedy.rho < 1 || s.greedy.max_iter < 1 || s.greedy.epsilon < 0 || s.epsilon_scale < 0 ||
        (s.greedy.sparsity_estimate && *s.greedy.sparsity_estimate < 0))
      config_error("invalid greedy solver parameters for '" + s.label + "'");
  }
  return s;
}

json to_json(const SolverSpec& s) {
  json out = {{"name", kind_name(s.kind)}, {"label", s.label}};
  if (s.kind == SolverKind::bpdn || s.kind == SolverKind::crl1) {
    out["lambda1"] = s.convex.lambda1;
    if (s.kind == SolverKind::crl1) out["lambda2"] = s.convex.lambda2;
    out["tol"] = s.convex.tol;
    out["max_iter"] = s.convex.max_iter;
    out["step_rule"] = s.convex.step_rule == StepRule::lipschitz ? "lipschitz" : "backtracking";
  } else {
    out["rho"] = s.greedy.rho;
    out["epsilon"] = s.greedy.epsilon;
    out["epsilon_scale"] = s.epsilon_scale;
    out["max_iter"] = s.greedy.max_iter;
    out["min_relative_improvement"] = s.greedy.min_relative_improvement;
    if (s.greedy.sparsity_estimate) out["sparsity_estimate"] = *s.greedy.sparsity_estimate;
    if (s.kind == SolverKind::rommp)
      out["coeff_mode"] = s.greedy.coeff_mode == CoeffMode::ls_on_b ? "ls_on_b" : "restricted_normal";
  }
  return out;
}

ExperimentConfig parse_experiment_config(const json& doc) {
  reject_unknown(doc,
                 {"n", "k", "m_list", "tau_list", "sigma", "trials", "base_seed", "dictionary",
                  "solvers", "covariance_mode", "covariance_trials", "e1_variance", "e2_variance",
                  "representation_error", "signal", "record_runtime"},
                 "experiment config");
  ExperimentConfig c;
  c.n = get<Index>(doc, "n", c.n);
  c.k = get<Index>(doc, "k", c.k);
  c.m_list = get<std::vector<Index>>(doc, "m_list", {});
  c.tau_list = get<std::vector<double>>(doc, "tau_list", {0.0});
  c.sigma = get<double>(doc, "sigma", c.sigma);
  c.trials = get<int>(doc, "trials", c.trials);
  c.base_seed = get<Seed>(doc, "base_seed", 0);
  c.covariance_trials = get<int>(doc, "covariance_trials", c.covariance_trials);
  c.covariance_mode = parse_mode(get<std::string>(doc, "covariance_mode", "sampled"));
  c.e1_variance = get<double>(doc, "e1_variance", 1.0);
  c.e2_variance = get<double>(doc, "e2_variance", 1.0);
  c.representation_error = get<bool>(doc, "representation_error", true);
  c.record_runtime = get<bool>(doc, "record_runtime", false);

  if (c.n <= 0) config_error("n must be positive");
  if (c.k < 0 || c.k > c.n) config_error("k must lie in [0, n]");
  if (c.m_list.empty()) config_error("m_list must not be empty");
  for (Index m : c.m_list)
    if (m < 1 || m > c.n) config_error("every m must lie in [1, n]");
  if (c.tau_list.empty()) config_error("tau_list must not be empty");
  for (double t : c.tau_list)
    if (!(t >= 0.0)) config_error("tau values must be >= 0");
  if (!(c.sigma >= 0.0)) config_error("sigma must be >= 0");
  if (c.trials < 1) config_error("trials must be >= 1");
  if (c.covariance_trials < 1) config_error("covariance_trials must be >= 1");
  if (c.e1_variance < 0 || c.e2_variance < 0) config_error("variances must be >= 0");

  try {
    c.dictionary = parse_dictionary(get<std::string>(doc, "dictionary", "identity"), c.n);
    if (c.dictionary.kind == DictionaryKind::daubechies) build_dictionary(c.dictionary);
  } catch (const InvalidArgument& e) {
    config_error(e.what());
  }

  if (doc.contains("signal")) {
    const json& sig = doc.at("signal");
    reject_unknown(sig, {"kind", "beats", "path"}, "signal");
    const auto kind = get<std::string>(sig, "kind", "sparse");
    if (kind == "sparse") c.signal.kind = SignalSource::Kind::sparse;
    else if (kind == "synth_ecg") c.signal.kind = SignalSource::Kind::synth_ecg;
    else if (kind == "csv") c.signal.kind = SignalSource::Kind::csv;
    else config_error("unknown signal kind '" + kind + "'");
    c.signal.beats = get<int>(sig, "beats", 8);
    c.signal.path = get<std::string>(sig, "path", "");
    if (c.signal.kind == SignalSource::Kind::csv && c.signal.path.empty())
      config_error("csv signal needs a path");
    if (c.signal.beats < 0) config_error("beats must be >= 0");
    if (c.signal.kind == SignalSource::Kind::synth_ecg && c.n < 32)
      config_error("synth_ecg needs n >= 32");
  }

  if (!doc.contains("solvers") || !doc.at("solvers").is_array() || doc.at("solvers").empty())
    config_error("solvers must be a non-empty array");
  std::set<std::string> labels;
  for (const json& s : doc.at("solvers")) {
    c.solvers.push_back(parse_solver(s));
    if (!labels.insert(c.solvers.back().label).second)
      config_error("duplicate solver label '" + c.solvers.back().label + "'");
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json solvers = json::array();
  for (const auto& s : c.solvers) solvers.push_back(to_json(s));
  json signal = {{"kind", signal_name(c.signal.kind)}};
  if (c.signal.kind == SignalSource::Kind::synth_ecg) signal["beats"] = c.signal.beats;
  if (c.signal.kind == SignalSource::Kind::csv) signal["path"] = c.signal.path;
  return {{"n", c.n},
          {"k", c.k},
          {"m_list", c.m_list},
          {"tau_list", c.tau_list},
          {"sigma", c.sigma},
          {"trials", c.trials},
          {"base_seed", c.base_seed},
          {"dictionary", dictionary_name(c.dictionary)},
          {"solvers", solvers},
          {"covariance_mode", mode_name(c.covariance_mode)},
          {"covariance_trials", c.covariance_trials},
          {"e1_variance", c.e1_variance},
          {"e2_variance", c.e2_variance},
          {"representation_error", c.representation_error},
          {"signal", signal},
          {"record_runtime", c.record_runtime}};
}

// ---------------------------------------------------------------------------
// Instances and solvers

ProblemInstance make_instance(const ExperimentConfig& config, const Matrix& psi_bar,
                              const std::vector<Vector>& segments, Index m, double tau,
                              int trial, bool need_covariance) {
  const Index n = config.n;
  const Seed trial_seed = config.base_seed + static_cast<Seed>(trial);
  const Seed cell = cell_seed(config.base_seed, m, tau, trial);

  ProblemInstance inst;
  inst.psi_bar = psi_bar;
  inst.tau = tau;
  inst.sigma = config.sigma;

  switch (config.signal.kind) {
    case SignalSource::Kind::sparse:
      inst.theta = generate_sparse_coefficients(n, config.k, derive_seed({trial_seed, kSignal})).values;
      inst.x = psi_bar * inst.theta;
      break;
    case SignalSource::Kind::synth_ecg:
      inst.x = synth_ecg(n, config.signal.beats, derive_seed({trial_seed, kSignal}));
      inst.theta = psi_bar.transpose() * inst.x;
      break;
    case SignalSource::Kind::csv:
      if (segments.empty()) throw InputError("csv signal source has no segments");
      inst.x = segments[static_cast<std::size_t>(trial) % segments.size()];
      inst.theta = psi_bar.transpose() * inst.x;
      break;
  }

  const Matrix phi_bar = gaussian_matrix(m, n, derive_seed({trial_seed, kPhi}));
  const double sd1 = std::sqrt(config.e1_variance);
  Matrix e1 = Rng(derive_seed({trial_seed, kE1})).normal_matrix(m, n, sd1);
  Matrix e2 = config.representation_error && config.e2_variance > 0.0
                  ? uniform_matrix(n, n, derive_seed({trial_seed, kE2}), config.e2_variance)
                  : Matrix::Zero(n, n);
  const SensingModel model = assemble_sensing_model(phi_bar, psi_bar, e1, e2, tau);
  inst.a_bar = model.a_bar;
  inst.y = measure(model, inst.theta, config.sigma, derive_seed({cell, kNoise})).y;

  inst.p = Matrix::Zero(n, n);
  if (!need_covariance || tau == 0.0) return inst;

  switch (config.covariance_mode) {
    case CovarianceMode::explicit_:
      // Unit-norm, mutually uncorrelated columns: E[(τE)ᵀ(τE)] = τ²I.
      inst.p = tau * tau * Matrix::Identity(n, n);
      break;
    case CovarianceMode::isotropic:
      inst.p = isotropic_estimate(inst.a_bar, inst.y) * Matrix::Identity(n, n);
      break;
    case CovarianceMode::sampled:
    case CovarianceMode::diagonal: {
      // Fresh perturbations, independent of the realized E of this trial.
      Rng rng(derive_seed({cell, kCovariance}));
      const double half = std::sqrt(3.0 * config.e2_variance);
      Matrix acc = Matrix::Zero(n, n);
      Matrix d1(m, n), d2 = Matrix::Zero(n, n);
      for (int j = 0; j < config.covariance_trials; ++j) {
        d1 = rng.normal_matrix(m, n, sd1);
        if (config.representation_error && config.e2_variance > 0.0)
          d2 = rng.uniform_matrix(n, n, -half, half);
        Matrix e = sensing_error(phi_bar, psi_bar, d1, d2);
        normalize_columns(e);
        acc.selfadjointView<Eigen::Lower>().rankUpdate(e.transpose(), tau * tau);
      }
      Matrix p = acc.selfadjointView<Eigen::Lower>();
      p /= static_cast<double>(config.covariance_trials);
      if (config.covariance_mode == CovarianceMode::diagonal)
        inst.p = diagonal_covariance(p.diagonal()).p;
      else
        inst.p = make_covariance(std::move(p), CovarianceProvenance::sampled).p;
      break;
    }
  }
  return inst;
}

RecoveryResult run_solver(const SolverSpec& solver, const ProblemInstance& inst) {
  const Matrix* psi = inst.psi_bar.size() > 0 ? &inst.psi_bar : nullptr;
  auto noise_epsilon = [&](double domain_scale) {
    return solver.epsilon_scale > 0.0 ? solver.epsilon_scale * inst.sigma * domain_scale
                                      : solver.greedy.epsilon;
  };
  switch (solver.kind) {
    case SolverKind::bpdn:
      return solve_bpdn(inst.a_bar, inst.y, solver.convex.lambda1, solver.convex, psi);
    case SolverKind::crl1:
      return solve_crl1(inst.a_bar, inst.y, inst.p, solver.convex, psi);
    case SolverKind::omp:
    case SolverKind::ommp: {
      GreedyConfig g = solver.greedy;
      g.epsilon = noise_epsilon(std::sqrt(static_cast<double>(inst.a_bar.rows())));
      return solve_pursuit(inst.a_bar, inst.y, g, psi);
    }
    case SolverKind::rommp: {
      GreedyConfig g = solver.greedy;
      g.epsilon = noise_epsilon(inst.a_bar.norm());
      return solve_rommp(robust_transform(inst.a_bar, inst.y, inst.p), psi, g);
    }
  }
  throw InvalidArgument("run_solver: unknown solver");
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

struct TrialOutcome {
  bool ok = false;
  Vector x;
  Vector x_hat;
  int iterations = 0;
  double runtime_ms = 0.0;
};

}  // namespace

ResultTable run_sweep(const ExperimentConfig& config, int threads) {
  const Matrix psi_bar = build_dictionary(config.dictionary);
  std::vector<Vector> segments;
  if (config.signal.kind == SignalSource::Kind::csv)
    segments = load_signal_csv(config.signal.path, config.n);

  struct Cell {
    Index m;
    double tau;
  };
  std::vector<Cell> cells;
  for (Index m : config.m_list)
    for (double tau : config.tau_list) cells.push_back({m, tau});

  const bool need_cov = std::any_of(config.solvers.begin(), config.solvers.end(),
                                    [](const SolverSpec& s) { return s.uses_covariance(); });
  const std::size_t n_solvers = config.solvers.size();
  const std::size_t n_tasks = cells.size() * static_cast<std::size_t>(config.trials);
  std::vector<std::vector<TrialOutcome>> outcomes(n_tasks);

  auto work = [&](std::size_t task) {
    const Cell& cell = cells[task / static_cast<std::size_t>(config.trials)];
    const int trial = static_cast<int>(task % static_cast<std::size_t>(config.trials));
    auto& slot = outcomes[task];
    slot.resize(n_solvers);
    ProblemInstance inst;
    try {
      inst = make_instance(config, psi_bar, segments, cell.m, cell.tau, trial, need_cov);
    } catch (const std::exception&) {
      return;  // every solver records a failure for this trial
    }
    for (std::size_t s = 0; s < n_solvers; ++s) {
      TrialOutcome& out = slot[s];
      try {
        const auto start = std::chrono::steady_clock::now();
        RecoveryResult r = run_solver(config.solvers[s], inst);
        const auto stop = std::chrono::steady_clock::now();
        out.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        out.x = inst.x;
        out.x_hat = std::move(r.x_hat);
        out.iterations = r.iterations;
        out.ok = out.x_hat.allFinite();
      } catch (const std::exception&) {
        out.ok = false;
      }
    }
  };

  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n_tasks)));
  if (workers <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) work(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < n_tasks; t = next++) work(t);
      });
  }

  ResultTable table;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t s = 0; s < n_solvers; ++s) {
      std::vector<SignalPair> pairs;
      double iters = 0.0, runtime = 0.0;
      int failures = 0;
      for (int l = 0; l < config.trials; ++l) {
        const auto& slot = outcomes[c * static_cast<std::size_t>(config.trials) + static_cast<std::size_t>(l)];
        if (slot.size() != n_solvers || !slot[s].ok) {
          ++failures;
          continue;
        }
        pairs.emplace_back(slot[s].x, slot[s].x_hat);
        iters += slot[s].iterations;
        runtime += slot[s].runtime_ms;
      }
      ResultRow row;
      row.solver = config.solvers[s].label;
      row.m = cells[c].m;
      row.tau = cells[c].tau;
      row.trials = config.trials;
      row.failures = failures;
      if (pairs.empty()) {
        row.e1 = row.e2 = row.coherence = row.mean_iterations = row.mean_runtime_ms = nan;
      } else {
        const MetricReport rep = score(pairs);
        const double count = static_cast<double>(pairs.size());
        row.e1 = rep.e1;
        row.e2 = rep.e2;
        row.coherence = rep.coherence;
        row.mean_iterations = iters / count;
        row.mean_runtime_ms = config.record_runtime ? runtime / count : nan;
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Signals

std::vector<Vector> load_signal_csv(const std::filesystem::path& path, Index segment_length) {
  if (segment_length < 1) throw InvalidArgument("load_signal_csv: segment length must be >= 1");
  std::ifstream in(path);
  if (!in) throw InputError("cannot open signal file " + path.string());

  std::vector<std::vector<double>> channels;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<double> values;
    bool numeric = true;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      if (b == std::string::npos) {
        numeric = false;
        break;
      }
      const char* first = field.data() + b;
      const char* last = field.data() + e + 1;
      if (*first == '+') ++first;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (!seen_data && channels.empty()) {
        seen_data = true;  // header row
        continue;
      }
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": malformed numeric row");
    }
    seen_data = true;
    if (channels.empty()) channels.resize(values.size());
    if (values.size() != channels.size())
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(channels.size()) + " columns, got " + std::to_string(values.size()));
    for (std::size_t c = 0; c < values.size(); ++c) channels[c].push_back(values[c]);
  }
  if (channels.empty()) throw InputError(path.string() + ": no numeric data");

  const auto samples = static_cast<Index>(channels.front().size());
  if (samples < segment_length)
    throw TooShort(path.string() + ": " + std::to_string(samples) + " samples, need at least " +
                   std::to_string(segment_length));

  std::vector<Vector> segments;
  for (const auto& ch : channels) {
    for (Index s = 0; s + segment_length <= samples; s += segment_length) {
      Vector seg = Eigen::Map<const Vector>(ch.data() + s, segment_length);
      const double norm = seg.norm();
      if (norm == 0.0) continue;  // a flat segment carries nothing to recover
      segments.push_back(seg / norm);
    }
  }
  if (segments.empty()) throw InputError(path.string() + ": every segment is identically zero");
  return segments;
}

Vector synth_ecg(Index n, int beats, Seed seed) {
  if (n < 32) throw InvalidArgument("synth_ecg: n must be >= 32");
  if (beats < 0) throw InvalidArgument("synth_ecg: beats must be >= 0");
  Rng rng(seed);
  const double pi = std::numbers::pi;
  Vector x(n);

  // Slow baseline wander: two low-frequency sinusoids.
  const double phase1 = rng.uniform(0.0, 2.0 * pi);
  const double phase2 = rng.uniform(0.0, 2.0 * pi);
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    x(i) = 0.08 * std::sin(2.0 * pi * t + phase1) + 0.04 * std::sin(4.0 * pi * t + phase2);
  }
  if (beats == 0) {
    if (x.norm() == 0.0) x.setConstant(1.0);
    return x / x.norm();
  }

  struct Wave {
    double offset;  // fraction of the beat period relative to the R peak
    double width;   // fraction of the period
    double min_width;  // samples
    double amplitude;
  };
  const Wave waves[] = {
      {-0.20, 0.035, 6.0, 0.12},   // P
      {-0.035, 0.010, 4.0, -0.12}, // Q
      {0.0, 0.012, 5.0, 1.00},     // R
      {0.035, 0.010, 4.0, -0.22},  // S
      {0.28, 0.060, 3.0, 0.28},    // T
  };

  const double period = static_cast<double>(n) / beats;
  for (int b = 0; b < beats; ++b) {
    const double centre = (b + 0.5) * period + rng.uniform(-0.05, 0.05) * period;
    const double scale = 1.0 + rng.uniform(-0.1, 0.1);
    for (const Wave& w : waves) {
      const double mu = centre + w.offset * period;
      const double sd = std::max(w.width * period, w.min_width);
      for (Index i = 0; i < n; ++i) {
        const double d = (static_cast<double>(i) - mu) / sd;
        if (std::abs(d) < 8.0) x(i) += scale * w.amplitude * std::exp(-0.5 * d * d);
      }
    }
  }
  return x / x.norm();
}

// ---------------------------------------------------------------------------
// Results I/O

void emit_results(const ResultTable& table, const std::filesystem::path& path,
                  const std::vector<std::string>& provenance) {
  std::vector<const ResultRow*> order;
  for (const auto& r : table.rows) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const ResultRow* a, const ResultRow* b) {
    if (a->solver != b->solver) return a->solver < b->solver;
    if (a->m != b->m) return a->m < b->m;
    return a->tau < b->tau;
  });

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "solver,m,tau,e1,e2,coherence,mean_iterations,mean_runtime_ms,trials,failures\n";
  for (const ResultRow* r : order) {
    out << r->solver << ',' << r->m << ',' << format_double(r->tau) << ',' << format_double(r->e1)
        << ',' << format_double(r->e2) << ',' << format_double(r->coherence) << ','
        << format_double(r->mean_iterations) << ',' << format_double(r->mean_runtime_ms) << ','
        << r->trials << ',' << r->failures << '\n';
  }
  out.flush();
  if (!out) throw InputError("write failed for " + path.string());
}

ResultTable read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open results file " + path.string());
  ResultTable table;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 10)
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected 10 fields");
    try {
      ResultRow r;
      r.solver = f[0];
      r.m = std::stoll(f[1]);
      r.tau = std::stod(f[2]);
      r.e1 = std::stod(f[3]);
      r.e2 = std::stod(f[4]);
      r.coherence = std::stod(f[5]);
      r.mean_iterations = std::stod(f[6]);
      r.mean_runtime_ms = std::stod(f[7]);
      r.trials = std::stoi(f[8]);
      r.failures = std::stoi(f[9]);
      table.rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return table;
}

json to_json(const ProblemInstance& inst) {
  return {{"a_bar", matrix_to_json(inst.a_bar)}, {"psi_bar", matrix_to_json(inst.psi_bar)},
          {"p", matrix_to_json(inst.p)},         {"theta", vector_to_json(inst.theta)},
          {"x", vector_to_json(inst.x)},         {"y", vector_to_json(inst.y)},
          {"tau", inst.tau},                     {"sigma", inst.sigma}};
}

ProblemInstance instance_from_json(const json& doc) {
  try {
    ProblemInstance inst;
    inst.a_bar = matrix_from_json(doc, "a_bar");
    inst.psi_bar = matrix_from_json(doc, "psi_bar");
    inst.p = matrix_from_json(doc, "p");
    inst.theta = vector_from_json(doc, "theta");
    inst.x = vector_from_json(doc, "x");
    inst.y = vector_from_json(doc, "y");
    inst.tau = doc.at("tau").get<double>();
    inst.sigma = doc.at("sigma").get<double>();
    const Index n = inst.a_bar.cols();
    if (inst.y.size() != inst.a_bar.rows() || inst.theta.size() != n || inst.x.size() != n ||
        inst.p.rows() != n || inst.p.cols() != n || inst.psi_bar.rows() != n || inst.psi_bar.cols() != n)
      throw InvalidArgument("bundle: inconsistent shapes");
    return inst;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bundle: ") + e.what());
  }
}

}  // namespace robustcs
