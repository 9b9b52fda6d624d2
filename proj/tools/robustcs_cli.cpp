// robustcs command-line tool.
//
// Exit status: 0 success, 1 usage error, 2 config/input error,
// 3 verification failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "robustcs/convex.hpp"
#include "robustcs/covariance.hpp"
#include "robustcs/dictionary.hpp"
#include "robustcs/harness.hpp"
#include "robustcs/metrics.hpp"
#include "robustcs/model.hpp"
#include "robustcs/rng.hpp"
#include "robustcs/version.hpp"

using namespace robustcs;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kVerify = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_json(const json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << doc.dump() << '\n';
}

// "a.b.0.c=value": the value is parsed as JSON when possible, else taken as a
// string. Dotted paths address nested objects and array indices.
void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("bad override key: " + key);
    json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ConfigError("override key '" + key + "': '" + part + "' is not an index");
      }
      if (idx >= node->size()) throw ConfigError("override key '" + key + "': index out of range");
      next = &(*node)[idx];
    } else {
      if (!node->is_object()) *node = json::object();
      next = &(*node)[part];
    }
    if (dot == std::string::npos) {
      *next = value;
      return;
    }
    node = next;
    start = dot + 1;
  }
}

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  long long seed = -1;
  int threads = 1;
};

json load_config(const Common& c, json base = json::object()) {
  json doc = c.config.empty() ? std::move(base) : read_json(c.config);
  for (const auto& o : c.overrides) apply_override(doc, o);
  if (c.seed >= 0) doc["base_seed"] = c.seed;
  return doc;
}

std::vector<std::string> provenance(const ExperimentConfig& cfg, const Common& c) {
  std::vector<std::string> lines = {std::string("tool=robustcs ") + kVersion};
  const json doc = to_json(cfg);
  for (const auto& [key, value] : doc.items()) lines.push_back(key + "=" + value.dump());
  for (const auto& o : c.overrides) lines.push_back("set." + o);
  if (c.seed >= 0) lines.push_back("set.base_seed=" + std::to_string(c.seed));
  return lines;
}

void print_table(const ResultTable& t) {
  std::printf("%-16s %6s %6s %10s %10s %10s %10s\n", "solver", "m", "tau", "e1", "e2", "coherence", "iters");
  for (const auto& r : t.rows)
    std::printf("%-16s %6lld %6.3g %10.4g %10.4g %10.4g %10.4g%s\n", r.solver.c_str(), static_cast<long long>(r.m),
                r.tau, r.e1, r.e2, r.coherence, r.mean_iterations,
                r.failures ? ("  (" + std::to_string(r.failures) + " failed)").c_str() : "");
}

// ---------------------------------------------------------------------------

int cmd_gen(const Common& c, long long m, double tau, int trial) {
  const auto cfg = parse_experiment_config(load_config(c));
  const Index mm = m > 0 ? static_cast<Index>(m) : cfg.m_list.front();
  const double tt = tau >= 0 ? tau : cfg.tau_list.front();
  if (mm > cfg.n) throw ConfigError("m must not exceed n");
  std::vector<Vector> segments;
  if (cfg.signal.kind == SignalSource::Kind::csv) segments = load_signal_csv(cfg.signal.path, cfg.n);
  const auto inst = make_instance(cfg, build_dictionary(cfg.dictionary), segments, mm, tt, trial);
  write_json(to_json(inst), c.out);
  if (!c.out.empty()) std::printf("wrote bundle m=%lld n=%lld tau=%g to %s\n", static_cast<long long>(mm),
                                  static_cast<long long>(cfg.n), tt, c.out.c_str());
  return kOk;
}

int cmd_solve(const Common& c, const std::string& bundle, const std::string& solver_name) {
  const auto inst = instance_from_json(read_json(bundle));
  json desc = {{"name", solver_name}};
  for (const auto& o : c.overrides) apply_override(desc, o);
  const SolverSpec spec = parse_solver(desc);
  const RecoveryResult r = run_solver(spec, inst);

  std::printf("solver      %s\n", spec.label.c_str());
  std::printf("status      %s\n", to_string(r.status));
  std::printf("iterations  %d\n", r.iterations);
  std::printf("objective   %.9g\n", r.objective);
  std::printf("nonzeros    %lld\n", static_cast<long long>((r.theta_hat.array() != 0.0).count()));
  if (inst.x.norm() > 0) {
    const auto rep = score(std::vector<SignalPair>{{inst.x, r.x_hat}});
    std::printf("e2          %.9g\n", rep.e2);
    std::printf("coherence   %.9g\n", rep.coherence);
  }
  if (!c.out.empty()) {
    json doc = {{"solver", to_json(spec)},
                {"status", to_string(r.status)},
                {"iterations", r.iterations},
                {"objective", r.objective},
                {"theta_hat", std::vector<double>(r.theta_hat.data(), r.theta_hat.data() + r.theta_hat.size())},
                {"x_hat", std::vector<double>(r.x_hat.data(), r.x_hat.data() + r.x_hat.size())}};
    write_json(doc, c.out);
  }
  return kOk;
}

int run_and_emit(const json& doc, const Common& c) {
  const auto cfg = parse_experiment_config(doc);
  const auto table = run_sweep(cfg, c.threads);
  if (c.out.empty()) {
    print_table(table);
  } else {
    emit_results(table, c.out, provenance(cfg, c));
    std::printf("wrote %zu rows to %s\n", table.rows.size(), c.out.c_str());
  }
  return kOk;
}

json ecg_defaults() {
  return json::parse(R"({
    "n": 1024, "k": 0, "m_list": [512], "tau_list": [0.3], "sigma": 0.3, "trials": 37,
    "base_seed": 1, "dictionary": "db10/5", "representation_error": false,
    "covariance_mode": "sampled", "covariance_trials": 100,
    "signal": {"kind": "synth_ecg", "beats": 8},
    "solvers": [
      {"name": "omp", "epsilon_scale": 0.5},
      {"name": "ommp", "rho": 4, "epsilon_scale": 0.5},
      {"name": "rommp", "rho": 4, "epsilon_scale": 0.5}
    ]})");
}

int cmd_ecg(Common c, const std::string& signal_path) {
  json doc = load_config(c, ecg_defaults());
  if (!signal_path.empty()) {
    doc["signal"] = {{"kind", "csv"}, {"path", signal_path}};
    c.overrides.push_back("signal.path=" + signal_path);
    if (c.config.empty()) {
      // One trial per segment unless the user chose otherwise.
      const auto n = doc.at("n").get<Index>();
      doc["trials"] = static_cast<int>(load_signal_csv(signal_path, n).size());
    }
  }
  return run_and_emit(doc, c);
}

int cmd_theory(long long k, long long n, double lambda2, double c1, double c2, bool tight) {
  const TheoryParams params{c1, c2, lambda2};
  const long long m = tight ? sufficient_measurements_tight(k, n, params) : sufficient_measurements(k, n, params);
  std::printf("%lld\n", m);
  return kOk;
}

int cmd_verify(long long seed) {
  const Seed base = seed >= 0 ? static_cast<Seed>(seed) : 2024;
  int failures = 0;
  auto report = [&](bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
    failures += !ok;
  };

  {
    const Index m = 16, n = 32;
    const Matrix phi = gaussian_matrix(m, n, derive_seed({base, 1}));
    const Matrix psi = Matrix::Identity(n, n);
    const auto model = assemble_sensing_model(phi, psi, gaussian_matrix(m, n, derive_seed({base, 2})),
                                              uniform_matrix(n, n, derive_seed({base, 3})), 0.3);
    const Vector theta = generate_sparse_coefficients(n, 4, derive_seed({base, 4})).values;
    const double rel = verify_expected_error(model, theta, 0.5, analytic_error_covariance(phi, psi, 0.3), 5000,
                                             derive_seed({base, 5}));
    char buf[128];
    std::snprintf(buf, sizeof buf, "expected fitting-error identity: relative error %.4f", rel);
    report(rel <= 0.05, buf);
  }

  {
    Rng rng(derive_seed({base, 6}));
    int violations = 0;
    for (int t = 0; t < 500; ++t) {
      const Index n = 8 + static_cast<Index>(rng.below(16));
      const Index m = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 2)));
      const Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n / 2)));
      const Vector alpha = generate_sparse_coefficients(n, k, derive_seed({base, 7, std::uint64_t(t)})).values;
      const Vector v = rng.normal_vector(n) * rng.uniform();
      std::vector<Matrix> draws;
      for (int l = 0; l < 10; ++l) draws.push_back(rng.normal_matrix(m, n, rng.uniform()));
      violations += !verify_theorem_steps(alpha, v, draws).all();
    }
    report(violations == 0, "recovery-condition proof steps: " + std::to_string(violations) + " violations in 500");
  }

  {
    double worst = 0.0;
    for (const char* name : {"identity", "dct", "db4/4", "db10/5"}) {
      const Matrix psi = build_dictionary(parse_dictionary(name, 1024));
      worst = std::max(worst, (psi.transpose() * psi - Matrix::Identity(1024, 1024)).cwiseAbs().maxCoeff());
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "dictionary orthonormality: worst error %.2e", worst);
    report(worst <= 1e-8, buf);
  }

  {
    const Matrix psi = build_dictionary(parse_dictionary("db10/5", 1024));
    const double conc = energy_concentration(psi, synth_ecg(1024, 8, derive_seed({base, 8})), 0.10);
    char buf[128];
    std::snprintf(buf, sizeof buf, "synthetic ECG compressibility: %.4f of energy in top 10%%", conc);
    report(conc >= 0.95, buf);
  }

  return failures == 0 ? kOk : kVerify;
}

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "JSON experiment config");
  if (config_required) opt->required();
  sub->add_option("--out", c.out, "output path");
  sub->add_option("--set", c.overrides, "key=value override (repeatable)")->take_all();
  sub->add_option("--seed", c.seed, "override base_seed")->check(CLI::NonNegativeNumber);
  sub->add_option("--threads", c.threads, "worker threads (0 = all)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust compressed sensing toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);

  Common common;

  auto* gen = app.add_subcommand("gen", "generate a problem instance bundle (JSON)");
  add_common(gen, common, true);
  long long gen_m = -1;
  double gen_tau = -1.0;
  int gen_trial = 0;
  gen->add_option("--m", gen_m, "number of measurements (default: first of m_list)");
  gen->add_option("--tau", gen_tau, "uncertainty weight (default: first of tau_list)");
  gen->add_option("--trial", gen_trial, "trial index")->check(CLI::NonNegativeNumber);

  auto* solve = app.add_subcommand("solve", "run one solver on a bundle");
  std::string bundle, solver_name;
  solve->add_option("--bundle", bundle, "bundle written by gen")->required();
  solve->add_option("--solver", solver_name, "bpdn|crl1|omp|ommp|rommp")->required();
  solve->add_option("--set", common.overrides, "solver parameter key=value (repeatable)")->take_all();
  solve->add_option("--out", common.out, "write the result as JSON");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep to CSV");
  add_common(sweep, common, true);

  auto* ecg = app.add_subcommand("ecg", "greedy comparison on ECG-like signals");
  add_common(ecg, common, false);
  std::string signal_path;
  ecg->add_option("--signal", signal_path, "CSV with one channel per column (default: synthetic)");

  auto* theory = app.add_subcommand("theory", "sufficient number of measurements");
  long long k = 0, n = 0;
  double lambda2 = 0.0, c1 = 1.0, c2 = 0.0;
  bool tight = false;
  theory->add_option("--k", k, "sparsity")->required();
  theory->add_option("--n", n, "signal length")->required();
  theory->add_option("--lambda2", lambda2, "quadratic penalty weight");
  theory->add_option("--c1", c1, "kernel-ratio constant");
  theory->add_option("--c2", c2, "expected spectral norm of the perturbation");
  theory->add_flag("--tight", tight, "solve the implicit bound in M instead");

  auto* verify = app.add_subcommand("verify", "run the built-in property checks");
  verify->add_option("--seed", common.seed, "base seed")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(common, gen_m, gen_tau, gen_trial);
    if (solve->parsed()) return cmd_solve(common, bundle, solver_name);
    if (sweep->parsed()) return run_and_emit(load_config(common), common);
    if (ecg->parsed()) return cmd_ecg(common, signal_path);
    if (theory->parsed()) return cmd_theory(k, n, lambda2, c1, c2, tight);
    if (verify->parsed()) return cmd_verify(common.seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kUsage;
}
