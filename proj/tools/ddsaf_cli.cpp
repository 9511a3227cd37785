// Command-line front end: runs experiment presets or config files, writes
// CSV learning curves and step-size sweeps, prints closed-form predictions
// and runs a fast self-check suite.
//
// Exit codes: 0 success, 1 usage/config error, 2 divergence, 3 validation
// failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddsaf/experiments.hpp"
#include "ddsaf/theory.hpp"

namespace {

using namespace ddsaf;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct CommonOptions {
  int experiment = 0;
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  long trials = 0;
  long iters = 0;
  std::string out_dir = ".";
  std::vector<std::string> mu_overrides;
  std::vector<std::string> rho0_overrides;
  std::string sbar = "plugin";
  bool no_theory = false;
  bool verbose = false;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool wants_source) {
  if (wants_source) {
    cmd->add_option("--experiment", opt.experiment, "Preset id (1..5)")
        ->check(CLI::Range(1, 5));
    cmd->add_option("--config", opt.config_path, "Config file path");
    cmd->add_option("--seed", opt.seed, "Master seed override")
        ->each([&](const std::string&) { opt.seed_set = true; });
    cmd->add_option("--trials", opt.trials, "Trial count override")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--iters", opt.iters, "Iteration count override")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", opt.out_dir, "Output directory");
    cmd->add_option("--mu", opt.mu_overrides,
                    "Step size override, repeatable: <alg>=<value>");
    cmd->add_option("--rho0", opt.rho0_overrides,
                    "Attraction strength override, repeatable: <alg>=<value>");
    cmd->add_option("--sbar", opt.sbar,
                    "Steady-state penalty weight source for predictions")
        ->check(CLI::IsMember({"plugin", "analytic"}));
    cmd->add_flag("--no-theory", opt.no_theory,
                  "Skip predicted curves and prediction lines");
  }
  cmd->add_flag("-v,--verbose", opt.verbose, "Verbose progress output");
}

AlgorithmEntry* find_algorithm(ExperimentConfig& cfg, const std::string& name) {
  auto eq = [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) ==
           std::tolower(static_cast<unsigned char>(b));
  };
  for (auto& entry : cfg.algorithms)
    if (entry.name.size() == name.size() &&
        std::equal(name.begin(), name.end(), entry.name.begin(), eq))
      return &entry;
  return nullptr;
}

// <alg>=<value> pairs from --mu / --rho0.
std::pair<std::string, double> parse_override(const std::string& text) {
  const size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw std::invalid_argument("override must look like ALG=value: '" + text +
                                "'");
  char* end = nullptr;
  const std::string num = text.substr(eq + 1);
  const double v = std::strtod(num.c_str(), &end);
  if (end == num.c_str() || *end != '\0')
    throw std::invalid_argument("bad override value: '" + text + "'");
  return {text.substr(0, eq), v};
}

ExperimentConfig resolve_config(const CommonOptions& opt,
                                std::string& source_label) {
  if ((opt.experiment != 0) == !opt.config_path.empty())
    throw std::invalid_argument(
        "exactly one of --experiment and --config is required");
  ExperimentConfig cfg;
  if (opt.experiment != 0) {
    cfg = preset(opt.experiment);
    source_label = "preset " + std::to_string(opt.experiment);
  } else {
    cfg = load_config_file(opt.config_path);
    source_label = "config " + opt.config_path;
  }
  if (opt.seed_set) cfg.master_seed = opt.seed;
  if (opt.trials > 0) cfg.n_trials = opt.trials;
  if (opt.iters > 0) {
    cfg.n_iters = opt.iters;
    cfg.steady_state_window = std::max<long>(1, opt.iters / 4);
  }
  for (const auto& text : opt.mu_overrides) {
    const auto [name, value] = parse_override(text);
    AlgorithmEntry* entry = find_algorithm(cfg, name);
    if (!entry)
      throw std::invalid_argument("--mu: no algorithm named '" + name + "'");
    entry->config.mu = value;
    // keep the attraction strength tied to the step size where a rule exists
    if (entry->rho0_rule.coeff != 0.0)
      entry->config.rho0 = entry->rho0_rule(value);
  }
  for (const auto& text : opt.rho0_overrides) {
    const auto [name, value] = parse_override(text);
    AlgorithmEntry* entry = find_algorithm(cfg, name);
    if (!entry)
      throw std::invalid_argument("--rho0: no algorithm named '" + name + "'");
    entry->config.rho0 = value;
  }
  return cfg;
}

void echo_config(const ExperimentConfig& cfg, const std::string& source) {
  std::cout << "source: " << source << "\n"
            << "m=" << cfg.system.m << " n_iters=" << cfg.n_iters
            << " n_trials=" << cfg.n_trials
            << " master_seed=" << cfg.master_seed
            << " window=" << cfg.steady_state_window << "\n";
  for (const auto& entry : cfg.algorithms)
    std::cout << "  " << entry.name << ": mu=" << fmt("%.6g", entry.config.mu)
              << " rho0=" << fmt("%.6g", entry.config.rho0) << "\n";
}

struct DivergenceNote {
  std::string algorithm;
  long iteration;
  long trial;
};

// ---------------------------------------------------------------------------
// run

int cmd_run(const CommonOptions& opt) {
  std::string source;
  ExperimentConfig cfg = resolve_config(opt, source);
  const std::string fp = fingerprint(cfg);
  const SbarMode mode =
      opt.sbar == "analytic" ? SbarMode::Analytic : SbarMode::Plugin;
  if (opt.verbose) {
    echo_config(cfg, source);
    std::cout << "fingerprint: " << fp << "\n";
  }

  // Algorithms run one at a time so a divergence in one still leaves the
  // others' curves on disk; streams are keyed by (seed, trial, role), so
  // the trajectories are identical to a joint run.
  std::vector<MsdCurve> sim;
  std::vector<std::optional<SteadyStateEstimate>> steady(cfg.algorithms.size());
  std::vector<std::optional<DivergenceNote>> diverged(cfg.algorithms.size());
  for (size_t a = 0; a < cfg.algorithms.size(); ++a) {
    ExperimentConfig single = cfg;
    single.algorithms = {cfg.algorithms[a]};
    try {
      auto results = run_monte_carlo(single);
      results[0].curve.fingerprint = fp;
      steady[a] = estimate_steady_state(results[0], cfg.steady_state_window);
      sim.push_back(std::move(results[0].curve));
      if (opt.verbose)
        std::cout << cfg.algorithms[a].name
                  << " steady-state: " << fmt("%.4f", steady[a]->msd_db)
                  << " dB\n";
    } catch (const DivergenceError& err) {
      diverged[a] = DivergenceNote{err.algorithm, err.iteration, err.trial};
      std::cerr << "divergence: " << err.what() << "\n";
    }
  }

  std::vector<MsdCurve> theory;
  std::string theory_note;
  if (cfg.theory_overlay && !opt.no_theory) {
    try {
      theory = theory_overlay_curves(cfg, mode);
    } catch (const std::exception& err) {
      theory_note = std::string("predicted curve unavailable: ") + err.what();
      std::cerr << theory_note << "\n";
    }
  }

  std::filesystem::create_directories(opt.out_dir);
  const std::string curves_path = opt.out_dir + "/curves.csv";
  const std::string summary_path = opt.out_dir + "/summary.txt";
  write_curves_csv(curves_path, sim, theory, fp);

  std::ofstream summary(summary_path);
  if (!summary) throw std::invalid_argument("cannot open " + summary_path);
  summary << "# fingerprint=" << fp << "\n";
  summary << "source: " << source << "\n";
  summary << "iterations: " << cfg.n_iters << "\n";
  summary << "trials: " << cfg.n_trials << "\n";
  summary << "master_seed: " << cfg.master_seed << "\n";
  summary << "steady_state_window: " << cfg.steady_state_window << "\n\n";
  summary << "algorithm  mu  rho0  msd_ss_db  std_db\n";
  for (size_t a = 0; a < cfg.algorithms.size(); ++a) {
    const auto& entry = cfg.algorithms[a];
    summary << entry.name << "  " << fmt("%.6g", entry.config.mu) << "  "
            << fmt("%.6g", entry.config.rho0) << "  ";
    if (steady[a])
      summary << fmt("%.4f", steady[a]->msd_db) << "  "
              << fmt("%.4f", steady[a]->std_db) << "\n";
    else
      summary << "diverged(iteration=" << diverged[a]->iteration
              << ",trial=" << diverged[a]->trial << ")  -\n";
  }

  if (cfg.theory_overlay && !opt.no_theory) {
    summary << "\npredictions (sbar=" << opt.sbar << ")\n";
    if (!theory_note.empty()) summary << theory_note << "\n";
    for (size_t a = 0; a < cfg.algorithms.size(); ++a) {
      const auto& entry = cfg.algorithms[a];
      if (entry.config.algorithm != Algorithm::DDSAF) continue;
      try {
        const TheoryInputs in = theory_inputs(cfg, entry, mode);
        const double exact_db = to_db(steady_state_msd(in, false));
        const double approx_db = to_db(steady_state_msd(in, true));
        summary << entry.name
                << " predicted steady-state: exact " << fmt("%.4f", exact_db)
                << " dB, approximate " << fmt("%.4f", approx_db) << " dB\n";
        if (steady[a]) {
          summary << entry.name << " empirical-theory gap: "
                  << fmt("%+.4f", steady[a]->msd_db - exact_db)
                  << " dB (exact), "
                  << fmt("%+.4f", steady[a]->msd_db - approx_db)
                  << " dB (approximate)\n";
        }
      } catch (const std::exception& err) {
        summary << entry.name << " prediction unavailable: " << err.what()
                << "\n";
      }
    }
  }
  summary.close();

  std::cout << "wrote " << curves_path << " and " << summary_path << "\n";
  for (const auto& note : diverged)
    if (note) return 2;
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const CommonOptions& opt, const std::vector<double>& grid_opt) {
  std::string source;
  ExperimentConfig cfg = resolve_config(opt, source);
  if (opt.verbose) echo_config(cfg, source);

  const std::vector<double> grid =
      grid_opt.empty() ? default_sweep_grid() : grid_opt;
  const SweepTable table = step_size_sweep(cfg, grid);

  std::filesystem::create_directories(opt.out_dir);
  const std::string path = opt.out_dir + "/sweep.csv";
  write_sweep_csv(path, table);
  std::cout << "wrote " << path << " (" << table.rows.size() << " rows)\n";

  bool any_diverged = false;
  for (const auto& row : table.rows) any_diverged |= row.diverged;
  if (any_diverged) std::cerr << "some grid points diverged\n";
  return any_diverged ? 2 : 0;
}

// ---------------------------------------------------------------------------
// theory

int cmd_theory(const CommonOptions& opt) {
  std::string source;
  ExperimentConfig cfg = resolve_config(opt, source);
  const SbarMode mode =
      opt.sbar == "analytic" ? SbarMode::Analytic : SbarMode::Plugin;

  if (cfg.input.kind != InputSpec::Kind::White) {
    std::cerr << "theory: closed-form predictions assume white input\n";
    return 1;
  }
  const double sx2 = cfg.input.variance;
  const auto ms = ms_stability_bound(static_cast<long>(cfg.system.m), sx2);

  std::cout << "source: " << source << "\n";
  std::cout << "mean stability bound: mu < " << fmt("%.3g", mean_stability_bound(sx2))
            << "\n";
  std::cout << "mean-square stability bound: mu < " << fmt("%.3g", ms.exact)
            << " (large-M form " << fmt("%.3g", ms.large_m) << ")\n";

  std::optional<TheoryInputs> rza_in, dd_in;
  for (const auto& entry : cfg.algorithms) {
    std::cout << entry.name << " (mu=" << fmt("%.6g", entry.config.mu)
              << ", rho0=" << fmt("%.6g", entry.config.rho0) << ")\n";
    if (entry.config.mu >= ms.exact) {
      std::cout << "  unstable: exceeds mean-square bound "
                << fmt("%.3g", ms.exact) << "\n";
      continue;
    }
    try {
      const TheoryInputs in = theory_inputs(cfg, entry, mode);
      const double floor_lin = in.mu * static_cast<double>(in.m) * in.sigma_v2 / 2.0;
      std::cout << "  noise floor: " << fmt("%.2f", to_db(floor_lin))
                << " dB\n";
      std::cout << "  predicted steady-state: exact "
                << fmt("%.2f", to_db(steady_state_msd(in, false)))
                << " dB, approximate "
                << fmt("%.2f", to_db(steady_state_msd(in, true))) << " dB\n";
      if (entry.config.algorithm == Algorithm::RZA && !rza_in) rza_in = in;
      if (entry.config.algorithm == Algorithm::DDSAF && !dd_in) dd_in = in;
    } catch (const std::domain_error& err) {
      std::cout << "  unstable: " << err.what() << "\n";
    }
  }

  if (rza_in && dd_in) {
    // Predicted improvement is defined at a shared operating point; evaluate
    // both penalty-weight profiles at the dual-domain one.
    TheoryInputs rza_at_dd = *rza_in;
    rza_at_dd.mu = dd_in->mu;
    rza_at_dd.rho0 = dd_in->rho0;
    std::cout << "delta MSD (RZA minus DD at mu=" << fmt("%.6g", dd_in->mu)
              << ", rho0=" << fmt("%.6g", dd_in->rho0)
              << "): " << fmt("%.6g", delta_msd(rza_at_dd, *dd_in)) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// validate: fast invariant suite with an independent reference stepper.

namespace refcheck {

bool corrupt_sgn0 = false;

double sign_of(double v) {
  if (v > 0.0) return 1.0;
  if (v < 0.0) return -1.0;
  return corrupt_sgn0 ? 1.0 : 0.0;
}

// Plain-array re-implementation of the three update rules, sharing no code
// with the library path.
struct Stepper {
  std::vector<double> w, q;
  long n = 0;

  explicit Stepper(size_t m) : w(m, 0.0), q(m, 0.0) {}

  double step(const std::vector<double>& x, double d,
              const AlgorithmConfig& c) {
    const size_t m = w.size();
    double acc = 0.0;
    for (size_t i = 0; i < m; ++i) acc += w[i] * x[i];
    const double e = d - acc;
    const double me = c.mu * e;
    if (c.algorithm == Algorithm::LMS) {
      for (size_t i = 0; i < m; ++i) w[i] += me * x[i];
    } else if (c.algorithm == Algorithm::RZA) {
      for (size_t i = 0; i < m; ++i) {
        const double s = 1.0 / (1.0 + c.epsilon * std::fabs(w[i]));
        w[i] += me * x[i] - c.rho0 * s * sign_of(w[i]);
      }
    } else {
      for (size_t i = 0; i < m; ++i) q[i] = c.gamma_q * q[i] + e * x[i];
      const double rho = n <= c.n_warm ? 0.0 : c.rho0;
      for (size_t i = 0; i < m; ++i) {
        const double s =
            1.0 / (1.0 + c.beta_w * std::fabs(w[i]) + c.beta_q * std::fabs(q[i]));
        w[i] += me * x[i] - rho * s * sign_of(w[i]);
      }
    }
    ++n;
    return e;
  }
};

}  // namespace refcheck

struct CheckReport {
  int failures = 0;
  bool verbose = false;

  void record(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "ok   " : "FAIL ") << name;
    if (!ok || verbose) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  }
};

int cmd_validate(const CommonOptions& opt, bool corrupt) {
  refcheck::corrupt_sgn0 = corrupt;
  CheckReport report;
  report.verbose = opt.verbose;

  // sign convention
  {
    const bool ok = sgn(0.0) == 0.0 && sgn(5e-300) == 1.0 && sgn(-2.0) == -1.0;
    report.record(ok, "sign convention, sgn(0) = 0", "library sgn at 0/+/-");
  }

  // multiplication tallies
  {
    bool ok = true;
    std::ostringstream detail;
    for (const long m : {8L, 128L, 1024L}) {
      TrialStream rng(7, m, 0);
      VecX<double> x(m);
      for (long i = 0; i < m; ++i) x[i] = rng.gaussian();
      for (const Algorithm alg :
           {Algorithm::LMS, Algorithm::RZA, Algorithm::DDSAF}) {
        AlgorithmConfig c;
        c.algorithm = alg;
        c.mu = 0.01;
        c.rho0 = 1e-4;
        c.epsilon = 0.02;
        c.beta_w = 0.02;
        c.beta_q = 2.0;
        FilterState state(m);
        filter_step(state, c, x, 1.0);
        ok = ok && state.mult_count == mults_per_step(alg, m);
        for (int k = 0; k < 9; ++k) filter_step(state, c, x, 1.0);
        ok = ok && state.mult_count == 10 * mults_per_step(alg, m);
      }
    }
    report.record(ok, "op counts per iteration: LMS 2M, RZA 4M, DD-SAF 6M",
                  "tallies at M in {8, 128, 1024}, single step and 10 steps");
  }

  // penalty weight bounds
  {
    TrialStream rng(11, 0, 0);
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
      const double w = 10.0 * rng.gaussian();
      const double q = 10.0 * rng.gaussian();
      const double bw = 5.0 * rng.uniform();
      const double bq = 5.0 * rng.uniform();
      const double r = rza_weight(w, bw);
      const double d = dd_weight(w, q, bw, bq);
      ok = r > 0.0 && r <= 1.0 && d > 0.0 && d <= 1.0 && d <= r;
    }
    report.record(ok, "penalty weights in (0, 1], dual-domain <= single-domain",
                  "10000 random (w, q, beta) draws");
  }

  // error-memory recursion vs windowed sum
  {
    TrialStream rng(13, 0, 0);
    const long m = 6, steps = 10;
    const double gamma = 0.9;
    std::vector<VecX<double>> xs;
    std::vector<double> es;
    VecX<double> q = VecX<double>::Zero(m);
    for (long n = 0; n < steps; ++n) {
      VecX<double> x(m);
      for (long i = 0; i < m; ++i) x[i] = rng.gaussian();
      const double e = rng.gaussian();
      q = error_memory_update(q, e, x, gamma);
      xs.push_back(x);
      es.push_back(e);
    }
    VecX<double> brute = VecX<double>::Zero(m);
    for (long l = 0; l < steps; ++l)
      brute += std::pow(gamma, static_cast<double>(l)) * es[steps - 1 - l] *
               xs[steps - 1 - l];
    const double rel = (q - brute).norm() / brute.norm();
    report.record(rel < 1e-12, "error-memory recursion matches windowed sum",
                  "10-step trace, relative error " + fmt("%.2e", rel));
  }

  auto run_pair = [](const AlgorithmConfig& a, const AlgorithmConfig& b,
                     long steps, long m) {
    TrialStream sys_rng(17, 0, 0), in_rng(17, 0, 1), nz_rng(17, 0, 2);
    const SparseSystem sys =
        generate_sparse_system(static_cast<int>(m), {{1, 2}, {m / 2, 2}},
                               sys_rng, true);
    FilterState sa(m), sb(m);
    VecX<double> x = VecX<double>::Zero(m);
    double max_diff = 0.0;
    for (long n = 0; n < steps; ++n) {
      tdl_shift(x, in_rng.gaussian());
      const double d = desired_output(sys, x, nz_rng.gaussian(1e-3));
      filter_step(sa, a, x, d);
      filter_step(sb, b, x, d);
      max_diff = std::max(max_diff, (sa.w - sb.w).cwiseAbs().maxCoeff());
    }
    return max_diff;
  };

  // reduction oracle: dual-domain with beta_q = 0 degenerates to RZA
  {
    AlgorithmConfig rza;
    rza.algorithm = Algorithm::RZA;
    rza.mu = 0.02;
    rza.rho0 = 2e-4;
    rza.epsilon = 0.7;
    AlgorithmConfig dd = rza;
    dd.algorithm = Algorithm::DDSAF;
    dd.epsilon = 0.0;
    dd.beta_w = 0.7;
    dd.beta_q = 0.0;
    dd.n_warm = 0;
    const double diff = run_pair(dd, rza, 2000, 32);
    report.record(diff == 0.0, "reduction oracle: beta_q = 0 reproduces RZA",
                  "2000 shared-stream steps, max |dw| = " + fmt("%.2e", diff));
  }

  // reduction oracle: rho0 = 0 degenerates to LMS
  {
    AlgorithmConfig lms;
    lms.mu = 0.02;
    AlgorithmConfig dd;
    dd.algorithm = Algorithm::DDSAF;
    dd.mu = 0.02;
    dd.rho0 = 0.0;
    dd.beta_w = 0.7;
    dd.beta_q = 2.0;
    dd.gamma_q = 0.95;
    AlgorithmConfig rza;
    rza.algorithm = Algorithm::RZA;
    rza.mu = 0.02;
    rza.rho0 = 0.0;
    rza.epsilon = 0.7;
    const double d1 = run_pair(dd, lms, 2000, 32);
    const double d2 = run_pair(rza, lms, 2000, 32);
    report.record(d1 == 0.0 && d2 == 0.0,
                  "reduction oracle: rho0 = 0 reproduces LMS",
                  "max |dw| = " + fmt("%.2e", std::max(d1, d2)));
  }

  // warm start holds the dual-domain update on the plain-LMS trajectory
  {
    AlgorithmConfig lms;
    lms.mu = 0.02;
    AlgorithmConfig dd;
    dd.algorithm = Algorithm::DDSAF;
    dd.mu = 0.02;
    dd.rho0 = 5e-3;
    dd.beta_w = 0.7;
    dd.beta_q = 2.0;
    dd.n_warm = 60;
    TrialStream sys_rng(19, 0, 0), in_rng(19, 0, 1), nz_rng(19, 0, 2);
    const SparseSystem sys = generate_sparse_system(24, {{2, 3}}, sys_rng, true);
    FilterState sl(24), sd(24);
    VecX<double> x = VecX<double>::Zero(24);
    bool inert = true, departs = false;
    for (long n = 0; n < 200; ++n) {
      tdl_shift(x, in_rng.gaussian());
      const double d = desired_output(sys, x, nz_rng.gaussian(1e-3));
      filter_step(sl, lms, x, d);
      filter_step(sd, dd, x, d);
      const bool same = (sl.w - sd.w).cwiseAbs().maxCoeff() == 0.0;
      if (n <= 60 && !same) inert = false;
      if (n > 70 && !same) departs = true;
    }
    report.record(inert && departs,
                  "warm start: attraction inert through n_warm, active after",
                  "n_warm = 60, checked over 200 steps");
  }

  // independent stepper cross-check (this is where the sgn(0) hook bites:
  // from w = 0, a corrupted reference sign turns the very first attraction
  // step nonzero while the library keeps it at zero)
  {
    AlgorithmConfig lms;
    lms.mu = 0.02;
    AlgorithmConfig rza;
    rza.algorithm = Algorithm::RZA;
    rza.mu = 0.02;
    rza.rho0 = 2e-4;
    rza.epsilon = 0.7;
    AlgorithmConfig dd;
    dd.algorithm = Algorithm::DDSAF;
    dd.mu = 0.02;
    dd.rho0 = 2e-4;
    dd.beta_w = 0.7;
    dd.beta_q = 2.0;
    dd.gamma_q = 0.95;
    dd.n_warm = 0;
    bool ok = true;
    std::ostringstream detail;
    for (const AlgorithmConfig& c : {lms, rza, dd}) {
      TrialStream sys_rng(23, 0, 0), in_rng(23, 0, 1), nz_rng(23, 0, 2);
      const long m = 24;
      const SparseSystem sys =
          generate_sparse_system(m, {{1, 2}, {12, 2}}, sys_rng, true);
      FilterState prod(m);
      refcheck::Stepper ref(m);
      VecX<double> x = VecX<double>::Zero(m);
      std::vector<double> xv(m, 0.0);
      double max_diff = 0.0;
      for (long n = 0; n < 1500; ++n) {
        tdl_shift(x, in_rng.gaussian());
        for (long i = 0; i < m; ++i) xv[i] = x[i];
        const double d = desired_output(sys, x, nz_rng.gaussian(1e-3));
        filter_step(prod, c, x, d);
        ref.step(xv, d, c);
        for (long i = 0; i < m; ++i)
          max_diff = std::max(max_diff, std::fabs(prod.w[i] - ref.w[i]));
      }
      ok = ok && max_diff < 1e-9;
      detail << fmt("%.2e", max_diff) << " ";
    }
    report.record(ok, "library matches independent reference stepper",
                  "1500 steps each, max |dw| per algorithm: " + detail.str());
  }

  std::cout << (report.failures == 0 ? "validation passed"
                                     : "validation FAILED")
            << " (" << (8 - report.failures) << "/8 checks)\n";
  return report.failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-domain sparse adaptive filter toolkit"};
  app.require_subcommand(1);

  CommonOptions run_opt, sweep_opt, theory_opt, validate_opt;
  std::vector<double> sweep_grid;
  bool corrupt = false;

  CLI::App* run_cmd =
      app.add_subcommand("run", "Monte-Carlo learning curves to curves.csv");
  add_common_flags(run_cmd, run_opt, true);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Step-size sweep to sweep.csv");
  add_common_flags(sweep_cmd, sweep_opt, true);
  sweep_cmd->add_option("--grid", sweep_grid,
                        "Step-size grid override (comma separated)")
      ->delimiter(',');

  CLI::App* theory_cmd =
      app.add_subcommand("theory", "Print stability bounds and predictions");
  add_common_flags(theory_cmd, theory_opt, true);

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Run the fast invariant suite");
  add_common_flags(validate_cmd, validate_opt, false);
  validate_cmd
      ->add_flag("--corrupt-sgn0", corrupt,
                 "Test hook: corrupt the reference stepper's sign convention")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_opt);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opt, sweep_grid);
    if (theory_cmd->parsed()) return cmd_theory(theory_opt);
    return cmd_validate(validate_opt, corrupt);
  } catch (const DivergenceError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
