#include "ddsaf/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace ddsaf {

namespace {

constexpr double kDivergenceSentinel = 1e10;

// Shared sparsity parameters of the experiment presets.
constexpr double kRzaEpsilon = 0.02;
constexpr double kDdBetaW = 0.02;
constexpr double kDdBetaQ = 2.0;
constexpr double kDdGammaQ = 0.97;
constexpr long kDdWarmStart = 200;
// Attraction intensities reported with the experiments.
constexpr double kRzaGamma = 0.08;
constexpr double kDdGamma = 0.28;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate(const ExperimentConfig& config) {
  if (config.system.m < 1)
    throw std::invalid_argument("config: filter length must be >= 1");
  if (config.n_trials < 1)
    throw std::invalid_argument("config: need at least one trial");
  if (config.n_iters < config.steady_state_window ||
      config.steady_state_window < 1)
    throw std::invalid_argument(
        "config: need n_iters >= steady_state_window >= 1");
  if (config.algorithms.empty())
    throw std::invalid_argument("config: no algorithms given");
  for (const auto& entry : config.algorithms) {
    const auto& a = entry.config;
    if (!(a.mu > 0.0) || a.rho0 < 0.0 || a.epsilon < 0.0 || a.beta_w < 0.0 ||
        a.beta_q < 0.0 || !(a.gamma_q > 0.0 && a.gamma_q < 1.0) ||
        a.n_warm < 0)
      throw std::invalid_argument("config: invalid parameters for " +
                                  entry.name);
  }
}

// Sample variance of the clean output w_o^T x over a dedicated pre-run of
// the input process; used to anchor the SNR under correlated input.
double measured_signal_power(const ExperimentConfig& config,
                             const SparseSystem& sys, long trial_index) {
  TrialStream probe(config.master_seed, trial_index, TrialStream::kPowerProbe);
  double state = 0.0;
  for (int i = 0; i < 1000; ++i) next_input(config.input, state, probe);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(config.system.m);
  const long n_samples = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    tdl_shift(x, next_input(config.input, state, probe));
    const double y = sys.coefficients.dot(x);
    sum += y;
    sum_sq += y * y;
  }
  const double mean = sum / n_samples;
  return sum_sq / n_samples - mean * mean;
}

NoiseSpec resolve_noise(const ExperimentConfig& config,
                        const SparseSystem& sys, long trial_index) {
  if (!config.noise_from_snr) return config.noise;
  double power;
  if (config.input.kind == InputSpec::Kind::White)
    power = config.input.variance * sys.coefficients.squaredNorm();
  else
    power = measured_signal_power(config, sys, trial_index);
  return NoiseSpec::gaussian(snr_to_noise_variance(config.snr_db, power));
}

}  // namespace

DivergenceError::DivergenceError(std::string algorithm_, long iteration_,
                                 long trial_)
    : std::runtime_error("divergence in " + algorithm_ + " at iteration " +
                         std::to_string(iteration_) + " (trial " +
                         std::to_string(trial_) + ")"),
      algorithm(std::move(algorithm_)),
      iteration(iteration_),
      trial(trial_) {}

std::string fingerprint(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "m=" << config.system.m << ";blocks=";
  for (const auto& [start, len] : config.system.blocks)
    out << start << ":" << len << ",";
  out << ";normalize=" << config.system.normalize;
  out << ";input=" << static_cast<int>(config.input.kind) << ","
      << format_double(config.input.variance) << ","
      << format_double(config.input.ar_rho) << ","
      << format_double(config.input.innovation_variance);
  out << ";noise=" << static_cast<int>(config.noise.kind) << ","
      << format_double(config.noise.variance) << ","
      << format_double(config.noise.spike_probability) << ","
      << format_double(config.noise.background_variance) << ","
      << format_double(config.noise.spike_variance_scale) << ","
      << format_double(config.noise.global_scale);
  out << ";noise_from_snr=" << config.noise_from_snr
      << ";snr_db=" << format_double(config.snr_db);
  out << ";n_iters=" << config.n_iters << ";n_trials=" << config.n_trials
      << ";master_seed=" << config.master_seed
      << ";window=" << config.steady_state_window
      << ";overlay=" << config.theory_overlay;
  for (const auto& entry : config.algorithms) {
    const auto& a = entry.config;
    out << ";alg=" << entry.name << "," << static_cast<int>(a.algorithm) << ","
        << format_double(a.mu) << "," << format_double(a.rho0) << ","
        << format_double(a.epsilon) << "," << format_double(a.beta_w) << ","
        << format_double(a.beta_q) << "," << format_double(a.gamma_q) << ","
        << a.n_warm << "," << format_double(entry.rho0_rule.coeff) << ","
        << format_double(entry.rho0_rule.exponent);
  }
  // FNV-1a, 64-bit
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : out.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

Eigen::VectorXd run_trial(const ExperimentConfig& config,
                          const AlgorithmEntry& algorithm, long trial_index,
                          Eigen::MatrixXd* s_trace_active) {
  validate(config);
  const int m = config.system.m;

  TrialStream system_stream(config.master_seed, trial_index,
                            TrialStream::kSystem);
  const SparseSystem sys = generate_sparse_system(
      m, config.system.blocks, system_stream, config.system.normalize);
  const NoiseSpec noise = resolve_noise(config, sys, trial_index);

  TrialStream input_stream(config.master_seed, trial_index,
                           TrialStream::kInput);
  TrialStream noise_stream(config.master_seed, trial_index,
                           TrialStream::kNoise);

  const long k = static_cast<long>(sys.active_set.size());
  if (s_trace_active) s_trace_active->resize(config.n_iters, k);
  Eigen::VectorXd s_buf;
  Eigen::VectorXd* s_ptr = s_trace_active ? &s_buf : nullptr;

  FilterState state(m);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  double input_state = 0.0;
  Eigen::VectorXd sq(config.n_iters);

  for (long n = 0; n < config.n_iters; ++n) {
    sq[n] = (sys.coefficients - state.w).squaredNorm();
    tdl_shift(x, next_input(config.input, input_state, input_stream));
    const double v = next_noise(noise, noise_stream);
    const double d = desired_output(sys, x, v);
    filter_step(state, algorithm.config, x, d, s_ptr);
    if (s_trace_active)
      for (long j = 0; j < k; ++j)
        (*s_trace_active)(n, j) = s_buf[sys.active_set[j]];
    if (state.w.cwiseAbs().maxCoeff() > kDivergenceSentinel)
      throw DivergenceError(algorithm.name, n, trial_index);
  }
  return sq;
}

std::vector<MonteCarloResult> run_monte_carlo(const ExperimentConfig& config) {
  validate(config);
  const std::string fp = fingerprint(config);
  const size_t n_algs = config.algorithms.size();
  const long n_trials = config.n_trials;

  std::vector<MonteCarloResult> results(n_algs);
  for (size_t a = 0; a < n_algs; ++a)
    results[a].sq_dev.resize(config.n_iters, n_trials);

  // Each trial owns a fixed column slot, so scheduling cannot reorder the
  // arithmetic; failures are re-raised in trial order for determinism.
  std::vector<std::exception_ptr> failures(n_trials);
  auto work = [&](long t) {
    try {
      for (size_t a = 0; a < n_algs; ++a)
        results[a].sq_dev.col(t) = run_trial(config, config.algorithms[a], t);
    } catch (...) {
      failures[t] = std::current_exception();
    }
  };

  const unsigned hw = std::thread::hardware_concurrency();
  const long n_workers =
      std::min<long>(n_trials, hw == 0 ? 1 : static_cast<long>(hw));
  if (n_workers <= 1) {
    for (long t = 0; t < n_trials; ++t) work(t);
  } else {
    std::vector<std::thread> pool;
    for (long w = 0; w < n_workers; ++w)
      pool.emplace_back([&, w] {
        for (long t = w; t < n_trials; t += n_workers) work(t);
      });
    for (auto& th : pool) th.join();
  }
  for (long t = 0; t < n_trials; ++t)
    if (failures[t]) std::rethrow_exception(failures[t]);

  for (size_t a = 0; a < n_algs; ++a) {
    auto& r = results[a];
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(config.n_iters);
    for (long t = 0; t < n_trials; ++t) acc += r.sq_dev.col(t);
    r.curve.algorithm = config.algorithms[a].name;
    r.curve.n_trials = n_trials;
    r.curve.fingerprint = fp;
    r.curve.msd_db.resize(config.n_iters);
    for (long n = 0; n < config.n_iters; ++n)
      r.curve.msd_db[n] = to_db(acc[n] / static_cast<double>(n_trials));
  }
  return results;
}

Eigen::VectorXd per_trial_tail_db(const MonteCarloResult& result, long window) {
  const long n = result.sq_dev.rows();
  if (window < 1 || window > n)
    throw std::invalid_argument("per_trial_tail_db: bad window");
  const long t_count = result.sq_dev.cols();
  Eigen::VectorXd tails(t_count);
  for (long t = 0; t < t_count; ++t)
    tails[t] = to_db(result.sq_dev.col(t).tail(window).mean());
  return tails;
}

SteadyStateEstimate estimate_steady_state(const MonteCarloResult& result,
                                          long window) {
  const long n = result.sq_dev.rows();
  if (window < 1 || window > n)
    throw std::invalid_argument("estimate_steady_state: bad window");
  const long t_count = result.sq_dev.cols();

  double overall = 0.0;
  for (long t = 0; t < t_count; ++t)
    overall += result.sq_dev.col(t).tail(window).mean();
  overall /= static_cast<double>(t_count);

  const Eigen::VectorXd tails_db = per_trial_tail_db(result, window);
  double std_db = 0.0;
  if (t_count > 1) {
    const double mean_db = tails_db.mean();
    std_db = std::sqrt((tails_db.array() - mean_db).square().sum() /
                       static_cast<double>(t_count - 1));
  }
  return {to_db(overall), n - window, n, std_db};
}

SweepTable step_size_sweep(const ExperimentConfig& base_config,
                           const std::vector<double>& mu_grid) {
  validate(base_config);
  SweepTable table;
  table.fingerprint = fingerprint(base_config);
  for (const double mu : mu_grid) {
    for (const auto& entry : base_config.algorithms) {
      ExperimentConfig point = base_config;
      AlgorithmEntry resolved = entry;
      resolved.config.mu = mu;
      resolved.config.rho0 = entry.rho0_rule(mu);
      point.algorithms = {resolved};
      SweepRow row;
      row.mu = mu;
      row.algorithm = entry.name;
      try {
        const auto results = run_monte_carlo(point);
        const auto ss = estimate_steady_state(
            results[0], base_config.steady_state_window);
        row.msd_ss_db = ss.msd_db;
        row.std_db = ss.std_db;
      } catch (const DivergenceError&) {
        row.msd_ss_db = std::nan("");
        row.std_db = std::nan("");
        row.diverged = true;
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

std::vector<double> default_sweep_grid() {
  std::vector<double> grid(10);
  for (int i = 0; i < 10; ++i)
    grid[i] = 0.0005 + (0.010 - 0.0005) * i / 9.0;
  return grid;
}

ExperimentConfig preset(int id) {
  if (id < 1 || id > 5)
    throw std::invalid_argument("preset: unknown experiment id " +
                                std::to_string(id));

  ExperimentConfig c;
  c.system.m = 128;
  c.system.blocks = {{20, 4}, {70, 4}};
  c.system.normalize = true;
  c.input = InputSpec::white(1.0);
  c.noise_from_snr = true;
  c.snr_db = 35.0;
  c.n_trials = 50;
  c.master_seed = kDefaultMasterSeed;

  // Zero-attraction strengths follow rho0 = coeff * mu^p per algorithm so
  // the sweep preset can re-derive them per grid point. Experiments 1-4 use
  // the damped mapping coeff = 0.1*gamma with p = 1.5, which keeps the
  // attraction bias well below the noise floor at every step size in the
  // sweep range; experiment 5 uses the plain proportional mapping.
  const bool proportional = id == 5;
  const Rho0Rule rza_rule = proportional ? Rho0Rule{kRzaGamma, 1.0}
                                         : Rho0Rule{0.1 * kRzaGamma, 1.5};
  const Rho0Rule dd_rule = proportional ? Rho0Rule{kDdGamma, 1.0}
                                        : Rho0Rule{0.1 * kDdGamma, 1.5};

  double mu_lms = 0.0, mu_rza = 0.0, mu_dd = 0.0;
  switch (id) {
    case 1:
      c.n_iters = 2000;
      c.theory_overlay = true;
      mu_lms = 0.006;
      mu_rza = 0.008;
      mu_dd = 0.01;
      break;
    case 2:
      c.n_iters = 4000;
      mu_lms = mu_rza = mu_dd = 0.005;  // sweeps override per grid point
      break;
    case 3:
      c.n_iters = 4000;
      mu_lms = mu_rza = mu_dd = 0.0026;
      break;
    case 4:
      c.input = InputSpec::ar1(0.85, 0.7);
      c.snr_db = 25.0;
      c.n_iters = 8000;
      mu_lms = mu_rza = mu_dd = 0.002;
      break;
    case 5:
      // Impulsive mixture with the background rescaled to the 35 dB noise
      // level of the white-input experiments (spike variance 100x that).
      c.noise_from_snr = false;
      c.noise =
          NoiseSpec::bernoulli_gaussian(0.2, std::pow(10.0, -3.5), 100.0, 1.0);
      c.n_iters = 2000;
      mu_lms = 0.0039;
      mu_rza = 0.0042;
      mu_dd = 0.005;
      break;
  }
  c.steady_state_window = c.n_iters / 4;

  AlgorithmEntry lms;
  lms.name = "LMS";
  lms.config.algorithm = Algorithm::LMS;
  lms.config.mu = mu_lms;

  AlgorithmEntry rza;
  rza.name = "RZA";
  rza.config.algorithm = Algorithm::RZA;
  rza.config.mu = mu_rza;
  rza.config.epsilon = kRzaEpsilon;
  rza.config.rho0 = rza_rule(mu_rza);
  rza.rho0_rule = rza_rule;

  AlgorithmEntry dd;
  dd.name = "DDSAF";
  dd.config.algorithm = Algorithm::DDSAF;
  dd.config.mu = mu_dd;
  dd.config.beta_w = kDdBetaW;
  dd.config.beta_q = kDdBetaQ;
  dd.config.gamma_q = kDdGammaQ;
  dd.config.n_warm = kDdWarmStart;
  dd.config.rho0 = dd_rule(mu_dd);
  dd.rho0_rule = dd_rule;

  c.algorithms = {lms, rza, dd};
  return c;
}

TheoryInputs theory_inputs(const ExperimentConfig& config,
                           const AlgorithmEntry& algorithm, SbarMode mode,
                           long pilot_trial) {
  if (config.input.kind != InputSpec::Kind::White)
    throw std::domain_error(
        "theory_inputs: closed forms assume white input");
  validate(config);

  TrialStream system_stream(config.master_seed, pilot_trial,
                            TrialStream::kSystem);
  const SparseSystem sys =
      generate_sparse_system(config.system.m, config.system.blocks,
                             system_stream, config.system.normalize);

  TheoryInputs in;
  in.m = config.system.m;
  in.k = static_cast<long>(sys.active_set.size());
  in.sigma_x2 = config.input.variance;
  in.mu = algorithm.config.mu;
  in.rho0 = algorithm.config.rho0;

  if (config.noise_from_snr) {
    in.sigma_v2 = snr_to_noise_variance(
        config.snr_db, in.sigma_x2 * sys.coefficients.squaredNorm());
  } else if (config.noise.kind == NoiseSpec::Kind::Gaussian) {
    in.sigma_v2 = config.noise.variance;
  } else {
    const auto& nz = config.noise;
    in.sigma_v2 = nz.global_scale * nz.global_scale *
                  ((1.0 - nz.spike_probability) * nz.background_variance +
                   nz.spike_probability * nz.spike_variance_scale *
                       nz.background_variance);
  }

  if (algorithm.config.algorithm == Algorithm::LMS) {
    in.sbar_active = Eigen::VectorXd::Zero(in.k);
  } else if (mode == SbarMode::Analytic) {
    const double shape = algorithm.config.algorithm == Algorithm::RZA
                             ? algorithm.config.epsilon
                             : algorithm.config.beta_w;
    in.sbar_active = analytic_sbar(sys.coefficients, shape);
  } else {
    Eigen::MatrixXd trace;
    run_trial(config, algorithm, pilot_trial, &trace);
    in.sbar_active =
        estimate_sbar_from_tail(trace, config.steady_state_window);
  }
  return in;
}

std::vector<MsdCurve> theory_overlay_curves(const ExperimentConfig& config,
                                            SbarMode mode) {
  std::vector<MsdCurve> curves;
  const std::string fp = fingerprint(config);
  for (const auto& entry : config.algorithms) {
    if (entry.config.algorithm != Algorithm::DDSAF) continue;
    const TheoryInputs in = theory_inputs(config, entry, mode);
    TrialStream system_stream(config.master_seed, 0, TrialStream::kSystem);
    const SparseSystem sys =
        generate_sparse_system(config.system.m, config.system.blocks,
                               system_stream, config.system.normalize);
    const Eigen::VectorXd linear = msd_learning_curve(
        in, sys.coefficients.squaredNorm(), config.n_iters,
        entry.config.n_warm);
    MsdCurve curve;
    curve.algorithm = entry.name;
    curve.n_trials = 0;
    curve.fingerprint = fp;
    curve.msd_db.resize(config.n_iters);
    for (long n = 0; n < config.n_iters; ++n)
      curve.msd_db[n] = to_db(linear[n]);
    curves.push_back(std::move(curve));
  }
  return curves;
}

void write_curves_csv(const std::string& path,
                      const std::vector<MsdCurve>& sim,
                      const std::vector<MsdCurve>& theory,
                      const std::string& fingerprint) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open " + path);
  out << "# fingerprint=" << fingerprint << "\n";
  out << "iteration,algorithm,msd_db,source\n";
  auto dump = [&](const MsdCurve& curve, const char* source) {
    for (long n = 0; n < curve.msd_db.size(); ++n)
      out << n << "," << curve.algorithm << ","
          << format_double(curve.msd_db[n]) << "," << source << "\n";
  };
  for (const auto& curve : sim) dump(curve, "sim");
  for (const auto& curve : theory) dump(curve, "theory");
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream in(line);
  while (std::getline(in, token, sep)) parts.push_back(token);
  return parts;
}

double parse_double(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw std::invalid_argument("bad number: '" + text + "'");
  return v;
}

long parse_long(const std::string& text) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0')
    throw std::invalid_argument("bad integer: '" + text + "'");
  return v;
}

std::string read_fingerprint_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# fingerprint=", 0) != 0)
    throw std::invalid_argument("missing fingerprint header");
  return line.substr(14);
}

}  // namespace

CurvesFile read_curves_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  CurvesFile file;
  file.fingerprint = read_fingerprint_header(in);
  std::string line;
  if (!std::getline(in, line) || line != "iteration,algorithm,msd_db,source")
    throw std::invalid_argument("bad curves header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 4)
      throw std::invalid_argument("bad curves row: '" + line + "'");
    file.rows.push_back(
        {parse_long(parts[0]), parts[1], parse_double(parts[2]), parts[3]});
  }
  return file;
}

void write_sweep_csv(const std::string& path, const SweepTable& table) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open " + path);
  out << "# fingerprint=" << table.fingerprint << "\n";
  out << "mu,algorithm,msd_ss_db,std_db,diverged\n";
  for (const auto& row : table.rows)
    out << format_double(row.mu) << "," << row.algorithm << ","
        << format_double(row.msd_ss_db) << "," << format_double(row.std_db)
        << "," << (row.diverged ? 1 : 0) << "\n";
}

SweepTable read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  SweepTable table;
  table.fingerprint = read_fingerprint_header(in);
  std::string line;
  if (!std::getline(in, line) || line != "mu,algorithm,msd_ss_db,std_db,diverged")
    throw std::invalid_argument("bad sweep header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 5)
      throw std::invalid_argument("bad sweep row: '" + line + "'");
    table.rows.push_back({parse_double(parts[0]), parts[1],
                          parse_double(parts[2]), parse_double(parts[3]),
                          parse_long(parts[4]) != 0});
  }
  return table;
}

namespace {

std::string trim(const std::string& text) {
  size_t begin = 0, end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin])))
    ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1])))
    --end;
  return text.substr(begin, end - begin);
}

std::string lower(std::string text) {
  for (char& c : text) c = static_cast<char>(std::tolower(c));
  return text;
}

bool parse_bool(const std::string& text) {
  const std::string t = lower(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("bad boolean: '" + text + "'");
}

std::vector<std::pair<int, int>> parse_blocks(const std::string& text) {
  std::vector<std::pair<int, int>> blocks;
  for (const auto& piece : split(text, ',')) {
    const auto parts = split(piece, ':');
    if (parts.size() != 2)
      throw std::invalid_argument("bad block spec: '" + piece + "'");
    blocks.emplace_back(static_cast<int>(parse_long(trim(parts[0]))),
                        static_cast<int>(parse_long(trim(parts[1]))));
  }
  return blocks;
}

void apply_top_level(ExperimentConfig& cfg, const std::string& key,
                     const std::string& value) {
  if (key == "m") cfg.system.m = static_cast<int>(parse_long(value));
  else if (key == "blocks") cfg.system.blocks = parse_blocks(value);
  else if (key == "normalize") cfg.system.normalize = parse_bool(value);
  else if (key == "input") {
    const std::string v = lower(value);
    if (v == "white") cfg.input.kind = InputSpec::Kind::White;
    else if (v == "ar1") cfg.input.kind = InputSpec::Kind::AR1;
    else throw std::invalid_argument("bad input kind: '" + value + "'");
  } else if (key == "sigma_x2") cfg.input.variance = parse_double(value);
  else if (key == "ar_rho") cfg.input.ar_rho = parse_double(value);
  else if (key == "ar_innovation")
    cfg.input.innovation_variance = parse_double(value);
  else if (key == "noise") {
    const std::string v = lower(value);
    if (v == "snr") cfg.noise_from_snr = true;
    else if (v == "gaussian") {
      cfg.noise_from_snr = false;
      cfg.noise.kind = NoiseSpec::Kind::Gaussian;
    } else if (v == "bernoulli_gaussian") {
      cfg.noise_from_snr = false;
      cfg.noise.kind = NoiseSpec::Kind::BernoulliGaussian;
    } else throw std::invalid_argument("bad noise kind: '" + value + "'");
  } else if (key == "snr_db") cfg.snr_db = parse_double(value);
  else if (key == "noise_variance") cfg.noise.variance = parse_double(value);
  else if (key == "spike_probability")
    cfg.noise.spike_probability = parse_double(value);
  else if (key == "background_variance")
    cfg.noise.background_variance = parse_double(value);
  else if (key == "spike_variance_scale")
    cfg.noise.spike_variance_scale = parse_double(value);
  else if (key == "global_scale") cfg.noise.global_scale = parse_double(value);
  else if (key == "n_iters") cfg.n_iters = parse_long(value);
  else if (key == "n_trials") cfg.n_trials = parse_long(value);
  else if (key == "master_seed")
    cfg.master_seed = static_cast<std::uint64_t>(
        std::strtoull(value.c_str(), nullptr, 10));
  else if (key == "steady_state_window")
    cfg.steady_state_window = parse_long(value);
  else if (key == "theory_overlay") cfg.theory_overlay = parse_bool(value);
  else throw std::invalid_argument("unknown key: '" + key + "'");
}

void apply_algorithm(AlgorithmEntry& entry, const std::string& key,
                     const std::string& value) {
  auto& a = entry.config;
  if (key == "algorithm") {
    const std::string v = lower(value);
    if (v == "lms") a.algorithm = Algorithm::LMS;
    else if (v == "rza") a.algorithm = Algorithm::RZA;
    else if (v == "ddsaf") a.algorithm = Algorithm::DDSAF;
    else throw std::invalid_argument("bad algorithm: '" + value + "'");
  } else if (key == "mu") a.mu = parse_double(value);
  else if (key == "rho0") a.rho0 = parse_double(value);
  else if (key == "epsilon") a.epsilon = parse_double(value);
  else if (key == "beta_w") a.beta_w = parse_double(value);
  else if (key == "beta_q") a.beta_q = parse_double(value);
  else if (key == "gamma_q") a.gamma_q = parse_double(value);
  else if (key == "n_warm") a.n_warm = parse_long(value);
  else if (key == "rho0_coeff") entry.rho0_rule.coeff = parse_double(value);
  else if (key == "rho0_exponent")
    entry.rho0_rule.exponent = parse_double(value);
  else throw std::invalid_argument("unknown algorithm key: '" + key + "'");
}

}  // namespace

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);

  ExperimentConfig cfg;
  cfg.algorithms.clear();
  AlgorithmEntry* current = nullptr;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      if (line.front() == '[' && line.back() == ']') {
        AlgorithmEntry entry;
        entry.name = trim(line.substr(1, line.size() - 2));
        if (entry.name.empty())
          throw std::invalid_argument("empty section name");
        cfg.algorithms.push_back(entry);
        current = &cfg.algorithms.back();
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("expected 'key = value'");
      const std::string key = lower(trim(line.substr(0, eq)));
      const std::string value = trim(line.substr(eq + 1));
      if (value.empty()) throw std::invalid_argument("empty value");
      if (current) apply_algorithm(*current, key, value);
      else apply_top_level(cfg, key, value);
    } catch (const std::invalid_argument& err) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " +
                                  err.what());
    }
  }
  if (cfg.algorithms.empty())
    throw std::invalid_argument(path + ": no algorithm sections");
  return cfg;
}

}  // namespace ddsaf
