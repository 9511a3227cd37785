#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "ddsaf/trial_stream.hpp"

namespace ddsaf {

// Ground-truth sparse impulse response w_o together with its active support.
struct SparseSystem {
  Eigen::VectorXd coefficients;
  std::vector<int> active_set;  // sorted indices of nonzero taps
};

// Input process: white Gaussian or first-order autoregressive.
struct InputSpec {
  enum class Kind { White, AR1 };
  Kind kind = Kind::White;
  double variance = 1.0;             // White: sample variance
  double ar_rho = 0.0;               // AR1: correlation coefficient, |rho| < 1
  double innovation_variance = 1.0;  // AR1: variance of the driving noise

  static InputSpec white(double sigma_x2) {
    InputSpec s;
    s.kind = Kind::White;
    s.variance = sigma_x2;
    return s;
  }
  static InputSpec ar1(double rho, double innovation_var) {
    InputSpec s;
    s.kind = Kind::AR1;
    s.ar_rho = rho;
    s.innovation_variance = innovation_var;
    return s;
  }
};

// Observation noise: plain Gaussian or a Bernoulli-Gaussian impulsive mixture
// (background component, plus with probability spike_probability a component
// of spike_variance_scale times the background variance). Samples are scaled
// by global_scale after the draw.
struct NoiseSpec {
  enum class Kind { Gaussian, BernoulliGaussian };
  Kind kind = Kind::Gaussian;
  double variance = 1.0;              // Gaussian
  double spike_probability = 0.0;     // mixture
  double background_variance = 1.0;   // mixture
  double spike_variance_scale = 1.0;  // mixture ("kappa")
  double global_scale = 1.0;

  static NoiseSpec gaussian(double sigma_v2) {
    NoiseSpec s;
    s.kind = Kind::Gaussian;
    s.variance = sigma_v2;
    return s;
  }
  static NoiseSpec bernoulli_gaussian(double spike_prob, double background_var,
                                      double kappa, double scale = 1.0) {
    NoiseSpec s;
    s.kind = Kind::BernoulliGaussian;
    s.spike_probability = spike_prob;
    s.background_variance = background_var;
    s.spike_variance_scale = kappa;
    s.global_scale = scale;
    return s;
  }
};

// Draws the nonzero taps standard-normal on the given index blocks
// (start, length); optionally rescales to unit Euclidean norm.
// Throws std::invalid_argument on overlapping or out-of-range blocks.
SparseSystem generate_sparse_system(
    int m, const std::vector<std::pair<int, int>>& blocks,
    TrialStream& values_stream, bool normalize);

// One scalar input sample. `state` carries x(n-1) for the AR1 recursion
// (start it at 0) and is updated in place; it is ignored for white input.
double next_input(const InputSpec& spec, double& state, TrialStream& stream);

// One scalar noise sample.
double next_noise(const NoiseSpec& spec, TrialStream& stream);

// Noise variance that realises the requested SNR against the given clean
// signal power. Throws std::invalid_argument for non-positive power.
double snr_to_noise_variance(double snr_db, double signal_power);

// d(n) = w_o^T x(n) + v(n). Throws std::invalid_argument on length mismatch.
double desired_output(const SparseSystem& system,
                      const Eigen::VectorXd& regressor, double noise_sample);

// Tapped-delay-line shift: drops the oldest sample, inserts the newest at
// index 0, so regressor = [x(n), x(n-1), ..., x(n-M+1)].
inline void tdl_shift(Eigen::VectorXd& regressor, double sample) {
  for (Eigen::Index i = regressor.size() - 1; i > 0; --i)
    regressor[i] = regressor[i - 1];
  regressor[0] = sample;
}

}  // namespace ddsaf
