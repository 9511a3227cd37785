#include "ddsaf/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddsaf {

SparseSystem generate_sparse_system(
    int m, const std::vector<std::pair<int, int>>& blocks,
    TrialStream& values_stream, bool normalize) {
  std::vector<std::pair<int, int>> sorted = blocks;
  std::sort(sorted.begin(), sorted.end());
  for (size_t b = 0; b < sorted.size(); ++b) {
    const auto [start, len] = sorted[b];
    if (start < 0 || len < 1 || start + len > m)
      throw std::invalid_argument("generate_sparse_system: block out of range");
    if (b > 0 && sorted[b - 1].first + sorted[b - 1].second > start)
      throw std::invalid_argument("generate_sparse_system: blocks overlap");
  }

  SparseSystem sys;
  sys.coefficients = Eigen::VectorXd::Zero(m);
  // Draw in the caller's block order so the sample sequence is a pure
  // function of the block list as given.
  for (const auto& [start, len] : blocks)
    for (int i = start; i < start + len; ++i)
      sys.coefficients[i] = values_stream.gaussian();
  for (const auto& [start, len] : sorted)
    for (int i = start; i < start + len; ++i) sys.active_set.push_back(i);

  if (normalize && !sys.active_set.empty()) {
    const double norm = sys.coefficients.norm();
    if (norm > 0.0) sys.coefficients /= norm;
  }
  return sys;
}

double next_input(const InputSpec& spec, double& state, TrialStream& stream) {
  switch (spec.kind) {
    case InputSpec::Kind::White:
      return stream.gaussian(spec.variance);
    case InputSpec::Kind::AR1:
      state = spec.ar_rho * state + stream.gaussian(spec.innovation_variance);
      return state;
  }
  return 0.0;
}

double next_noise(const NoiseSpec& spec, TrialStream& stream) {
  switch (spec.kind) {
    case NoiseSpec::Kind::Gaussian:
      return stream.gaussian(spec.variance);
    case NoiseSpec::Kind::BernoulliGaussian: {
      // One uniform for the spike decision, one deviate for the value, in a
      // fixed draw order so streams stay aligned across configurations.
      const bool spike = stream.uniform() < spec.spike_probability;
      const double variance = spike
                                  ? spec.spike_variance_scale *
                                        spec.background_variance
                                  : spec.background_variance;
      return spec.global_scale * stream.gaussian(variance);
    }
  }
  return 0.0;
}

double snr_to_noise_variance(double snr_db, double signal_power) {
  if (!(signal_power > 0.0))
    throw std::invalid_argument(
        "snr_to_noise_variance: signal power must be > 0");
  return signal_power / std::pow(10.0, snr_db / 10.0);
}

double desired_output(const SparseSystem& system,
                      const Eigen::VectorXd& regressor, double noise_sample) {
  if (system.coefficients.size() != regressor.size())
    throw std::invalid_argument("desired_output: length mismatch");
  return system.coefficients.dot(regressor) + noise_sample;
}

}  // namespace ddsaf
