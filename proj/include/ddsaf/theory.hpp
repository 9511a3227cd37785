#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "ddsaf/filters.hpp"

namespace ddsaf {

// Scalar inputs of the closed-form analysis, plus the expected steady-state
// penalty weights of the active taps (one entry per active index, ascending).
template <typename Scalar>
struct TheoryInputsT {
  long m = 0;           // filter length
  long k = 0;           // active tap count
  Scalar sigma_x2 = Scalar(1);
  Scalar sigma_v2 = Scalar(0);
  Scalar mu = Scalar(0);
  Scalar rho0 = Scalar(0);
  VecX<Scalar> sbar_active;  // length k, entries in (0, 1]
};
using TheoryInputs = TheoryInputsT<double>;

template <typename Scalar>
struct MsStabilityBoundT {
  Scalar exact;    // 2 / ((M+1) sigma_x^2), used for stability assertions
  Scalar large_m;  // 2 / (M sigma_x^2)
};
using MsStabilityBound = MsStabilityBoundT<double>;

// Largest step size keeping the mean weight recursion stable: 2 / sigma_x^2.
template <typename Scalar>
Scalar mean_stability_bound(Scalar sigma_x2) {
  if (!(sigma_x2 > Scalar(0)))
    throw std::invalid_argument("mean_stability_bound: sigma_x2 must be > 0");
  return Scalar(2) / sigma_x2;
}

// Mean-square stability bound, exact and large-M forms.
template <typename Scalar>
MsStabilityBoundT<Scalar> ms_stability_bound(long m, Scalar sigma_x2) {
  if (m < 1 || !(sigma_x2 > Scalar(0)))
    throw std::invalid_argument("ms_stability_bound: need m >= 1, sigma_x2 > 0");
  return {Scalar(2) / (Scalar(m + 1) * sigma_x2),
          Scalar(2) / (Scalar(m) * sigma_x2)};
}

// Expected coefficient error E{w_o - w(n)} under a caller-supplied
// zero-attraction direction sequence pi(k) (commonly the steady-state
// approximation sbar_i * sgn(w_o_i) on the active set). Evaluates
//   E(n) = lambda^n w_o + rho0 * sum_{k=n_warm}^{n-1} lambda^(n-1-k) pi(k)
// with lambda = 1 - mu*sigma_x2, by running the recursion n steps.
template <typename Scalar, typename PiFn,
          typename = std::enable_if_t<
              !std::is_convertible_v<PiFn, VecX<Scalar>>>>
VecX<Scalar> mean_error_solution(const VecX<Scalar>& w_o, Scalar mu,
                                 Scalar sigma_x2, Scalar rho0, long n_warm,
                                 PiFn&& pi, long n) {
  using std::abs;
  const Scalar lambda = Scalar(1) - mu * sigma_x2;
  if (!(abs(lambda) < Scalar(1)))
    throw std::domain_error("mean_error_solution: |1 - mu*sigma_x2| >= 1");
  VecX<Scalar> err = w_o;
  for (long k = 0; k < n; ++k) {
    err *= lambda;
    if (k >= n_warm) err += rho0 * pi(k);
  }
  return err;
}

template <typename Scalar>
VecX<Scalar> mean_error_solution(const VecX<Scalar>& w_o, Scalar mu,
                                 Scalar sigma_x2, Scalar rho0, long n_warm,
                                 const VecX<Scalar>& pi_steady, long n) {
  return mean_error_solution(
      w_o, mu, sigma_x2, rho0, n_warm,
      [&](long) -> const VecX<Scalar>& { return pi_steady; }, n);
}

// Steady-state per-tap bias of the mean estimate: on the support of w_o,
// rho0 * sbar_i * sgn(w_o_i) / (mu * sigma_x2); zero elsewhere. sbar_active
// pairs with the nonzero entries of w_o in ascending index order.
template <typename Scalar>
VecX<Scalar> per_tap_bias(const VecX<Scalar>& w_o,
                          const VecX<Scalar>& sbar_active, Scalar rho0,
                          Scalar mu, Scalar sigma_x2) {
  VecX<Scalar> bias = VecX<Scalar>::Zero(w_o.size());
  Eigen::Index next = 0;
  for (Eigen::Index i = 0; i < w_o.size(); ++i) {
    if (w_o[i] == Scalar(0)) continue;
    if (next >= sbar_active.size())
      throw std::invalid_argument(
          "per_tap_bias: sbar_active shorter than the support of w_o");
    bias[i] = rho0 * sbar_active[next] * sgn(w_o[i]) / (mu * sigma_x2);
    ++next;
  }
  if (next != sbar_active.size())
    throw std::invalid_argument(
        "per_tap_bias: sbar_active longer than the support of w_o");
  return bias;
}

// Predicted MSD trajectory from the scalar recursion
//   MSD(n+1) = alpha*MSD(n) + mu^2 M sigma_v^2 sigma_x^2
//              + 2 rho(n) (1 - mu sigma_x2) b,
// alpha = 1 - 2 mu sigma_x2 + mu^2 sigma_x2^2 (1+M), with the cross term
// frozen at its steady-state value b = (rho0 / (mu sigma_x2)) * sum sbar_i^2
// and gated by the warm start. Entry n of the result is MSD(n); entry 0 is
// msd_0.
template <typename Scalar>
VecX<Scalar> msd_learning_curve(const TheoryInputsT<Scalar>& in, Scalar msd_0,
                                long n_iters, long n_warm = 0) {
  const Scalar sx2 = in.sigma_x2;
  const Scalar alpha = Scalar(1) - Scalar(2) * in.mu * sx2 +
                       in.mu * in.mu * sx2 * sx2 * Scalar(1 + in.m);
  if (!(alpha < Scalar(1)))
    throw std::domain_error("msd_learning_curve: contraction factor >= 1");
  const Scalar drive =
      in.mu * in.mu * Scalar(in.m) * in.sigma_v2 * sx2;
  const Scalar b = in.mu > Scalar(0)
                       ? in.rho0 / (in.mu * sx2) * in.sbar_active.squaredNorm()
                       : Scalar(0);
  VecX<Scalar> msd(n_iters);
  Scalar value = msd_0;
  for (long n = 0; n < n_iters; ++n) {
    msd[n] = value;
    const Scalar rho = warm_start_rho(n, in.rho0, n_warm);
    value = alpha * value + drive +
            Scalar(2) * rho * (Scalar(1) - in.mu * sx2) * b;
  }
  return msd;
}

// Steady-state MSD (linear scale). Exact fixed-point form:
//   mu M sigma_v^2 / (2 - mu sigma_x2 (1+M))
//   + 2 rho0^2 (1 - mu sigma_x2) / (mu^2 sigma_x2^2 [2 - mu sigma_x2 (1+M)])
//     * sum sbar_i^2
// Approximate small-step form: mu M sigma_v^2 / 2
//   + (rho0^2 / (mu^2 sigma_x2^2)) * sum sbar_i^2.
template <typename Scalar>
Scalar steady_state_msd(const TheoryInputsT<Scalar>& in, bool approximate) {
  const Scalar sx2 = in.sigma_x2;
  const Scalar denom = Scalar(2) - in.mu * sx2 * Scalar(1 + in.m);
  if (!(denom > Scalar(0)))
    throw std::domain_error("steady_state_msd: mean-square unstable step size");
  const Scalar sbar_sq = in.sbar_active.squaredNorm();
  const Scalar mu2sx4 = in.mu * in.mu * sx2 * sx2;
  if (approximate) {
    return in.mu * Scalar(in.m) * in.sigma_v2 / Scalar(2) +
           in.rho0 * in.rho0 / mu2sx4 * sbar_sq;
  }
  return in.mu * Scalar(in.m) * in.sigma_v2 / denom +
         Scalar(2) * in.rho0 * in.rho0 * (Scalar(1) - in.mu * sx2) /
             (mu2sx4 * denom) * sbar_sq;
}

// Predicted steady-state improvement of the dual-domain weights over the
// coefficient-only weights at shared operating point:
//   (rho0^2 / (mu^2 sigma_x2^2)) * sum_i (sbar_rza_i^2 - sbar_dd_i^2).
template <typename Scalar>
Scalar delta_msd(const TheoryInputsT<Scalar>& rza,
                 const TheoryInputsT<Scalar>& dd) {
  if (rza.mu != dd.mu || rza.sigma_x2 != dd.sigma_x2 ||
      rza.rho0 != dd.rho0 || rza.m != dd.m || rza.sigma_v2 != dd.sigma_v2)
    throw std::invalid_argument(
        "delta_msd: operating points differ in a shared parameter");
  const Scalar mu2sx4 = rza.mu * rza.mu * rza.sigma_x2 * rza.sigma_x2;
  return rza.rho0 * rza.rho0 / mu2sx4 *
         (rza.sbar_active.squaredNorm() - dd.sbar_active.squaredNorm());
}

// Plug-in estimate of the steady-state penalty weights: per-tap mean of the
// final tail_window rows of a pilot trace (rows = iterations, columns =
// active taps).
template <typename Scalar>
VecX<Scalar> estimate_sbar_from_tail(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& weight_trace,
    long tail_window) {
  if (tail_window < 1 || tail_window > weight_trace.rows())
    throw std::invalid_argument(
        "estimate_sbar_from_tail: window exceeds the trace");
  return weight_trace.bottomRows(tail_window).colwise().mean().transpose();
}

// Analytic fallback for the steady-state penalty weights: the
// coefficient-domain weight evaluated at the true coefficients,
// 1 / (1 + beta_w |w_o_i|) over the support of w_o.
template <typename Scalar>
VecX<Scalar> analytic_sbar(const VecX<Scalar>& w_o, Scalar beta_w) {
  std::vector<Scalar> vals;
  for (Eigen::Index i = 0; i < w_o.size(); ++i)
    if (w_o[i] != Scalar(0)) vals.push_back(rza_weight(w_o[i], beta_w));
  return Eigen::Map<const VecX<Scalar>>(vals.data(),
                                        static_cast<Eigen::Index>(vals.size()));
}

}  // namespace ddsaf
