#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ddsaf {

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Algorithm { LMS, RZA, DDSAF };

// Per-algorithm parameters. LMS reads only mu; RZA reads mu, rho0, epsilon;
// DDSAF reads mu, rho0, beta_w, beta_q, gamma_q, n_warm.
template <typename Scalar>
struct AlgorithmConfigT {
  Algorithm algorithm = Algorithm::LMS;
  Scalar mu = Scalar(0.01);
  Scalar rho0 = Scalar(0);     // zero-attraction strength
  Scalar epsilon = Scalar(0);  // RZA weight shape
  Scalar beta_w = Scalar(0);   // coefficient-domain weight shape
  Scalar beta_q = Scalar(0);   // error-memory-domain weight shape
  Scalar gamma_q = Scalar(0.97);
  long n_warm = 0;  // zero-attraction disabled while n <= n_warm
};
using AlgorithmConfig = AlgorithmConfigT<double>;

// Filter state: estimate w(n), error-memory accumulator q(n) (identically
// zero except for DDSAF), iteration counter and the multiplication tally.
template <typename Scalar>
struct FilterStateT {
  VecX<Scalar> w;
  VecX<Scalar> q;
  long n = 0;
  long long mult_count = 0;

  explicit FilterStateT(Eigen::Index m)
      : w(VecX<Scalar>::Zero(m)), q(VecX<Scalar>::Zero(m)) {}
};
using FilterState = FilterStateT<double>;

// 1 / (1 + eps*|w_i|), in (0, 1].
template <typename Scalar>
Scalar rza_weight(Scalar w_i, Scalar eps) {
  using std::abs;
  return Scalar(1) / (Scalar(1) + eps * abs(w_i));
}

// 1 / (1 + beta_w*|w_i| + beta_q*|q_i|), in (0, 1]; never exceeds the
// coefficient-only weight with the same beta_w.
template <typename Scalar>
Scalar dd_weight(Scalar w_i, Scalar q_i, Scalar beta_w, Scalar beta_q) {
  using std::abs;
  return Scalar(1) / (Scalar(1) + beta_w * abs(w_i) + beta_q * abs(q_i));
}

// gamma_q * q + e_prev * x_prev. Two per-tap products (decay and
// accumulation), i.e. 2M multiplications; the caller tallies them.
template <typename Scalar>
VecX<Scalar> error_memory_update(const VecX<Scalar>& q, Scalar e_prev,
                                 const VecX<Scalar>& x_prev, Scalar gamma_q) {
  if (q.size() != x_prev.size())
    throw std::invalid_argument("error_memory_update: length mismatch");
  return gamma_q * q + e_prev * x_prev;
}

// 0 while n <= n_warm, rho0 afterwards.
template <typename Scalar>
Scalar warm_start_rho(long n, Scalar rho0, long n_warm) {
  return n <= n_warm ? Scalar(0) : rho0;
}

// Strict sign with sgn(0) = 0.
template <typename Scalar>
Scalar sgn(Scalar v) {
  return v > Scalar(0) ? Scalar(1) : (v < Scalar(0) ? Scalar(-1) : Scalar(0));
}

// One adaptation step. Returns the prediction error e(n) = d - w^T x and
// advances the state in place. When s_out is non-null it receives the
// penalty weights s_i(n) used this step (ones for LMS).
//
// The multiplication tally counts per-tap products only, at the sites the
// complexity table attributes them to: error dot product M and coefficient
// update M for every algorithm; weight denominators M and attraction
// products M for RZA and DDSAF; memory decay M and memory accumulation M
// for DDSAF. Totals per step: LMS 2M, RZA 4M, DDSAF 6M, unconditionally
// (the warm start zeroes rho but the products are still performed).
template <typename Scalar>
Scalar filter_step(FilterStateT<Scalar>& state,
                   const AlgorithmConfigT<Scalar>& config,
                   const VecX<Scalar>& x, Scalar d,
                   VecX<Scalar>* s_out = nullptr) {
  const Eigen::Index m = state.w.size();
  if (x.size() != m) throw std::invalid_argument("filter_step: length mismatch");

  const Scalar e = d - state.w.dot(x);
  state.mult_count += m;  // filtering

  switch (config.algorithm) {
    case Algorithm::LMS: {
      state.w += (config.mu * e) * x;
      state.mult_count += m;  // update
      if (s_out) *s_out = VecX<Scalar>::Ones(m);
      break;
    }
    case Algorithm::RZA: {
      VecX<Scalar> s(m);
      for (Eigen::Index i = 0; i < m; ++i)
        s[i] = rza_weight(state.w[i], config.epsilon);
      state.mult_count += m;  // weight denominators
      VecX<Scalar> attraction(m);
      for (Eigen::Index i = 0; i < m; ++i)
        attraction[i] = config.rho0 * s[i] * sgn(state.w[i]);
      state.mult_count += m;  // attraction products
      state.w += (config.mu * e) * x - attraction;
      state.mult_count += m;  // update
      if (s_out) *s_out = std::move(s);
      break;
    }
    case Algorithm::DDSAF: {
      state.q = error_memory_update(state.q, e, x, config.gamma_q);
      state.mult_count += 2 * m;  // memory decay + accumulation
      VecX<Scalar> s(m);
      for (Eigen::Index i = 0; i < m; ++i)
        s[i] = dd_weight(state.w[i], state.q[i], config.beta_w, config.beta_q);
      state.mult_count += m;  // weight denominators
      const Scalar rho = warm_start_rho(state.n, config.rho0, config.n_warm);
      VecX<Scalar> attraction(m);
      for (Eigen::Index i = 0; i < m; ++i)
        attraction[i] = rho * s[i] * sgn(state.w[i]);
      state.mult_count += m;  // attraction products
      state.w += (config.mu * e) * x - attraction;
      state.mult_count += m;  // update
      if (s_out) *s_out = std::move(s);
      break;
    }
  }
  ++state.n;
  return e;
}

// Per-step multiplication tally for each algorithm at filter length m.
inline long long mults_per_step(Algorithm algorithm, long m) {
  switch (algorithm) {
    case Algorithm::LMS:
      return 2 * m;
    case Algorithm::RZA:
      return 4 * m;
    case Algorithm::DDSAF:
      return 6 * m;
  }
  return 0;
}

}  // namespace ddsaf
