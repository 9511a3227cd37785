#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ddsaf/filters.hpp"
#include "ddsaf/trial_stream.hpp"

using namespace ddsaf;

namespace {

AlgorithmConfig lms_config(double mu) {
  AlgorithmConfig c;
  c.algorithm = Algorithm::LMS;
  c.mu = mu;
  return c;
}

AlgorithmConfig rza_config(double mu, double rho0, double eps) {
  AlgorithmConfig c;
  c.algorithm = Algorithm::RZA;
  c.mu = mu;
  c.rho0 = rho0;
  c.epsilon = eps;
  return c;
}

AlgorithmConfig dd_config(double mu, double rho0, double beta_w, double beta_q,
                          double gamma_q, long n_warm) {
  AlgorithmConfig c;
  c.algorithm = Algorithm::DDSAF;
  c.mu = mu;
  c.rho0 = rho0;
  c.beta_w = beta_w;
  c.beta_q = beta_q;
  c.gamma_q = gamma_q;
  c.n_warm = n_warm;
  return c;
}

}  // namespace

TEST_CASE("rza_weight direct values") {
  CHECK(rza_weight(0.0, 0.02) == 1.0);
  CHECK(rza_weight(50.0, 0.02) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rza_weight(-50.0, 0.02) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("dd_weight direct values and degeneration") {
  CHECK(dd_weight(0.0, 0.0, 0.02, 2.0) == 1.0);
  CHECK(dd_weight(0.5, 0.1, 0.02, 2.0) ==
        doctest::Approx(1.0 / 1.21).epsilon(1e-15));
  TrialStream s(31, 0);
  for (int i = 0; i < 1000; ++i) {
    const double w = 10.0 * s.gaussian();
    const double q = 10.0 * s.gaussian();
    CHECK(dd_weight(w, q, 0.02, 0.0) == rza_weight(w, 0.02));
    // weight bound: always in (0, 1]
    const double sd = dd_weight(w, q, 0.02, 2.0);
    CHECK(sd > 0.0);
    CHECK(sd <= 1.0);
    // dominance: extra evidence never relaxes the penalty weight
    CHECK(sd <= rza_weight(w, 0.02));
  }
}

TEST_CASE("error_memory_update direct values") {
  Eigen::VectorXd q(2), x(2);
  q << 1.0, 0.0;
  x << 0.5, 1.0;
  const Eigen::VectorXd out = error_memory_update(q, 2.0, x, 0.97);
  CHECK(out[0] == doctest::Approx(1.97).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(2.0).epsilon(1e-15));

  const Eigen::VectorXd from_zero =
      error_memory_update(Eigen::VectorXd::Zero(2).eval(), 3.0, x, 0.97);
  CHECK(from_zero[0] == 1.5);
  CHECK(from_zero[1] == 3.0);

  const Eigen::VectorXd decay = error_memory_update(q, 0.0, x, 0.97);
  CHECK(decay[0] == 0.97);
  CHECK(decay[1] == 0.0);

  Eigen::VectorXd wrong(3);
  CHECK_THROWS_AS(error_memory_update(q, 1.0, wrong, 0.97),
                  std::invalid_argument);
}

TEST_CASE("warm_start_rho boundary") {
  CHECK(warm_start_rho(200, 0.0028, 200L) == 0.0);
  CHECK(warm_start_rho(201, 0.0028, 200L) == 0.0028);
  CHECK(warm_start_rho(0, 0.0028, 200L) == 0.0);
  CHECK(warm_start_rho(5000, 0.0, 200L) == 0.0);
}

TEST_CASE("sgn convention") {
  CHECK(sgn(0.0) == 0.0);
  CHECK(sgn(-3.2) == -1.0);
  CHECK(sgn(1e-300) == 1.0);
  CHECK(sgn(-1e-300) == -1.0);
}

TEST_CASE("filter_step lms from zero state") {
  const int m = 8;
  FilterState state(m);
  Eigen::VectorXd x(m);
  x << 1, -2, 3, -4, 5, -6, 7, -8;
  const double d = 0.25;  // with w = 0, e must equal d
  const double e = filter_step(state, lms_config(0.01), x, d);
  CHECK(e == d);
  for (int i = 0; i < m; ++i)
    CHECK(state.w[i] == doctest::Approx(0.01 * d * x[i]).epsilon(1e-15));
  CHECK(state.n == 1);
  CHECK(state.q.isZero(0.0));
}

TEST_CASE("filter_step rejects a wrong-length regressor") {
  FilterState state(8);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(7);
  CHECK_THROWS_AS(filter_step(state, lms_config(0.01), x, 1.0),
                  std::invalid_argument);
}

TEST_CASE("multiplication tallies per step") {
  for (const int m : {8, 128, 1024}) {
    TrialStream s(33, m);
    Eigen::VectorXd x(m);
    for (int i = 0; i < m; ++i) x[i] = s.gaussian();

    FilterState lms(m), rza(m), dd(m);
    const auto cl = lms_config(0.01);
    const auto cr = rza_config(0.01, 1e-4, 0.02);
    const auto cd = dd_config(0.01, 1e-4, 0.02, 2.0, 0.97, 200);
    for (int n = 0; n < 25; ++n) {
      const double d = s.gaussian();
      const long long l0 = lms.mult_count, r0 = rza.mult_count,
                      d0 = dd.mult_count;
      filter_step(lms, cl, x, d);
      filter_step(rza, cr, x, d);
      filter_step(dd, cd, x, d);
      CHECK(lms.mult_count - l0 == 2LL * m);
      CHECK(rza.mult_count - r0 == 4LL * m);
      CHECK(dd.mult_count - d0 == 6LL * m);
    }
    CHECK(lms.mult_count == 25LL * 2 * m);
    CHECK(rza.mult_count == 25LL * 4 * m);
    CHECK(dd.mult_count == 25LL * 6 * m);
    CHECK(mults_per_step(Algorithm::LMS, m) == 2LL * m);
    CHECK(mults_per_step(Algorithm::RZA, m) == 4LL * m);
    CHECK(mults_per_step(Algorithm::DDSAF, m) == 6LL * m);
  }
}

TEST_CASE("error-memory state equals the brute-force weighted history sum") {
  // After processing e(0..n), x(0..n) the accumulator must equal
  // sum_{l=0}^{n} gamma^l e(n-l) x(n-l), evaluated here from scratch.
  const int m = 6;
  const double gamma = 0.97;
  TrialStream s(34, 0);
  auto cfg = dd_config(0.05, 1e-3, 0.02, 2.0, gamma, 0);
  FilterState state(m);
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> es;
  for (int n = 0; n < 10; ++n) {
    Eigen::VectorXd x(m);
    for (int i = 0; i < m; ++i) x[i] = s.gaussian();
    const double d = s.gaussian();
    const double e = filter_step(state, cfg, x, d);
    xs.push_back(x);
    es.push_back(e);

    Eigen::VectorXd brute = Eigen::VectorXd::Zero(m);
    for (int l = 0; l <= n; ++l)
      brute += std::pow(gamma, l) * es[n - l] * xs[n - l];
    for (int i = 0; i < m; ++i)
      CHECK(state.q[i] == doctest::Approx(brute[i]).epsilon(1e-12));
  }
}

TEST_CASE("reduction: dual-domain with beta_q=0 reproduces rza exactly") {
  const int m = 16;
  TrialStream s(35, 0);
  FilterState rza(m), dd(m);
  const auto cr = rza_config(0.01, 5e-4, 0.02);
  const auto cd = dd_config(0.01, 5e-4, 0.02, 0.0, 0.97, 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  for (int n = 0; n < 2000; ++n) {
    for (Eigen::Index i = m - 1; i > 0; --i) x[i] = x[i - 1];
    x[0] = s.gaussian();
    const double d = s.gaussian();
    const double er = filter_step(rza, cr, x, d);
    const double ed = filter_step(dd, cd, x, d);
    CHECK(er == ed);
    for (int i = 0; i < m; ++i) CHECK(rza.w[i] == dd.w[i]);
  }
}

TEST_CASE("reduction: zero attraction reproduces lms exactly") {
  const int m = 16;
  TrialStream s(36, 0);
  FilterState lms(m), rza(m), dd(m);
  const auto cl = lms_config(0.02);
  const auto cr = rza_config(0.02, 0.0, 0.02);
  const auto cd = dd_config(0.02, 0.0, 0.02, 2.0, 0.97, 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  for (int n = 0; n < 2000; ++n) {
    for (Eigen::Index i = m - 1; i > 0; --i) x[i] = x[i - 1];
    x[0] = s.gaussian();
    const double d = s.gaussian();
    const double el = filter_step(lms, cl, x, d);
    CHECK(filter_step(rza, cr, x, d) == el);
    CHECK(filter_step(dd, cd, x, d) == el);
    for (int i = 0; i < m; ++i) {
      CHECK(rza.w[i] == lms.w[i]);
      CHECK(dd.w[i] == lms.w[i]);
    }
  }
}

TEST_CASE("warm start holds the dual-domain filter on the lms trajectory") {
  const int m = 16;
  const long n_warm = 50;
  TrialStream s(37, 0);
  FilterState lms(m), dd(m);
  const auto cl = lms_config(0.01);
  const auto cd = dd_config(0.01, 0.01, 0.02, 2.0, 0.97, n_warm);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  bool diverged_from_lms = false;
  for (int n = 0; n < 200; ++n) {
    for (Eigen::Index i = m - 1; i > 0; --i) x[i] = x[i - 1];
    x[0] = s.gaussian();
    const double d = s.gaussian();
    filter_step(lms, cl, x, d);
    filter_step(dd, cd, x, d);
    bool equal = true;
    for (int i = 0; i < m; ++i) equal = equal && lms.w[i] == dd.w[i];
    if (n <= n_warm) {
      // w(n+1) for steps up to and including n_warm is still pure LMS
      CHECK(equal);
    } else if (!equal) {
      diverged_from_lms = true;
    }
  }
  // with this rho0 the attraction must have actually kicked in afterwards
  CHECK(diverged_from_lms);
}

TEST_CASE("zero-attraction term shrinks magnitudes and vanishes at zero") {
  const int m = 8;
  TrialStream s(38, 0);
  for (int rep = 0; rep < 200; ++rep) {
    FilterState before(m);
    for (int i = 0; i < m; ++i) before.w[i] = 0.5 * s.gaussian();
    before.w[3] = 0.0;
    FilterState rza = before;
    // zero regressor isolates the attraction term: w' = w - rho*s.*sgn(w)
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    const double rho0 = 1e-3;
    filter_step(rza, rza_config(0.01, rho0, 0.02), x, 0.0);
    CHECK(rza.w[3] == 0.0);
    for (int i = 0; i < m; ++i) {
      const double delta = rza.w[i] - before.w[i];
      // bounded by rho0 (weights are at most 1) and directed against sgn(w)
      CHECK(std::abs(delta) <= rho0 * (1.0 + 1e-15));
      if (before.w[i] > 0.0) CHECK(delta <= 0.0);
      if (before.w[i] < 0.0) CHECK(delta >= 0.0);
      if (before.w[i] == 0.0) CHECK(delta == 0.0);
    }
  }
}

TEST_CASE("penalty weights reported through the trace output stay in (0,1]") {
  const int m = 32;
  TrialStream s(39, 0);
  FilterState dd(m);
  const auto cd = dd_config(0.01, 1e-4, 0.02, 2.0, 0.97, 10);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m), sv(m);
  for (int n = 0; n < 500; ++n) {
    for (Eigen::Index i = m - 1; i > 0; --i) x[i] = x[i - 1];
    x[0] = s.gaussian();
    filter_step(dd, cd, x, s.gaussian(), &sv);
    for (int i = 0; i < m; ++i) {
      CHECK(sv[i] > 0.0);
      CHECK(sv[i] <= 1.0);
    }
  }
}
