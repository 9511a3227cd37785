#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ddsaf/theory.hpp"
#include "ddsaf/trial_stream.hpp"

using namespace ddsaf;

namespace {

TheoryInputs inputs(long m, long k, double sigma_x2, double sigma_v2,
                    double mu, double rho0, double sbar_value) {
  TheoryInputs in;
  in.m = m;
  in.k = k;
  in.sigma_x2 = sigma_x2;
  in.sigma_v2 = sigma_v2;
  in.mu = mu;
  in.rho0 = rho0;
  in.sbar_active = Eigen::VectorXd::Constant(k, sbar_value);
  return in;
}

}  // namespace

TEST_CASE("mean stability bound") {
  CHECK(mean_stability_bound(1.0) == 2.0);
  CHECK(mean_stability_bound(2.0) == 1.0);
  CHECK(mean_stability_bound(0.5) == 4.0);
  CHECK_THROWS_AS(mean_stability_bound(0.0), std::invalid_argument);
}

TEST_CASE("mean-square stability bound") {
  const auto b128 = ms_stability_bound(128, 1.0);
  CHECK(b128.large_m == doctest::Approx(0.015625).epsilon(1e-15));
  CHECK(b128.exact == doctest::Approx(2.0 / 129.0).epsilon(1e-15));
  CHECK(b128.exact < b128.large_m);
  const auto b1 = ms_stability_bound(1, 1.0);
  CHECK(b1.exact == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(ms_stability_bound(0, 1.0), std::invalid_argument);
}

TEST_CASE("mean error solution") {
  Eigen::VectorXd w_o(4);
  w_o << 0.5, 0.0, -0.25, 1.0;
  const double mu = 0.01, sx2 = 1.0;
  const double lambda = 1.0 - mu * sx2;
  Eigen::VectorXd pi(4);
  pi << 0.9, 0.0, -0.8, 0.85;  // sbar .* sgn(w_o) on the support

  SUBCASE("n = 0 returns w_o") {
    const auto e0 = mean_error_solution(w_o, mu, sx2, 0.003, 0L, pi, 0);
    CHECK((e0 - w_o).norm() == 0.0);
  }
  SUBCASE("rho0 = 0 is a pure exponential decay") {
    const auto e = mean_error_solution(w_o, mu, sx2, 0.0, 0L, pi, 57);
    const Eigen::VectorXd expected = std::pow(lambda, 57) * w_o;
    CHECK((e - expected).norm() < 1e-14);
  }
  SUBCASE("long-run limit matches the per-tap bias") {
    const double rho0 = 0.003;
    const auto e = mean_error_solution(w_o, mu, sx2, rho0, 0L, pi, 5000);
    Eigen::VectorXd sbar(3);
    sbar << 0.9, 0.8, 0.85;
    const auto bias = per_tap_bias(w_o, sbar, rho0, mu, sx2);
    CHECK((e - bias).norm() < 1e-9);
    // and the limit norm respects the K-tap bound
    CHECK(e.norm() <= rho0 * 3.0 / (mu * sx2) + 1e-12);
  }
  SUBCASE("warm start delays the attraction contribution") {
    const auto early = mean_error_solution(w_o, mu, sx2, 0.003, 100L, pi, 100);
    const Eigen::VectorXd expected = std::pow(lambda, 100) * w_o;
    CHECK((early - expected).norm() < 1e-13);
  }
  SUBCASE("unstable configuration throws") {
    CHECK_THROWS_AS(mean_error_solution(w_o, 2.5, 1.0, 0.0, 0L, pi, 10),
                    std::domain_error);
  }
}

TEST_CASE("per-tap bias") {
  Eigen::VectorXd w_o(3);
  w_o << 0.7, 0.0, -0.2;
  Eigen::VectorXd sbar(2);
  sbar << 0.9, 0.5;

  const auto bias = per_tap_bias(w_o, sbar, 0.0028, 0.01, 1.0);
  CHECK(bias[0] == doctest::Approx(0.252).epsilon(1e-12));
  CHECK(bias[1] == 0.0);
  CHECK(bias[2] == doctest::Approx(-0.0028 * 0.5 / 0.01).epsilon(1e-12));

  const auto zero = per_tap_bias(w_o, sbar, 0.0, 0.01, 1.0);
  CHECK(zero.isZero(0.0));

  Eigen::VectorXd short_sbar(1);
  short_sbar << 0.9;
  CHECK_THROWS_AS(per_tap_bias(w_o, short_sbar, 0.001, 0.01, 1.0),
                  std::invalid_argument);
  Eigen::VectorXd long_sbar(3);
  long_sbar << 0.9, 0.5, 0.4;
  CHECK_THROWS_AS(per_tap_bias(w_o, long_sbar, 0.001, 0.01, 1.0),
                  std::invalid_argument);
}

TEST_CASE("msd learning curve") {
  SUBCASE("lms fixed point") {
    const auto in = inputs(128, 8, 1.0, 3.1623e-4, 0.01, 0.0, 0.0);
    const double fp = 0.01 * 128 * 3.1623e-4 / (2.0 - 0.01 * (1 + 128));
    const auto curve = msd_learning_curve(in, 1.0, 6000);
    CHECK(curve[0] == 1.0);
    CHECK(std::abs(curve[5999] - fp) < 1e-12 * fp);
    // monotone decrease from above the fixed point
    for (int n = 1; n < 6000; ++n) CHECK(curve[n] <= curve[n - 1]);
  }
  SUBCASE("attraction raises the floor after the warm start") {
    const auto base = inputs(128, 8, 1.0, 3.1623e-4, 0.01, 0.0, 0.0);
    const auto with = inputs(128, 8, 1.0, 3.1623e-4, 0.01, 2.8e-5, 0.9);
    const auto c0 = msd_learning_curve(base, 1.0, 4000, 200);
    const auto c1 = msd_learning_curve(with, 1.0, 4000, 200);
    CHECK(c1[200] == c0[200]);  // identical through the warm start
    CHECK(c1[3999] > c0[3999]);
  }
  SUBCASE("non-contracting step size throws") {
    const auto in = inputs(128, 8, 1.0, 3.1623e-4, 0.02, 0.0, 0.0);
    CHECK_THROWS_AS(msd_learning_curve(in, 1.0, 10), std::domain_error);
  }
}

TEST_CASE("steady-state msd") {
  SUBCASE("noise floor, approximate form") {
    const double sv2 = std::pow(10.0, -3.5);
    const auto in = inputs(128, 8, 1.0, sv2, 0.01, 0.0, 0.0);
    const double ss = steady_state_msd(in, true);
    CHECK(ss == doctest::Approx(0.01 * 128 * sv2 / 2.0).epsilon(1e-14));
    CHECK(10.0 * std::log10(ss) == doctest::Approx(-36.938).epsilon(1e-3));
  }
  SUBCASE("zero weights leave only the noise floor") {
    const auto in = inputs(128, 8, 1.0, 3.1623e-4, 0.01, 0.005, 0.0);
    CHECK(steady_state_msd(in, true) ==
          doctest::Approx(0.01 * 128 * 3.1623e-4 / 2.0).epsilon(1e-14));
  }
  SUBCASE("exact and approximate forms agree for tiny steps") {
    TrialStream s(41, 0);
    for (int rep = 0; rep < 1000; ++rep) {
      const double mu = 1e-5 + 1.4e-4 * s.uniform();  // mu*(1+M) < 0.02
      auto in = inputs(128, 8, 1.0, 1e-3, mu, mu * 0.1, 0.8);
      const double exact = steady_state_msd(in, false);
      const double approx = steady_state_msd(in, true);
      CHECK(std::abs(exact - approx) / exact < 0.01);
    }
  }
  SUBCASE("dominance in the penalty weights carries to the msd") {
    TrialStream s(42, 0);
    for (int rep = 0; rep < 10000; ++rep) {
      const double mu = 1e-4 + 0.012 * s.uniform();
      const double rho0 = 1e-6 + 1e-4 * s.uniform();
      auto rza = inputs(128, 8, 1.0, 1e-3, mu, rho0, 0.0);
      auto dd = rza;
      for (int i = 0; i < 8; ++i) {
        rza.sbar_active[i] = 0.05 + 0.95 * s.uniform();
        dd.sbar_active[i] = rza.sbar_active[i] * s.uniform();
      }
      CHECK(steady_state_msd(dd, true) <= steady_state_msd(rza, true));
      CHECK(steady_state_msd(dd, false) <= steady_state_msd(rza, false));
    }
  }
  SUBCASE("unstable step size throws") {
    const auto in = inputs(128, 8, 1.0, 1e-3, 0.02, 0.0, 0.0);
    CHECK_THROWS_AS(steady_state_msd(in, false), std::domain_error);
    CHECK_THROWS_AS(steady_state_msd(in, true), std::domain_error);
  }
}

TEST_CASE("delta msd") {
  SUBCASE("frozen direct evaluation") {
    auto rza = inputs(128, 8, 1.0, 3.1623e-4, 0.01, 0.0028, 0.9);
    auto dd = inputs(128, 8, 1.0, 3.1623e-4, 0.01, 0.0028, 0.8);
    CHECK(delta_msd(rza, dd) == doctest::Approx(0.106624).epsilon(1e-12));
  }
  SUBCASE("degenerate cases") {
    auto rza = inputs(128, 8, 1.0, 1e-3, 0.01, 0.0028, 0.9);
    CHECK(delta_msd(rza, rza) == 0.0);
    auto rza0 = inputs(128, 8, 1.0, 1e-3, 0.01, 0.0, 0.9);
    auto dd0 = inputs(128, 8, 1.0, 1e-3, 0.01, 0.0, 0.4);
    CHECK(delta_msd(rza0, dd0) == 0.0);
  }
  SUBCASE("equals the difference of approximate steady states") {
    TrialStream s(43, 0);
    for (int rep = 0; rep < 10000; ++rep) {
      const double mu = 1e-4 + 0.012 * s.uniform();
      const double rho0 = 1e-6 + 1e-4 * s.uniform();
      auto rza = inputs(128, 8, 1.0, 1e-3, mu, rho0, 0.0);
      auto dd = rza;
      for (int i = 0; i < 8; ++i) {
        rza.sbar_active[i] = 0.05 + 0.95 * s.uniform();
        dd.sbar_active[i] = rza.sbar_active[i] * s.uniform();
      }
      const double lhs = delta_msd(rza, dd);
      const double rhs =
          steady_state_msd(rza, true) - steady_state_msd(dd, true);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
  SUBCASE("mismatched operating points throw") {
    auto rza = inputs(128, 8, 1.0, 1e-3, 0.01, 0.0028, 0.9);
    auto dd = inputs(128, 8, 1.0, 1e-3, 0.008, 0.0028, 0.8);
    CHECK_THROWS_AS(delta_msd(rza, dd), std::invalid_argument);
  }
}

TEST_CASE("sbar estimation") {
  SUBCASE("constant trace") {
    Eigen::MatrixXd trace = Eigen::MatrixXd::Constant(100, 3, 0.625);
    const auto sbar = estimate_sbar_from_tail(trace, 40L);
    for (int i = 0; i < 3; ++i) CHECK(sbar[i] == doctest::Approx(0.625));
  }
  SUBCASE("only the tail window enters the average") {
    Eigen::MatrixXd trace(4, 1);
    trace << 100.0, 0.2, 0.4, 0.6;
    const auto sbar = estimate_sbar_from_tail(trace, 3L);
    CHECK(sbar[0] == doctest::Approx(0.4).epsilon(1e-14));
  }
  SUBCASE("oversized window throws") {
    Eigen::MatrixXd trace = Eigen::MatrixXd::Zero(10, 2);
    CHECK_THROWS_AS(estimate_sbar_from_tail(trace, 11L),
                    std::invalid_argument);
  }
  SUBCASE("analytic fallback evaluates at the true coefficients") {
    Eigen::VectorXd w_o(4);
    w_o << 0.0, 50.0, 0.0, -50.0;
    const auto sbar = analytic_sbar(w_o, 0.02);
    REQUIRE(sbar.size() == 2);
    CHECK(sbar[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sbar[1] == doctest::Approx(0.5).epsilon(1e-15));
  }
}
