#include <doctest.h>

#include <cmath>
#include <vector>

#include "quqcd/audit.hpp"
#include "quqcd/rng.hpp"

namespace {

// Exact values for the uniform family by summing over the binomial law of a
// single count K ~ Bin(w, 1/d):
//   E_P[D(P||Phat)] = E_K[log((1/d) / phat_K)],
//   E_P[log^2(p(X)/phat(X))] = E_K[log^2((1/d) / phat_K)],
// with phat_k = (1 + k)/(w + d). Both collapse to one coordinate because the
// counts are exchangeable and the scoring draw is uniform.
double binom_log_pmf(int w, int k, double p) {
  return std::lgamma(w + 1.0) - std::lgamma(k + 1.0) -
         std::lgamma(w - k + 1.0) + k * std::log(p) +
         (w - k) * std::log1p(-p);
}

void exact_uniform_conditions(int w, int d, double* kl, double* m2) {
  double e1 = 0.0, e2 = 0.0;
  for (int k = 0; k <= w; ++k) {
    const double pk = std::exp(binom_log_pmf(w, k, 1.0 / d));
    const double phat = (1.0 + k) / static_cast<double>(w + d);
    const double logratio = std::log((1.0 / d) / phat);
    e1 += pk * logratio;
    e2 += pk * logratio * logratio;
  }
  *kl = e1;
  *m2 = e2;
}

}  // namespace

TEST_CASE("monte carlo condition estimates agree with the exact binomial sums") {
  for (int w : {64, 256}) {
    const int d = static_cast<int>(std::ceil(std::sqrt(double(w))));
    double kl_exact, m2_exact;
    exact_uniform_conditions(w, d, &kl_exact, &m2_exact);

    const auto p = quqcd::uniform_distribution(d);
    const auto kl = quqcd::condition1_estimate(p, w, 4000, 91, 4);
    const auto m2 = quqcd::condition2_estimate(p, w, 4000, 92, 4);
    CHECK(std::abs(kl.mean - kl_exact) <= 4.0 * kl.se);
    CHECK(std::abs(m2.mean - m2_exact) <= 4.0 * m2.se);
    CHECK(kl.se > 0.0);
    CHECK(m2.se > 0.0);
  }

  // Regression anchors for the exact sums at w=64, d=8.
  double kl64, m264;
  exact_uniform_conditions(64, 8, &kl64, &m264);
  CHECK(kl64 == doctest::Approx(0.04700217).epsilon(1e-5));
  CHECK(m264 == doctest::Approx(0.10316986).epsilon(1e-5));
}

TEST_CASE("condition estimates demand enough trials") {
  const auto p = quqcd::uniform_distribution(4);
  CHECK_THROWS_AS(quqcd::condition1_estimate(p, 16, 50, 1), quqcd::Error);
  CHECK_THROWS_AS(quqcd::condition2_estimate(p, 16, 50, 1), quqcd::Error);
}

TEST_CASE("decay exponent fit recovers known power laws") {
  const std::vector<int> windows = {64, 256, 1024, 4096};
  std::vector<double> half, exact_kl, exact_m2;
  for (int w : windows) {
    half.push_back(3.7 * std::pow(double(w), -0.5));
    const int d = static_cast<int>(std::ceil(std::sqrt(double(w))));
    double kl, m2;
    exact_uniform_conditions(w, d, &kl, &m2);
    exact_kl.push_back(kl);
    exact_m2.push_back(m2);
  }
  CHECK(quqcd::fit_decay_exponent(windows, half) ==
        doctest::Approx(0.5).epsilon(1e-12));

  // Finite-size decay of the exact means over w in {64,...,4096}: distinctly
  // slower than 1/2 because d grows with w.
  CHECK(quqcd::fit_decay_exponent(windows, exact_kl) ==
        doctest::Approx(0.4406).epsilon(2e-3));
  CHECK(quqcd::fit_decay_exponent(windows, exact_m2) ==
        doctest::Approx(0.4595).epsilon(2e-3));

  // The three-point grid used by the verification suite sits lower still.
  const std::vector<int> small = {64, 256, 1024};
  CHECK(quqcd::fit_decay_exponent(
            small, {exact_kl[0], exact_kl[1], exact_kl[2]}) ==
        doctest::Approx(0.4219).epsilon(2e-3));
  CHECK(quqcd::fit_decay_exponent(
            small, {exact_m2[0], exact_m2[1], exact_m2[2]}) ==
        doctest::Approx(0.4457).epsilon(2e-3));
}

TEST_CASE("decay fit propagates mean standard errors") {
  // Equally spaced log grid (step ln 4) with a constant 10% relative se:
  // c = {-1, 0, +1} / (2 ln 4), so se = sqrt(2) * 0.1 / (2 ln 4).
  const std::vector<int> windows = {64, 256, 1024};
  const std::vector<double> means = {0.04, 0.02, 0.01};
  const std::vector<double> ses = {0.004, 0.002, 0.001};
  const auto fit = quqcd::fit_decay(windows, means, ses);
  CHECK(fit.exponent == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.se ==
        doctest::Approx(std::sqrt(0.02) / (2.0 * std::log(4.0))).epsilon(1e-12));

  const auto noiseless = quqcd::fit_decay(windows, means, {0.0, 0.0, 0.0});
  CHECK(noiseless.se == 0.0);
  CHECK(noiseless.exponent == quqcd::fit_decay_exponent(windows, means));

  CHECK_THROWS_AS(quqcd::fit_decay(windows, means, {0.1, 0.1}), quqcd::Error);
  CHECK_THROWS_AS(quqcd::fit_decay(windows, means, {0.1, 0.1, -0.1}),
                  quqcd::Error);
}

TEST_CASE("audit report rows carry the advertised bounds") {
  quqcd::AuditConfig config;
  config.windows = {64, 256, 1024};
  config.trials = 400;
  config.seed = 5;
  config.threads = 4;
  const auto report = quqcd::run_audit(config);
  REQUIRE(report.rows.size() == 3);
  for (const auto& row : report.rows) {
    CHECK(row.d == static_cast<int>(std::ceil(std::sqrt(double(row.w)))));
    CHECK(row.kl_bound == doctest::Approx(1.5 * row.d / row.w));
    CHECK(row.m2_bound == doctest::Approx(2.0 * row.d / row.w));
    CHECK(row.p_min == doctest::Approx(1.0 / row.d));
    CHECK(row.kl_mean > 0.0);
    CHECK(row.m2_mean > 0.0);
  }
  // d = ceil(sqrt(w)) meets the floor exactly when w is a perfect square.
  CHECK(report.rows[0].floor_ok);
  CHECK(report.fit_performed);
  CHECK(report.beta1 > 0.3);
  CHECK(report.beta2 > 0.3);
  CHECK(report.beta1_se > 0.0);
  CHECK(report.beta2_se > 0.0);
}

TEST_CASE("random floor family respects its floor") {
  quqcd::AuditConfig config;
  config.windows = {64, 144};
  config.family = quqcd::AuditFamily::RandomFloor;
  config.floor_coefficient = 0.5;
  config.trials = 200;
  config.seed = 6;
  const auto report = quqcd::run_audit(config);
  for (const auto& row : report.rows)
    CHECK(row.p_min >= 0.5 / std::sqrt(double(row.w)) - 1e-12);
}

TEST_CASE("floor simplex sampling law") {
  quqcd::CounterRng rng(77);
  const int d = 5;
  const double floor = 0.05;
  std::vector<double> mean(d, 0.0);
  const int n = 2000;
  for (int t = 0; t < n; ++t) {
    const auto p = quqcd::sample_floor_simplex(d, floor, rng);
    double total = 0.0;
    for (int i = 0; i < d; ++i) {
      CHECK(p.probs[i] >= floor - 1e-15);
      total += p.probs[i];
      mean[i] += p.probs[i];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Coordinates are exchangeable with mean 1/d; flat-Dirichlet sd scaled by
  // the free mass gives se ~ 0.0027 at n = 2000.
  for (int i = 0; i < d; ++i)
    CHECK(mean[i] / n == doctest::Approx(0.2).epsilon(0.06));

  CHECK_THROWS_AS(quqcd::sample_floor_simplex(4, 0.25, rng), quqcd::Error);
  CHECK_THROWS_AS(quqcd::sample_floor_simplex(4, 0.3, rng), quqcd::Error);
}
