#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "quqcd/prob.hpp"
#include "quqcd/rng.hpp"

namespace quqcd {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Monte Carlo estimate of E_P[ D(P || Phat_w) ] where Phat_w is the smoothed
/// kernel estimate built from w i.i.d. draws from p. trials >= 100.
MeanSe condition1_estimate(const ProbabilityVector& p, int w, int trials,
                           std::uint64_t seed, unsigned threads = 1);

/// Monte Carlo estimate of E_P[ log^2(p(X)/Phat_w(X)) ] with an independent
/// scoring draw X ~ p per trial. trials >= 100.
MeanSe condition2_estimate(const ProbabilityVector& p, int w, int trials,
                           std::uint64_t seed, unsigned threads = 1);

enum class AuditFamily { Uniform, RandomFloor };

struct AuditConfig {
  std::vector<int> windows;         // at least one; >= 3 enables the fit
  double support_multiplier = 1.0;  // d = ceil(multiplier * sqrt(w))
  AuditFamily family = AuditFamily::Uniform;
  double floor_coefficient = 0.5;   // p_min >= coefficient / sqrt(w)
  int trials = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct AuditRow {
  int w = 0;
  int d = 0;
  double kl_mean = 0.0, kl_se = 0.0;
  double m2_mean = 0.0, m2_se = 0.0;
  double kl_bound = 0.0;   // (3/2) d / w
  double m2_bound = 0.0;   // 2 d / w
  double p_min = 0.0;
  bool floor_ok = false;   // p_min >= w^{-1/2}
};

struct AuditReport {
  std::vector<AuditRow> rows;
  bool fit_performed = false;
  double beta1 = 0.0;     // decay exponent of the KL mean in 1/w
  double beta1_se = 0.0;  // propagated from per-window mean ses
  double beta2 = 0.0;     // decay exponent of the second moment in 1/w
  double beta2_se = 0.0;
};

/// Runs both condition estimates over the window grid and, with >= 3
/// windows, fits log(mean) against log(w) to report decay exponents.
AuditReport run_audit(const AuditConfig& config);

struct DecayFit {
  double exponent = 0.0;
  double se = 0.0;
};

/// Least-squares slope of log(y) on log(w), negated: y ~ C * w^{-beta}.
/// The se carries per-point mean standard errors through the fit by the
/// delta method on log(mean); points must come from independent streams.
DecayFit fit_decay(const std::vector<int>& windows,
                   const std::vector<double>& means,
                   const std::vector<double>& ses);

/// Exponent-only convenience wrapper over fit_decay with zero ses.
double fit_decay_exponent(const std::vector<int>& windows,
                          const std::vector<double>& means);

/// Uniform distribution on d symbols.
ProbabilityVector uniform_distribution(int d);

/// Uniform draw from the simplex slice {p : p_j >= floor for all j}.
/// floor * d must be < 1.
ProbabilityVector sample_floor_simplex(int d, double floor, CounterRng& rng);

}  // namespace quqcd
