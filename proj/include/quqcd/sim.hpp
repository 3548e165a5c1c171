#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "quqcd/detectors.hpp"
#include "quqcd/entropy.hpp"
#include "quqcd/rng.hpp"
#include "quqcd/schur.hpp"

namespace quqcd {

enum class DetectorKind { Nwla, KnownQ };
const char* to_string(DetectorKind kind);

/// Change-point scenario before compilation. ell and w resolve automatically
/// when absent: w = ceil(sqrt(log target_tfa)) and
/// ell = ceil(log(w) / (2 log(1/gamma_min))), clamped to the caps.
struct ScenarioConfig {
  ScenarioConfig(DensityOperator rho_, DensityOperator sigma_)
      : rho(std::move(rho_)), sigma(std::move(sigma_)) {}

  DensityOperator rho;
  DensityOperator sigma;
  std::optional<std::int64_t> nu;   // change point in copies; absent = never
  std::optional<int> ell;
  std::optional<int> w;             // window, in blocks
  std::optional<double> threshold;
  std::optional<double> target_tfa; // blocks
  std::optional<DetectorKind> detector;
  std::int64_t trials = 500;
  std::int64_t max_steps = 1000000; // blocks per trial
  std::uint64_t seed = 0;
  SchurCaps caps;
};

/// Scenario after PVM construction and stream induction. All randomness
/// downstream is keyed off (seed, purpose, trial), so results do not depend
/// on thread count or evaluation order.
struct CompiledScenario {
  InducedModel model;
  int ell = 1;
  int w = 1;
  int d = 0;                        // induced outcome count
  std::optional<std::int64_t> nu;   // copies
  std::int64_t change_block = 0;    // nu = change_block * ell + remainder
  int remainder = 0;
  std::optional<double> threshold;
  std::optional<double> target_tfa;
  std::optional<DetectorKind> detector;
  std::int64_t trials = 500;
  std::int64_t max_steps = 1000000;
  std::uint64_t seed = 0;
  double gamma_min = 0.0;
  double quantum_re = 0.0;          // S(sigma || rho)
  double block_divergence = 0.0;    // D(Q^(ell) || P^(ell))
};

CompiledScenario compile_scenario(const ScenarioConfig& config);

/// Scenario JSON: {"rho": density, "sigma": density, "nu": int|"none",
/// "ell": int|"auto", "w": int|"auto", "h": num, "target_tfa": num,
/// "detector": "nwla"|"cusum", "trials": int, "max_steps": int, "seed": int}.
/// Only rho and sigma are required.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// Independent stream families; false-alarm runs share uniforms across
/// thresholds (common random numbers), delay runs share them across change
/// placements and detector kinds (matched pairs).
enum class StreamPurpose : std::uint64_t { FalseAlarm = 1, ChangePoint = 2 };

/// One trial's block outcome stream: P blocks before the change block,
/// the hybrid distribution on a straddled block, Q blocks after.
class ScenarioStream {
 public:
  ScenarioStream(const CompiledScenario& cs, StreamPurpose purpose,
                 std::uint64_t trial, bool force_no_change = false);

  int next();

 private:
  CategoricalSampler pre_;
  CategoricalSampler post_;
  std::optional<CategoricalSampler> hybrid_;
  CounterRng rng_;
  std::int64_t block_ = 0;
  bool no_change_ = true;
  std::int64_t change_block_ = 0;
  int remainder_ = 0;
};

struct MonteCarloEstimate {
  double mean = 0.0;        // blocks
  double se = 0.0;
  std::int64_t trials = 0;
  std::int64_t censored = 0;
  double censor_fraction = 0.0;
  bool biased = false;      // censored runs entered the mean as lower bounds
};

/// Mean time to false alarm at threshold h, no-change streams, in blocks.
/// Censored runs contribute max_steps. trials >= 10.
MonteCarloEstimate estimate_tfa(const CompiledScenario& cs, double h,
                                std::int64_t trials, std::int64_t max_steps,
                                DetectorKind kind, unsigned threads = 1);

struct CalibrationResult {
  double threshold = 0.0;
  double achieved_tfa = 0.0;
  double achieved_se = 0.0;
  int iterations = 0;
  bool converged = false;   // landed within +-10% of the target
};

/// Bisection on h over [0, log(target) + 10] until the estimated mean time
/// to false alarm is within +-10% of target_tfa (common random numbers make
/// the estimate monotone in h) or 20 iterations; returns the best iterate.
/// target_tfa >= 1.
CalibrationResult calibrate_threshold(const CompiledScenario& cs,
                                      double target_tfa, std::int64_t trials,
                                      DetectorKind kind, unsigned threads = 1);

struct DelayEstimate {
  double mean_copies = 0.0;
  double se_copies = 0.0;
  std::int64_t detected = 0;     // trials stopping after the change
  std::int64_t false_alarms = 0; // trials stopping at or before it
  std::int64_t censored = 0;
};

/// Detection delay in copies: (n - change_block) * ell - remainder for a
/// detector stopping at block n after the change. Requires a change point
/// and sigma != rho (DegenerateScenario otherwise).
DelayEstimate estimate_delay(const CompiledScenario& cs, double h,
                             std::int64_t trials, std::int64_t max_steps,
                             DetectorKind kind, unsigned threads = 1);

/// Worst-case delay surrogate: the worse of an immediate change (nu = 0) and
/// a hostile warm-up (w pre-change blocks fed into the detector before the
/// change, crossings ignored during the feed). The two variants coincide
/// pathwise for the known-Q CUSUM, which keeps no window state.
struct WaddEstimate {
  DelayEstimate immediate;
  DelayEstimate hostile;
  DelayEstimate reported;     // the larger mean of the two
  std::string protocol = "WADD-protocol";
};

WaddEstimate worst_case_delay(const CompiledScenario& cs, double h,
                              std::int64_t trials, std::int64_t max_steps,
                              DetectorKind kind, unsigned threads = 1);

struct TradeoffRow {
  double target_tfa = 0.0;   // 0 when the grid was thresholds
  double threshold = 0.0;
  double tfa_mean = 0.0, tfa_se = 0.0;        // blocks
  double delay_mean = 0.0, delay_se = 0.0;    // copies, WADD protocol
  std::int64_t detected = 0, false_alarms = 0, censored = 0;
  double censor_fraction = 0.0;               // worst of the two estimates
  bool unreliable = false;                    // censor_fraction > 1%
};

struct TradeoffCurve {
  std::vector<TradeoffRow> rows;
  DetectorKind kind = DetectorKind::Nwla;
  double slope = 0.0;            // copies of delay per nat of log(tfa)
  double slope_se = 0.0;
  double intercept = 0.0;
  double achievable_slope = 0.0; // ell / block_divergence
  double converse_slope = 0.0;   // 1 / quantum_re
};

/// Delay-vs-false-alarm curve over calibrated targets (>= 3 points).
TradeoffCurve tradeoff_targets(const CompiledScenario& cs,
                               const std::vector<double>& targets,
                               std::int64_t trials, DetectorKind kind,
                               unsigned threads = 1);

/// Same curve over explicit thresholds (>= 3 points), no calibration.
TradeoffCurve tradeoff_thresholds(const CompiledScenario& cs,
                                  const std::vector<double>& thresholds,
                                  std::int64_t trials, DetectorKind kind,
                                  unsigned threads = 1);

}  // namespace quqcd
