#include "quqcd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quqcd/parallel.hpp"

namespace quqcd {

namespace {

constexpr double kDegenerateTol = 1e-12;

std::uint64_t purpose_seed(std::uint64_t base, StreamPurpose purpose) {
  return mix64(base ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(purpose)));
}

struct Welford {
  // Slot-wise accumulation happens outside; this reduces a finished vector.
  static MonteCarloEstimate reduce(const std::vector<double>& xs) {
    MonteCarloEstimate est;
    est.trials = static_cast<std::int64_t>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    if (xs.size() > 1) var /= static_cast<double>(xs.size() - 1);
    est.mean = mean;
    est.se = std::sqrt(var / static_cast<double>(xs.size()));
    return est;
  }
};

int resolve_ell(const ScenarioConfig& config, int w, double gamma_min) {
  const int b = config.rho.dim();
  int ell;
  if (config.ell) {
    ell = *config.ell;
    if (ell < 1) throw Error(ErrorKind::BadInput, "ell must be >= 1");
  } else {
    const double denom = std::log(1.0 / gamma_min);
    if (denom <= 1e-12) {
      ell = 1;
    } else {
      ell = std::max(
          1, static_cast<int>(std::ceil(
                 0.5 * std::log(static_cast<double>(w)) / denom)));
    }
    // Auto-resolved ell clamps to the construction caps; an explicit ell
    // out of range is the caller's error and surfaces from the builder.
    ell = std::min(ell, config.caps.max_ell);
    while (ell > 1) {
      double dim = std::pow(static_cast<double>(b), ell);
      if (dim <= static_cast<double>(config.caps.max_tensor_dim)) break;
      --ell;
    }
  }
  return ell;
}

}  // namespace

const char* to_string(DetectorKind kind) {
  return kind == DetectorKind::Nwla ? "nwla" : "cusum";
}

CompiledScenario compile_scenario(const ScenarioConfig& config) {
  if (config.nu && *config.nu < 0)
    throw Error(ErrorKind::BadInput, "nu must be >= 0");
  if (config.trials < 1) throw Error(ErrorKind::BadInput, "trials must be >= 1");
  if (config.max_steps < 1)
    throw Error(ErrorKind::BadInput, "max_steps must be >= 1");

  const double s = quantum_relative_entropy(config.sigma, config.rho);
  if (std::isinf(s) && config.nu)
    throw Error(ErrorKind::InfiniteDivergence,
                "S(sigma||rho) is infinite; only a no-change scenario is "
                "meaningful");

  int w;
  if (config.w) {
    w = *config.w;
    if (w < 1) throw Error(ErrorKind::BadInput, "w must be >= 1");
  } else if (config.target_tfa) {
    if (*config.target_tfa <= 1.0)
      throw Error(ErrorKind::BadInput,
                  "auto window needs target_tfa > 1 block");
    w = std::max(1, static_cast<int>(std::ceil(
                        std::sqrt(std::log(*config.target_tfa)))));
  } else {
    throw Error(ErrorKind::BadInput,
                "scenario needs w or target_tfa to size the window");
  }

  const double gamma_min = config.rho.spectrum().gamma_min();
  const int ell = resolve_ell(config, w, gamma_min);

  auto pvm = std::make_shared<const Pvm>(schur_pvm(config.rho, ell, config.caps));
  CompiledScenario cs;
  cs.model = induce(pvm, config.rho, config.sigma);
  cs.ell = ell;
  cs.w = w;
  cs.d = static_cast<int>(cs.model.pre.size());
  cs.nu = config.nu;
  if (config.nu) {
    cs.change_block = *config.nu / ell;
    cs.remainder = static_cast<int>(*config.nu % ell);
  }
  cs.threshold = config.threshold;
  cs.target_tfa = config.target_tfa;
  cs.detector = config.detector;
  cs.trials = config.trials;
  cs.max_steps = config.max_steps;
  cs.seed = config.seed;
  cs.gamma_min = gamma_min;
  cs.quantum_re = s;
  cs.block_divergence = classical_relative_entropy(cs.model.post, cs.model.pre);
  return cs;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorKind::BadInput, "scenario JSON must be an object");
  if (!j.contains("rho") || !j.contains("sigma"))
    throw Error(ErrorKind::BadInput, "scenario needs \"rho\" and \"sigma\"");
  ScenarioConfig config(density_from_json(j["rho"]),
                        density_from_json(j["sigma"]));

  auto int_field = [&](const char* name) -> std::optional<std::int64_t> {
    if (!j.contains(name) || j[name].is_null()) return std::nullopt;
    const auto& v = j[name];
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "auto" || s == "none") return std::nullopt;
      throw Error(ErrorKind::BadInput, std::string("field ") + name +
                                           ": unrecognized value " + s);
    }
    if (!v.is_number_integer())
      throw Error(ErrorKind::BadInput, std::string("field ") + name +
                                           " must be an integer");
    return v.get<std::int64_t>();
  };

  if (auto nu = int_field("nu")) config.nu = *nu;
  if (auto ell = int_field("ell")) config.ell = static_cast<int>(*ell);
  if (auto w = int_field("w")) config.w = static_cast<int>(*w);
  if (j.contains("h") && !j["h"].is_null()) {
    if (!j["h"].is_number())
      throw Error(ErrorKind::BadInput, "field h must be a number");
    config.threshold = j["h"].get<double>();
  }
  if (j.contains("target_tfa") && !j["target_tfa"].is_null()) {
    if (!j["target_tfa"].is_number())
      throw Error(ErrorKind::BadInput, "field target_tfa must be a number");
    config.target_tfa = j["target_tfa"].get<double>();
  }
  if (j.contains("detector") && !j["detector"].is_null()) {
    const std::string kind = j["detector"].get<std::string>();
    if (kind == "nwla") config.detector = DetectorKind::Nwla;
    else if (kind == "cusum") config.detector = DetectorKind::KnownQ;
    else
      throw Error(ErrorKind::BadInput, "detector must be \"nwla\" or \"cusum\"");
  }
  if (auto trials = int_field("trials")) config.trials = *trials;
  if (auto max_steps = int_field("max_steps")) config.max_steps = *max_steps;
  if (j.contains("seed") && !j["seed"].is_null())
    config.seed = j["seed"].get<std::uint64_t>();
  return config;
}

ScenarioStream::ScenarioStream(const CompiledScenario& cs, StreamPurpose purpose,
                               std::uint64_t trial, bool force_no_change)
    : pre_(cs.model.pre.probs),
      post_(cs.model.post.probs),
      rng_(CounterRng::for_stream(purpose_seed(cs.seed, purpose), trial)),
      change_block_(cs.change_block),
      remainder_(cs.remainder) {
  no_change_ = force_no_change || !cs.nu.has_value();
  if (!no_change_ && remainder_ > 0)
    hybrid_.emplace(cs.model.hybrids[remainder_ - 1].probs);
}

int ScenarioStream::next() {
  const std::int64_t t = block_++;
  if (no_change_ || t < change_block_) return pre_.sample(rng_);
  if (t == change_block_ && remainder_ > 0) return hybrid_->sample(rng_);
  return post_.sample(rng_);
}

namespace {

template <class Body>
void run_trials(const CompiledScenario& cs, std::int64_t trials,
                unsigned threads, Body body) {
  parallel_for(static_cast<std::size_t>(trials), threads,
               [&](std::size_t t) { body(t); });
}

StoppingReport run_one(const CompiledScenario& cs, double h, DetectorKind kind,
                       ScenarioStream& stream, std::int64_t max_steps,
                       std::int64_t prefeed_blocks) {
  auto gen = [&stream]() { return stream.next(); };
  if (kind == DetectorKind::KnownQ) {
    CusumDetector det(cs.model.pre, cs.model.post, h);
    return run_to_stop(det, gen, max_steps);
  }
  NwlaDetector det(cs.model.pre, cs.w, h);
  for (std::int64_t i = 0; i < prefeed_blocks; ++i) det.step(stream.next());
  return run_to_stop(det, gen, max_steps);
}

}  // namespace

MonteCarloEstimate estimate_tfa(const CompiledScenario& cs, double h,
                                std::int64_t trials, std::int64_t max_steps,
                                DetectorKind kind, unsigned threads) {
  if (trials < 10) throw Error(ErrorKind::BadInput, "tfa needs trials >= 10");
  if (max_steps < 1) throw Error(ErrorKind::BadInput, "max_steps must be >= 1");

  std::vector<double> steps(trials);
  std::vector<char> censored(trials);
  run_trials(cs, trials, threads, [&](std::size_t t) {
    ScenarioStream stream(cs, StreamPurpose::FalseAlarm, t, true);
    const StoppingReport rep = run_one(cs, h, kind, stream, max_steps, 0);
    steps[t] = static_cast<double>(rep.stopped ? rep.stopping_step : max_steps);
    censored[t] = rep.stopped ? 0 : 1;
  });

  MonteCarloEstimate est = Welford::reduce(steps);
  for (char c : censored) est.censored += c;
  est.censor_fraction =
      static_cast<double>(est.censored) / static_cast<double>(trials);
  est.biased = est.censored > 0;
  return est;
}

CalibrationResult calibrate_threshold(const CompiledScenario& cs,
                                      double target_tfa, std::int64_t trials,
                                      DetectorKind kind, unsigned threads) {
  if (target_tfa < 1.0)
    throw Error(ErrorKind::BadInput, "target_tfa must be >= 1 block");
  constexpr double kRelTol = 0.1;
  constexpr int kMaxIterations = 20;

  // h = 0 stops on the first block deterministically.
  if (std::abs(1.0 - target_tfa) <= kRelTol * target_tfa)
    return CalibrationResult{0.0, 1.0, 0.0, 0, true};

  const std::int64_t max_steps = std::min(
      cs.max_steps,
      std::max<std::int64_t>(1000, static_cast<std::int64_t>(50.0 * target_tfa)));
  double lo = 0.0;
  double hi = std::log(target_tfa) + 10.0;
  CalibrationResult best;
  double best_gap = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const MonteCarloEstimate est =
        estimate_tfa(cs, mid, trials, max_steps, kind, threads);
    const double gap = std::abs(est.mean - target_tfa);
    if (gap < best_gap) {
      best_gap = gap;
      best = CalibrationResult{mid, est.mean, est.se, iter, false};
    }
    if (gap <= kRelTol * target_tfa)
      return CalibrationResult{mid, est.mean, est.se, iter, true};
    if (est.mean < target_tfa) lo = mid; else hi = mid;
  }

  // Common random numbers make the estimate monotone in h, so a bracket
  // pinned against its top means the target is out of reach.
  if (best.achieved_tfa < (1.0 - kRelTol) * target_tfa &&
      lo >= (std::log(target_tfa) + 10.0) * 0.999)
    throw Error(ErrorKind::CalibrationFailed,
                "bracket cannot reach target " + std::to_string(target_tfa));
  return best;
}

DelayEstimate estimate_delay(const CompiledScenario& cs, double h,
                             std::int64_t trials, std::int64_t max_steps,
                             DetectorKind kind, unsigned threads) {
  if (!cs.nu)
    throw Error(ErrorKind::BadInput, "delay needs a scenario with a change point");
  if (cs.block_divergence <= kDegenerateTol)
    throw Error(ErrorKind::DegenerateScenario,
                "post-change stream is indistinguishable from pre-change");
  if (trials < 1) throw Error(ErrorKind::BadInput, "trials must be >= 1");

  enum : char { kDetected, kFalseAlarm, kCensored };
  std::vector<char> status(trials);
  std::vector<double> delay(trials, 0.0);
  run_trials(cs, trials, threads, [&](std::size_t t) {
    ScenarioStream stream(cs, StreamPurpose::ChangePoint, t);
    const StoppingReport rep = run_one(cs, h, kind, stream, max_steps, 0);
    if (!rep.stopped) {
      status[t] = kCensored;
    } else if (rep.stopping_step <= cs.change_block) {
      status[t] = kFalseAlarm;
    } else {
      status[t] = kDetected;
      delay[t] = static_cast<double>(
          (rep.stopping_step - cs.change_block) * cs.ell - cs.remainder);
    }
  });

  DelayEstimate est;
  std::vector<double> detected;
  detected.reserve(trials);
  for (std::int64_t t = 0; t < trials; ++t) {
    switch (status[t]) {
      case kDetected: detected.push_back(delay[t]); break;
      case kFalseAlarm: ++est.false_alarms; break;
      default: ++est.censored;
    }
  }
  est.detected = static_cast<std::int64_t>(detected.size());
  if (est.detected > 0) {
    const MonteCarloEstimate m = Welford::reduce(detected);
    est.mean_copies = m.mean;
    est.se_copies = m.se;
  } else {
    est.mean_copies = std::numeric_limits<double>::quiet_NaN();
    est.se_copies = std::numeric_limits<double>::quiet_NaN();
  }
  return est;
}

WaddEstimate worst_case_delay(const CompiledScenario& cs, double h,
                              std::int64_t trials, std::int64_t max_steps,
                              DetectorKind kind, unsigned threads) {
  if (cs.block_divergence <= kDegenerateTol)
    throw Error(ErrorKind::DegenerateScenario,
                "post-change stream is indistinguishable from pre-change");

  CompiledScenario immediate = cs;
  immediate.nu = 0;
  immediate.change_block = 0;
  immediate.remainder = 0;

  WaddEstimate wadd;
  wadd.immediate = estimate_delay(immediate, h, trials, max_steps, kind, threads);

  if (kind == DetectorKind::KnownQ) {
    // No window state: a fresh detector at the change point is the same
    // process either way, and the shared trial streams make it pathwise equal.
    wadd.hostile = wadd.immediate;
  } else {
    CompiledScenario warm = cs;
    warm.nu = static_cast<std::int64_t>(cs.w) * cs.ell;
    warm.change_block = cs.w;
    warm.remainder = 0;
    std::vector<double> delays(trials);
    std::vector<char> censored(trials);
    run_trials(warm, trials, threads, [&](std::size_t t) {
      ScenarioStream stream(warm, StreamPurpose::ChangePoint, t);
      // Feed the window with pre-change blocks, ignoring crossings, then
      // measure the stop relative to the change.
      const StoppingReport rep =
          run_one(warm, h, kind, stream, max_steps, warm.change_block);
      delays[t] = static_cast<double>(
          (rep.stopped ? rep.stopping_step : max_steps) * warm.ell);
      censored[t] = rep.stopped ? 0 : 1;
    });
    DelayEstimate hostile;
    std::vector<double> detected;
    for (std::int64_t t = 0; t < trials; ++t) {
      if (censored[t]) { ++hostile.censored; continue; }
      detected.push_back(delays[t]);
    }
    hostile.detected = static_cast<std::int64_t>(detected.size());
    if (!detected.empty()) {
      const MonteCarloEstimate m = Welford::reduce(detected);
      hostile.mean_copies = m.mean;
      hostile.se_copies = m.se;
    } else {
      hostile.mean_copies = std::numeric_limits<double>::quiet_NaN();
      hostile.se_copies = std::numeric_limits<double>::quiet_NaN();
    }
    wadd.hostile = hostile;
  }

  const bool hostile_worse =
      !(wadd.immediate.mean_copies >= wadd.hostile.mean_copies);
  wadd.reported = hostile_worse ? wadd.hostile : wadd.immediate;
  return wadd;
}

namespace {

TradeoffCurve sweep_core(const CompiledScenario& cs,
                         const std::vector<double>& grid, bool calibrated,
                         std::int64_t trials, DetectorKind kind,
                         unsigned threads) {
  if (grid.size() < 3)
    throw Error(ErrorKind::BadInput, "sweep needs at least 3 grid points");
  if (cs.block_divergence <= kDegenerateTol)
    throw Error(ErrorKind::DegenerateScenario,
                "post-change stream is indistinguishable from pre-change");

  TradeoffCurve curve;
  curve.kind = kind;
  curve.achievable_slope = static_cast<double>(cs.ell) / cs.block_divergence;
  curve.converse_slope = 1.0 / cs.quantum_re;

  for (double point : grid) {
    TradeoffRow row;
    double h;
    std::int64_t tfa_max_steps;
    if (calibrated) {
      row.target_tfa = point;
      const CalibrationResult cal =
          calibrate_threshold(cs, point, trials, kind, threads);
      h = cal.threshold;
      tfa_max_steps = std::min(
          cs.max_steps,
          std::max<std::int64_t>(1000, static_cast<std::int64_t>(50.0 * point)));
    } else {
      h = point;
      tfa_max_steps = cs.max_steps;
    }
    row.threshold = h;

    const MonteCarloEstimate tfa =
        estimate_tfa(cs, h, trials, tfa_max_steps, kind, threads);
    row.tfa_mean = tfa.mean;
    row.tfa_se = tfa.se;

    const WaddEstimate wadd =
        worst_case_delay(cs, h, trials, cs.max_steps, kind, threads);
    row.delay_mean = wadd.reported.mean_copies;
    row.delay_se = wadd.reported.se_copies;
    row.detected = wadd.reported.detected;
    row.false_alarms = wadd.reported.false_alarms;
    row.censored = wadd.reported.censored;

    const double delay_censor =
        wadd.reported.detected + wadd.reported.censored > 0
            ? static_cast<double>(wadd.reported.censored) /
                  static_cast<double>(trials)
            : 0.0;
    row.censor_fraction = std::max(tfa.censor_fraction, delay_censor);
    row.unreliable = row.censor_fraction > 0.01;
    curve.rows.push_back(row);
  }

  // Least-squares delay vs log(tfa); slope variance from per-row delay se.
  double sx = 0.0, sy = 0.0;
  const double n = static_cast<double>(curve.rows.size());
  std::vector<double> xs;
  for (const TradeoffRow& row : curve.rows) {
    if (!(row.tfa_mean > 0.0) || !std::isfinite(row.delay_mean))
      throw Error(ErrorKind::NumericalFailure,
                  "sweep produced an unusable row; raise trials or max_steps");
    xs.push_back(std::log(row.tfa_mean));
    sx += xs.back();
    sy += row.delay_mean;
  }
  const double xbar = sx / n, ybar = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (curve.rows[i].delay_mean - ybar);
  }
  if (sxx <= 0.0)
    throw Error(ErrorKind::BadInput, "sweep grid has no spread in tfa");
  curve.slope = sxy / sxx;
  curve.intercept = ybar - curve.slope * xbar;
  double var = 0.0;
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    const double wgt = (xs[i] - xbar) / sxx;
    var += wgt * wgt * curve.rows[i].delay_se * curve.rows[i].delay_se;
  }
  curve.slope_se = std::sqrt(var);
  return curve;
}

}  // namespace

TradeoffCurve tradeoff_targets(const CompiledScenario& cs,
                               const std::vector<double>& targets,
                               std::int64_t trials, DetectorKind kind,
                               unsigned threads) {
  return sweep_core(cs, targets, true, trials, kind, threads);
}

TradeoffCurve tradeoff_thresholds(const CompiledScenario& cs,
                                  const std::vector<double>& thresholds,
                                  std::int64_t trials, DetectorKind kind,
                                  unsigned threads) {
  return sweep_core(cs, thresholds, false, trials, kind, threads);
}

}  // namespace quqcd
