#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "quqcd/prob.hpp"

namespace quqcd {

/// Result of running a detector on a stream until it crosses its threshold
/// or exhausts max_steps. Steps are 1-based; stopping_step is the index of
/// the observation that triggered the crossing.
struct StoppingReport {
  bool stopped = false;
  std::int64_t stopping_step = 0;
  bool censored = false;
  std::int64_t steps_run = 0;
  double final_statistic = 0.0;
  double threshold = 0.0;
  std::optional<std::vector<double>> statistic_trace;
};

/// Page's CUSUM with a known post-change distribution:
///   S_n = max(0, S_{n-1} + log(q[x]/p[x])), stop when S_n >= h.
/// Outcomes with q[x] = 0 carry a -infinity increment, which clamps the
/// statistic back to 0; outcomes outside p's support are rejected.
class CusumDetector {
 public:
  CusumDetector(const ProbabilityVector& pre, const ProbabilityVector& post,
                double threshold);

  /// Consumes one outcome; returns true when the statistic reached the
  /// threshold on this step.
  bool step(int outcome);

  double statistic() const { return statistic_; }
  double threshold() const { return threshold_; }
  std::int64_t steps() const { return steps_; }
  int support() const { return static_cast<int>(llr_.size()); }
  double log_likelihood(int outcome) const;
  void reset();

 private:
  std::vector<double> llr_;
  double threshold_;
  double statistic_ = 0.0;
  std::int64_t steps_ = 0;
};

/// Sliding window of the last `window` outcomes with per-symbol counts.
class WindowedEstimator {
 public:
  WindowedEstimator(int window, int support);

  void push(int outcome);
  bool warmed_up() const { return pushed_ >= window_; }
  std::int64_t pushed() const { return pushed_; }
  int window() const { return window_; }
  int support() const { return support_; }
  std::int64_t count(int symbol) const;

  /// Smoothed kernel estimate (1 + count) / (window + support).
  /// Throws NotWarmedUp until the window is full.
  double prob(int symbol) const;

 private:
  int window_;
  int support_;
  std::vector<std::int64_t> counts_;
  std::vector<int> ring_;
  std::int64_t pushed_ = 0;
};

/// Kernel estimate as a distribution with labels "0".."d-1".
ProbabilityVector kernel_estimate(const WindowedEstimator& est);

/// Windowed-CUSUM for an unknown post-change distribution. Step n scores the
/// incoming outcome against the kernel estimate built from the previous w
/// outcomes (zero increment during the first w warm-up steps), then admits
/// the outcome into the window.
class NwlaDetector {
 public:
  NwlaDetector(const ProbabilityVector& pre, int window, double threshold);

  bool step(int outcome);

  double statistic() const { return statistic_; }
  double threshold() const { return threshold_; }
  std::int64_t steps() const { return steps_; }
  int support() const { return static_cast<int>(pre_.size()); }
  int window() const { return estimator_.window(); }
  const WindowedEstimator& estimator() const { return estimator_; }
  void reset();

 private:
  std::vector<double> pre_;
  WindowedEstimator estimator_;
  double threshold_;
  double statistic_ = 0.0;
  std::int64_t steps_ = 0;
};

/// Drives a detector with outcomes from `gen` until it stops or max_steps
/// observations have been consumed.
template <class Detector, class Gen>
StoppingReport run_to_stop(Detector& det, Gen&& gen, std::int64_t max_steps,
                           bool record_trace = false) {
  if (max_steps < 1) throw Error(ErrorKind::BadInput, "max_steps must be >= 1");
  StoppingReport rep;
  rep.threshold = det.threshold();
  if (record_trace) rep.statistic_trace.emplace();
  for (std::int64_t n = 1; n <= max_steps; ++n) {
    const bool crossed = det.step(gen());
    if (record_trace) rep.statistic_trace->push_back(det.statistic());
    if (crossed) {
      rep.stopped = true;
      rep.stopping_step = n;
      rep.steps_run = n;
      rep.final_statistic = det.statistic();
      return rep;
    }
  }
  rep.censored = true;
  rep.steps_run = max_steps;
  rep.final_statistic = det.statistic();
  return rep;
}

}  // namespace quqcd
