#include "quqcd/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace quqcd {

CusumDetector::CusumDetector(const ProbabilityVector& pre,
                             const ProbabilityVector& post, double threshold)
    : threshold_(threshold) {
  pre.validate();
  post.validate();
  if (pre.size() != post.size())
    throw Error(ErrorKind::LabelMismatch, "pre/post outcome counts differ");
  for (std::size_t i = 0; i < pre.size(); ++i)
    if (pre.labels[i] != post.labels[i])
      throw Error(ErrorKind::LabelMismatch,
                  "pre/post label mismatch at index " + std::to_string(i));
  if (threshold < 0.0)
    throw Error(ErrorKind::BadInput, "threshold must be >= 0");
  llr_.resize(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (pre.probs[i] <= 0.0)
      throw Error(ErrorKind::BadInput,
                  "pre-change distribution must have full support");
    // post mass 0 gives -infinity: such an outcome resets the statistic.
    llr_[i] = std::log(post.probs[i] / pre.probs[i]);
  }
}

double CusumDetector::log_likelihood(int outcome) const {
  if (outcome < 0 || outcome >= support())
    throw Error(ErrorKind::UnknownOutcome,
                "outcome " + std::to_string(outcome) + " outside support");
  return llr_[outcome];
}

bool CusumDetector::step(int outcome) {
  const double z = log_likelihood(outcome);
  statistic_ = std::max(0.0, statistic_ + z);
  ++steps_;
  return statistic_ >= threshold_;
}

void CusumDetector::reset() {
  statistic_ = 0.0;
  steps_ = 0;
}

WindowedEstimator::WindowedEstimator(int window, int support)
    : window_(window), support_(support) {
  if (window < 1) throw Error(ErrorKind::BadInput, "window must be >= 1");
  if (support < 1) throw Error(ErrorKind::BadInput, "support must be >= 1");
  counts_.assign(support, 0);
  ring_.assign(window, -1);
}

void WindowedEstimator::push(int outcome) {
  if (outcome < 0 || outcome >= support_)
    throw Error(ErrorKind::UnknownOutcome,
                "outcome " + std::to_string(outcome) + " outside support");
  const std::int64_t slot = pushed_ % window_;
  if (pushed_ >= window_) --counts_[ring_[slot]];
  ring_[slot] = outcome;
  ++counts_[outcome];
  ++pushed_;
}

std::int64_t WindowedEstimator::count(int symbol) const {
  if (symbol < 0 || symbol >= support_)
    throw Error(ErrorKind::UnknownOutcome,
                "symbol " + std::to_string(symbol) + " outside support");
  return counts_[symbol];
}

double WindowedEstimator::prob(int symbol) const {
  if (!warmed_up())
    throw Error(ErrorKind::NotWarmedUp,
                "window has " + std::to_string(pushed_) + " of " +
                    std::to_string(window_) + " observations");
  return (1.0 + static_cast<double>(count(symbol))) /
         static_cast<double>(window_ + support_);
}

ProbabilityVector kernel_estimate(const WindowedEstimator& est) {
  std::vector<double> probs(est.support());
  for (int j = 0; j < est.support(); ++j) probs[j] = est.prob(j);
  return ProbabilityVector::with_numeric_labels(std::move(probs));
}

NwlaDetector::NwlaDetector(const ProbabilityVector& pre, int window,
                           double threshold)
    : estimator_(window, static_cast<int>(pre.size())), threshold_(threshold) {
  pre.validate();
  if (threshold < 0.0)
    throw Error(ErrorKind::BadInput, "threshold must be >= 0");
  for (double p : pre.probs)
    if (p <= 0.0)
      throw Error(ErrorKind::BadInput,
                  "pre-change distribution must have full support");
  pre_ = pre.probs;
}

bool NwlaDetector::step(int outcome) {
  if (outcome < 0 || outcome >= support())
    throw Error(ErrorKind::UnknownOutcome,
                "outcome " + std::to_string(outcome) + " outside support");
  ++steps_;
  double z = 0.0;  // warm-up: no scoring until the window is full
  if (steps_ > window()) z = std::log(estimator_.prob(outcome) / pre_[outcome]);
  statistic_ = std::max(0.0, statistic_ + z);
  estimator_.push(outcome);
  return statistic_ >= threshold_;
}

void NwlaDetector::reset() {
  estimator_ = WindowedEstimator(window(), support());
  statistic_ = 0.0;
  steps_ = 0;
}

}  // namespace quqcd
