#include "quqcd/prob.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

namespace quqcd {

namespace {
constexpr double kSumTol = 1e-9;
constexpr double kNegTol = -1e-12;
}  // namespace

void ProbabilityVector::validate() const {
  if (probs.empty())
    throw Error(ErrorKind::BadInput, "probability vector is empty");
  if (labels.size() != probs.size())
    throw Error(ErrorKind::BadInput, "labels and probs differ in length");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= kNegTol))
      throw Error(ErrorKind::BadInput,
                  "negative probability entry " + std::to_string(p));
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTol)
    throw Error(ErrorKind::BadInput,
                "probabilities sum to " + std::to_string(sum));
  std::unordered_set<std::string> seen;
  for (const auto& l : labels)
    if (!seen.insert(l).second)
      throw Error(ErrorKind::BadInput, "duplicate outcome label " + l);
}

ProbabilityVector ProbabilityVector::with_numeric_labels(std::vector<double> p) {
  ProbabilityVector v;
  v.labels.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v.labels.push_back(std::to_string(i));
  v.probs = std::move(p);
  v.validate();
  return v;
}

double classical_relative_entropy(const ProbabilityVector& q,
                                  const ProbabilityVector& p) {
  if (q.size() != p.size())
    throw Error(ErrorKind::LabelMismatch, "outcome counts differ");
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q.labels[i] != p.labels[i])
      throw Error(ErrorKind::LabelMismatch,
                  "label mismatch at index " + std::to_string(i) + ": " +
                      q.labels[i] + " vs " + p.labels[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = q.probs[i];
    if (qi <= 0.0) continue;  // 0 log 0 = 0
    if (p.probs[i] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += qi * std::log(qi / p.probs[i]);
  }
  return sum;
}

}  // namespace quqcd
