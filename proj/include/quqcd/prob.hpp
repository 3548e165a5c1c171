#pragma once

#include <string>
#include <vector>

#include "quqcd/errors.hpp"

namespace quqcd {

/// Finite distribution over labeled outcomes. Entries are nonnegative and sum
/// to 1 within 1e-9; labels are distinct and positionally aligned with probs.
struct ProbabilityVector {
  std::vector<double> probs;
  std::vector<std::string> labels;

  std::size_t size() const { return probs.size(); }

  /// Throws BadInput if any invariant fails.
  void validate() const;

  /// Distribution with labels "0".."d-1".
  static ProbabilityVector with_numeric_labels(std::vector<double> p);
};

/// D(q||p) in nats. Returns +infinity when q puts mass where p has none.
/// Throws LabelMismatch unless labels agree position by position.
double classical_relative_entropy(const ProbabilityVector& q,
                                  const ProbabilityVector& p);

}  // namespace quqcd
