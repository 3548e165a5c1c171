#pragma once

#include "quqcd/density.hpp"

namespace quqcd {

/// Quantum relative entropy S(sigma||rho) = Tr[sigma(log sigma - log rho)] in
/// nats. Returns +infinity when supp(sigma) is not contained in supp(rho).
/// Throws DimensionMismatch when the operators live on different spaces.
double quantum_relative_entropy(const DensityOperator& sigma,
                                const DensityOperator& rho);

}  // namespace quqcd
