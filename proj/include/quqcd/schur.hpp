#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "quqcd/density.hpp"
#include "quqcd/partitions.hpp"
#include "quqcd/prob.hpp"

namespace quqcd {

/// Construction limits. max_ell bounds the permutation-group work (ell!);
/// max_tensor_dim bounds b^ell. Defaults admit ell <= 8 at b = 2 and
/// ell <= 5 at b = 3.
struct SchurCaps {
  int max_ell = 8;
  std::int64_t max_tensor_dim = 256;
};

/// One merged spectral value of rho^{tensor ell} together with every
/// eigenvalue-occupation type that produces it. Types count occupations of
/// the merged eigenvalue groups of rho (index 0 = largest eigenvalue).
struct EigenvalueClass {
  double value = 0.0;
  std::vector<std::vector<int>> member_types;
  std::int64_t degeneracy = 0;
};

struct PvmLabel {
  int class_index = 0;
  std::optional<YoungDiagram> diagram;  // absent for type-only outcomes

  std::string str() const;  // "class#i:λ=(r1,...)" or "class#i"
};

/// Projector-valued measurement on (C^b)^{tensor ell}, stored in the
/// computational product basis. Outcomes are ordered class-major (descending
/// class value), then by diagram in descending lexicographic order.
struct Pvm {
  int ell = 1;
  int b = 1;
  std::int64_t dim = 1;
  std::vector<ComplexMatrix> projectors;
  std::vector<PvmLabel> labels;
  std::vector<std::int64_t> ranks;
  std::vector<EigenvalueClass> classes;

  std::size_t size() const { return projectors.size(); }
  std::int64_t count_bound() const;           // (ell+1)^b
  double completeness_residual() const;        // ||sum_k M_k - I||_F
};

/// Merged spectral classes of rho^{tensor ell}: eigenvalues of rho merged at
/// relative tolerance 1e-10, product values merged at relative tolerance
/// 1e-9. Sorted by descending value. Requires a full-rank spectrum.
std::vector<EigenvalueClass> eigenvalue_classes(const Spectrum& spec, int ell);

/// Isotypic projector onto the lambda component of the S_ell action
/// permuting tensor factors of (C^b)^{tensor ell}, ell = lambda.boxes().
ComplexMatrix isotypic_projector(const YoungDiagram& lambda, int b,
                                 const SchurCaps& caps = {});

/// Pre-change-only universal measurement: eigenvalue classes of
/// rho^{tensor ell} refined by the symmetric-group isotypic decomposition.
/// Depends on rho alone; outcome count is at most (ell+1)^b.
Pvm schur_pvm(const DensityOperator& rho, int ell, const SchurCaps& caps = {});

/// Ablation baseline: eigenvalue classes only, no isotypic refinement.
Pvm type_pvm(const DensityOperator& rho, int ell, const SchurCaps& caps = {});

/// Classical streams induced by measuring block states with a PVM.
/// hybrids[r-1] is the distribution of rho^{tensor r} (x) sigma^{tensor
/// (ell-r)} for r = 1..ell-1 (the block straddling a change point).
struct InducedModel {
  std::shared_ptr<const Pvm> pvm;
  ProbabilityVector pre;    // P^(ell)
  ProbabilityVector post;   // Q^(ell)
  std::vector<ProbabilityVector> hybrids;
  double gamma_min = 0.0;   // smallest eigenvalue of rho
};

InducedModel induce(std::shared_ptr<const Pvm> pvm, const DensityOperator& rho,
                    const DensityOperator& sigma);

struct EntropyGapRow {
  int ell = 0;
  double normalized_divergence = 0.0;  // D(Q^(ell) || P^(ell)) / ell
  double quantum_re = 0.0;             // S(sigma || rho)
};

/// Rows for ell = 1..ell_max. Each row satisfies the data processing
/// inequality: normalized_divergence <= quantum_re (+1e-8 numerical slack).
std::vector<EntropyGapRow> entropy_gap_sweep(const DensityOperator& rho,
                                             const DensityOperator& sigma,
                                             int ell_max,
                                             const SchurCaps& caps = {});

}  // namespace quqcd
