#include "quqcd/schur.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "quqcd/entropy.hpp"

namespace quqcd {

namespace {

constexpr double kEigMergeRel = 1e-10;    // rho eigenvalue merging
constexpr double kProductMergeRel = 1e-9;  // tensor-product value merging
constexpr double kCompletenessTol = 1e-8;

std::int64_t checked_pow(std::int64_t b, int e, std::int64_t cap) {
  std::int64_t v = 1;
  for (int i = 0; i < e; ++i) {
    if (v > cap / b)
      throw Error(ErrorKind::DimensionCapExceeded,
                  "b^ell exceeds cap " + std::to_string(cap));
    v *= b;
  }
  return v;
}

/// digits[idx * ell + s] = site-s digit of basis index idx; site 0 is the
/// most significant digit (matches the kron convention in linalg).
std::vector<int> digit_table(std::int64_t dim, int ell, int b) {
  std::vector<int> digits(static_cast<std::size_t>(dim) * ell);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    std::int64_t rem = idx;
    for (int s = ell - 1; s >= 0; --s) {
      digits[idx * ell + s] = static_cast<int>(rem % b);
      rem /= b;
    }
  }
  return digits;
}

YoungDiagram cycle_type_of(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  std::vector<bool> seen(n, false);
  std::vector<int> cycles;
  for (int i = 0; i < n; ++i) {
    if (seen[i]) continue;
    int len = 0, j = i;
    while (!seen[j]) {
      seen[j] = true;
      j = perm[j];
      ++len;
    }
    cycles.push_back(len);
  }
  std::sort(cycles.begin(), cycles.end(), std::greater<int>());
  return YoungDiagram{cycles};
}

/// Isotypic projectors of the site-permutation action on (C^b)^{tensor ell},
/// one per diagram with at most b rows, as real matrices. Cached per (ell, b)
/// behind a mutex; the tables are read-only once published.
using ProjectorTable = std::vector<std::pair<YoungDiagram, Eigen::MatrixXd>>;

std::shared_ptr<const ProjectorTable> projector_table(int ell, int b,
                                                      const SchurCaps& caps) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const ProjectorTable>> cache;

  std::lock_guard<std::mutex> lock(cache_mutex);
  const auto key = std::make_pair(ell, b);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const std::int64_t dim = checked_pow(b, ell, caps.max_tensor_dim);
  const std::vector<int> digits = digit_table(dim, ell, b);

  // Orbit sums O_c = sum of permutation operators with cycle type c.
  // U_pi moves the site-s digit to site pi(s).
  std::map<YoungDiagram, Eigen::MatrixXd> orbits;
  std::vector<int> perm(ell);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> moved(ell);
  do {
    Eigen::MatrixXd& orbit =
        orbits.try_emplace(cycle_type_of(perm), Eigen::MatrixXd::Zero(dim, dim))
            .first->second;
    for (std::int64_t col = 0; col < dim; ++col) {
      for (int s = 0; s < ell; ++s) moved[perm[s]] = digits[col * ell + s];
      std::int64_t row = 0;
      for (int s = 0; s < ell; ++s) row = row * b + moved[s];
      orbit(row, col) += 1.0;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::int64_t ell_factorial = 1;
  for (int i = 2; i <= ell; ++i) ell_factorial *= i;

  auto table = std::make_shared<ProjectorTable>();
  for (const YoungDiagram& lambda : enumerate_young_diagrams(ell, b)) {
    Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& [ctype, orbit] : orbits)
      proj += static_cast<double>(mn_character(lambda, ctype)) * orbit;
    proj *= static_cast<double>(hook_dimension(lambda)) /
            static_cast<double>(ell_factorial);
    table->emplace_back(lambda, std::move(proj));
  }
  cache.emplace(key, table);
  return table;
}

struct EigenGroup {
  double value = 0.0;            // mean of merged eigenvalues
  std::vector<int> members;      // eigenvector column indices
};

std::vector<EigenGroup> merged_groups(const Spectrum& spec) {
  if (spec.rank() != spec.dim())
    throw Error(ErrorKind::RankDeficient,
                "construction requires a full-rank pre-change state");
  std::vector<EigenGroup> groups;
  for (int i = 0; i < spec.dim(); ++i) {
    const double v = spec.eigenvalues[i];
    if (!groups.empty()) {
      const double head = spec.eigenvalues[groups.back().members.front()];
      if (std::abs(head - v) <= kEigMergeRel * std::max(head, v)) {
        groups.back().members.push_back(i);
        continue;
      }
    }
    groups.push_back(EigenGroup{0.0, {i}});
  }
  for (auto& g : groups) {
    double sum = 0.0;
    for (int i : g.members) sum += spec.eigenvalues[i];
    g.value = sum / static_cast<double>(g.members.size());
  }
  return groups;
}

struct TypeInfo {
  std::vector<int> counts;   // occupation per merged group
  double value = 0.0;        // product of group values
  std::int64_t degeneracy = 0;
};

void gen_types(const std::vector<EigenGroup>& groups, int ell, std::size_t g,
               int used, std::vector<int>& cur, std::vector<TypeInfo>& out) {
  if (g + 1 == groups.size()) {
    cur[g] = ell - used;
    double value = 1.0;
    std::int64_t deg = 1;
    // degeneracy = multinomial(ell; counts) * prod multiplicity^count
    std::int64_t remaining = ell;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      value *= std::pow(groups[i].value, cur[i]);
      for (int c = 1; c <= cur[i]; ++c) {
        deg = deg * remaining / c;  // exact: running binomial product
        --remaining;
      }
      for (int c = 0; c < cur[i]; ++c)
        deg *= static_cast<std::int64_t>(groups[i].members.size());
    }
    out.push_back(TypeInfo{cur, value, deg});
    return;
  }
  for (int c = 0; c <= ell - used; ++c) {
    cur[g] = c;
    gen_types(groups, ell, g + 1, used + c, cur, out);
  }
}

struct ClassTable {
  std::vector<EigenvalueClass> classes;            // descending value
  std::map<std::vector<int>, int> class_of_type;   // type counts -> class idx
};

ClassTable build_classes(const std::vector<EigenGroup>& groups, int ell) {
  std::vector<TypeInfo> types;
  std::vector<int> cur(groups.size(), 0);
  gen_types(groups, ell, 0, 0, cur, types);
  std::sort(types.begin(), types.end(), [](const TypeInfo& a, const TypeInfo& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.counts > b.counts;
  });

  ClassTable table;
  for (const TypeInfo& t : types) {
    bool merged = false;
    if (!table.classes.empty()) {
      const double head = table.classes.back().value;
      if (std::abs(head - t.value) <=
          kProductMergeRel * std::max(std::abs(head), std::abs(t.value)))
        merged = true;
    }
    if (!merged)
      table.classes.push_back(EigenvalueClass{t.value, {}, 0});
    EigenvalueClass& cls = table.classes.back();
    cls.member_types.push_back(t.counts);
    cls.degeneracy += t.degeneracy;
    table.class_of_type.emplace(t.counts, static_cast<int>(table.classes.size()) - 1);
  }
  return table;
}

/// Class index of every product-basis tuple of rho-eigenbasis indices.
std::vector<int> tuple_classes(const std::vector<EigenGroup>& groups,
                               const ClassTable& table, std::int64_t dim,
                               int ell, int b) {
  std::vector<int> group_of_eig(b, -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int e : groups[g].members) group_of_eig[e] = g;

  const std::vector<int> digits = digit_table(dim, ell, b);
  std::vector<int> out(dim);
  std::vector<int> counts(groups.size());
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int s = 0; s < ell; ++s) ++counts[group_of_eig[digits[idx * ell + s]]];
    out[idx] = table.class_of_type.at(counts);
  }
  return out;
}

Pvm build_pvm(const DensityOperator& rho, int ell, bool isotypic,
              const SchurCaps& caps) {
  const int b = rho.dim();
  if (ell < 1) throw Error(ErrorKind::BadInput, "ell must be >= 1");
  if (ell > caps.max_ell)
    throw Error(ErrorKind::DimensionCapExceeded,
                "ell exceeds cap " + std::to_string(caps.max_ell));
  const std::int64_t dim = checked_pow(b, ell, caps.max_tensor_dim);

  const Spectrum& spec = rho.spectrum();
  const std::vector<EigenGroup> groups = merged_groups(spec);
  ClassTable table = build_classes(groups, ell);
  const std::vector<int> tuple_class = tuple_classes(groups, table, dim, ell, b);
  const int n_classes = static_cast<int>(table.classes.size());

  std::vector<std::vector<std::int64_t>> class_members(n_classes);
  for (std::int64_t idx = 0; idx < dim; ++idx)
    class_members[tuple_class[idx]].push_back(idx);

  const ComplexMatrix W = tensor_power(spec.eigenvectors, ell, caps.max_tensor_dim);

  Pvm pvm;
  pvm.ell = ell;
  pvm.b = b;
  pvm.dim = dim;
  pvm.classes = std::move(table.classes);

  struct Piece {
    std::optional<YoungDiagram> diagram;
    Eigen::MatrixXd matrix;  // restricted to a class block, rho eigenbasis
  };
  std::vector<Piece> pieces;
  if (isotypic) {
    auto projs = projector_table(ell, b, caps);
    for (const auto& [lambda, proj] : *projs)
      pieces.push_back(Piece{lambda, proj});
  } else {
    pieces.push_back(
        Piece{std::nullopt, Eigen::MatrixXd::Identity(dim, dim)});
  }

  std::int64_t rank_sum = 0;
  for (int i = 0; i < n_classes; ++i) {
    const auto& members = class_members[i];
    const std::int64_t n = static_cast<std::int64_t>(members.size());
    if (n == 0) continue;
    ComplexMatrix Wi(dim, n);
    for (std::int64_t c = 0; c < n; ++c) Wi.col(c) = W.col(members[c]);

    for (const Piece& piece : pieces) {
      // Permutation operators preserve the digit multiset of a tuple, so the
      // isotypic projector is exactly block diagonal across classes; masking
      // rows and columns to the class loses nothing.
      Eigen::MatrixXd block(n, n);
      double trace = 0.0;
      for (std::int64_t r = 0; r < n; ++r) {
        for (std::int64_t c = 0; c < n; ++c)
          block(r, c) = piece.matrix(members[r], members[c]);
        trace += block(r, r);
      }
      const std::int64_t rank = std::llround(trace);
      if (rank < 1) continue;  // lambda incompatible with this class

      ComplexMatrix proj = Wi * block.cast<std::complex<double>>() * Wi.adjoint();
      proj = ((proj + proj.adjoint()) * 0.5).eval();
      pvm.projectors.push_back(std::move(proj));
      pvm.labels.push_back(PvmLabel{i, piece.diagram});
      pvm.ranks.push_back(rank);
      rank_sum += rank;
    }
  }

  if (rank_sum != dim)
    throw Error(ErrorKind::NumericalFailure,
                "projector ranks sum to " + std::to_string(rank_sum) +
                    ", expected " + std::to_string(dim));
  if (static_cast<std::int64_t>(pvm.size()) > pvm.count_bound())
    throw Error(ErrorKind::NumericalFailure,
                "outcome count exceeds (ell+1)^b bound");
  const double residual = pvm.completeness_residual();
  if (residual > kCompletenessTol)
    throw Error(ErrorKind::NumericalFailure,
                "completeness residual " + std::to_string(residual));
  return pvm;
}

constexpr double kProbNegTol = -1e-12;
constexpr double kProbSumTol = 1e-9;
constexpr double kFloorSlack = 1e-12;

ProbabilityVector measure(const Pvm& pvm, const ComplexMatrix& state) {
  ProbabilityVector out;
  out.probs.reserve(pvm.size());
  out.labels.reserve(pvm.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < pvm.size(); ++k) {
    const double raw =
        pvm.projectors[k].cwiseProduct(state.transpose()).sum().real();
    if (raw < kProbNegTol)
      throw Error(ErrorKind::NormalizationFailure,
                  "outcome " + pvm.labels[k].str() + " has probability " +
                      std::to_string(raw));
    const double p = std::max(raw, 0.0);
    out.probs.push_back(p);
    out.labels.push_back(pvm.labels[k].str());
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTol)
    throw Error(ErrorKind::NormalizationFailure,
                "probabilities sum to " + std::to_string(sum));
  for (double& p : out.probs) p /= sum;
  out.validate();
  return out;
}

}  // namespace

std::string PvmLabel::str() const {
  std::string s = "class#" + std::to_string(class_index);
  if (diagram) s += ":λ=" + diagram->to_string();
  return s;
}

std::int64_t Pvm::count_bound() const {
  std::int64_t v = 1;
  for (int i = 0; i < b; ++i) v *= (ell + 1);
  return v;
}

double Pvm::completeness_residual() const {
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (const auto& m : projectors) sum += m;
  sum -= ComplexMatrix::Identity(dim, dim);
  return frobenius_norm(sum);
}

std::vector<EigenvalueClass> eigenvalue_classes(const Spectrum& spec, int ell) {
  if (ell < 1) throw Error(ErrorKind::BadInput, "ell must be >= 1");
  return build_classes(merged_groups(spec), ell).classes;
}

ComplexMatrix isotypic_projector(const YoungDiagram& lambda, int b,
                                 const SchurCaps& caps) {
  const int ell = lambda.boxes();
  if (ell < 1) throw Error(ErrorKind::BadInput, "lambda is empty");
  if (ell > caps.max_ell)
    throw Error(ErrorKind::DimensionCapExceeded,
                "ell exceeds cap " + std::to_string(caps.max_ell));
  if (b < 1) throw Error(ErrorKind::BadInput, "b must be >= 1");
  checked_pow(b, ell, caps.max_tensor_dim);
  for (const auto& [cand, proj] : *projector_table(ell, b, caps))
    if (cand == lambda) return proj.cast<std::complex<double>>();
  // Diagrams taller than b act as zero on (C^b)^{tensor ell}.
  if (lambda.height() > b) {
    const std::int64_t dim = checked_pow(b, ell, caps.max_tensor_dim);
    return ComplexMatrix::Zero(dim, dim);
  }
  throw Error(ErrorKind::BadInput, "not a partition of ell: " + lambda.to_string());
}

Pvm schur_pvm(const DensityOperator& rho, int ell, const SchurCaps& caps) {
  return build_pvm(rho, ell, true, caps);
}

Pvm type_pvm(const DensityOperator& rho, int ell, const SchurCaps& caps) {
  return build_pvm(rho, ell, false, caps);
}

InducedModel induce(std::shared_ptr<const Pvm> pvm, const DensityOperator& rho,
                    const DensityOperator& sigma) {
  if (!pvm) throw Error(ErrorKind::BadInput, "null pvm");
  if (rho.dim() != pvm->b || sigma.dim() != pvm->b)
    throw Error(ErrorKind::DimensionMismatch,
                "state dimension does not match pvm base dimension");
  const int ell = pvm->ell;

  InducedModel model;
  model.pvm = pvm;
  model.gamma_min = rho.spectrum().gamma_min();

  const ComplexMatrix rho_l = tensor_power(rho.matrix(), ell, kDefaultDimCap);
  const ComplexMatrix sigma_l =
      (ell > 1) ? tensor_power(sigma.matrix(), ell, kDefaultDimCap)
                : sigma.matrix();
  model.pre = measure(*pvm, rho_l);
  model.post = measure(*pvm, ell > 1 ? sigma_l : sigma.matrix());
  for (int r = 1; r < ell; ++r) {
    const ComplexMatrix mixed =
        kron(tensor_power(rho.matrix(), r, kDefaultDimCap),
             tensor_power(sigma.matrix(), ell - r, kDefaultDimCap));
    model.hybrids.push_back(measure(*pvm, mixed));
  }

  const double floor = std::pow(model.gamma_min, ell) - kFloorSlack;
  for (std::size_t k = 0; k < model.pre.size(); ++k)
    if (model.pre.probs[k] < floor)
      throw Error(ErrorKind::NormalizationFailure,
                  "pre-change probability " + std::to_string(model.pre.probs[k]) +
                      " fell below the gamma_min^ell floor; pvm/state mismatch");
  return model;
}

std::vector<EntropyGapRow> entropy_gap_sweep(const DensityOperator& rho,
                                             const DensityOperator& sigma,
                                             int ell_max, const SchurCaps& caps) {
  if (ell_max < 1) throw Error(ErrorKind::BadInput, "ell_max must be >= 1");
  const double s = quantum_relative_entropy(sigma, rho);
  std::vector<EntropyGapRow> rows;
  for (int ell = 1; ell <= ell_max; ++ell) {
    auto pvm = std::make_shared<const Pvm>(schur_pvm(rho, ell, caps));
    const InducedModel model = induce(pvm, rho, sigma);
    const double d = classical_relative_entropy(model.post, model.pre);
    const double normalized = d / static_cast<double>(ell);
    if (normalized > s + 1e-8)
      throw Error(ErrorKind::NumericalFailure,
                  "data processing inequality violated at ell=" +
                      std::to_string(ell));
    rows.push_back(EntropyGapRow{ell, normalized, s});
  }
  return rows;
}

}  // namespace quqcd
