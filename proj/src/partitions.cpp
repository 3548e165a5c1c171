#include "quqcd/partitions.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace quqcd {

namespace {

void check_partition(const YoungDiagram& d, const char* who) {
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (d.rows[i] < 1)
      throw Error(ErrorKind::BadInput, std::string(who) + ": nonpositive row");
    if (i > 0 && d.rows[i] > d.rows[i - 1])
      throw Error(ErrorKind::BadInput, std::string(who) + ": rows not weakly decreasing");
  }
}

std::int64_t factorial(int n) {
  if (n < 0 || n > 20)
    throw Error(ErrorKind::BadInput, "factorial argument out of int64 range");
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void gen_partitions(int remaining, int max_part, int rows_left,
                    std::vector<int>& cur, std::vector<YoungDiagram>& out) {
  if (remaining == 0) {
    out.push_back(YoungDiagram{cur});
    return;
  }
  if (rows_left == 0) return;
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    if (static_cast<std::int64_t>(p) * rows_left < remaining) break;
    cur.push_back(p);
    gen_partitions(remaining - p, p, rows_left - 1, cur, out);
    cur.pop_back();
  }
}

using MnKey = std::pair<std::vector<int>, std::vector<int>>;

std::int64_t mn_impl(std::vector<int> lam, const std::vector<int>& alpha,
                     std::size_t alpha_pos, std::map<MnKey, std::int64_t>& memo) {
  while (!lam.empty() && lam.back() == 0) lam.pop_back();
  if (alpha_pos == alpha.size()) return lam.empty() ? 1 : 0;

  MnKey key{lam, std::vector<int>(alpha.begin() + alpha_pos, alpha.end())};
  if (auto it = memo.find(key); it != memo.end()) return it->second;

  const int t = alpha[alpha_pos];
  const int L = static_cast<int>(lam.size());
  // Beta numbers lam_i + (L-1-i): distinct, descending. Removing a border
  // strip of length t moves one beta number down by t onto a free slot.
  std::vector<int> beta(L);
  for (int i = 0; i < L; ++i) beta[i] = lam[i] + (L - 1 - i);

  std::int64_t total = 0;
  for (int i = 0; i < L; ++i) {
    const int nb = beta[i] - t;
    if (nb < 0) continue;
    bool occupied = false;
    int crossings = 0;
    for (int j = 0; j < L; ++j) {
      if (beta[j] == nb) { occupied = true; break; }
      if (beta[j] > nb && beta[j] < beta[i]) ++crossings;
    }
    if (occupied) continue;
    std::vector<int> nbeta = beta;
    nbeta[i] = nb;
    std::sort(nbeta.begin(), nbeta.end(), std::greater<int>());
    std::vector<int> nlam(L);
    for (int j = 0; j < L; ++j) nlam[j] = nbeta[j] - (L - 1 - j);
    const std::int64_t sign = (crossings % 2 == 0) ? 1 : -1;
    total += sign * mn_impl(std::move(nlam), alpha, alpha_pos + 1, memo);
  }
  memo.emplace(std::move(key), total);
  return total;
}

}  // namespace

int YoungDiagram::boxes() const {
  return std::accumulate(rows.begin(), rows.end(), 0);
}

std::string YoungDiagram::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(rows[i]);
  }
  s += ")";
  return s;
}

std::vector<YoungDiagram> enumerate_young_diagrams(int ell, int max_rows) {
  if (ell < 1) throw Error(ErrorKind::BadInput, "ell must be >= 1");
  if (max_rows < 1) throw Error(ErrorKind::BadInput, "max_rows must be >= 1");
  std::vector<YoungDiagram> out;
  std::vector<int> cur;
  gen_partitions(ell, ell, max_rows, cur, out);
  return out;
}

std::int64_t hook_dimension(const YoungDiagram& lambda) {
  check_partition(lambda, "hook_dimension");
  const int n = lambda.boxes();
  if (n == 0) return 1;
  std::int64_t hook_product = 1;
  for (int i = 0; i < lambda.height(); ++i) {
    for (int j = 0; j < lambda.rows[i]; ++j) {
      int col_arm = 0;  // boxes strictly below (i, j)
      for (int k = i + 1; k < lambda.height(); ++k)
        if (lambda.rows[k] > j) ++col_arm;
      hook_product *= (lambda.rows[i] - j) + col_arm;
    }
  }
  return factorial(n) / hook_product;
}

std::int64_t mn_character(const YoungDiagram& lambda,
                          const YoungDiagram& cycle_type) {
  check_partition(lambda, "mn_character lambda");
  check_partition(cycle_type, "mn_character cycle_type");
  if (lambda.boxes() != cycle_type.boxes())
    throw Error(ErrorKind::BadInput,
                "lambda and cycle_type partition different integers");
  std::map<MnKey, std::int64_t> memo;  // local: keeps calls reentrant
  return mn_impl(lambda.rows, cycle_type.rows, 0, memo);
}

}  // namespace quqcd
