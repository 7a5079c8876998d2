#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "qbdd/matrix.hpp"

namespace qbdd::zq {

using Vec = std::vector<std::int64_t>;

// Decomposition of G = L mod q as Z_{q_1} x ... x Z_{q_r}; gens[j] has order qvec[j].
struct FiniteGroupDecomp {
  std::int64_t q = 1;
  std::size_t n = 0;
  std::vector<std::int64_t> qvec;
  std::vector<Vec> gens;

  std::size_t r() const { return qvec.size(); }
  // |G| = prod q_i, saturating at the int64 maximum.
  std::int64_t order() const;
  std::int64_t entry(std::size_t i, std::size_t j) const { return gens[j][i]; }
};

struct Lambda1 {
  double value = std::numeric_limits<double>::infinity();
  std::int64_t sq = 0;      // squared length; meaningful unless degenerate
  bool degenerate = false;  // trivial group: no nonzero element exists
};

struct GroupCvp {
  Vec s;
  std::int64_t dist_sq = 0;
  double dist = 0;
};

constexpr std::int64_t kGroupBudget = 10'000'000;

std::int64_t mod(std::int64_t a, std::int64_t q);
// Zero-centred representative in (-q/2, q/2].
std::int64_t centered(std::int64_t a, std::int64_t q);
Vec reduce(const Vec& x, std::int64_t q);
std::int64_t modnorm_sq(const Vec& x, std::int64_t q);
double modnorm(const Vec& x, std::int64_t q);

FiniteGroupDecomp decompose(const IntMatrix& basis, std::int64_t q);
// Generating matrix of G followed by q*I, reduced to a basis by HNF.
IntMatrix lattice_basis(const FiniteGroupDecomp& d);
bool same_group(const FiniteGroupDecomp& a, const FiniteGroupDecomp& b);

Vec element(const FiniteGroupDecomp& d, const Vec& c);
std::int64_t charphase(const Vec& a, const Vec& c, const FiniteGroupDecomp& d);
// Coefficient negation inside the coefficient space.
Vec negate_coeffs(const Vec& c, const FiniteGroupDecomp& d);
Vec add_coeffs(const Vec& c, const Vec& e, const FiniteGroupDecomp& d);

GroupCvp group_cvp_exact(const FiniteGroupDecomp& d, const Vec& t,
                         std::int64_t budget = kGroupBudget);
Lambda1 lambda1_group(const FiniteGroupDecomp& d, std::int64_t budget = kGroupBudget);
// lambda_1 of the integer lattice {x : x mod q in G}: min(lambda_1(G), q).
std::int64_t lambda1_lattice_sq(const FiniteGroupDecomp& d);

ZVec lift_solution(const FiniteGroupDecomp& d, const Vec& s, const ZVec& t_int);

// Some integer s with G s = v (mod q) for the columns of g, if one exists.
std::optional<ZVec> solve_mod_q(const IntMatrix& g, const ZVec& v, const BigInt& q);

// Visits every coefficient vector of C in lexicographic order along with its
// group element; the callback returns false to stop.
template <class F>
void for_each_element(const FiniteGroupDecomp& d, F&& f) {
  const std::size_t r = d.r();
  Vec c(r, 0), v(d.n, 0);
  while (true) {
    if (!f(static_cast<const Vec&>(c), static_cast<const Vec&>(v))) return;
    std::size_t j = r;
    while (j > 0) {
      --j;
      ++c[j];
      for (std::size_t i = 0; i < d.n; ++i) {
        v[i] += d.gens[j][i];
        if (v[i] >= d.q) v[i] -= d.q;
      }
      if (c[j] < d.qvec[j]) break;
      // c[j] wrapped: q_j * g_j = 0, so the element already returned to its
      // value without this generator.
      c[j] = 0;
      if (j == 0) return;
    }
    if (r == 0) return;
  }
}

}  // namespace qbdd::zq
