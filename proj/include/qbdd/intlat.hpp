#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qbdd/matrix.hpp"

namespace qbdd::intlat {

// Exact Gram-Schmidt data of the columns b_0..b_{k-1}.
struct GramSchmidtData {
  std::vector<QVec> bstar;
  std::vector<Rational> bstar_sq;
  // mu[i][j] for j < i; mu[i][i] = 1.
  std::vector<std::vector<Rational>> mu;
};

struct HnfResult {
  IntMatrix h;  // n x n lower triangular, positive diagonal, reduced left of it
  IntMatrix v;  // unimodular k x k with M * V = [H | 0]
};

struct SnfResult {
  IntMatrix u, d, v;  // U * M * V = D
};

struct LllResult {
  IntMatrix basis;
  IntMatrix transform;  // basis = input * transform
};

struct CvpResult {
  ZVec coeffs;
  Rational dist_sq;
  std::uint64_t nodes = 0;
};

constexpr std::uint64_t kDefaultEnumBudget = 10'000'000;
// Node budget for enumeration, overridable through QBDD_ENUM_BUDGET.
std::uint64_t enum_budget();

HnfResult hnf_with_transform(const IntMatrix& m);
IntMatrix hnf(const IntMatrix& m);
SnfResult snf(const IntMatrix& m);
// Diagonal of D as a list (length min(rows, cols)).
ZVec snf_diagonal(const IntMatrix& m);

GramSchmidtData gram_schmidt(const IntMatrix& b);

LllResult lll_with_transform(const IntMatrix& b, const Rational& delta = Rational(3, 4));
IntMatrix lll_reduce(const IntMatrix& b, const Rational& delta = Rational(3, 4));
// Size-reduction and Lovasz checks straight from Gram-Schmidt data.
bool is_lll_reduced(const IntMatrix& b, const Rational& delta = Rational(3, 4));

ZVec babai_nearest_plane(const IntMatrix& b, const QVec& t);

IntMatrix mg_complete(const IntMatrix& b, const IntMatrix& s);

CvpResult exact_cvp_enum(const IntMatrix& b, const QVec& t,
                         std::optional<Rational> radius_sq = std::nullopt,
                         std::uint64_t budget = enum_budget());

CvpResult block_reduce_cvp(const IntMatrix& b, const QVec& t, std::size_t beta,
                           std::uint64_t budget = enum_budget());

BigInt periodicity(const IntMatrix& b);
ZVec rect_periodicity(const IntMatrix& b);

// Squared length of a shortest nonzero vector (an integer for integer lattices).
BigInt lambda1_sq_exact(const IntMatrix& b, std::uint64_t budget = enum_budget());

// True iff v is an integer combination of the columns of b (square, full rank).
bool in_lattice(const IntMatrix& b, const ZVec& v);
// Coefficients of v with respect to a square full-rank basis (exact, rational).
QVec coordinates(const IntMatrix& b, const ZVec& v);
// Same lattice test via HNF equality.
bool same_lattice(const IntMatrix& a, const IntMatrix& b);

}  // namespace qbdd::intlat
