#pragma once

#include <cstdint>
#include <vector>

#include "qbdd/matrix.hpp"

namespace qbdd::rect {

struct RectOptions {
  // LLL parameter; the Lovasz ratio is 1/sqrt(delta - 1/4).
  Rational delta{3, 4};
};

struct MinGsCertificate {
  IntMatrix basis;                   // LLL-reduced, original coordinates
  Rational min_gs_sq;                // min_i |c*_i|^2, exact
  std::vector<Rational> gs_sq;       // |c*_i|^2 for all i
  ZVec r_vec;                        // axis periods r_i, original order
  std::vector<std::size_t> order;    // axes sorted by r_i ascending
  std::vector<std::int64_t> qvec;    // invariant factors of L/H
  std::vector<std::size_t> R;        // axes carrying the r largest periods
  std::size_t r = 0;
  std::size_t m = 1;
  double Delta = 0;
  double r_max = 1;
  BigInt lambda1_sq;
  double lambda1 = 0;
  double case1 = 0;  // lambda1 / Delta^(m-1), valid for i <= m
  double case2 = 0;  // lambda1 / (r_max^(r/m) Delta^((m-1)/2)), valid for i >= m
  double bound = 0;  // min(case1, case2)
  double min_gs() const;
};

// Cutoff from (r/m) ln r_max = ((m-1)/2) ln Delta, clamped to [1, n].
std::size_t cutoff(std::size_t r, double r_max, double Delta, std::size_t n);

MinGsCertificate rect_reduce(const IntMatrix& b, const RectOptions& opts = {});

// Babai on the certified basis; throws VerificationError outside half the min GS length.
ZVec rect_bdd(const MinGsCertificate& cert, const ZVec& t);
ZVec rect_bdd(const IntMatrix& b, const ZVec& t, const RectOptions& opts = {});

struct SivpBound {
  double value = 0;  // max r_i divided by the certified min GS length
  bool degenerate = false;  // trivial quotient L/H
};
SivpBound sivp_bound(const MinGsCertificate& cert);
SivpBound sivp_bound(const IntMatrix& b, const RectOptions& opts = {});

}  // namespace qbdd::rect
