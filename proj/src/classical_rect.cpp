#include "qbdd/classical_rect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qbdd/error.hpp"
#include "qbdd/intlat.hpp"

namespace qbdd::rect {

double MinGsCertificate::min_gs() const { return std::sqrt(min_gs_sq.get_d()); }

std::size_t cutoff(std::size_t r, double r_max, double Delta, std::size_t n) {
  if (r == 0 || r_max <= 1) return 1;
  const double m = std::ceil(std::sqrt(2.0 * static_cast<double>(r) * std::log(r_max) /
                                       std::log(Delta)));
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1.0, m)), 1, n);
}

MinGsCertificate rect_reduce(const IntMatrix& b, const RectOptions& opts) {
  const std::size_t n = b.rows();
  if (b.cols() != n || determinant(b) == 0) throw PreconditionError("basis is rank deficient");
  if (!(opts.delta > Rational(1, 4) && opts.delta <= 1))
    throw PreconditionError("LLL delta must lie in (1/4, 1]");
  MinGsCertificate c;
  c.r_vec = intlat::rect_periodicity(b);

  // L/H through the Smith form of B^-1 diag(r).
  RatMatrix binv = inverse(b);
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Rational x = binv(i, j) * c.r_vec[j];
      if (x.get_den() != 1) throw PreconditionError("rectangle not contained in lattice");
      m(i, j) = x.get_num();
    }
  intlat::SnfResult s = intlat::snf(m);
  RatMatrix uinv = inverse(s.u);
  std::vector<ZVec> gens;
  for (std::size_t j = 0; j < n; ++j) {
    BigInt dj = abs(s.d(j, j));
    if (dj <= 1) continue;
    ZVec g(n);
    for (std::size_t i = 0; i < n; ++i) {
      Rational x = 0;
      for (std::size_t l = 0; l < n; ++l) x += Rational(b(i, l)) * uinv(l, j);
      g[i] = mod_floor(x.get_num(), c.r_vec[i]);
    }
    gens.push_back(std::move(g));
    c.qvec.push_back(dj.get_si());
  }
  c.r = gens.size();

  c.order.resize(n);
  std::iota(c.order.begin(), c.order.end(), 0);
  std::stable_sort(c.order.begin(), c.order.end(),
                   [&](std::size_t x, std::size_t y) { return c.r_vec[x] < c.r_vec[y]; });

  // Work in sorted coordinates: row k holds axis order[k].
  IntMatrix gen(n, c.r + n), rect(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t ax = c.order[k];
    for (std::size_t j = 0; j < c.r; ++j) gen(k, j) = gens[j][ax];
    gen(k, c.r + k) = c.r_vec[ax];
    rect(k, k) = c.r_vec[ax];
  }
  IntMatrix comp = intlat::mg_complete(intlat::hnf(gen), rect);
  IntMatrix red = intlat::lll_reduce(comp, opts.delta);

  c.basis = IntMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) c.basis(c.order[k], j) = red(k, j);

  intlat::GramSchmidtData gs = intlat::gram_schmidt(red);
  c.gs_sq = gs.bstar_sq;
  c.min_gs_sq = *std::min_element(c.gs_sq.begin(), c.gs_sq.end());

  c.Delta = 1.0 / std::sqrt(Rational(opts.delta - Rational(1, 4)).get_d());
  for (std::size_t k = n - c.r; k < n; ++k) c.R.push_back(c.order[k]);
  c.r_max = c.r ? c.r_vec[c.order[n - 1]].get_d() : 1.0;
  c.m = cutoff(c.r, c.r_max, c.Delta, n);
  c.lambda1_sq = intlat::lambda1_sq_exact(red);
  c.lambda1 = std::sqrt(c.lambda1_sq.get_d());
  const double md = static_cast<double>(c.m);
  c.case1 = c.lambda1 / std::pow(c.Delta, md - 1);
  c.case2 = c.lambda1 / (std::pow(c.r_max, static_cast<double>(c.r) / md) *
                         std::pow(c.Delta, (md - 1) / 2));
  c.bound = std::min(c.case1, c.case2);
  return c;
}

ZVec rect_bdd(const MinGsCertificate& cert, const ZVec& t) {
  ZVec x = intlat::babai_nearest_plane(cert.basis, to_rational(t));
  ZVec v = cert.basis * x;
  BigInt d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) d += (t[i] - v[i]) * (t[i] - v[i]);
  if (Rational(4 * d) >= cert.min_gs_sq) throw VerificationError("outside certified radius");
  return v;
}

ZVec rect_bdd(const IntMatrix& b, const ZVec& t, const RectOptions& opts) {
  return rect_bdd(rect_reduce(b, opts), t);
}

SivpBound sivp_bound(const MinGsCertificate& cert) {
  SivpBound s;
  BigInt q = *std::max_element(cert.r_vec.begin(), cert.r_vec.end());
  s.value = q.get_d() / cert.min_gs();
  s.degenerate = cert.r == 0;
  return s;
}

SivpBound sivp_bound(const IntMatrix& b, const RectOptions& opts) {
  return sivp_bound(rect_reduce(b, opts));
}

}  // namespace qbdd::rect
