#include "qbdd/zqgroup.hpp"

#include <cmath>

#include "qbdd/error.hpp"
#include "qbdd/intlat.hpp"

namespace qbdd::zq {

std::int64_t FiniteGroupDecomp::order() const {
  std::int64_t o = 1;
  for (std::int64_t qi : qvec) {
    if (o > std::numeric_limits<std::int64_t>::max() / qi)
      return std::numeric_limits<std::int64_t>::max();
    o *= qi;
  }
  return o;
}

std::int64_t mod(std::int64_t a, std::int64_t q) {
  std::int64_t r = a % q;
  return r < 0 ? r + q : r;
}

std::int64_t centered(std::int64_t a, std::int64_t q) {
  std::int64_t r = mod(a, q);
  return 2 * r > q ? r - q : r;
}

Vec reduce(const Vec& x, std::int64_t q) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = mod(x[i], q);
  return r;
}

std::int64_t modnorm_sq(const Vec& x, std::int64_t q) {
  std::int64_t s = 0;
  for (std::int64_t xi : x) {
    std::int64_t c = centered(xi, q);
    s += c * c;
  }
  return s;
}

double modnorm(const Vec& x, std::int64_t q) {
  return std::sqrt(static_cast<double>(modnorm_sq(x, q)));
}

FiniteGroupDecomp decompose(const IntMatrix& basis, std::int64_t q) {
  const std::size_t n = basis.rows();
  if (basis.cols() != n) throw PreconditionError("decompose expects a square basis");
  if (q < 1) throw PreconditionError("modulus must be positive");
  RatMatrix inv = inverse(basis);
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Rational x = inv(i, j) * q;
      if (x.get_den() != 1) throw PreconditionError("not q-periodic");
      m(i, j) = x.get_num();
    }
  // q*I = B*M and U*M*V = D give q*Z^n = (B U^{-1}) D Z^n.
  intlat::SnfResult s = intlat::snf(m);
  RatMatrix uinv = inverse(s.u);
  IntMatrix bu(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Rational x = 0;
      for (std::size_t l = 0; l < n; ++l) x += basis(i, l) * uinv(l, j);
      bu(i, j) = x.get_num();
    }
  FiniteGroupDecomp d;
  d.q = q;
  d.n = n;
  for (std::size_t j = 0; j < n; ++j) {
    BigInt dj = s.d(j, j);
    if (dj == 1) continue;
    d.qvec.push_back(dj.get_si());
    Vec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = mod_floor(bu(i, j), BigInt(q)).get_si();
    d.gens.push_back(std::move(g));
  }
  return d;
}

IntMatrix lattice_basis(const FiniteGroupDecomp& d) {
  IntMatrix g(d.n, d.r() + d.n);
  for (std::size_t j = 0; j < d.r(); ++j)
    for (std::size_t i = 0; i < d.n; ++i) g(i, j) = d.gens[j][i];
  for (std::size_t i = 0; i < d.n; ++i) g(i, d.r() + i) = d.q;
  return intlat::hnf(g);
}

bool same_group(const FiniteGroupDecomp& a, const FiniteGroupDecomp& b) {
  return a.q == b.q && a.n == b.n && lattice_basis(a) == lattice_basis(b);
}

Vec element(const FiniteGroupDecomp& d, const Vec& c) {
  if (c.size() != d.r()) throw PreconditionError("coefficient length mismatch");
  Vec v(d.n, 0);
  for (std::size_t j = 0; j < d.r(); ++j) {
    std::int64_t cj = mod(c[j], d.q);
    for (std::size_t i = 0; i < d.n; ++i)
      v[i] = static_cast<std::int64_t>(
          (static_cast<__int128>(v[i]) + static_cast<__int128>(cj) * d.gens[j][i]) % d.q);
  }
  return v;
}

std::int64_t charphase(const Vec& a, const Vec& c, const FiniteGroupDecomp& d) {
  if (a.size() != d.r() || c.size() != d.r())
    throw PreconditionError("label/coefficient length mismatch");
  __int128 s = 0;
  for (std::size_t j = 0; j < d.r(); ++j) {
    if (c[j] < 0 || c[j] >= d.qvec[j]) throw PreconditionError("coefficient outside C");
    s += static_cast<__int128>(mod(a[j], d.q)) * (d.q / d.qvec[j]) % d.q * c[j];
    s %= d.q;
  }
  return static_cast<std::int64_t>(s);
}

Vec negate_coeffs(const Vec& c, const FiniteGroupDecomp& d) {
  Vec r(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) r[j] = mod(-c[j], d.qvec[j]);
  return r;
}

Vec add_coeffs(const Vec& c, const Vec& e, const FiniteGroupDecomp& d) {
  Vec r(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) r[j] = mod(c[j] + e[j], d.qvec[j]);
  return r;
}

GroupCvp group_cvp_exact(const FiniteGroupDecomp& d, const Vec& t, std::int64_t budget) {
  if (t.size() != d.n) throw PreconditionError("target dimension mismatch");
  if (d.order() > budget) throw BudgetError("group enumeration budget exceeded");
  GroupCvp best;
  bool have = false;
  Vec diff(d.n);
  for_each_element(d, [&](const Vec& c, const Vec& v) {
    for (std::size_t i = 0; i < d.n; ++i) diff[i] = t[i] - v[i];
    std::int64_t ds = modnorm_sq(diff, d.q);
    if (!have || ds < best.dist_sq) {
      have = true;
      best.dist_sq = ds;
      best.s = c;
    }
    return true;
  });
  best.dist = std::sqrt(static_cast<double>(best.dist_sq));
  return best;
}

Lambda1 lambda1_group(const FiniteGroupDecomp& d, std::int64_t budget) {
  Lambda1 l;
  if (d.r() == 0) {
    l.degenerate = true;
    return l;
  }
  if (d.order() > budget) throw BudgetError("group enumeration budget exceeded");
  bool have = false;
  for_each_element(d, [&](const Vec& c, const Vec& v) {
    bool zero = true;
    for (std::int64_t ci : c)
      if (ci != 0) zero = false;
    if (zero) return true;
    std::int64_t s = modnorm_sq(v, d.q);
    if (!have || s < l.sq) {
      have = true;
      l.sq = s;
    }
    return true;
  });
  l.value = std::sqrt(static_cast<double>(l.sq));
  return l;
}

std::int64_t lambda1_lattice_sq(const FiniteGroupDecomp& d) {
  Lambda1 l = lambda1_group(d);
  const std::int64_t q2 = d.q * d.q;
  if (l.degenerate) return q2;
  return std::min(l.sq, q2);
}

ZVec lift_solution(const FiniteGroupDecomp& d, const Vec& s, const ZVec& t_int) {
  if (t_int.size() != d.n) throw PreconditionError("target dimension mismatch");
  Vec gs = element(d, s);
  ZVec v(d.n);
  const BigInt q(d.q);
  for (std::size_t i = 0; i < d.n; ++i) {
    BigInt r = mod_floor(t_int[i] - gs[i], q);
    if (2 * r > q) r -= q;
    v[i] = t_int[i] - r;
  }
  return v;
}

std::optional<ZVec> solve_mod_q(const IntMatrix& g, const ZVec& v, const BigInt& q) {
  const std::size_t m = g.rows(), r = g.cols();
  IntMatrix full(m, r + m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < r; ++j) full(i, j) = g(i, j);
    full(i, r + i) = q;
  }
  intlat::SnfResult s = intlat::snf(full);
  ZVec w = s.u * v;
  ZVec y(r + m, BigInt(0));
  for (std::size_t i = 0; i < m; ++i) {
    const BigInt& di = s.d(i, i);
    if (di == 0) {
      if (w[i] != 0) return std::nullopt;
      continue;
    }
    if (!mpz_divisible_p(w[i].get_mpz_t(), di.get_mpz_t())) return std::nullopt;
    y[i] = w[i] / di;
  }
  ZVec x = s.v * y;
  return ZVec(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(r));
}

}  // namespace qbdd::zq
