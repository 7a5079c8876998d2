#include "qbdd/intlat.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>

#include "qbdd/error.hpp"

namespace qbdd::intlat {

std::uint64_t enum_budget() {
  if (const char* env = std::getenv("QBDD_ENUM_BUDGET")) {
    try {
      return std::stoull(env);
    } catch (...) {
    }
  }
  return kDefaultEnumBudget;
}

// ---------------------------------------------------------------- HNF / SNF

namespace {

// new_i = x*c_i + y*c_j, new_j = u*c_i + w*c_j on the columns of a.
void col_combine(IntMatrix& a, std::size_t i, std::size_t j, const BigInt& x,
                 const BigInt& y, const BigInt& u, const BigInt& w) {
  for (std::size_t r = 0; r < a.rows(); ++r) {
    BigInt ci = a(r, i), cj = a(r, j);
    a(r, i) = x * ci + y * cj;
    a(r, j) = u * ci + w * cj;
  }
}

void col_axpy(IntMatrix& a, std::size_t dst, std::size_t src, const BigInt& f) {
  if (f == 0) return;
  for (std::size_t r = 0; r < a.rows(); ++r) a(r, dst) -= f * a(r, src);
}

void row_axpy(IntMatrix& a, std::size_t dst, std::size_t src, const BigInt& f) {
  if (f == 0) return;
  for (std::size_t c = 0; c < a.cols(); ++c) a(dst, c) -= f * a(src, c);
}

void negate_col(IntMatrix& a, std::size_t j) {
  for (std::size_t r = 0; r < a.rows(); ++r) a(r, j) = -a(r, j);
}

void negate_row(IntMatrix& a, std::size_t i) {
  for (std::size_t c = 0; c < a.cols(); ++c) a(i, c) = -a(i, c);
}

BigInt fdiv(const BigInt& a, const BigInt& b) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

BigInt tdiv(const BigInt& a, const BigInt& b) {
  BigInt q;
  mpz_tdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

}  // namespace

HnfResult hnf_with_transform(const IntMatrix& m) {
  const std::size_t n = m.rows(), k = m.cols();
  if (k < n) throw PreconditionError("rank deficient");
  IntMatrix a = m;
  IntMatrix v = IntMatrix::identity(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (a(i, j) == 0) continue;
      BigInt g, x, y;
      mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), a(i, i).get_mpz_t(),
                 a(i, j).get_mpz_t());
      BigInt u = -(a(i, j) / g), w = a(i, i) / g;
      col_combine(a, i, j, x, y, u, w);
      col_combine(v, i, j, x, y, u, w);
    }
    if (a(i, i) == 0) throw PreconditionError("rank deficient");
    if (a(i, i) < 0) {
      negate_col(a, i);
      negate_col(v, i);
    }
    for (std::size_t j = 0; j < i; ++j) {
      BigInt f = fdiv(a(i, j), a(i, i));
      col_axpy(a, j, i, f);
      col_axpy(v, j, i, f);
    }
  }
  IntMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = a(i, j);
  return {h, v};
}

IntMatrix hnf(const IntMatrix& m) { return hnf_with_transform(m).h; }

SnfResult snf(const IntMatrix& m) {
  const std::size_t n = m.rows(), k = m.cols();
  IntMatrix a = m;
  IntMatrix u = IntMatrix::identity(n);
  IntMatrix v = IntMatrix::identity(k);
  const std::size_t lim = std::min(n, k);
  for (std::size_t t = 0; t < lim; ++t) {
    while (true) {
      // Pivot: smallest nonzero entry of the trailing block.
      bool found = false;
      std::size_t pi = t, pj = t;
      BigInt best;
      for (std::size_t i = t; i < n; ++i)
        for (std::size_t j = t; j < k; ++j) {
          if (a(i, j) == 0) continue;
          BigInt av = abs(a(i, j));
          if (!found || av < best) {
            found = true;
            best = av;
            pi = i;
            pj = j;
          }
        }
      if (!found) break;
      a.swap_rows(t, pi);
      u.swap_rows(t, pi);
      a.swap_cols(t, pj);
      v.swap_cols(t, pj);

      bool clean = true;
      for (std::size_t i = t + 1; i < n; ++i) {
        if (a(i, t) == 0) continue;
        BigInt f = tdiv(a(i, t), a(t, t));
        row_axpy(a, i, t, f);
        row_axpy(u, i, t, f);
        if (a(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < k; ++j) {
        if (a(t, j) == 0) continue;
        BigInt f = tdiv(a(t, j), a(t, t));
        col_axpy(a, j, t, f);
        col_axpy(v, j, t, f);
        if (a(t, j) != 0) clean = false;
      }
      if (!clean) continue;

      bool divisible = true;
      for (std::size_t i = t + 1; i < n && divisible; ++i)
        for (std::size_t j = t + 1; j < k; ++j)
          if (!mpz_divisible_p(a(i, j).get_mpz_t(), a(t, t).get_mpz_t())) {
            row_axpy(a, t, i, BigInt(-1));
            row_axpy(u, t, i, BigInt(-1));
            divisible = false;
            break;
          }
      if (divisible) break;
    }
    if (a(t, t) < 0) {
      negate_row(a, t);
      negate_row(u, t);
    }
  }
  return {u, a, v};
}

ZVec snf_diagonal(const IntMatrix& m) {
  SnfResult r = snf(m);
  ZVec d(std::min(m.rows(), m.cols()));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = r.d(i, i);
  return d;
}

// ---------------------------------------------------------------- Gram-Schmidt

GramSchmidtData gram_schmidt(const IntMatrix& b) {
  const std::size_t k = b.cols();
  GramSchmidtData gs;
  gs.bstar.resize(k);
  gs.bstar_sq.resize(k);
  gs.mu.assign(k, std::vector<Rational>(k, Rational(0)));
  for (std::size_t i = 0; i < k; ++i) {
    QVec bi = to_rational(b.col(i));
    QVec w = bi;
    for (std::size_t j = 0; j < i; ++j) {
      Rational mu = dot(bi, gs.bstar[j]) / gs.bstar_sq[j];
      gs.mu[i][j] = mu;
      for (std::size_t r = 0; r < w.size(); ++r) w[r] -= mu * gs.bstar[j][r];
    }
    gs.mu[i][i] = 1;
    gs.bstar_sq[i] = norm_sq(w);
    if (gs.bstar_sq[i] == 0) throw PreconditionError("rank deficient");
    gs.bstar[i] = std::move(w);
  }
  return gs;
}

// ---------------------------------------------------------------- LLL

LllResult lll_with_transform(const IntMatrix& input, const Rational& delta) {
  if (delta <= Rational(1, 4) || delta > 1)
    throw PreconditionError("delta_lll must lie in (1/4, 1]");
  const std::size_t n = input.cols();
  std::vector<ZVec> b(n), u(n);
  for (std::size_t j = 0; j < n; ++j) {
    b[j] = input.col(j);
    u[j] = ZVec(n, BigInt(0));
    u[j][j] = 1;
  }
  LllResult out;
  if (n == 0) return {input, IntMatrix::identity(0)};

  // Integral variant: d[i] = prod_{j<=i} |b*_j|^2, lam[k][j] = d[j] mu_kj (1-based).
  std::vector<BigInt> d(n + 1, BigInt(0));
  std::vector<std::vector<BigInt>> lam(n + 1, std::vector<BigInt>(n + 1, BigInt(0)));
  const BigInt p = delta.get_num(), q = delta.get_den();
  auto B = [&](std::size_t i) -> ZVec& { return b[i - 1]; };
  auto U = [&](std::size_t i) -> ZVec& { return u[i - 1]; };

  auto red = [&](std::size_t k, std::size_t l) {
    BigInt twice = 2 * abs(lam[k][l]);
    if (twice <= d[l]) return;
    BigInt r = round_half_up(Rational(lam[k][l], d[l]));
    for (std::size_t t = 0; t < B(k).size(); ++t) B(k)[t] -= r * B(l)[t];
    for (std::size_t t = 0; t < n; ++t) U(k)[t] -= r * U(l)[t];
    lam[k][l] -= r * d[l];
    for (std::size_t i = 1; i < l; ++i) lam[k][i] -= r * lam[l][i];
  };

  std::size_t kmax = 1;
  d[0] = 1;
  d[1] = dot(B(1), B(1));
  if (d[1] == 0) throw PreconditionError("rank deficient");
  std::size_t k = 2;
  while (k <= n) {
    if (k > kmax) {
      kmax = k;
      for (std::size_t j = 1; j <= k; ++j) {
        BigInt v = dot(B(k), B(j));
        for (std::size_t i = 1; i < j; ++i) {
          v = d[i] * v - lam[k][i] * lam[j][i];
          mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), d[i - 1].get_mpz_t());
        }
        if (j < k)
          lam[k][j] = v;
        else
          d[k] = v;
      }
      if (d[k] == 0) throw PreconditionError("rank deficient");
    }
    red(k, k - 1);
    BigInt lhs = q * (d[k] * d[k - 2] + lam[k][k - 1] * lam[k][k - 1]);
    BigInt rhs = p * d[k - 1] * d[k - 1];
    if (lhs < rhs) {
      std::swap(B(k), B(k - 1));
      std::swap(U(k), U(k - 1));
      for (std::size_t j = 1; j + 2 <= k; ++j) std::swap(lam[k][j], lam[k - 1][j]);
      BigInt l = lam[k][k - 1];
      BigInt nb = d[k - 2] * d[k] + l * l;
      mpz_divexact(nb.get_mpz_t(), nb.get_mpz_t(), d[k - 1].get_mpz_t());
      for (std::size_t i = k + 1; i <= kmax; ++i) {
        BigInt t = lam[i][k];
        BigInt a = d[k] * lam[i][k - 1] - l * t;
        mpz_divexact(a.get_mpz_t(), a.get_mpz_t(), d[k - 1].get_mpz_t());
        lam[i][k] = a;
        BigInt c = nb * t + l * lam[i][k];
        mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), d[k].get_mpz_t());
        lam[i][k - 1] = c;
      }
      d[k - 1] = nb;
      if (k > 2) --k;
    } else {
      for (std::size_t l = k - 1; l-- > 1;) red(k, l);
      ++k;
    }
  }
  out.basis = IntMatrix::from_columns(b);
  out.transform = IntMatrix::from_columns(u);
  return out;
}

IntMatrix lll_reduce(const IntMatrix& b, const Rational& delta) {
  return lll_with_transform(b, delta).basis;
}

bool is_lll_reduced(const IntMatrix& b, const Rational& delta) {
  GramSchmidtData gs = gram_schmidt(b);
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (abs(gs.mu[i][j]) > Rational(1, 2)) return false;
  for (std::size_t i = 1; i < n; ++i) {
    Rational m = gs.mu[i][i - 1];
    if (gs.bstar_sq[i] < (delta - m * m) * gs.bstar_sq[i - 1]) return false;
  }
  return true;
}

// ---------------------------------------------------------------- Babai

namespace {

// Coefficients y_k = <t, b*_k>/|b*_k|^2 and the squared component of t
// orthogonal to span(B).
void project_target(const GramSchmidtData& gs, const QVec& t, QVec& y, Rational& perp) {
  const std::size_t n = gs.bstar.size();
  y.assign(n, Rational(0));
  perp = norm_sq(t);
  for (std::size_t k = 0; k < n; ++k) {
    y[k] = dot(t, gs.bstar[k]) / gs.bstar_sq[k];
    perp -= y[k] * y[k] * gs.bstar_sq[k];
  }
}

Rational center(const GramSchmidtData& gs, const QVec& y, const ZVec& x, std::size_t k,
                std::size_t hi) {
  Rational c = y[k];
  for (std::size_t j = k + 1; j < hi; ++j) c -= gs.mu[j][k] * x[j];
  return c;
}

}  // namespace

ZVec babai_nearest_plane(const IntMatrix& b, const QVec& t) {
  if (t.size() != b.rows()) throw PreconditionError("target dimension mismatch");
  GramSchmidtData gs = gram_schmidt(b);
  QVec y;
  Rational perp;
  project_target(gs, t, y, perp);
  if (perp != 0) throw PreconditionError("target outside span");
  const std::size_t n = b.cols();
  ZVec x(n, BigInt(0));
  for (std::size_t k = n; k-- > 0;) x[k] = round_half_up(center(gs, y, x, k, n));
  return x;
}

// ---------------------------------------------------------------- enumeration

namespace {

struct Enumerator {
  const GramSchmidtData& gs;
  const QVec& y;
  std::size_t lo, hi;
  bool exclude_zero;
  std::uint64_t budget;
  Rational bound;
  bool have = false;
  Rational best;
  std::vector<ZVec> ties;
  ZVec x;
  std::uint64_t nodes = 0;

  Enumerator(const GramSchmidtData& g, const QVec& yy, std::size_t l, std::size_t h,
             bool ex, std::uint64_t bud, Rational bnd)
      : gs(g), y(yy), lo(l), hi(h), exclude_zero(ex), budget(bud), bound(std::move(bnd)),
        x(g.bstar.size(), BigInt(0)) {}

  void leaf(const Rational& partial) {
    if (exclude_zero) {
      bool zero = true;
      for (std::size_t j = lo; j < hi; ++j)
        if (x[j] != 0) zero = false;
      if (zero) return;
    }
    ZVec tail(x.begin() + lo, x.begin() + hi);
    if (!have || partial < best) {
      have = true;
      best = partial;
      bound = partial;
      ties.clear();
      ties.push_back(std::move(tail));
    } else if (partial == best) {
      ties.push_back(std::move(tail));
    }
  }

  void level(std::size_t k, const Rational& partial) {
    Rational c = center(gs, y, x, k, hi);
    BigInt x0 = round_half_up(c);
    for (int dir = 0; dir < 2; ++dir) {
      BigInt v = dir == 0 ? x0 : x0 - 1;
      while (true) {
        Rational diff = Rational(v) - c;
        Rational next = partial + diff * diff * gs.bstar_sq[k];
        if (next > bound) break;
        if (++nodes > budget) throw BudgetError("enumeration budget exceeded");
        x[k] = v;
        if (k == lo)
          leaf(next);
        else
          level(k - 1, next);
        if (dir == 0)
          ++v;
        else
          --v;
      }
    }
    x[k] = 0;
  }

  void run() {
    if (hi > lo) level(hi - 1, Rational(0));
  }
};

// Partial distance of plain nearest-plane rounding on levels [lo, hi).
Rational rounding_partial(const GramSchmidtData& gs, const QVec& y, std::size_t lo,
                          std::size_t hi) {
  ZVec x(gs.bstar.size(), BigInt(0));
  Rational partial = 0;
  for (std::size_t k = hi; k-- > lo;) {
    Rational c = center(gs, y, x, k, hi);
    x[k] = round_half_up(c);
    Rational diff = Rational(x[k]) - c;
    partial += diff * diff * gs.bstar_sq[k];
  }
  return partial;
}

ZVec combine(const IntMatrix& transform, const ZVec& x) { return transform * x; }

}  // namespace

CvpResult exact_cvp_enum(const IntMatrix& b, const QVec& t, std::optional<Rational> radius_sq,
                         std::uint64_t budget) {
  if (t.size() != b.rows()) throw PreconditionError("target dimension mismatch");
  const std::size_t n = b.cols();
  LllResult red = lll_with_transform(b);
  GramSchmidtData gs = gram_schmidt(red.basis);
  QVec y;
  Rational perp;
  project_target(gs, t, y, perp);
  Rational bound;
  if (radius_sq) {
    bound = *radius_sq - perp;
    if (bound < 0) throw PreconditionError("radius exceeded");
  } else {
    bound = rounding_partial(gs, y, 0, n);
  }
  Enumerator e(gs, y, 0, n, false, budget, bound);
  e.run();
  if (!e.have) throw PreconditionError("radius exceeded");
  CvpResult res;
  bool first = true;
  for (const ZVec& tie : e.ties) {
    ZVec c = combine(red.transform, tie);
    if (first || c < res.coeffs) res.coeffs = c;
    first = false;
  }
  res.dist_sq = e.best + perp;
  res.nodes = e.nodes;
  return res;
}

CvpResult block_reduce_cvp(const IntMatrix& b, const QVec& t, std::size_t beta,
                           std::uint64_t budget) {
  if (beta < 2) throw PreconditionError("beta must be at least 2");
  if (t.size() != b.rows()) throw PreconditionError("target dimension mismatch");
  const std::size_t n = b.cols();
  beta = std::min(beta, n);
  LllResult red = lll_with_transform(b);
  GramSchmidtData gs = gram_schmidt(red.basis);
  QVec y;
  Rational perp;
  project_target(gs, t, y, perp);
  const std::size_t lo = n - beta;
  Enumerator e(gs, y, lo, n, false, budget, rounding_partial(gs, y, lo, n));
  e.run();
  ZVec x(n, BigInt(0));
  const ZVec* tail = &e.ties.front();
  for (const ZVec& tie : e.ties)
    if (tie < *tail) tail = &tie;
  for (std::size_t j = lo; j < n; ++j) x[j] = (*tail)[j - lo];
  for (std::size_t k = lo; k-- > 0;) x[k] = round_half_up(center(gs, y, x, k, n));
  CvpResult res;
  res.coeffs = combine(red.transform, x);
  ZVec v = b * res.coeffs;
  Rational d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Rational diff = Rational(v[i]) - t[i];
    d += diff * diff;
  }
  res.dist_sq = d;
  res.nodes = e.nodes;
  return res;
}

BigInt lambda1_sq_exact(const IntMatrix& b, std::uint64_t budget) {
  const std::size_t n = b.cols();
  LllResult red = lll_with_transform(b);
  GramSchmidtData gs = gram_schmidt(red.basis);
  QVec y(n, Rational(0));
  Rational bound = norm_sq(to_rational(red.basis.col(0)));
  Enumerator e(gs, y, 0, n, true, budget, bound);
  e.run();
  if (!e.have) throw BudgetError("shortest vector search found nothing");
  return e.best.get_num();
}

// ---------------------------------------------------------------- basis completion

IntMatrix mg_complete(const IntMatrix& b, const IntMatrix& s) {
  const std::size_t n = b.cols();
  if (b.rows() != n || s.rows() != n || s.cols() != n)
    throw PreconditionError("mg_complete expects square full-rank inputs");
  for (std::size_t k = 1; k < n; ++k)
    if (norm_sq(s.col(k)) < norm_sq(s.col(k - 1)))
      throw PreconditionError("S not sorted by norm");
  if (determinant(s) == 0) throw PreconditionError("S dependent");
  RatMatrix binv = inverse(b);
  IntMatrix t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Rational x = 0;
      for (std::size_t l = 0; l < n; ++l) x += binv(i, l) * s(l, j);
      if (x.get_den() != 1) throw PreconditionError("S not inside lattice");
      t(i, j) = x.get_num();
    }
  // T^t V = H lower triangular, so V^t T = H^t and T = W H^t with W = V^{-t}.
  HnfResult hr = hnf_with_transform(t.transpose());
  RatMatrix vinv = inverse(hr.v);
  IntMatrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = vinv(j, i).get_num();
  IntMatrix r = b * w;
  GramSchmidtData gs = gram_schmidt(r);
  for (std::size_t k = 0; k < n; ++k) {
    if (hr.h(k, k) == 1) {
      r.set_col(k, s.col(k));
      continue;
    }
    ZVec rk = r.col(k);
    for (std::size_t j = k; j-- > 0;) {
      Rational mu = dot(to_rational(rk), gs.bstar[j]) / gs.bstar_sq[j];
      BigInt c = round_half_up(mu);
      if (c == 0) continue;
      for (std::size_t i = 0; i < n; ++i) rk[i] -= c * r(i, j);
    }
    r.set_col(k, rk);
  }
  return r;
}

// ---------------------------------------------------------------- periodicity

BigInt periodicity(const IntMatrix& b) {
  RatMatrix inv = inverse(b);
  BigInt q = 1;
  for (const Rational& x : inv.data) q = lcm(q, x.get_den());
  return q;
}

ZVec rect_periodicity(const IntMatrix& b) {
  RatMatrix inv = inverse(b);
  const std::size_t n = b.rows();
  ZVec r(n, BigInt(1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t row = 0; row < n; ++row) r[i] = lcm(r[i], inv(row, i).get_den());
  return r;
}

QVec coordinates(const IntMatrix& b, const ZVec& v) {
  QVec x;
  if (!solve_rational(b, to_rational(v), x)) throw PreconditionError("target outside span");
  return x;
}

bool in_lattice(const IntMatrix& b, const ZVec& v) {
  QVec x;
  if (!solve_rational(b, to_rational(v), x)) return false;
  for (const Rational& c : x)
    if (c.get_den() != 1) return false;
  return true;
}

bool same_lattice(const IntMatrix& a, const IntMatrix& b) {
  if (a.rows() != b.rows()) return false;
  return hnf(a) == hnf(b);
}

}  // namespace qbdd::intlat
