#pragma once
// Brute-force reference implementations used only by tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "qbdd/matrix.hpp"

namespace oracle {

using qbdd::BigInt;
using qbdd::IntMatrix;
using qbdd::Rational;
using qbdd::ZVec;
using I64 = std::int64_t;
using Vec = std::vector<I64>;

// Laplace expansion along the first row.
inline BigInt cofactor_det(const IntMatrix& m) {
  const std::size_t n = m.rows();
  if (n == 1) return m(0, 0);
  BigInt d = 0;
  for (std::size_t j = 0; j < n; ++j) {
    IntMatrix sub(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t k = 0, c = 0; k < n; ++k)
        if (k != j) sub(i - 1, c++) = m(i, k);
    BigInt t = m(0, j) * cofactor_det(sub);
    d += (j % 2 ? -t : t);
  }
  return d;
}

// Calls f on every coefficient vector in [-k, k]^n.
inline void for_box(std::size_t n, I64 k, const std::function<void(const Vec&)>& f) {
  Vec c(n, -k);
  while (true) {
    f(c);
    std::size_t i = 0;
    while (i < n && ++c[i] > k) c[i++] = -k;
    if (i == n) return;
  }
}

inline Rational dist_sq(const IntMatrix& b, const Vec& c, const std::vector<Rational>& t) {
  Rational s = 0;
  for (std::size_t i = 0; i < b.rows(); ++i) {
    Rational x = -t[i];
    for (std::size_t j = 0; j < b.cols(); ++j) x += b(i, j) * c[j];
    s += x * x;
  }
  return s;
}

struct BoxCvp {
  Vec coeffs;
  Rational dist_sq;
  std::size_t ties = 0;
};

// Closest vector among coefficient vectors in [-k, k]^n; ties broken lexicographically.
inline BoxCvp box_cvp(const IntMatrix& b, const std::vector<Rational>& t, I64 k) {
  BoxCvp best;
  bool have = false;
  for_box(b.cols(), k, [&](const Vec& c) {
    Rational d = dist_sq(b, c, t);
    if (!have || d < best.dist_sq) {
      best.coeffs = c;
      best.dist_sq = d;
      best.ties = 1;
      have = true;
    } else if (d == best.dist_sq) {
      ++best.ties;
      if (c < best.coeffs) best.coeffs = c;
    }
  });
  return best;
}

// Closest lattice point by scanning integer points of the box t +- R and testing
// membership; coefficients are B^-1 x, ties broken lexicographically on them.
inline BoxCvp ball_cvp(const IntMatrix& b, const std::vector<Rational>& t, I64 R) {
  const std::size_t n = b.rows();
  qbdd::RatMatrix inv = qbdd::inverse(b);
  std::vector<I64> lo(n);
  for (std::size_t i = 0; i < n; ++i) lo[i] = qbdd::floor_q(t[i]).get_si() - R;
  BoxCvp best;
  bool have = false;
  Vec x = lo;
  while (true) {
    Vec c(n);
    bool in = true;
    for (std::size_t i = 0; i < n && in; ++i) {
      Rational s = 0;
      for (std::size_t j = 0; j < n; ++j) s += inv(i, j) * x[j];
      in = s.get_den() == 1;
      if (in) c[i] = s.get_num().get_si();
    }
    if (in) {
      Rational d = 0;
      for (std::size_t i = 0; i < n; ++i) d += (Rational(x[i]) - t[i]) * (Rational(x[i]) - t[i]);
      if (!have || d < best.dist_sq) {
        best = {c, d, 1};
        have = true;
      } else if (d == best.dist_sq) {
        ++best.ties;
        if (c < best.coeffs) best.coeffs = c;
      }
    }
    std::size_t i = 0;
    while (i < n && ++x[i] > lo[i] + 2 * R + 1) x[i] = lo[i], ++i;
    if (i == n) return best;
  }
}

inline BigInt box_lambda1_sq(const IntMatrix& b, I64 k) {
  BigInt best = -1;
  for_box(b.cols(), k, [&](const Vec& c) {
    bool zero = true;
    for (I64 x : c)
      if (x) zero = false;
    if (zero) return;
    BigInt s = 0;
    for (std::size_t i = 0; i < b.rows(); ++i) {
      BigInt x = 0;
      for (std::size_t j = 0; j < b.cols(); ++j) x += b(i, j) * c[j];
      s += x * x;
    }
    if (best < 0 || s < best) best = s;
  });
  return best;
}

inline bool member(const IntMatrix& b, const ZVec& v) {
  qbdd::RatMatrix inv = qbdd::inverse(b);
  for (std::size_t i = 0; i < b.rows(); ++i) {
    Rational x = 0;
    for (std::size_t j = 0; j < b.rows(); ++j) x += inv(i, j) * v[j];
    if (x.get_den() != 1) return false;
  }
  return true;
}

// All points of [0, q)^n lying in L(b), i.e. the group L mod q.
inline std::vector<Vec> group_points(const IntMatrix& b, I64 q) {
  const std::size_t n = b.rows();
  std::vector<Vec> out;
  Vec x(n, 0);
  qbdd::RatMatrix inv = qbdd::inverse(b);
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      Rational s = 0;
      for (std::size_t j = 0; j < n; ++j) s += inv(i, j) * x[j];
      ok = s.get_den() == 1;
    }
    if (ok) out.push_back(x);
    std::size_t i = 0;
    while (i < n && ++x[i] >= q) x[i++] = 0;
    if (i == n) return out;
  }
}

inline I64 centered(I64 a, I64 q) {
  a %= q;
  if (a < 0) a += q;
  return 2 * a > q ? a - q : a;
}

inline I64 modnorm_sq(const Vec& x, I64 q) {
  I64 s = 0;
  for (I64 v : x) {
    // Minimum over a window of representatives.
    I64 best = -1;
    for (I64 k = -2; k <= 2; ++k) {
      I64 y = v + k * q;
      if (best < 0 || y * y < best) best = y * y;
    }
    s += best;
  }
  return s;
}

inline I64 cube_overlap(I64 delta, I64 sigma, I64 q) {
  I64 count = 0;
  for (I64 z = -sigma + 1; z <= sigma; ++z)
    for (I64 w = -sigma + 1; w <= sigma; ++w)
      if (((z - w - delta) % q + q) % q == 0) ++count;
  return count;
}

// Pr(h) = |(1/T) sum_k w_T^{-hk} e^{2 pi i theta k} U^k psi|^2 computed term by term.
inline std::vector<double> naive_pe(const std::vector<std::complex<double>>& psi,
                                    const std::vector<std::size_t>& shift_back, I64 T,
                                    double theta = 0) {
  const std::size_t N = psi.size();
  std::vector<std::vector<std::complex<double>>> powers(T, std::vector<std::complex<double>>(N));
  powers[0] = psi;
  for (I64 k = 1; k < T; ++k)
    for (std::size_t x = 0; x < N; ++x) powers[k][x] = powers[k - 1][shift_back[x]];
  std::vector<double> pr(T);
  const double two_pi = 6.283185307179586476925286766559;
  for (I64 h = 0; h < T; ++h) {
    double tot = 0;
    for (std::size_t x = 0; x < N; ++x) {
      std::complex<double> s = 0;
      for (I64 k = 0; k < T; ++k)
        s += std::polar(1.0, two_pi * (theta * k - double(h * k) / double(T))) * powers[k][x];
      tot += std::norm(s / double(T));
    }
    pr[h] = tot;
  }
  return pr;
}

inline double binom_sigma(double p, double n) { return std::sqrt(p * (1 - p) / n); }

}  // namespace oracle
