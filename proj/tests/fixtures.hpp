#pragma once
// Random instance helpers shared by the unit and acceptance tests.

#include <cmath>
#include <memory>
#include <optional>
#include <random>

#include "qbdd/intlat.hpp"
#include "qbdd/qsim.hpp"
#include "qbdd/reduction.hpp"
#include "qbdd/zqgroup.hpp"

namespace fixture {

using qbdd::zq::FiniteGroupDecomp;
using qbdd::zq::Vec;

struct SimGroup {
  std::shared_ptr<const FiniteGroupDecomp> decomp;
  std::int64_t sigma = 1;
  qbdd::zq::Lambda1 lambda1;
};

// Smallest sigma satisfying 4 n sigma^2 <= lambda1^2 <= 16 n sigma^2 with 2 sigma <= q.
inline std::optional<std::int64_t> admissible_sigma(const qbdd::zq::Lambda1& l, std::size_t n,
                                                    std::int64_t q) {
  for (std::int64_t s = 1; 2 * s <= q; ++s)
    if (qbdd::qsim::sigma_in_range(s, l, n)) return s;
  return std::nullopt;
}

// Draws groups until one admits a cube side in the eigenvector regime.
inline SimGroup random_sim_group(std::size_t n, std::int64_t q,
                                 const std::vector<std::int64_t>& qvec, std::mt19937_64& rng) {
  while (true) {
    qbdd::IntMatrix b = qbdd::reduction::random_periodic_lattice(n, q, qvec, rng);
    auto d = std::make_shared<const FiniteGroupDecomp>(qbdd::zq::decompose(b, q));
    qbdd::zq::Lambda1 l = qbdd::zq::lambda1_group(*d);
    if (auto s = admissible_sigma(l, n, q)) return {d, *s, l};
  }
}

inline Vec random_coeffs(const FiniteGroupDecomp& d, std::mt19937_64& rng) {
  Vec c(d.r());
  for (std::size_t j = 0; j < d.r(); ++j)
    c[j] = std::uniform_int_distribution<std::int64_t>(0, d.qvec[j] - 1)(rng);
  return c;
}

// Offset with |Delta|_q <= radius, drawn by rejection from the centred cube.
inline Vec random_offset(std::size_t n, double radius, std::int64_t q, std::mt19937_64& rng) {
  const std::int64_t R = static_cast<std::int64_t>(std::floor(radius));
  std::uniform_int_distribution<std::int64_t> u(-R, R);
  while (true) {
    Vec d(n);
    for (auto& x : d) x = u(rng);
    if (std::sqrt(double(qbdd::zq::modnorm_sq(d, q))) <= radius) return d;
  }
}

inline Vec add_mod(const Vec& a, const Vec& b, std::int64_t q) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = qbdd::zq::mod(a[i] + b[i], q);
  return r;
}

// e^{2 pi i k / q}
inline std::complex<double> root(std::int64_t k, std::int64_t q) {
  return std::polar(1.0, 6.283185307179586 * double(qbdd::zq::mod(k, q)) / double(q));
}

// Lattice generated by up to `rank` random vectors and diag(r) with power-of-two periods.
inline qbdd::IntMatrix rect_lattice(std::size_t n, std::size_t rank, int max_log,
                                    std::mt19937_64& rng) {
  std::uniform_int_distribution<int> lg(1, max_log);
  std::vector<std::int64_t> r(n);
  for (auto& x : r) x = std::int64_t(1) << lg(rng);
  qbdd::IntMatrix g(n, rank + n);
  for (std::size_t j = 0; j < rank; ++j)
    for (std::size_t i = 0; i < n; ++i)
      g(i, j) = std::uniform_int_distribution<std::int64_t>(0, r[i] - 1)(rng);
  for (std::size_t i = 0; i < n; ++i) g(i, rank + i) = r[i];
  return qbdd::intlat::hnf(g);
}

}  // namespace fixture
