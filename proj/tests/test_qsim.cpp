#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qbdd/error.hpp"
#include "qbdd/qsim.hpp"

using namespace qbdd;
using namespace qbdd::qsim;
using zq::Vec;

namespace {

std::vector<std::size_t> back_shift(const DenseState& s, const Vec& t) {
  std::vector<std::size_t> back(s.amp.size());
  Vec y(s.n);
  for (std::size_t idx = 0; idx < s.amp.size(); ++idx) {
    Vec p = s.point(idx);
    for (std::size_t i = 0; i < s.n; ++i) y[i] = p[i] - t[i];
    back[idx] = s.index(y);
  }
  return back;
}

DenseState scaled(const DenseState& s, cplx f) {
  DenseState r = s;
  for (auto& a : r.amp) a *= f;
  return r;
}

double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / 2;
}

double total(const std::vector<double>& p) {
  double s = 0;
  for (double x : p) s += x;
  return s;
}

}  // namespace

TEST(CubeOverlap, Examples) {
  EXPECT_EQ(cube_overlap_1d(0, 3, 16), 6);
  EXPECT_EQ(cube_overlap_1d(2, 3, 16), 4);
  EXPECT_EQ(cube_overlap_1d(7, 3, 32), 0);
  EXPECT_THROW(cube_overlap_1d(0, 5, 8), PreconditionError);
  EXPECT_THROW(cube_overlap_1d(0, 0, 8), PreconditionError);
}

TEST(CubeOverlap, PropertyMatchesDoubleLoop) {
  for (std::int64_t q : {2, 5, 8, 16, 17})
    for (std::int64_t s = 1; 2 * s <= q; ++s)
      for (std::int64_t d = -q; d <= 2 * q; ++d)
        EXPECT_EQ(cube_overlap_1d(d, s, q), oracle::cube_overlap(d, s, q)) << q << " " << s << " " << d;
}

TEST(CubeState, Examples) {
  DenseState c = make_cube_state({0}, 1, 8);
  EXPECT_NEAR(std::abs(c.amp[0] - cplx(1 / std::sqrt(2.0))), 0, 1e-15);
  EXPECT_NEAR(std::abs(c.amp[1] - cplx(1 / std::sqrt(2.0))), 0, 1e-15);
  for (std::size_t i = 2; i < 8; ++i) EXPECT_EQ(c.amp[i], cplx(0));
  EXPECT_THROW(make_cube_state({0}, 0, 8), PreconditionError);
  for (std::int64_t s = 1; s <= 4; ++s) EXPECT_NEAR(make_cube_state({3, 5}, s, 8).norm(), 1, 1e-12);
}

TEST(CubeState, PropertyInnerProductIsOverlapProduct) {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 100; ++it) {
    const std::int64_t q = 12, s = 1 + it % 4;
    Vec y = {std::int64_t(rng() % q), std::int64_t(rng() % q)};
    Vec d = {std::int64_t(rng() % q), std::int64_t(rng() % q)};
    cplx ip = inner(make_cube_state(y, s, q), make_cube_state(fixture::add_mod(y, d, q), s, q));
    double want = 1;
    for (auto di : d) want *= double(oracle::cube_overlap(di, s, q)) / double(2 * s);
    EXPECT_NEAR(std::abs(ip - cplx(want)), 0, 1e-12);
  }
}

TEST(CubeState, PropertyClosenessAndOrthogonality) {
  std::mt19937_64 rng(32);
  for (int it = 0; it < 200; ++it) {
    const std::int64_t q = 16, s = 1 + it % 4;
    const std::size_t n = 2;
    std::uniform_int_distribution<std::int64_t> u(0, q - 1);
    Vec y{u(rng), u(rng)}, d{u(rng), u(rng)};
    DenseState a = make_cube_state(y, s, q), b = make_cube_state(fixture::add_mod(y, d, q), s, q);
    const double dn = zq::modnorm(d, q);
    EXPECT_LE(distance(a, b), std::sqrt(double(n) * dn / double(s)) + 1e-10);
    if (dn >= std::sqrt(double(n)) * 2 * double(s) + 1) EXPECT_EQ(inner(a, b), cplx(0));
  }
}

TEST(Shift, IdentityAndInverse) {
  DenseState c = make_cube_state({1, 2}, 2, 8);
  EXPECT_EQ(shift_apply(c, {0, 0}).amp, c.amp);
  EXPECT_EQ(shift_apply(shift_apply(c, {3, 7}), {-3, -7}).amp, c.amp);
  DenseState s = shift_apply(c, {3, 7});
  EXPECT_EQ(s.amp[s.index({4, 9})], c.amp[c.index({1, 2})]);
}

TEST(Pcs, TrivialGroupIsCube) {
  auto d = std::make_shared<const zq::FiniteGroupDecomp>(zq::FiniteGroupDecomp{8, 2, {}, {}});
  Rng rng(1);
  PcsModel m = make_pcs(d, 2, rng, Backend::dense);
  DenseState s = pcs_dense_state(m);
  EXPECT_LT(distance(s, make_cube_state({0, 0}, 2, 8)), 1e-12);
}

TEST(Pcs, ForcedZeroLabelHasEqualPhases) {
  auto d = std::make_shared<const zq::FiniteGroupDecomp>(zq::FiniteGroupDecomp{16, 2, {4}, {{4, 8}}});
  Rng rng(2);
  PcsModel m = make_pcs(d, 1, rng, Backend::dense, Vec{0});
  DenseState s = pcs_dense_state(m);
  std::size_t support = 0;
  for (const cplx& a : s.amp)
    if (std::abs(a) > 1e-14) {
      ++support;
      EXPECT_NEAR(std::abs(a - s.amp[0]), 0, 1e-14);
    }
  EXPECT_EQ(support, 4u * 4u);
  EXPECT_NEAR(s.norm(), 1, 1e-12);
}

TEST(Pcs, DenseSupportCountWhenDisjoint) {
  std::mt19937_64 rng(33);
  int checked = 0;
  for (int it = 0; it < 50 && checked < 10; ++it) {
    IntMatrix b = reduction::random_periodic_lattice(2, 16, {4}, rng);
    auto d = std::make_shared<const zq::FiniteGroupDecomp>(zq::decompose(b, 16));
    zq::Lambda1 l = zq::lambda1_group(*d);
    for (std::int64_t s = 1; 2 * s <= 16; ++s) {
      if (s > l.value / (2 * std::sqrt(2.0))) break;
      Rng r(static_cast<std::uint64_t>(it));
      DenseState st = pcs_dense_state(make_pcs(d, s, r, Backend::dense));
      std::size_t support = 0;
      for (const cplx& a : st.amp) support += std::abs(a) > 1e-14;
      EXPECT_EQ(support, std::size_t(4 * (2 * s) * (2 * s)));
      EXPECT_NEAR(st.norm(), 1, 1e-10);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(Pcs, PropertyExactEigenrelation) {
  std::mt19937_64 rng(34);
  for (int it = 0; it < 30; ++it) {
    fixture::SimGroup g = fixture::random_sim_group(2, 16, {16}, rng);
    Rng r(static_cast<std::uint64_t>(it));
    PcsModel m = make_pcs(g.decomp, g.sigma, r, Backend::dense);
    DenseState psi = pcs_dense_state(m);
    Vec c = fixture::random_coeffs(*g.decomp, rng);
    DenseState shifted = shift_apply(psi, zq::element(*g.decomp, c));
    cplx lambda = fixture::root(zq::charphase(m.a, zq::negate_coeffs(c, *g.decomp), *g.decomp), 16);
    EXPECT_LT(distance(shifted, scaled(psi, lambda)), 1e-10);
    // Gram value agrees with the explicit inner product.
    EXPECT_NEAR(std::abs(pcs_gram(m, zq::element(*g.decomp, c)) - inner(psi, shifted)), 0, 1e-10);
  }
}

TEST(Pcs, PropertyShiftBound) {
  std::mt19937_64 rng(35);
  for (int it = 0; it < 40; ++it) {
    fixture::SimGroup g = fixture::random_sim_group(2, 16, {16}, rng);
    Rng r(static_cast<std::uint64_t>(it));
    PcsModel m = make_pcs(g.decomp, g.sigma, r, Backend::dense);
    DenseState psi = pcs_dense_state(m);
    Vec delta = fixture::random_offset(2, g.lambda1.value / 2, 16, rng);
    const double bound =
        4 * std::pow(2.0, 0.75) * std::sqrt(zq::modnorm(delta, 16) / g.lambda1.value);
    EXPECT_LE(distance(shift_apply(psi, delta), psi), bound + 1e-10);
    EXPECT_NEAR(std::abs(pcs_gram(m, delta) - inner(psi, shift_apply(psi, delta))), 0, 1e-10);
  }
}

TEST(Pcs, PropertyLabelUniformity) {
  // Chi-square over q^r = 16 cells, 10^4 draws; 99th percentile of chi2(15) is 30.58.
  auto d = std::make_shared<const zq::FiniteGroupDecomp>(zq::FiniteGroupDecomp{16, 2, {16}, {{1, 5}}});
  Rng rng(36);
  std::vector<int> counts(16, 0);
  for (int i = 0; i < 10000; ++i) ++counts[make_pcs(d, 1, rng, Backend::gram).a[0]];
  double chi = 0;
  for (int c : counts) chi += (c - 625.0) * (c - 625.0) / 625.0;
  EXPECT_LT(chi, 30.58);
}

TEST(Pcs, OverlappingCubesUseExactLabelLaw) {
  // sigma far above the disjoint range: labels follow N_a / q^r, which vanishes for some a.
  auto d = std::make_shared<const zq::FiniteGroupDecomp>(zq::FiniteGroupDecomp{8, 1, {8}, {{1}}});
  Rng rng(37);
  PcsModel m = make_pcs(d, 2, rng, Backend::gram);
  EXPECT_GT(m.norm_factor, 0);
  for (int i = 0; i < 200; ++i) {
    PcsModel k = make_pcs(d, 2, rng, Backend::dense);
    DenseState s = pcs_dense_state(k);
    EXPECT_NEAR(s.norm(), 1, 1e-10);
  }
  EXPECT_THROW(make_pcs(d, 2, rng, Backend::gram, Vec{4}), PreconditionError);
}

TEST(Dense, BudgetError) {
  auto d = std::make_shared<const zq::FiniteGroupDecomp>(zq::FiniteGroupDecomp{256, 3, {}, {}});
  Rng rng(1);
  EXPECT_THROW(make_pcs(d, 1, rng, Backend::dense), BudgetError);
}

TEST(PeConfigTest, DerivedFields) {
  PeConfig c = make_pe_config(0, 0.1);
  EXPECT_EQ(c.b, 5);
  EXPECT_EQ(c.a, 0);
  EXPECT_EQ(c.T, 64);
  PeConfig d = make_pe_config(0.01 * 0.01 / 128 / 8, 0.01);
  EXPECT_EQ(d.b, 8);
  EXPECT_EQ(d.a, 3);
  EXPECT_EQ(d.T, std::int64_t(1) << 12);
  EXPECT_NEAR(d.radius(16), 129.0 * 16 * d.eps_ev / 1e-4, 1e-12);
  EXPECT_THROW(make_pe_config(0.1, 0.1), PreconditionError);
  EXPECT_THROW(make_pe_config(1e-30, 0.5), BudgetError);
  EXPECT_THROW(make_pe_config(0, 1.5), PreconditionError);
}

TEST(PeConfigTest, MaxFeasibleEps1IsTight) {
  for (std::size_t n : {2, 4, 8})
    for (double p : {0.1, 0.01}) {
      const double e = max_feasible_eps1(n, p);
      EXPECT_NO_THROW(make_pe_config(hip_eps_ev(e, n), p));
      EXPECT_THROW(make_pe_config(hip_eps_ev(e * 1.01, n), p), PreconditionError);
    }
}

TEST(RoundPhase, Examples) {
  EXPECT_EQ(round_phase(0, 32, 16), 0);
  EXPECT_EQ(round_phase(2, 32, 16), 1);
  EXPECT_EQ(round_phase(1, 32, 16), 1);  // 0.5 rounds up
  EXPECT_EQ(round_phase(31, 32, 16), 0);
  EXPECT_EQ(round_phase(5, 8, 3), 2);    // 15/8 = 1.875
}

TEST(PeDistribution, ExactEigenvectorPointMass) {
  std::mt19937_64 rng(38);
  fixture::SimGroup g = fixture::random_sim_group(2, 16, {16}, rng);
  Rng r(3);
  PcsModel m = make_pcs(g.decomp, g.sigma, r, Backend::gram);
  Vec s{5};
  std::vector<double> pr = pe_distribution(m, zq::element(*g.decomp, s), 64);
  const std::int64_t k = zq::charphase(m.a, zq::negate_coeffs(s, *g.decomp), *g.decomp);
  EXPECT_NEAR(pr[static_cast<std::size_t>(k * 4)], 1, 1e-10);
  EXPECT_NEAR(total(pr), 1, 1e-10);
  EXPECT_THROW(pe_distribution(m, {0, 0}, 48), PreconditionError);
}

TEST(PeDistribution, PropertyBackendsAgreeAndMatchNaive) {
  std::mt19937_64 rng(39);
  for (int it = 0; it < 12; ++it) {
    fixture::SimGroup g = fixture::random_sim_group(2, 8, {8}, rng);
    const std::int64_t sigma = 1;
    Rng r(static_cast<std::uint64_t>(it));
    PcsModel m = make_pcs(g.decomp, sigma, r, Backend::gram);
    Vec t = {std::int64_t(rng() % 8), std::int64_t(rng() % 8)};
    const double theta = it % 3 == 0 ? 0.0 : 0.013 * it;
    std::vector<double> gram = pe_distribution(m, t, 16, Backend::gram, theta);
    std::vector<double> dense = pe_distribution(m, t, 16, Backend::dense, theta);
    EXPECT_LE(tv(gram, dense), 1e-9);
    EXPECT_NEAR(total(gram), 1, 1e-10);
    DenseState psi = pcs_dense_state(m);
    std::vector<double> naive = oracle::naive_pe(psi.amp, back_shift(psi, t), 16, theta);
    EXPECT_LE(tv(dense, naive), 1e-9);
  }
}

TEST(PhaseEstimate, ExactRepresentableIsCertain) {
  std::mt19937_64 rng(40);
  fixture::SimGroup g = fixture::random_sim_group(2, 16, {16}, rng);
  Rng r(4);
  PcsModel m = make_pcs(g.decomp, g.sigma, r, Backend::gram);
  PeConfig cfg = make_pe_config(0, 0.1);
  for (int i = 0; i < 50; ++i) {
    Vec s = fixture::random_coeffs(*g.decomp, rng);
    const std::int64_t k = zq::charphase(m.a, zq::negate_coeffs(s, *g.decomp), *g.decomp);
    EXPECT_EQ(phase_estimate(m, zq::element(*g.decomp, s), cfg, r), k);
  }
}

TEST(PhaseEstimate, NearestMultipleAtLeastFourOverPiSquared) {
  // Global phase theta puts the eigenphase off the T-grid.
  std::mt19937_64 rng(41);
  fixture::SimGroup g = fixture::random_sim_group(2, 16, {16}, rng);
  Rng r(5);
  PcsModel m = make_pcs(g.decomp, g.sigma, r, Backend::dense);
  Vec s{3};
  const double theta = 0.37 / 32;
  const std::int64_t k = zq::charphase(m.a, zq::negate_coeffs(s, *g.decomp), *g.decomp);
  std::vector<double> pr = pe_distribution(m, zq::element(*g.decomp, s), 32, Backend::dense, theta);
  const double phase = double(k) / 16 + theta;
  const auto nearest = static_cast<std::size_t>(std::llround(phase * 32)) % 32;
  EXPECT_GE(pr[nearest], 4 / (std::numbers::pi * std::numbers::pi));
  int hits = 0;
  for (int i = 0; i < 10000; ++i) hits += sample_index(pr, r) == std::int64_t(nearest);
  EXPECT_GE(hits / 1e4, 4 / (std::numbers::pi * std::numbers::pi) - 0.02);
}

TEST(ApproxEigenvector, PropertyPowerLawAndDrift) {
  std::mt19937_64 rng(42);
  for (int it = 0; it < 10; ++it) {
    fixture::SimGroup g = fixture::random_sim_group(2, 16, {16}, rng);
    Rng r(static_cast<std::uint64_t>(100 + it));
    PcsModel m = make_pcs(g.decomp, g.sigma, r, Backend::dense);
    DenseState psi = pcs_dense_state(m);
    Vec s = fixture::random_coeffs(*g.decomp, rng);
    Vec delta = fixture::random_offset(2, g.lambda1.value / 4, 16, rng);
    Vec t = fixture::add_mod(zq::element(*g.decomp, s), delta, 16);
    cplx lambda = fixture::root(zq::charphase(m.a, zq::negate_coeffs(s, *g.decomp), *g.decomp), 16);
    const double eps_ev = 4 * std::pow(2.0, 0.75) * std::sqrt(zq::modnorm(delta, 16) / g.lambda1.value);
    DenseState cur = psi;
    cplx lk = 1;
    double drift_sq = 0;
    const int T = 64;
    for (int k = 1; k <= T; ++k) {
      cur = shift_apply(cur, t);
      lk *= lambda;
      const double d = distance(cur, scaled(psi, lk));
      EXPECT_LE(d, k * eps_ev + 1e-10);
      if (k < T) drift_sq += d * d;
    }
    EXPECT_LE(std::sqrt(drift_sq / T), eps_ev * T / std::sqrt(3.0) + 1e-10);
  }
}

TEST(SampleHip, ForcedZeroLabelOnGroupGivesZero) {
  std::mt19937_64 rng(43);
  fixture::SimGroup g = fixture::random_sim_group(2, 16, {16}, rng);
  Rng r(6);
  HipOptions o;
  o.forced_label = Vec{0};
  HipSample h = sample_hip(g.decomp, g.sigma, 0, zq::element(*g.decomp, {7}), 0.1, r, o);
  EXPECT_EQ(h.O, 0);
}

TEST(SampleHip, OnGroupWithinRounding) {
  std::mt19937_64 rng(44);
  fixture::SimGroup g = fixture::random_sim_group(2, 16, {16}, rng);
  Rng r(7);
  HipOptions o;
  o.backend = Backend::dense;
  for (int i = 0; i < 30; ++i) {
    Vec s = fixture::random_coeffs(*g.decomp, rng);
    HipSample h = sample_hip(g.decomp, g.sigma, 0, zq::element(*g.decomp, s), 0.2, r, o);
    const std::int64_t k = zq::charphase(h.a, zq::negate_coeffs(s, *g.decomp), *g.decomp);
    EXPECT_LE(zq_abs(h.O - k, 16), (16 + h.T - 1) / h.T);
  }
}

TEST(SampleHip, Preconditions) {
  std::mt19937_64 rng(45);
  fixture::SimGroup g = fixture::random_sim_group(2, 16, {16}, rng);
  Rng r(8);
  Vec t = zq::element(*g.decomp, {1});
  EXPECT_THROW(sample_hip(g.decomp, g.sigma + 8, 0, t, 0.1, r), PreconditionError);
  EXPECT_THROW(sample_hip(g.decomp, g.sigma, 0.6, t, 0.1, r), PreconditionError);
  try {
    sample_hip(g.decomp, g.sigma, 0.01, t, 0.1, r);
    FAIL() << "expected precondition error";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("pe-approx precondition"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("eps1 must be at most"), std::string::npos);
  }
}
