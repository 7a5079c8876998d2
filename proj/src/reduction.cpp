#include "qbdd/reduction.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "qbdd/error.hpp"
#include "qbdd/intlat.hpp"

namespace qbdd::reduction {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::int64_t to_i64(const BigInt& x, const char* what) {
  if (!x.fits_slong_p()) throw PreconditionError(std::string(what) + " exceeds 64 bits");
  return x.get_si();
}

zq::Vec reduce_target(const ZVec& t, std::int64_t q) {
  zq::Vec out(t.size());
  const BigInt qq(q);
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = mod_floor(t[i], qq).get_si();
  return out;
}

IntMatrix qary_basis(const IntMatrix& g, std::int64_t q) {
  IntMatrix qi(g.rows(), g.rows());
  for (std::size_t i = 0; i < g.rows(); ++i) qi(i, i) = q;
  return intlat::hnf(g.hcat(qi));
}

}  // namespace

zq::FiniteGroupDecomp ReducedInstance::group() const {
  zq::FiniteGroupDecomp d;
  d.q = q;
  d.n = m;
  d.qvec = qvec;
  d.gens.assign(r(), zq::Vec(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < r(); ++j) d.gens[j][i] = rows[i][j];
  return d;
}

IntMatrix ReducedInstance::matrix() const {
  IntMatrix g(m, r());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < r(); ++j) g(i, j) = rows[i][j];
  return g;
}

bool samplebdd_feasible(std::size_t m, std::size_t r, std::int64_t q, double p_err) {
  if (m < r) return false;
  const double lhs = std::ldexp(1.0, -static_cast<int>(m)) +
                     std::pow(static_cast<double>(q), -static_cast<double>(m - r));
  return p_err / 2 >= lhs;
}

std::size_t min_feasible_m(std::size_t r, std::int64_t q, double p_err) {
  for (std::size_t m = std::max<std::size_t>(r, 1); m < 4096; ++m)
    if (samplebdd_feasible(m, r, q, p_err)) return m;
  throw PreconditionError("no target dimension satisfies the sampling precondition");
}

std::int64_t sigma_for(double lambda1_hat, std::size_t n) {
  const double s = std::floor(lambda1_hat / (2 * std::sqrt(static_cast<double>(n))));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(s));
}

ReducedInstance sample_bdd(std::shared_ptr<const zq::FiniteGroupDecomp> decomp,
                           double lambda1_hat, const zq::Vec& t, double eps1, std::size_t m,
                           double p_err, Rng& rng, const SampleOptions& opts) {
  const zq::FiniteGroupDecomp& d = *decomp;
  const std::size_t r = d.r();
  if (m < r) throw PreconditionError("m < r: G~ cannot be primitive");
  if (!samplebdd_feasible(m, r, d.q, p_err))
    throw PreconditionError("p_err/2 < 2^-m + q^-(m-r)");
  if (opts.forced_labels && opts.forced_labels->size() != m)
    throw PreconditionError("forced label count differs from m");
  ReducedInstance red;
  red.q = d.q;
  red.m = m;
  red.qvec = d.qvec;
  red.p_err = p_err;
  red.p_err_pe = p_err / (2.0 * static_cast<double>(m));
  red.lambda1_hat = lambda1_hat;
  red.sigma = sigma_for(lambda1_hat, d.n);

  qsim::HipOptions hip;
  hip.backend = opts.backend;
  hip.lambda1 = opts.lambda1 ? *opts.lambda1 : zq::lambda1_group(d);
  for (std::size_t i = 0; i < m; ++i) {
    if (opts.forced_labels) hip.forced_label = (*opts.forced_labels)[i];
    qsim::HipSample h = qsim::sample_hip(decomp, red.sigma, eps1, t, red.p_err_pe, rng, hip);
    // O estimates -sum_j a_j (q/q_j) s_j, so row i stores the negated, scaled label.
    zq::Vec row(r);
    for (std::size_t j = 0; j < r; ++j) row[j] = zq::mod(-h.a[j] * (d.q / d.qvec[j]), d.q);
    red.rows.push_back(std::move(row));
    red.ttilde.push_back(h.O);
    red.samples.push_back(std::move(h));
  }
  return red;
}

double samplebdd_distance_bound(double eps1, std::int64_t q, std::size_t r, std::size_t m,
                                std::size_t n, double p_err, double lambda1_reduced) {
  const double md = static_cast<double>(m);
  return std::sqrt(eps1) * std::pow(static_cast<double>(q), static_cast<double>(r) / md) *
         lambda1_reduced * 260.0 * std::pow(static_cast<double>(n), 0.75) * std::pow(md, 2.5) /
         (p_err * p_err);
}

zq::Lambda1 lambda1_elements(const zq::FiniteGroupDecomp& d) {
  zq::Lambda1 l;
  bool have = false;
  zq::for_each_element(d, [&](const zq::Vec&, const zq::Vec& v) {
    bool zero = true;
    for (std::int64_t x : v)
      if (x) zero = false;
    if (zero) return true;
    std::int64_t s = zq::modnorm_sq(v, d.q);
    if (!have || s < l.sq) l.sq = s;
    have = true;
    return true;
  });
  if (!have) {
    l.degenerate = true;
    return l;
  }
  l.value = std::sqrt(static_cast<double>(l.sq));
  return l;
}

CoefficientCheck check_coefficients(const ReducedInstance& red, const zq::Vec& s) {
  zq::FiniteGroupDecomp g = red.group();
  zq::GroupCvp best = zq::group_cvp_exact(g, red.ttilde);
  CoefficientCheck c;
  c.argmin = best.s;
  c.dist_sq = best.dist_sq;
  zq::Vec diff(red.m);
  zq::for_each_element(g, [&](const zq::Vec&, const zq::Vec& v) {
    for (std::size_t i = 0; i < red.m; ++i) diff[i] = red.ttilde[i] - v[i];
    if (zq::modnorm_sq(diff, red.q) == best.dist_sq) ++c.minimizers;
    return true;
  });
  c.preserved = c.minimizers == 1 && c.argmin == s;
  return c;
}

bool is_primitive(const IntMatrix& g, std::int64_t q) {
  if (g.cols() == 0) return true;
  if (g.rows() < g.cols()) return false;
  ZVec d = intlat::snf_diagonal(g);
  for (const BigInt& x : d) {
    BigInt gc;
    mpz_gcd(gc.get_mpz_t(), x.get_mpz_t(), BigInt(q).get_mpz_t());
    if (gc != 1) return false;
  }
  return true;
}

QaryDraw random_qary(std::size_t m, std::size_t r, std::int64_t q, Rng& rng) {
  if (m < r) throw PreconditionError("m < r");
  QaryDraw out;
  std::uniform_int_distribution<std::int64_t> u(0, q - 1);
  out.gtilde = IntMatrix(m, r);
  out.decomp.q = q;
  out.decomp.n = m;
  out.decomp.qvec.assign(r, q);
  out.decomp.gens.assign(r, zq::Vec(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      std::int64_t x = u(rng);
      out.gtilde(i, j) = x;
      out.decomp.gens[j][i] = x;
    }
  out.lattice = qary_basis(out.gtilde, q);
  out.lambda1_sq = to_i64(intlat::lambda1_sq_exact(out.lattice), "lambda1");
  out.primitive = is_primitive(out.gtilde, q);
  return out;
}

IntMatrix random_periodic_lattice(std::size_t n, std::int64_t q,
                                  const std::vector<std::int64_t>& qvec, Rng& rng) {
  std::vector<std::int64_t> want = qvec;
  std::sort(want.begin(), want.end());
  if (want.size() > n) throw PreconditionError("group rank exceeds dimension");
  for (std::size_t j = 0; j < want.size(); ++j) {
    if (want[j] < 2 || q % want[j] != 0) throw PreconditionError("each q_j must divide q");
    if (j > 0 && want[j] % want[j - 1] != 0)
      throw PreconditionError("q_1 | q_2 | ... | q_r required");
  }
  std::uniform_int_distribution<std::int64_t> u(0, q - 1);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    IntMatrix g(n, want.size());
    for (std::size_t j = 0; j < want.size(); ++j)
      for (std::size_t i = 0; i < n; ++i) g(i, j) = zq::mod(u(rng) * (q / want[j]), q);
    IntMatrix b = qary_basis(g, q);
    if (intlat::periodicity(b) != q) continue;
    zq::FiniteGroupDecomp d = zq::decompose(b, q);
    std::vector<std::int64_t> got = d.qvec;
    std::sort(got.begin(), got.end());
    if (got == want) return b;
  }
  throw PreconditionError("could not draw a lattice with the requested group structure");
}

BddInstance plant_instance(const IntMatrix& basis, double eps1, Rng& rng,
                           const PlantOptions& opts) {
  if (!(eps1 >= 0 && eps1 <= 0.5)) throw PreconditionError("eps1 must lie in [0, 1/2]");
  if (basis.rows() != basis.cols()) throw PreconditionError("basis must be square");
  BddInstance inst;
  inst.basis = basis;
  inst.eps1 = eps1;
  inst.q = to_i64(intlat::periodicity(basis), "periodicity");
  zq::FiniteGroupDecomp d = zq::decompose(basis, inst.q);
  inst.lambda1_sq = zq::lambda1_lattice_sq(d);
  const long double radius_sq =
      static_cast<long double>(eps1) * eps1 * static_cast<long double>(inst.lambda1_sq);
  const std::int64_t R = static_cast<std::int64_t>(std::floor(std::sqrt(radius_sq)));
  if (opts.strict && eps1 > 0 && R < 1)
    throw PreconditionError("eps1*lambda1 < 1 leaves only Delta = 0; plant with eps1 = 0");

  const std::size_t n = basis.rows();
  std::uniform_int_distribution<std::int64_t> cu(-inst.q, inst.q);
  ZVec c(n);
  for (auto& ci : c) ci = cu(rng);
  ZVec v = basis * c;

  std::uniform_int_distribution<std::int64_t> du(-R, R);
  ZVec delta(n);
  while (true) {
    long double s = 0;
    for (auto& x : delta) {
      std::int64_t y = du(rng);
      x = y;
      s += static_cast<long double>(y) * y;
    }
    if (s <= radius_sq) break;
  }
  inst.target.resize(n);
  for (std::size_t i = 0; i < n; ++i) inst.target[i] = v[i] + delta[i];
  inst.planted = v;
  inst.delta = delta;
  return inst;
}

std::size_t poly_dimension(std::size_t r, std::int64_t q, double p_err) {
  const double want = std::ceil(std::sqrt(static_cast<double>(r) * std::log2(static_cast<double>(q))));
  return std::max(static_cast<std::size_t>(want), min_feasible_m(r, q, p_err));
}

std::size_t tradeoff_dimension(std::size_t r, std::int64_t q, std::size_t beta, double p_err) {
  if (beta < 2) throw PreconditionError("beta must be at least 2");
  const double b = static_cast<double>(beta);
  const double want = std::ceil(
      std::sqrt(b * static_cast<double>(r) * std::log2(static_cast<double>(q)) / std::log2(b)));
  return std::max(static_cast<std::size_t>(want), min_feasible_m(r, q, p_err));
}

double default_promise(std::size_t n, std::size_t m, double p_err) {
  return qsim::max_feasible_eps1(n, p_err / (2.0 * static_cast<double>(m))) * 0.999;
}

namespace {

SolveResult solve_impl(const IntMatrix& b, const ZVec& t, std::size_t beta, Rng& rng,
                       const SolveOptions& opts) {
  const auto t0 = Clock::now();
  if (b.rows() != b.cols()) throw PreconditionError("basis must be square");
  if (t.size() != b.rows()) throw PreconditionError("target dimension mismatch");
  SolveResult res;
  res.n = b.rows();
  res.beta = beta;
  res.q = to_i64(intlat::periodicity(b), "periodicity");
  if (res.q > (std::int64_t(1) << 30)) throw BudgetError("periodicity above 2^30");
  auto decomp = std::make_shared<const zq::FiniteGroupDecomp>(zq::decompose(b, res.q));
  const zq::FiniteGroupDecomp& d = *decomp;
  res.r = d.r();
  const zq::Vec tq = reduce_target(t, res.q);

  if (res.r == 0) {
    // L = qZ^n: coordinate-wise rounding is exact.
    res.found = true;
    res.v = zq::lift_solution(d, {}, t);
    res.seconds = seconds_since(t0);
    return res;
  }

  res.m = opts.m ? *opts.m
                 : (beta ? tradeoff_dimension(res.r, res.q, beta, opts.p_err)
                         : poly_dimension(res.r, res.q, opts.p_err));
  res.eps1 = opts.eps1 < 0 ? default_promise(res.n, res.m, opts.p_err) : opts.eps1;

  SampleOptions so;
  so.backend = opts.backend;
  so.lambda1 = zq::lambda1_group(d);

  for (std::int64_t lh = 2;; lh *= 2) {
    LadderStep step;
    step.lambda1_hat = static_cast<double>(lh);
    step.sigma = sigma_for(step.lambda1_hat, res.n);
    const bool last = lh >= res.q;
    if (2 * step.sigma > res.q || !qsim::sigma_in_range(step.sigma, *so.lambda1, res.n)) {
      step.status = "refused";
      step.detail = "sigma outside the cube-state range";
      res.ladder.push_back(std::move(step));
      if (last) break;
      continue;
    }
    auto ts = Clock::now();
    ReducedInstance red;
    try {
      red = sample_bdd(decomp, step.lambda1_hat, tq, res.eps1, res.m, opts.p_err, rng, so);
    } catch (const PreconditionError& e) {
      step.status = "refused";
      step.detail = e.what();
      res.ladder.push_back(std::move(step));
      if (last) break;
      continue;
    }
    step.sample_seconds = seconds_since(ts);
    step.T = red.samples.empty() ? 0 : red.samples.front().T;
    step.samples = red.samples;

    auto tc = Clock::now();
    IntMatrix gt = red.matrix();
    IntMatrix bt = qary_basis(gt, res.q);
    QVec target(red.m);
    for (std::size_t i = 0; i < red.m; ++i) target[i] = Rational(red.ttilde[i]);
    ZVec vt;
    if (beta == 0) {
      IntMatrix red_basis = intlat::lll_reduce(bt);
      vt = red_basis * intlat::babai_nearest_plane(red_basis, target);
    } else {
      intlat::CvpResult cv = intlat::block_reduce_cvp(bt, target, beta);
      step.nodes = cv.nodes;
      vt = bt * cv.coeffs;
    }
    std::optional<ZVec> sol = zq::solve_mod_q(gt, vt, BigInt(res.q));
    step.cvp_seconds = seconds_since(tc);
    res.cvp_seconds += step.cvp_seconds;
    res.cvp_nodes += step.nodes;
    if (!sol) {
      step.status = "rejected";
      step.detail = "candidate outside the sampled group";
      res.ladder.push_back(std::move(step));
      if (last) break;
      continue;
    }
    step.s.resize(res.r);
    for (std::size_t j = 0; j < res.r; ++j)
      step.s[j] = mod_floor((*sol)[j], BigInt(d.qvec[j])).get_si();
    zq::Vec gs = zq::element(d, step.s);
    zq::Vec diff(res.n);
    for (std::size_t i = 0; i < res.n; ++i) diff[i] = tq[i] - gs[i];
    step.dist_sq = zq::modnorm_sq(diff, res.q);
    if (4 * static_cast<__int128>(step.dist_sq) <= static_cast<__int128>(lh) * lh) {
      step.status = "accepted";
      res.found = true;
      res.s = step.s;
      res.lambda1_hat = step.lambda1_hat;
      res.v = zq::lift_solution(d, step.s, t);
      res.ladder.push_back(std::move(step));
      break;
    }
    step.status = "rejected";
    step.detail = "distance above lambda1_hat/2";
    res.ladder.push_back(std::move(step));
    if (last) break;
  }
  res.seconds = seconds_since(t0);
  return res;
}

}  // namespace

SolveResult solve_bdd_poly(const IntMatrix& b, const ZVec& t, Rng& rng, const SolveOptions& opts) {
  return solve_impl(b, t, 0, rng, opts);
}

SolveResult solve_bdd_tradeoff(const IntMatrix& b, const ZVec& t, std::size_t beta, Rng& rng,
                               const SolveOptions& opts) {
  if (beta < 2) throw PreconditionError("beta must be at least 2");
  return solve_impl(b, t, beta, rng, opts);
}

double tradeoff_exponent(double rlogq, double beta) {
  return 4 * std::sqrt(rlogq * std::log(beta) / beta);
}

double two_term_balance(double m, double rlogq, double beta) {
  return (m - 1) * std::log(beta) / (beta - 1) + rlogq / m;
}

double corollary1_exponent(double n, double eps) {
  const double beta = std::pow(n, 1 - 2 * eps);
  return tradeoff_exponent(n * std::log(n), beta);
}

double corollary1_exponent_literal(double n, double eps) {
  return 4 * std::pow(n, eps) * std::log(n);
}

double corollary2_exponent(double n, double c) {
  const double l = c * std::log(n);
  return tradeoff_exponent(l * l * l, l);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

TrialOutcome run_trial(const CellSpec& spec, double eps1, std::uint64_t seed) {
  Rng rng(seed);
  TrialOutcome out;
  IntMatrix b = random_periodic_lattice(spec.n, spec.q, spec.qvec, rng);
  BddInstance inst = plant_instance(b, eps1, rng);
  SolveOptions so;
  so.p_err = spec.p_err;
  so.backend = spec.backend;
  SolveResult res = spec.solver == "tradeoff"
                        ? solve_bdd_tradeoff(inst.basis, inst.target, spec.beta, rng, so)
                        : solve_bdd_poly(inst.basis, inst.target, rng, so);
  out.found = res.found;
  out.success = res.found && res.v == *inst.planted;
  out.seconds = res.seconds;
  out.cvp_seconds = res.cvp_seconds;
  out.cvp_nodes = res.cvp_nodes;
  return out;
}

CellPoint run_point(const CellSpec& spec, double eps1, std::uint64_t seed, std::size_t jobs) {
  std::vector<TrialOutcome> outs(spec.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex fail_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < spec.trials;) {
      try {
        outs[i] = run_trial(spec, eps1, derive_seed(seed, i));
      } catch (const BudgetError&) {
        outs[i] = TrialOutcome{};
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, spec.trials));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  CellPoint p;
  p.eps1 = eps1;
  p.trials = spec.trials;
  for (const TrialOutcome& o : outs) {
    p.successes += o.success;
    p.seconds += o.seconds;
    p.cvp_seconds += o.cvp_seconds;
    p.cvp_nodes += o.cvp_nodes;
  }
  return p;
}

CellResult calibrate_cell(const CellSpec& spec, std::size_t jobs) {
  CellResult res;
  res.spec = spec;
  for (std::size_t k = 0;; ++k) {
    const double eps = static_cast<double>(k) * spec.eps_step;
    if (eps > spec.eps_max + 1e-12) break;
    // Every point reuses the same trial seeds, so only the offset radius varies.
    CellPoint p = run_point(spec, eps, derive_seed(spec.seed, 0, 1), jobs);
    res.points.push_back(p);
    if (p.rate() < spec.min_rate) break;
    res.threshold = eps;
    if (spec.eps_step <= 0) break;
  }
  return res;
}

}  // namespace qbdd::reduction
