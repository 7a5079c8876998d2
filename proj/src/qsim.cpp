#include "qbdd/qsim.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "qbdd/error.hpp"

namespace qbdd::qsim {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place forward DFT (sign -1) of `howmany` contiguous length-len blocks.
void dft_many(std::vector<cplx>& data, int len, int howmany) {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_many_dft(1, &len, howmany, p, nullptr, 1, len, p, nullptr, 1, len,
                              FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

cplx root(std::int64_t k, std::int64_t q) {
  double ang = kTwoPi * static_cast<double>(zq::mod(k, q)) / static_cast<double>(q);
  return {std::cos(ang), std::sin(ang)};
}

bool is_power_of_two(std::int64_t T) { return T > 0 && (T & (T - 1)) == 0; }

std::size_t checked_size(std::int64_t q, std::size_t n, std::size_t limit) {
  std::size_t s = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (s > limit / static_cast<std::size_t>(q))
      throw BudgetError("state too large for the dense backend; use the gram backend");
    s *= static_cast<std::size_t>(q);
  }
  return s;
}

void check_sigma(std::int64_t sigma, std::int64_t q) {
  if (sigma < 1) throw PreconditionError("sigma must be at least 1");
  if (2 * sigma > q) throw PreconditionError("cube side 2*sigma exceeds q");
}

// Group elements with their character phases for label a.
struct GramTable {
  std::int64_t q = 0;
  std::size_t n = 0;
  std::vector<std::int64_t> elems;  // |G| x n, row-major
  std::vector<cplx> phase;
  std::vector<double> ov;  // overlap(delta)/(2 sigma) for delta in [q]

  GramTable(const zq::FiniteGroupDecomp& d, const zq::Vec& a, std::int64_t sigma)
      : q(d.q), n(d.n), ov(static_cast<std::size_t>(d.q)) {
    for (std::int64_t x = 0; x < q; ++x)
      ov[static_cast<std::size_t>(x)] =
          static_cast<double>(cube_overlap_1d(x, sigma, q)) / static_cast<double>(2 * sigma);
    zq::for_each_element(d, [&](const zq::Vec& c, const zq::Vec& v) {
      elems.insert(elems.end(), v.begin(), v.end());
      phase.push_back(root(zq::charphase(a, c, d), q));
      return true;
    });
  }

  cplx raw(const zq::Vec& x) const {
    cplx s = 0;
    const std::size_t g = phase.size();
    for (std::size_t e = 0; e < g; ++e) {
      const std::int64_t* v = &elems[e * n];
      double w = 1;
      for (std::size_t i = 0; i < n && w != 0; ++i) {
        std::int64_t y = v[i] + x[i];
        if (y >= q) y -= q;
        w *= ov[static_cast<std::size_t>(y)];
      }
      if (w != 0) s += phase[e] * w;
    }
    return s;
  }
};

}  // namespace

std::size_t DenseState::index(const zq::Vec& x) const {
  std::size_t idx = 0, mul = 1;
  for (std::size_t i = 0; i < n; ++i) {
    idx += static_cast<std::size_t>(zq::mod(x[i], q)) * mul;
    mul *= static_cast<std::size_t>(q);
  }
  return idx;
}

zq::Vec DenseState::point(std::size_t idx) const {
  zq::Vec x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(q));
    idx /= static_cast<std::size_t>(q);
  }
  return x;
}

double DenseState::norm() const {
  double s = 0;
  for (const cplx& c : amp) s += std::norm(c);
  return std::sqrt(s);
}

double PeConfig::radius(std::int64_t q) const {
  return 129.0 * static_cast<double>(q) * eps_ev / (p_err * p_err);
}

std::int64_t zq_abs(std::int64_t x, std::int64_t q) { return std::abs(zq::centered(x, q)); }

std::int64_t cube_overlap_1d(std::int64_t delta, std::int64_t sigma, std::int64_t q) {
  check_sigma(sigma, q);
  // Two arcs of length 2 sigma on a cycle of length q, offset by delta.
  const std::int64_t len = 2 * sigma;
  const std::int64_t d = zq::mod(delta, q);
  return std::max<std::int64_t>(0, len - d) + std::max<std::int64_t>(0, len - (q - d));
}

DenseState make_cube_state(const zq::Vec& y, std::int64_t sigma, std::int64_t q) {
  check_sigma(sigma, q);
  DenseState s;
  s.q = q;
  s.n = y.size();
  s.amp.assign(checked_size(q, s.n, kDenseBudget), cplx(0));
  const double a = std::pow(2.0 * static_cast<double>(sigma), -0.5 * static_cast<double>(s.n));
  zq::Vec z(s.n, -sigma + 1), x(s.n);
  while (true) {
    for (std::size_t i = 0; i < s.n; ++i) x[i] = y[i] + z[i];
    s.amp[s.index(x)] += a;
    std::size_t i = 0;
    while (i < s.n && ++z[i] > sigma) z[i++] = -sigma + 1;
    if (i == s.n) break;
  }
  return s;
}

DenseState shift_apply(const DenseState& s, const zq::Vec& x) {
  if (x.size() != s.n) throw PreconditionError("shift dimension mismatch");
  DenseState r;
  r.q = s.q;
  r.n = s.n;
  r.amp.assign(s.amp.size(), cplx(0));
  zq::Vec y(s.n);
  for (std::size_t idx = 0; idx < s.amp.size(); ++idx) {
    if (s.amp[idx] == cplx(0)) continue;
    zq::Vec p = s.point(idx);
    for (std::size_t i = 0; i < s.n; ++i) y[i] = p[i] + x[i];
    r.amp[r.index(y)] = s.amp[idx];
  }
  return r;
}

cplx inner(const DenseState& a, const DenseState& b) {
  if (a.q != b.q || a.n != b.n) throw PreconditionError("state moduli mismatch");
  cplx s = 0;
  for (std::size_t i = 0; i < a.amp.size(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
  return s;
}

double distance(const DenseState& a, const DenseState& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.amp.size(); ++i) s += std::norm(a.amp[i] - b.amp[i]);
  return std::sqrt(s);
}

PcsModel make_pcs(std::shared_ptr<const zq::FiniteGroupDecomp> decomp, std::int64_t sigma,
                  Rng& rng, Backend backend, std::optional<zq::Vec> forced_label) {
  const zq::FiniteGroupDecomp& d = *decomp;
  check_sigma(sigma, d.q);
  if (backend == Backend::dense) checked_size(d.q, d.n, kDenseBudget);
  PcsModel m;
  m.decomp = decomp;
  m.sigma = sigma;
  m.backend = backend;
  const std::size_t r = d.r();

  // Do the cubes around distinct group elements overlap anywhere?
  bool disjoint = true;
  const std::int64_t reach = 2 * sigma - 1;
  zq::for_each_element(d, [&](const zq::Vec& c, const zq::Vec& v) {
    bool zero = true;
    for (std::int64_t ci : c)
      if (ci) zero = false;
    if (zero) return true;
    bool close = true;
    for (std::int64_t vi : v)
      if (zq_abs(vi, d.q) > reach) close = false;
    if (close) disjoint = false;
    return disjoint;
  });

  if (forced_label) {
    if (forced_label->size() != r) throw PreconditionError("label length mismatch");
    m.a = zq::reduce(*forced_label, d.q);
  } else if (disjoint) {
    std::uniform_int_distribution<std::int64_t> u(0, d.q - 1);
    m.a.resize(r);
    for (auto& ai : m.a) ai = u(rng);
  } else {
    // Exact label law Pr(a) = N_a / q^r when cube supports overlap.
    std::size_t cells = checked_size(d.q, r, 1u << 20);
    std::vector<double> pr(cells);
    zq::Vec a(r, 0);
    for (std::size_t idx = 0; idx < cells; ++idx) {
      std::size_t t = idx;
      for (std::size_t j = 0; j < r; ++j) {
        a[j] = static_cast<std::int64_t>(t % static_cast<std::size_t>(d.q));
        t /= static_cast<std::size_t>(d.q);
      }
      GramTable g(d, a, sigma);
      pr[idx] = std::max(0.0, g.raw(zq::Vec(d.n, 0)).real()) / static_cast<double>(cells);
    }
    std::size_t pick = static_cast<std::size_t>(sample_index(pr, rng));
    m.a.resize(r);
    for (std::size_t j = 0; j < r; ++j) {
      m.a[j] = static_cast<std::int64_t>(pick % static_cast<std::size_t>(d.q));
      pick /= static_cast<std::size_t>(d.q);
    }
  }
  GramTable g(d, m.a, sigma);
  m.norm_factor = g.raw(zq::Vec(d.n, 0)).real();
  if (!(m.norm_factor > 0)) throw PreconditionError("label has zero amplitude");
  return m;
}

DenseState pcs_dense_state(const PcsModel& m) {
  const zq::FiniteGroupDecomp& d = *m.decomp;
  DenseState s;
  s.q = d.q;
  s.n = d.n;
  s.amp.assign(checked_size(d.q, d.n, kDenseBudget), cplx(0));
  const double scale =
      1.0 / std::sqrt(static_cast<double>(d.order()) * m.norm_factor) *
      std::pow(2.0 * static_cast<double>(m.sigma), -0.5 * static_cast<double>(d.n));
  zq::Vec z(d.n), x(d.n);
  zq::for_each_element(d, [&](const zq::Vec& c, const zq::Vec& v) {
    cplx ph = root(zq::charphase(m.a, c, d), d.q) * scale;
    std::fill(z.begin(), z.end(), -m.sigma + 1);
    while (true) {
      for (std::size_t i = 0; i < d.n; ++i) x[i] = v[i] + z[i];
      s.amp[s.index(x)] += ph;
      std::size_t i = 0;
      while (i < d.n && ++z[i] > m.sigma) z[i++] = -m.sigma + 1;
      if (i == d.n) break;
    }
    return true;
  });
  return s;
}

cplx pcs_gram(const PcsModel& m, const zq::Vec& x) {
  GramTable g(*m.decomp, m.a, m.sigma);
  return g.raw(zq::reduce(x, m.decomp->q)) / m.norm_factor;
}

std::vector<double> pe_distribution_dense(const DenseState& psi, const zq::Vec& t,
                                          std::int64_t T, double theta) {
  if (!is_power_of_two(T)) throw PreconditionError("T must be a power of two");
  if (t.size() != psi.n) throw PreconditionError("shift dimension mismatch");
  const std::size_t N = psi.amp.size();
  if (N > kDenseBudget / static_cast<std::size_t>(T))
    throw BudgetError("phase register too large for the dense backend");
  // (U_t^k psi)(x) = psi(x - k t).
  std::vector<std::size_t> back(N);
  zq::Vec y(psi.n);
  for (std::size_t idx = 0; idx < N; ++idx) {
    zq::Vec p = psi.point(idx);
    for (std::size_t i = 0; i < psi.n; ++i) y[i] = p[i] - t[i];
    back[idx] = psi.index(y);
  }
  const std::size_t len = static_cast<std::size_t>(T);
  std::vector<cplx> tw(len);
  for (std::size_t k = 0; k < len; ++k)
    tw[k] = std::polar(1.0, kTwoPi * theta * static_cast<double>(k));
  std::vector<cplx> buf(N * len);
  for (std::size_t idx = 0; idx < N; ++idx) {
    std::size_t cur = idx;
    for (std::size_t k = 0; k < len; ++k) {
      buf[idx * len + k] = psi.amp[cur] * tw[k];
      cur = back[cur];
    }
  }
  dft_many(buf, static_cast<int>(len), static_cast<int>(N));
  std::vector<double> pr(len, 0.0);
  const double inv = 1.0 / (static_cast<double>(T) * static_cast<double>(T));
  for (std::size_t idx = 0; idx < N; ++idx)
    for (std::size_t h = 0; h < len; ++h) pr[h] += std::norm(buf[idx * len + h]) * inv;
  return pr;
}

std::vector<double> pe_distribution(const PcsModel& m, const zq::Vec& t, std::int64_t T,
                                    Backend backend, double theta) {
  if (!is_power_of_two(T)) throw PreconditionError("T must be a power of two");
  const zq::FiniteGroupDecomp& d = *m.decomp;
  if (t.size() != d.n) throw PreconditionError("shift dimension mismatch");
  if (backend == Backend::automatic) backend = m.backend;
  if (backend == Backend::dense) return pe_distribution_dense(pcs_dense_state(m), t, T, theta);

  // Toeplitz sequence g(k) = <psi|U_t^k psi>, folded onto [T] and transformed.
  GramTable tab(d, m.a, m.sigma);
  const std::size_t len = static_cast<std::size_t>(T);
  std::vector<cplx> g(len);
  zq::Vec x(d.n, 0), tr = zq::reduce(t, d.q);
  for (std::size_t k = 0; k < len; ++k) {
    g[k] = tab.raw(x) / m.norm_factor *
           std::polar(1.0, kTwoPi * theta * static_cast<double>(k));
    for (std::size_t i = 0; i < d.n; ++i) {
      x[i] += tr[i];
      if (x[i] >= d.q) x[i] -= d.q;
    }
  }
  std::vector<cplx> c(len);
  c[0] = static_cast<double>(T) * g[0];
  for (std::size_t j = 1; j < len; ++j)
    c[j] = static_cast<double>(len - j) * g[j] + static_cast<double>(j) * std::conj(g[len - j]);
  dft_many(c, static_cast<int>(len), 1);
  std::vector<double> pr(len);
  const double inv = 1.0 / (static_cast<double>(T) * static_cast<double>(T));
  for (std::size_t h = 0; h < len; ++h) pr[h] = std::max(0.0, c[h].real() * inv);
  return pr;
}

PeConfig make_pe_config(double eps_ev, double p_err) {
  if (!(p_err > 0 && p_err < 1)) throw PreconditionError("p_err must lie in (0,1)");
  if (!(eps_ev >= 0)) throw PreconditionError("eps_ev must be nonnegative");
  PeConfig c;
  c.eps_ev = eps_ev;
  c.p_err = p_err;
  c.b = static_cast<int>(std::ceil(std::log2(2.0 / p_err)));
  if (eps_ev == 0) {
    c.a = 0;
  } else {
    const double ratio = p_err * p_err / (128.0 * eps_ev);
    if (ratio < 1) {
      std::ostringstream os;
      os << "pe-approx precondition: p_err^2/(128 eps_ev) = " << ratio << " < 1";
      throw PreconditionError(os.str());
    }
    c.a = static_cast<int>(std::ceil(std::log2(ratio)));
  }
  const int bits = c.a + c.b + 1;
  if (bits > 40) throw BudgetError("phase register of 2^" + std::to_string(bits) + " exceeds budget");
  c.T = std::int64_t(1) << bits;
  return c;
}

std::int64_t sample_index(const std::vector<double>& dist, Rng& rng) {
  double total = 0;
  for (double p : dist) total += p;
  std::uniform_real_distribution<double> u(0.0, total);
  const double x = u(rng);
  double acc = 0;
  std::int64_t last = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0) continue;
    acc += dist[i];
    last = static_cast<std::int64_t>(i);
    if (x < acc) return last;
  }
  return last;
}

std::int64_t round_phase(std::int64_t h, std::int64_t T, std::int64_t q) {
  __int128 num = static_cast<__int128>(2) * q * h + T;
  __int128 den = static_cast<__int128>(2) * T;
  return zq::mod(static_cast<std::int64_t>(num / den), q);
}

std::int64_t phase_estimate(const PcsModel& m, const zq::Vec& t, const PeConfig& cfg, Rng& rng,
                            std::int64_t* h_out) {
  std::vector<double> pr = pe_distribution(m, t, cfg.T, m.backend);
  std::int64_t h = sample_index(pr, rng);
  if (h_out) *h_out = h;
  return round_phase(h, cfg.T, m.decomp->q);
}

double hip_eps_ev(double eps1, std::size_t n) {
  return std::sqrt(eps1) * 4.0 * std::pow(static_cast<double>(n), 0.75);
}

double max_feasible_eps1(std::size_t n, double p_err) {
  double root = p_err * p_err / 128.0 / (4.0 * std::pow(static_cast<double>(n), 0.75));
  return root * root * (1 - 1e-9);
}

bool sigma_in_range(std::int64_t sigma, const zq::Lambda1& l1, std::size_t n) {
  if (l1.degenerate) return true;
  const __int128 s2 = static_cast<__int128>(sigma) * sigma * static_cast<__int128>(n);
  return 16 * s2 >= l1.sq && 4 * s2 <= l1.sq;
}

HipSample sample_hip(std::shared_ptr<const zq::FiniteGroupDecomp> decomp, std::int64_t sigma,
                     double eps1, const zq::Vec& t, double p_err, Rng& rng,
                     const HipOptions& opts) {
  const zq::FiniteGroupDecomp& d = *decomp;
  if (!(eps1 >= 0 && eps1 < 0.5)) throw PreconditionError("eps1 must lie in [0, 1/2)");
  check_sigma(sigma, d.q);
  zq::Lambda1 l1 = opts.lambda1 ? *opts.lambda1 : zq::lambda1_group(d);
  if (!sigma_in_range(sigma, l1, d.n))
    throw PreconditionError("sigma outside [lambda1/(4 sqrt n), lambda1/(2 sqrt n)]");
  const double eps_ev = hip_eps_ev(eps1, d.n);
  PeConfig cfg;
  try {
    cfg = make_pe_config(eps_ev, p_err);
  } catch (const PreconditionError& e) {
    std::ostringstream os;
    os << e.what() << "; eps1 must be at most " << max_feasible_eps1(d.n, p_err);
    throw PreconditionError(os.str());
  }
  HipSample s;
  s.seed = rng();
  Rng local(s.seed);
  PcsModel m = make_pcs(decomp, sigma, local, opts.backend, opts.forced_label);
  s.a = m.a;
  s.O = phase_estimate(m, t, cfg, local, &s.h);
  s.T = cfg.T;
  s.sigma = sigma;
  s.eps_ev = eps_ev;
  s.p_err = p_err;
  return s;
}

}  // namespace qbdd::qsim
