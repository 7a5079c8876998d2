#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "qbdd/zqgroup.hpp"

namespace qbdd::qsim {

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

enum class Backend { dense, gram, automatic };

// Amplitude table over Z_q^n, index sum_i x_i q^i.
struct DenseState {
  std::int64_t q = 0;
  std::size_t n = 0;
  std::vector<cplx> amp;

  std::size_t index(const zq::Vec& x) const;
  zq::Vec point(std::size_t idx) const;
  double norm() const;
};

struct PcsModel {
  std::shared_ptr<const zq::FiniteGroupDecomp> decomp;
  zq::Vec a;
  std::int64_t sigma = 1;
  Backend backend = Backend::automatic;
  // Squared norm of sum_c chi_a(c)|cube_{Gc}>, divided by |G|; 1 when cubes are disjoint.
  double norm_factor = 1;
};

struct PeConfig {
  double eps_ev = 0;
  double p_err = 0;
  int b = 0;
  int a = 0;
  std::int64_t T = 0;
  // Radius 129 q eps_ev / p_err^2 of the success event.
  double radius(std::int64_t q) const;
};

struct HipSample {
  zq::Vec a;
  std::int64_t O = 0;
  std::int64_t h = 0;
  std::int64_t T = 0;
  std::int64_t sigma = 0;
  double eps_ev = 0;
  double p_err = 0;
  std::uint64_t seed = 0;
};

struct HipOptions {
  Backend backend = Backend::automatic;
  std::optional<zq::Vec> forced_label;
  // Exact lambda_1 of the group, if the caller already knows it.
  std::optional<zq::Lambda1> lambda1;
};

constexpr std::size_t kDenseBudget = std::size_t(1) << 22;

std::int64_t cube_overlap_1d(std::int64_t delta, std::int64_t sigma, std::int64_t q);
DenseState make_cube_state(const zq::Vec& y, std::int64_t sigma, std::int64_t q);
DenseState shift_apply(const DenseState& s, const zq::Vec& x);
cplx inner(const DenseState& a, const DenseState& b);
double distance(const DenseState& a, const DenseState& b);

// Simulates the label measurement of the state preparation; forced_label fixes a.
PcsModel make_pcs(std::shared_ptr<const zq::FiniteGroupDecomp> decomp, std::int64_t sigma,
                  Rng& rng, Backend backend = Backend::automatic,
                  std::optional<zq::Vec> forced_label = std::nullopt);
DenseState pcs_dense_state(const PcsModel& m);
// <psi_a | U_x psi_a> from overlap products and character phases.
cplx pcs_gram(const PcsModel& m, const zq::Vec& x);

// Pr(h), h in [T], of the phase register; theta adds a global phase e^{2 pi i theta}
// to the controlled operator.
std::vector<double> pe_distribution(const PcsModel& m, const zq::Vec& t, std::int64_t T,
                                    Backend backend = Backend::automatic, double theta = 0);
std::vector<double> pe_distribution_dense(const DenseState& psi, const zq::Vec& t,
                                          std::int64_t T, double theta = 0);

PeConfig make_pe_config(double eps_ev, double p_err);
std::int64_t sample_index(const std::vector<double>& dist, Rng& rng);
// Nearest element of Z_q to q*h/T.
std::int64_t round_phase(std::int64_t h, std::int64_t T, std::int64_t q);
std::int64_t phase_estimate(const PcsModel& m, const zq::Vec& t, const PeConfig& cfg,
                            Rng& rng, std::int64_t* h_out = nullptr);

// Largest eps1 for which make_pe_config(sqrt(eps1) 4 n^{3/4}, p_err) is feasible.
double max_feasible_eps1(std::size_t n, double p_err);
double hip_eps_ev(double eps1, std::size_t n);
bool sigma_in_range(std::int64_t sigma, const zq::Lambda1& l1, std::size_t n);

HipSample sample_hip(std::shared_ptr<const zq::FiniteGroupDecomp> decomp, std::int64_t sigma,
                     double eps1, const zq::Vec& t, double p_err, Rng& rng,
                     const HipOptions& opts = {});

// Distance in Z_q, |x|_q.
std::int64_t zq_abs(std::int64_t x, std::int64_t q);

}  // namespace qbdd::qsim
