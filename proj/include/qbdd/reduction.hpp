#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qbdd/matrix.hpp"
#include "qbdd/qsim.hpp"
#include "qbdd/zqgroup.hpp"

namespace qbdd::reduction {

using qsim::Rng;

// A BDD instance with an optional planted answer.
struct BddInstance {
  IntMatrix basis;
  ZVec target;
  std::int64_t q = 0;
  double eps1 = 0;
  std::optional<ZVec> planted;  // closest lattice vector
  std::optional<ZVec> delta;    // target - planted
  std::int64_t lambda1_sq = 0;  // exact, of the lattice
};

struct ReducedInstance {
  std::int64_t q = 0;
  std::size_t m = 0;
  std::vector<std::int64_t> qvec;  // orders of the source generators
  std::vector<zq::Vec> rows;       // m rows, each of length r
  zq::Vec ttilde;
  double p_err = 0;
  double p_err_pe = 0;
  double lambda1_hat = 0;
  std::int64_t sigma = 0;
  std::vector<qsim::HipSample> samples;

  std::size_t r() const { return qvec.size(); }
  // Columns of G~ as a decomposition over the source coefficient space.
  zq::FiniteGroupDecomp group() const;
  IntMatrix matrix() const;  // m x r
};

struct SampleOptions {
  qsim::Backend backend = qsim::Backend::automatic;
  std::optional<zq::Lambda1> lambda1;
  // Test hook: fixes the label of each SampleHIP call.
  std::optional<std::vector<zq::Vec>> forced_labels;
};

// p_err/2 >= 2^-m + q^-(m-r).
bool samplebdd_feasible(std::size_t m, std::size_t r, std::int64_t q, double p_err);
std::size_t min_feasible_m(std::size_t r, std::int64_t q, double p_err);

// sigma = floor(lambda1_hat / (2 sqrt n)), at least 1.
std::int64_t sigma_for(double lambda1_hat, std::size_t n);

ReducedInstance sample_bdd(std::shared_ptr<const zq::FiniteGroupDecomp> decomp,
                           double lambda1_hat, const zq::Vec& t, double eps1, std::size_t m,
                           double p_err, Rng& rng, const SampleOptions& opts = {});

double samplebdd_distance_bound(double eps1, std::int64_t q, std::size_t r, std::size_t m,
                                std::size_t n, double p_err, double lambda1_reduced);

// Shortest nonzero element of a (possibly non-injective) coefficient-indexed group.
zq::Lambda1 lambda1_elements(const zq::FiniteGroupDecomp& d);

struct CoefficientCheck {
  zq::Vec argmin;             // lexicographically smallest minimizer
  std::int64_t dist_sq = 0;
  std::size_t minimizers = 0;
  bool preserved = false;     // argmin == s and it is the only minimizer
};
CoefficientCheck check_coefficients(const ReducedInstance& red, const zq::Vec& s);

struct QaryDraw {
  zq::FiniteGroupDecomp decomp;  // qvec = (q,..,q), gens = columns of G~
  IntMatrix gtilde;              // m x r
  IntMatrix lattice;             // HNF of [G~ | qI]
  std::int64_t lambda1_sq = 0;
  bool primitive = false;
};
QaryDraw random_qary(std::size_t m, std::size_t r, std::int64_t q, Rng& rng);
// Rows of g span Z_q^r, i.e. every invariant factor is a unit mod q.
bool is_primitive(const IntMatrix& g, std::int64_t q);

// A random q-periodic lattice basis whose group mod q is Z_{q_1} x ... x Z_{q_r}.
IntMatrix random_periodic_lattice(std::size_t n, std::int64_t q,
                                  const std::vector<std::int64_t>& qvec, Rng& rng);

struct PlantOptions {
  // Refuse eps1 > 0 when eps1*lambda1 < 1, since only Delta = 0 fits.
  bool strict = false;
};
BddInstance plant_instance(const IntMatrix& basis, double eps1, Rng& rng,
                           const PlantOptions& opts = {});

struct LadderStep {
  double lambda1_hat = 0;
  std::int64_t sigma = 0;
  std::string status;  // refused | rejected | accepted
  std::string detail;
  std::int64_t T = 0;
  zq::Vec s;
  std::int64_t dist_sq = -1;  // ||t - Gs||_q^2 of the candidate
  std::uint64_t nodes = 0;
  double sample_seconds = 0;
  double cvp_seconds = 0;
  std::vector<qsim::HipSample> samples;
};

struct SolveOptions {
  // Promise eps1 handed to SampleBDD; negative selects the largest feasible value.
  double eps1 = -1;
  double p_err = 0.1;
  qsim::Backend backend = qsim::Backend::automatic;
  std::optional<std::size_t> m;
};

struct SolveResult {
  bool found = false;
  ZVec v;
  zq::Vec s;
  std::int64_t q = 0;
  std::size_t n = 0, r = 0, m = 0, beta = 0;
  double eps1 = 0;
  double lambda1_hat = 0;
  std::vector<LadderStep> ladder;
  double seconds = 0;
  double cvp_seconds = 0;
  std::uint64_t cvp_nodes = 0;
};

std::size_t poly_dimension(std::size_t r, std::int64_t q, double p_err);
std::size_t tradeoff_dimension(std::size_t r, std::int64_t q, std::size_t beta, double p_err);
double default_promise(std::size_t n, std::size_t m, double p_err);

// Both solvers report found = false when no ladder step passes the gate.
SolveResult solve_bdd_poly(const IntMatrix& b, const ZVec& t, Rng& rng,
                           const SolveOptions& opts = {});
SolveResult solve_bdd_tradeoff(const IntMatrix& b, const ZVec& t, std::size_t beta, Rng& rng,
                               const SolveOptions& opts = {});

// Exponent bounds of the trade-off theorem and its corollaries (natural logs).
double tradeoff_exponent(double rlogq, double beta);
double two_term_balance(double m, double rlogq, double beta);
double corollary1_exponent(double n, double eps);
double corollary1_exponent_literal(double n, double eps);
double corollary2_exponent(double n, double c);

struct CellSpec {
  std::size_t n = 4;
  std::int64_t q = 64;
  std::vector<std::int64_t> qvec{64};
  std::string solver = "poly";  // poly | tradeoff
  std::size_t beta = 2;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double eps_step = 0.02;
  double eps_max = 0.5;
  double p_err = 0.1;
  double min_rate = 0.9;
  qsim::Backend backend = qsim::Backend::automatic;
};

struct TrialOutcome {
  bool found = false;
  bool success = false;
  double seconds = 0;
  double cvp_seconds = 0;
  std::uint64_t cvp_nodes = 0;
};

struct CellPoint {
  double eps1 = 0;
  std::size_t successes = 0;
  std::size_t trials = 0;
  double seconds = 0;
  double cvp_seconds = 0;
  std::uint64_t cvp_nodes = 0;
  double rate() const { return trials ? double(successes) / double(trials) : 0; }
};

struct CellResult {
  CellSpec spec;
  // Largest scanned eps1 whose success rate reaches min_rate; empty when eps1 = 0 fails.
  std::optional<double> threshold;
  std::vector<CellPoint> points;
};

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);
TrialOutcome run_trial(const CellSpec& spec, double eps1, std::uint64_t seed);
// Runs `trials` independent trials on `jobs` threads; order independent.
CellPoint run_point(const CellSpec& spec, double eps1, std::uint64_t seed, std::size_t jobs);
// Scans eps1 = 0, step, 2 step, ... and stops at the first point below min_rate.
CellResult calibrate_cell(const CellSpec& spec, std::size_t jobs = 1);

}  // namespace qbdd::reduction
