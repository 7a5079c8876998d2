// qbdd: instance generation, solving, verification and calibration.

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "qbdd/classical_rect.hpp"
#include "qbdd/error.hpp"
#include "qbdd/intlat.hpp"
#include "qbdd/reduction.hpp"
#include "qbdd/serialize.hpp"

using namespace qbdd;
using io::json;

namespace {

void emit(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    io::write_json_file(path, j);
  }
}

std::vector<std::int64_t> group_orders(std::int64_t q, const std::vector<std::int64_t>& qvec,
                                       std::size_t r) {
  return qvec.empty() ? std::vector<std::int64_t>(r, q) : qvec;
}

void merge(json& dst, const json& src) {
  for (auto it = src.begin(); it != src.end(); ++it) dst[it.key()] = *it;
}

// Drops every "*seconds" field so that reruns compare byte for byte.
void strip_timing(json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      const std::string& k = it.key();
      if (k.size() >= 7 && k.compare(k.size() - 7, 7, "seconds") == 0) {
        it = j.erase(it);
      } else {
        strip_timing(*it);
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& x : j) strip_timing(x);
  }
}

// Runs f(i) for i < count on `jobs` threads and rethrows the first failure.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& f) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

BigInt dist_sq(const ZVec& a, const ZVec& b) {
  BigInt s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

std::optional<BigInt> exact_distance(const reduction::BddInstance& inst) {
  try {
    intlat::CvpResult c = intlat::exact_cvp_enum(inst.basis, to_rational(inst.target));
    return dist_sq(inst.target, inst.basis * c.coeffs);
  } catch (const BudgetError&) {
    return std::nullopt;
  }
}

// --- gen ---------------------------------------------------------------------

struct GenArgs {
  std::size_t n = 4;
  std::int64_t q = 64;
  std::size_t r = 1;
  std::vector<std::int64_t> qvec;
  double eps1 = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  reduction::Rng rng(a.seed);
  const std::vector<std::int64_t> qvec = group_orders(a.q, a.qvec, a.r);
  IntMatrix b = reduction::random_periodic_lattice(a.n, a.q, qvec, rng);
  reduction::PlantOptions po;
  po.strict = true;
  reduction::BddInstance inst = reduction::plant_instance(b, a.eps1, rng, po);
  json j = {{"format", "qbdd-instance"},
            {"version", 1},
            {"spec", {{"n", a.n}, {"q", a.q}, {"qvec", qvec}, {"eps1", a.eps1}, {"seed", a.seed}}}};
  merge(j, io::to_json(inst));
  emit(a.out, j);
  return 0;
}

// --- solve -------------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  std::string solver = "poly";
  std::size_t beta = 2;
  double eps1 = -1;
  double p_err = 0.1;
  std::size_t m = 0;
  std::string backend = "auto";
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::size_t jobs = 1;
  bool no_timing = false;
  std::string out;
};

json solve_row(const reduction::BddInstance& inst, const SolveArgs& a, std::uint64_t seed,
               const std::optional<BigInt>& truth) {
  json row = {{"seed", seed}};
  std::optional<ZVec> v;
  if (a.solver == "poly" || a.solver == "tradeoff") {
    reduction::Rng rng(seed);
    reduction::SolveOptions so;
    so.eps1 = a.eps1;
    so.p_err = a.p_err;
    so.backend = io::backend_from_name(a.backend);
    if (a.m) so.m = a.m;
    reduction::SolveResult res =
        a.solver == "poly" ? reduction::solve_bdd_poly(inst.basis, inst.target, rng, so)
                           : reduction::solve_bdd_tradeoff(inst.basis, inst.target, a.beta, rng, so);
    merge(row, io::to_json(res));
    row["p_err"] = a.p_err;
    if (res.found) v = res.v;
    else row["error"] = "no solution found";
  } else if (a.solver == "rect") {
    rect::MinGsCertificate cert = rect::rect_reduce(inst.basis);
    row["certificate"] = io::to_json(cert);
    try {
      v = rect::rect_bdd(cert, inst.target);
    } catch (const VerificationError& e) {
      row["error"] = e.what();
    }
  } else if (a.solver == "babai") {
    IntMatrix red = intlat::lll_reduce(inst.basis);
    v = red * intlat::babai_nearest_plane(red, to_rational(inst.target));
  } else if (a.solver == "oracle") {
    intlat::CvpResult c = intlat::exact_cvp_enum(inst.basis, to_rational(inst.target));
    v = inst.basis * c.coeffs;
    row["nodes"] = c.nodes;
  } else {
    throw PreconditionError("unknown solver '" + a.solver + "'");
  }
  row["found"] = v.has_value();
  if (v) {
    row["v"] = io::to_json(*v);
    const BigInt d = dist_sq(inst.target, *v);
    row["dist_sq"] = io::to_json(d);
    row["correct"] = truth ? json(d == *truth) : json(nullptr);
  } else {
    row["correct"] = false;
  }
  return row;
}

int cmd_solve(const SolveArgs& a) {
  reduction::BddInstance inst = io::instance_from_json(io::read_json_file(a.instance));
  if (a.trials == 0) throw PreconditionError("trials must be positive");
  const std::optional<BigInt> truth = exact_distance(inst);
  std::vector<json> rows(a.trials);
  parallel_for(a.trials, a.jobs, [&](std::size_t i) {
    json row = {{"trial", i}};
    merge(row, solve_row(inst, a, reduction::derive_seed(a.seed, i), truth));
    rows[i] = std::move(row);
  });
  json spec = {{"solver", a.solver}, {"eps1", a.eps1},     {"p_err", a.p_err},
               {"backend", a.backend}, {"seed", a.seed}, {"trials", a.trials}};
  if (a.solver == "tradeoff") spec["beta"] = a.beta;
  if (a.m) spec["m"] = a.m;
  json out = {{"format", "qbdd-result"},
              {"version", 1},
              {"instance_file", std::filesystem::absolute(a.instance).string()},
              {"spec", spec},
              {"rows", rows}};
  if (a.no_timing) strip_timing(out);
  emit(a.out, out);
  if (a.trials == 1 && !rows[0]["found"].get<bool>()) {
    const std::string why = rows[0].value("error", std::string("no solution found"));
    throw VerificationError(why);
  }
  return 0;
}

// --- verify ------------------------------------------------------------------

struct Tally {
  std::size_t total = 0, violations = 0;
  double p = 0;
  json report(const std::string& name) const {
    const double freq = total ? double(violations) / double(total) : 0;
    const double limit = p + 3 * std::sqrt(p * (1 - p) / double(std::max<std::size_t>(total, 1)));
    return {{"check", name}, {"samples", total}, {"violations", violations},
            {"frequency", freq}, {"p", p}, {"limit", limit}, {"ok", freq <= limit}};
  }
};

int cmd_verify(const std::string& result_path, const std::string& instance_override,
               const std::string& out_path) {
  json res = io::read_json_file(result_path);
  std::string ipath = instance_override.empty() ? res.value("instance_file", std::string())
                                                : instance_override;
  if (ipath.empty()) throw PreconditionError("result does not reference an instance");
  if (!std::filesystem::exists(ipath)) throw PreconditionError("missing instance " + ipath);
  reduction::BddInstance inst = io::instance_from_json(io::read_json_file(ipath));
  const std::size_t n = inst.basis.rows();
  const std::string solver = res.at("spec").at("solver").get<std::string>();

  const std::optional<BigInt> truth = exact_distance(inst);
  const std::int64_t q = intlat::periodicity(inst.basis).get_si();
  zq::FiniteGroupDecomp d = zq::decompose(inst.basis, q);
  zq::Vec tq(n);
  for (std::size_t i = 0; i < n; ++i) tq[i] = mod_floor(inst.target[i], BigInt(q)).get_si();
  zq::GroupCvp closest = zq::group_cvp_exact(d, tq);
  zq::Lambda1 l1 = zq::lambda1_group(d);
  std::optional<rect::MinGsCertificate> cert;
  if (solver == "rect") cert = rect::rect_reduce(inst.basis);

  json violations = json::array();
  auto flag = [&](std::size_t row, const std::string& check, const std::string& detail) {
    violations.push_back({{"row", row}, {"check", check}, {"detail", detail}});
  };
  Tally hip, bdd;

  const json& rows = res.at("rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& row = rows[i];
    const bool found = row.at("found").get<bool>();
    std::optional<BigInt> d2;
    if (found) {
      ZVec v = io::zvec_from_json(row.at("v"));
      if (v.size() != n || !intlat::in_lattice(inst.basis, v)) {
        flag(i, "lattice membership", "returned vector is not in the lattice");
        continue;
      }
      d2 = dist_sq(inst.target, v);
      if (row.contains("dist_sq") && io::bigint_from_json(row["dist_sq"]) != *d2)
        flag(i, "distance record", "logged distance differs from recomputed distance");
    }
    const bool correct = found && truth && *d2 == *truth;
    if (truth && row.at("correct").is_boolean() && row["correct"].get<bool>() != correct)
      flag(i, "correctness flag", correct ? "row claims failure on a closest vector"
                                          : "row claims success but vector is not closest");

    if (solver == "poly" || solver == "tradeoff") {
      if (found) {
        const double lh = row.at("lambda1_hat").get<double>();
        if (4 * d2->get_d() > lh * lh) flag(i, "acceptance gate", "distance above lambda1_hat/2");
      }
      const double eps1 = row.at("eps1").get<double>();
      const double p_err = row.value("p_err", 0.1);
      // The sampling bounds are promised only when the offset meets eps1.
      if (static_cast<double>(closest.dist_sq) > eps1 * eps1 * l1.sq) continue;
      for (const json& step : row.at("ladder")) {
        if (!step.contains("samples")) continue;
        if (!qsim::sigma_in_range(step.at("sigma").get<std::int64_t>(), l1, n)) continue;
        reduction::ReducedInstance red;
        red.q = q;
        red.qvec = d.qvec;
        for (const json& h : step["samples"]) {
          qsim::HipSample s;
          s.a = h.at("a").get<zq::Vec>();
          s.O = h.at("O").get<std::int64_t>();
          qsim::PeConfig cfg;
          cfg.eps_ev = h.at("eps_ev").get<double>();
          cfg.p_err = h.at("p_err").get<double>();
          const std::int64_t k = zq::charphase(s.a, zq::negate_coeffs(closest.s, d), d);
          const std::int64_t gap = zq::mod(s.O - k, q);
          ++hip.total;
          hip.p = cfg.p_err;
          if (static_cast<double>(std::min(gap, q - gap)) > cfg.radius(q)) ++hip.violations;
          zq::Vec rrow(d.r());
          for (std::size_t j = 0; j < d.r(); ++j) rrow[j] = zq::mod(-s.a[j] * (q / d.qvec[j]), q);
          red.rows.push_back(rrow);
          red.ttilde.push_back(s.O);
        }
        red.m = red.rows.size();
        reduction::CoefficientCheck cc = reduction::check_coefficients(red, closest.s);
        const double bound = reduction::samplebdd_distance_bound(
            eps1, q, d.r(), red.m, n, p_err, reduction::lambda1_elements(red.group()).value);
        ++bdd.total;
        bdd.p = p_err;
        if (!cc.preserved || std::sqrt(double(cc.dist_sq)) > bound) ++bdd.violations;
      }
    } else if (solver == "rect") {
      if (found && Rational(4 * *d2) >= cert->min_gs_sq)
        flag(i, "certified radius", "accepted vector outside half the minimum GS length");
      if (cert->bound > cert->min_gs() * (1 + 1e-12))
        flag(i, "certificate bound", "explicit bound exceeds the minimum GS length");
      if (!found) {
        ZVec v = cert->basis * intlat::babai_nearest_plane(cert->basis, to_rational(inst.target));
        if (Rational(4 * dist_sq(inst.target, v)) < cert->min_gs_sq)
          flag(i, "certified radius", "refused a target inside the certified radius");
      }
    } else if (solver == "oracle" && truth && !correct) {
      flag(i, "oracle", "enumeration result is not closest");
    }
  }

  json aggregates = json::array();
  for (auto [t, name] : {std::pair{&hip, "sample-hip radius"}, std::pair{&bdd, "reduced-instance conclusions"}}) {
    if (!t->total) continue;
    json rep = t->report(name);
    if (!rep["ok"].get<bool>())
      flag(rows.size(), name, "violation frequency above p + 3 sigma");
    aggregates.push_back(rep);
  }
  const bool pass = violations.empty();
  emit(out_path, {{"format", "qbdd-verify"},
                  {"result_file", result_path},
                  {"instance_file", ipath},
                  {"rows", rows.size()},
                  {"pass", pass},
                  {"aggregates", aggregates},
                  {"violations", violations}});
  return pass ? 0 : static_cast<int>(ErrorKind::verification);
}

// --- calibrate ---------------------------------------------------------------

int cmd_calibrate(const std::string& spec_path, reduction::CellSpec flags,
                  const std::vector<std::int64_t>& qvec, std::size_t r, const std::string& backend,
                  std::size_t jobs, const std::string& out) {
  std::vector<reduction::CellSpec> cells;
  if (!spec_path.empty()) {
    json j = io::read_json_file(spec_path);
    const json& list = j.contains("cells") ? j["cells"] : json::array({j});
    for (const json& c : list) cells.push_back(io::cell_spec_from_json(c));
  } else {
    flags.qvec = group_orders(flags.q, qvec, r);
    flags.backend = io::backend_from_name(backend);
    cells.push_back(flags);
  }
  json table = json::array();
  for (const auto& c : cells) {
    reduction::CellResult res = reduction::calibrate_cell(c, jobs);
    table.push_back(io::to_json(res));
    std::cerr << "cell n=" << c.n << " q=" << c.q << " r=" << c.qvec.size() << " " << c.solver
              << (c.solver == "tradeoff" ? " beta=" + std::to_string(c.beta) : std::string())
              << ": threshold "
              << (res.threshold ? std::to_string(*res.threshold) : std::string("none")) << '\n';
  }
  emit(out, {{"format", "qbdd-calibration"}, {"version", 1}, {"cells", table}});
  return 0;
}

// --- oracle ------------------------------------------------------------------

int cmd_oracle(const std::string& path, const std::string& out) {
  reduction::BddInstance inst = io::instance_from_json(io::read_json_file(path));
  intlat::CvpResult c = intlat::exact_cvp_enum(inst.basis, to_rational(inst.target));
  const ZVec v = inst.basis * c.coeffs;
  const BigInt lsq = intlat::lambda1_sq_exact(inst.basis);
  const BigInt q = intlat::periodicity(inst.basis);
  const BigInt d2 = dist_sq(inst.target, v);
  json j = {{"format", "qbdd-oracle"},
            {"q", io::to_json(q)},
            {"qvec", zq::decompose(inst.basis, q.get_si()).qvec},
            {"lambda1_sq", io::to_json(lsq)},
            {"closest", io::to_json(v)},
            {"dist_sq", io::to_json(d2)},
            {"nodes", c.nodes}};
  bool ok = true;
  if (inst.planted) {
    const bool closest = dist_sq(inst.target, *inst.planted) == d2;
    const bool within = 1e-9 + inst.eps1 * inst.eps1 * lsq.get_d() >= d2.get_d();
    j["planted_is_closest"] = closest;
    j["offset_within_promise"] = within;
    ok = closest && within;
  }
  emit(out, j);
  return ok ? 0 : static_cast<int>(ErrorKind::verification);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded distance decoding toolkit for q-periodic lattices"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a planted BDD instance");
  g->add_option("--n", gen.n, "lattice dimension");
  g->add_option("--q", gen.q, "periodicity");
  g->add_option("--r", gen.r, "group rank, each factor Z_q");
  g->add_option("--qvec", gen.qvec, "explicit group orders q_1 | ... | q_r")->delimiter(',');
  g->add_option("--eps1", gen.eps1, "offset radius relative to lambda_1");
  g->add_option("--seed", gen.seed, "random seed")->required();
  g->add_option("-o,--out", gen.out, "output file (default stdout)");

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "run a solver on an instance file");
  s->add_option("instance", sol.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--solver", sol.solver, "poly | tradeoff | rect | babai | oracle")
      ->check(CLI::IsMember({"poly", "tradeoff", "rect", "babai", "oracle"}));
  s->add_option("--beta", sol.beta, "block size for the trade-off solver");
  s->add_option("--eps1", sol.eps1, "promise passed to the sampler (default: largest feasible)");
  s->add_option("--p-err", sol.p_err, "end-to-end error budget");
  s->add_option("--m", sol.m, "sampled dimension override");
  s->add_option("--backend", sol.backend, "dense | gram | auto");
  s->add_option("--seed", sol.seed, "random seed")->required();
  s->add_option("--trials", sol.trials, "independent repetitions");
  s->add_option("--jobs", sol.jobs, "worker threads");
  s->add_flag("--no-timing", sol.no_timing, "omit wall-clock fields");
  s->add_option("-o,--out", sol.out, "output file (default stdout)");

  std::string vres, vinst, vout;
  auto* v = app.add_subcommand("verify", "re-check a result file against oracles and bounds");
  v->add_option("result", vres, "result JSON")->required()->check(CLI::ExistingFile);
  v->add_option("--instance", vinst, "instance file overriding the recorded path");
  v->add_option("-o,--out", vout, "report file (default stdout)");

  reduction::CellSpec cal;
  std::string cspec, cbackend = "auto", cout;
  std::vector<std::int64_t> cqvec;
  std::size_t cr = 1, cjobs = 1;
  auto* c = app.add_subcommand("calibrate", "measure per-cell decoding thresholds");
  c->add_option("--spec", cspec, "JSON cell list ({\"cells\": [...]}) or a single cell");
  c->add_option("--n", cal.n);
  c->add_option("--q", cal.q);
  c->add_option("--r", cr);
  c->add_option("--qvec", cqvec)->delimiter(',');
  c->add_option("--solver", cal.solver)->check(CLI::IsMember({"poly", "tradeoff"}));
  c->add_option("--beta", cal.beta);
  c->add_option("--trials", cal.trials);
  c->add_option("--seed", cal.seed);
  c->add_option("--eps-step", cal.eps_step);
  c->add_option("--eps-max", cal.eps_max);
  c->add_option("--p-err", cal.p_err);
  c->add_option("--min-rate", cal.min_rate);
  c->add_option("--backend", cbackend);
  c->add_option("--jobs", cjobs, "worker threads");
  c->add_option("-o,--out", cout, "output file (default stdout)");

  std::string oinst, oout;
  auto* o = app.add_subcommand("oracle", "exact closest vector and lambda_1 by enumeration");
  o->add_option("instance", oinst, "instance JSON")->required()->check(CLI::ExistingFile);
  o->add_option("-o,--out", oout, "output file (default stdout)");

  app.footer("Exit codes: 0 ok, 2 precondition, 3 budget, 4 verification.\n"
             "QBDD_ENUM_BUDGET overrides the enumeration node budget.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::precondition);
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*s) return cmd_solve(sol);
    if (*v) return cmd_verify(vres, vinst, vout);
    if (*c) return cmd_calibrate(cspec, cal, cqvec, cr, cbackend, cjobs, cout);
    if (*o) return cmd_oracle(oinst, oout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::precondition);
  }
  return 0;
}
