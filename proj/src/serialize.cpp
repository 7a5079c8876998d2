#include "qbdd/serialize.hpp"

#include <fstream>
#include <sstream>

#include "qbdd/error.hpp"

namespace qbdd::io {

json to_json(const BigInt& x) {
  if (x.fits_slong_p()) return static_cast<std::int64_t>(x.get_si());
  return x.get_str();
}

BigInt bigint_from_json(const json& j) {
  if (j.is_number_integer()) return BigInt(j.get<long>());
  if (j.is_string()) return BigInt(j.get<std::string>());
  throw PreconditionError("expected an integer");
}

json to_json(const ZVec& v) {
  json a = json::array();
  for (const BigInt& x : v) a.push_back(to_json(x));
  return a;
}

ZVec zvec_from_json(const json& j) {
  ZVec v;
  for (const json& x : j) v.push_back(bigint_from_json(x));
  return v;
}

json to_json(const IntMatrix& m) {
  json a = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) a.push_back(to_json(m.row(i)));
  return a;
}

IntMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw PreconditionError("matrix must be a nonempty array");
  const std::size_t rows = j.size(), cols = j[0].size();
  IntMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw PreconditionError("ragged matrix");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = bigint_from_json(j[i][k]);
  }
  return m;
}

json to_json(const zq::FiniteGroupDecomp& d) {
  return {{"q", d.q}, {"n", d.n}, {"qvec", d.qvec}, {"gens", d.gens}};
}

zq::FiniteGroupDecomp decomp_from_json(const json& j) {
  zq::FiniteGroupDecomp d;
  d.q = j.at("q").get<std::int64_t>();
  d.n = j.at("n").get<std::size_t>();
  d.qvec = j.at("qvec").get<std::vector<std::int64_t>>();
  d.gens = j.at("gens").get<std::vector<zq::Vec>>();
  return d;
}

json to_json(const qsim::HipSample& h) {
  return {{"a", h.a},         {"O", h.O},           {"h", h.h},
          {"T", h.T},         {"sigma", h.sigma},   {"eps_ev", h.eps_ev},
          {"p_err", h.p_err}, {"seed", h.seed}};
}

json to_json(const qsim::PeConfig& c) {
  return {{"eps_ev", c.eps_ev}, {"p_err", c.p_err}, {"a", c.a}, {"b", c.b}, {"T", c.T}};
}

json to_json(const reduction::BddInstance& inst) {
  json j = {{"basis", to_json(inst.basis)},
            {"target", to_json(inst.target)},
            {"q", inst.q},
            {"eps1", inst.eps1},
            {"lambda1_sq", inst.lambda1_sq}};
  if (inst.planted) j["planted"] = to_json(*inst.planted);
  if (inst.delta) j["delta"] = to_json(*inst.delta);
  return j;
}

reduction::BddInstance instance_from_json(const json& j) {
  reduction::BddInstance inst;
  inst.basis = matrix_from_json(j.at("basis"));
  inst.target = zvec_from_json(j.at("target"));
  inst.q = j.value("q", std::int64_t(0));
  inst.eps1 = j.value("eps1", 0.0);
  inst.lambda1_sq = j.value("lambda1_sq", std::int64_t(0));
  if (j.contains("planted")) inst.planted = zvec_from_json(j["planted"]);
  if (j.contains("delta")) inst.delta = zvec_from_json(j["delta"]);
  if (inst.basis.rows() != inst.target.size())
    throw PreconditionError("target dimension mismatch");
  return inst;
}

json to_json(const reduction::ReducedInstance& red) {
  json samples = json::array();
  for (const auto& s : red.samples) samples.push_back(to_json(s));
  return {{"q", red.q},           {"m", red.m},
          {"qvec", red.qvec},     {"rows", red.rows},
          {"ttilde", red.ttilde}, {"p_err", red.p_err},
          {"p_err_pe", red.p_err_pe}, {"lambda1_hat", red.lambda1_hat},
          {"sigma", red.sigma},   {"samples", samples}};
}

json to_json(const reduction::LadderStep& s) {
  json j = {{"lambda1_hat", s.lambda1_hat}, {"sigma", s.sigma}, {"status", s.status}};
  if (!s.detail.empty()) j["detail"] = s.detail;
  if (s.T) j["T"] = s.T;
  if (s.dist_sq >= 0) {
    j["s"] = s.s;
    j["dist_sq"] = s.dist_sq;
  }
  if (s.nodes) j["nodes"] = s.nodes;
  if (!s.samples.empty()) {
    json samples = json::array();
    for (const auto& h : s.samples) samples.push_back(to_json(h));
    j["samples"] = samples;
  }
  j["sample_seconds"] = s.sample_seconds;
  j["cvp_seconds"] = s.cvp_seconds;
  return j;
}

json to_json(const reduction::SolveResult& r) {
  json ladder = json::array();
  for (const auto& s : r.ladder) ladder.push_back(to_json(s));
  json j = {{"found", r.found}, {"q", r.q},   {"n", r.n},         {"r", r.r},
            {"m", r.m},         {"eps1", r.eps1}, {"lambda1_hat", r.lambda1_hat}};
  if (r.beta) j["beta"] = r.beta;
  if (r.found) {
    j["v"] = to_json(r.v);
    j["s"] = r.s;
  }
  j["ladder"] = ladder;
  j["cvp_nodes"] = r.cvp_nodes;
  j["cvp_seconds"] = r.cvp_seconds;
  j["seconds"] = r.seconds;
  return j;
}

json to_json(const rect::MinGsCertificate& c) {
  json gs = json::array();
  for (const Rational& x : c.gs_sq) gs.push_back(to_text(x));
  return {{"basis", to_json(c.basis)},
          {"r_vec", to_json(c.r_vec)},
          {"qvec", c.qvec},
          {"r", c.r},
          {"R", c.R},
          {"m", c.m},
          {"Delta", c.Delta},
          {"r_max", c.r_max},
          {"gs_sq", gs},
          {"min_gs_sq", to_text(c.min_gs_sq)},
          {"min_gs", c.min_gs()},
          {"lambda1_sq", to_json(c.lambda1_sq)},
          {"case1", c.case1},
          {"case2", c.case2},
          {"bound", c.bound}};
}

std::string backend_name(qsim::Backend b) {
  switch (b) {
    case qsim::Backend::dense: return "dense";
    case qsim::Backend::gram: return "gram";
    default: return "auto";
  }
}

qsim::Backend backend_from_name(const std::string& s) {
  if (s == "dense") return qsim::Backend::dense;
  if (s == "gram") return qsim::Backend::gram;
  if (s == "auto" || s.empty()) return qsim::Backend::automatic;
  throw PreconditionError("unknown backend '" + s + "'");
}

json to_json(const reduction::CellSpec& s) {
  json j = {{"n", s.n},           {"q", s.q},         {"qvec", s.qvec},
            {"solver", s.solver}, {"trials", s.trials}, {"seed", s.seed},
            {"eps_step", s.eps_step}, {"eps_max", s.eps_max}, {"p_err", s.p_err},
            {"min_rate", s.min_rate}, {"backend", backend_name(s.backend)}};
  if (s.solver == "tradeoff") j["beta"] = s.beta;
  return j;
}

reduction::CellSpec cell_spec_from_json(const json& j) {
  reduction::CellSpec s;
  s.n = j.at("n").get<std::size_t>();
  s.q = j.at("q").get<std::int64_t>();
  if (j.contains("qvec")) {
    s.qvec = j["qvec"].get<std::vector<std::int64_t>>();
  } else {
    s.qvec.assign(j.value("r", std::size_t(1)), s.q);
  }
  s.solver = j.value("solver", std::string("poly"));
  s.beta = j.value("beta", std::size_t(2));
  s.trials = j.value("trials", std::size_t(100));
  s.seed = j.at("seed").get<std::uint64_t>();
  s.eps_step = j.value("eps_step", 0.02);
  s.eps_max = j.value("eps_max", 0.5);
  s.p_err = j.value("p_err", 0.1);
  s.min_rate = j.value("min_rate", 0.9);
  s.backend = backend_from_name(j.value("backend", std::string("auto")));
  return s;
}

json to_json(const reduction::CellResult& c) {
  json pts = json::array();
  for (const auto& p : c.points)
    pts.push_back({{"eps1", p.eps1},
                   {"successes", p.successes},
                   {"trials", p.trials},
                   {"rate", p.rate()},
                   {"cvp_nodes", p.cvp_nodes}});
  return {{"spec", to_json(c.spec)}, {"threshold", c.threshold ? json(*c.threshold) : json(nullptr)}, {"points", pts}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw PreconditionError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace qbdd::io
