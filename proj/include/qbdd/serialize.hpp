#pragma once

#include <string>

#include "json.hpp"
#include "qbdd/classical_rect.hpp"
#include "qbdd/qsim.hpp"
#include "qbdd/reduction.hpp"
#include "qbdd/zqgroup.hpp"

namespace qbdd::io {

using json = nlohmann::ordered_json;

// Integers that fit in 64 bits are JSON numbers, larger ones decimal strings.
json to_json(const BigInt& x);
BigInt bigint_from_json(const json& j);
json to_json(const ZVec& v);
ZVec zvec_from_json(const json& j);
json to_json(const IntMatrix& m);  // array of rows
IntMatrix matrix_from_json(const json& j);

json to_json(const zq::FiniteGroupDecomp& d);
zq::FiniteGroupDecomp decomp_from_json(const json& j);
json to_json(const qsim::HipSample& h);
json to_json(const qsim::PeConfig& c);

json to_json(const reduction::BddInstance& inst);
reduction::BddInstance instance_from_json(const json& j);
json to_json(const reduction::ReducedInstance& red);
json to_json(const reduction::LadderStep& s);
json to_json(const reduction::SolveResult& r);

json to_json(const rect::MinGsCertificate& c);

json to_json(const reduction::CellSpec& s);
reduction::CellSpec cell_spec_from_json(const json& j);
json to_json(const reduction::CellResult& c);

std::string backend_name(qsim::Backend b);
qsim::Backend backend_from_name(const std::string& s);

json read_json_file(const std::string& path);
// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const std::string& path, const json& j);

}  // namespace qbdd::io
