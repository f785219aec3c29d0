#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "gascert/config.hpp"
#include "gascert/connective.hpp"
#include "gascert/riccati.hpp"
#include "gascert/sim.hpp"

namespace gascert::report {

using Json = nlohmann::ordered_json;

/// Finite numbers as-is; ±inf and nan as the strings "inf", "-inf", "nan".
Json number(double v);
Json matrix(const numerics::Matrix& M);
Json vector(const numerics::Vector& v);

/// Pretty JSON with fixed field order and every floating-point value at 17
/// significant digits.
std::string dump(const Json& j);

/// Common header: method tag, tool version, input digest.
Json header(std::string_view method, const config::Config& cfg);

Json connective(const config::Config& cfg, const connective::Report& r);
Json riccati(const config::Config& cfg, const riccati::GasCertificate& cert, bool strict_xi);
Json smallgain(const config::Config& cfg, const connective::SmallGainResult& r);
Json simulation(const config::Config& cfg, const sim::SimTrace& trace, const sim::Metrics& m, bool certified);

/// CSV with header `time,subsystem,series,index,value`; every `stride`-th
/// sample plus the last one.
void write_trace_csv(std::ostream& out, const sim::SimTrace& trace, int stride = 1);

}  // namespace gascert::report
