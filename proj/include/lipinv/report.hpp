#pragma once

#include "lipinv/clarke.hpp"
#include "lipinv/inversion.hpp"
#include "lipinv/mountain_pass.hpp"
#include "lipinv/ps_probe.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace lipinv {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Json to_json(const Matrix& m);  // row-major nested arrays
Json to_json(const RankCertificate& cert);
Json to_json(const SolveReport& report, bool include_trace = false);
Json to_json(const MPReport& report);
Json to_json(const InjectivityReport& report);
Json to_json(const CoercivityReport& report);
Json to_json(const PSTrace& trace);

/// {tool, version, command, map, seed, timestamp?, report}.
Json envelope(const std::string& command, const std::string& map_name, std::uint64_t seed,
              Json report, std::optional<std::string> timestamp);

/// UTC, ISO-8601 to the second.
std::string utc_timestamp();

/// Columns: iter, phi, residual, subgrad_norm, x0..x{n-1}.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);
/// Columns: outer_iter, node_index, psi, x0..x{n-1}.
void write_path_csv(std::ostream& out, const std::vector<PathHistoryRow>& history);

/// Shortest round-trip decimal text, "nan"/"inf"/"-inf" for non-finite values.
std::string csv_number(double x);

}  // namespace lipinv
