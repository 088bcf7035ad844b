#include "lipinv/report.hpp"

#include "lipinv/parser.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <ostream>

namespace lipinv {

Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (double c : v) arr.push_back(c);
  return arr;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
  return rows;
}

Json to_json(const RankCertificate& cert) {
  Json j;
  j["point"] = to_json(cert.point);
  j["status"] = std::string(to_string(cert.status));
  j["min_singular_value"] = cert.min_singular_value;
  j["elements_count"] = cert.elements_count;
  if (cert.witness) {
    Json w;
    w["matrix"] = to_json(*cert.witness);
    if (cert.witness_weights) w["weights"] = *cert.witness_weights;
    j["witness"] = std::move(w);
  }
  return j;
}

Json to_json(const SolveReport& report, bool include_trace) {
  Json j;
  j["status"] = std::string(to_string(report.status));
  j["x_star"] = to_json(report.x_star);
  j["residual"] = report.residual;
  j["phi_value"] = report.phi_value;
  j["iterations"] = report.iterations;
  j["subgradient_norm_est"] = report.subgradient_norm_est;
  if (!report.note.empty()) j["note"] = report.note;
  if (include_trace) {
    Json rows = Json::array();
    for (const TraceRow& r : report.trace) {
      rows.push_back({{"iter", r.iter},
                      {"phi", r.phi},
                      {"residual", r.residual},
                      {"subgrad_norm", r.subgrad_norm},
                      {"x", to_json(r.x)}});
    }
    j["trace"] = std::move(rows);
  }
  return j;
}

Json to_json(const MPReport& report) {
  Json j;
  j["level_c"] = report.level_c;
  j["v"] = to_json(report.v);
  j["classification"] = std::string(to_string(report.classification));
  j["ring_infimum"] = report.ring_infimum;
  j["endpoint_max"] = report.endpoint_max;
  j["critical_point"] = to_json(report.critical_point);
  j["rho"] = report.rho;
  j["ring_certified"] = report.ring_certified;
  j["outer_iterations"] = report.outer_iterations;
  j["max_node_subgradient"] = report.max_node_subgradient;
  j["separated_from_endpoints"] = report.separated_from_endpoints;
  if (report.recovered_preimage) j["recovered_preimage"] = to_json(*report.recovered_preimage);
  if (report.saddle_certificate) j["saddle_certificate"] = to_json(*report.saddle_certificate);
  return j;
}

Json to_json(const InjectivityReport& report) {
  Json j;
  j["outcome"] = std::string(to_string(report.outcome));
  Json pre = Json::array();
  for (const Vector& p : report.preimages) pre.push_back(to_json(p));
  j["preimages"] = std::move(pre);
  j["starts_used"] = report.starts_used;
  if (report.mountain_pass) j["mountain_pass"] = to_json(*report.mountain_pass);
  if (report.best_attempt) j["best_attempt"] = to_json(*report.best_attempt);
  return j;
}

Json to_json(const CoercivityReport& report) {
  Json j;
  j["verdict"] = std::string(to_string(report.verdict));
  j["directions_count"] = report.directions.size();
  j["radii"] = report.radii;
  j["min_growth"] = report.min_growth;
  j["monotone_fraction"] = report.monotone_fraction;
  if (report.witness_direction) {
    j["witness_direction"] = to_json(*report.witness_direction);
    j["witness_bound"] = report.witness_bound;
  }
  Json skipped = Json::array();
  for (const auto& s : report.skipped) {
    skipped.push_back({{"direction", to_json(s.direction)}, {"reason", s.reason}});
  }
  j["skipped"] = std::move(skipped);
  return j;
}

Json to_json(const PSTrace& trace) {
  Json j;
  j["verdict"] = std::string(to_string(trace.verdict));
  Json runs = Json::array();
  for (const PSRun& run : trace.runs) {
    Json r;
    r["start"] = to_json(run.start);
    r["status"] = std::string(to_string(run.status));
    r["stages"] = run.stages;
    r["iterations"] = run.norms.size() - run.stages;
    r["final_norm"] = run.norms.back();
    r["final_phi"] = run.phi.back();
    r["final_subgradient"] = run.subgradient.back();
    r["bounded"] = run.bounded;
    r["clustered"] = run.clustered;
    r["escaped"] = run.escaped;
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);
  return j;
}

Json envelope(const std::string& command, const std::string& map_name, std::uint64_t seed,
              Json report, std::optional<std::string> timestamp) {
  Json j;
  j["tool"] = "lipinv";
  j["version"] = "0.1.0";
  j["command"] = command;
  j["map"] = map_name;
  j["seed"] = seed;
  if (timestamp) j["timestamp"] = *timestamp;
  j["report"] = std::move(report);
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_number(x);
}

namespace {

void coord_header(std::ostream& out, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  out << '\n';
}

void coords(std::ostream& out, const Vector& x) {
  for (double c : x) out << ',' << csv_number(c);
  out << '\n';
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iter,phi,residual,subgrad_norm";
  coord_header(out, trace.empty() ? 0 : trace.front().x.size());
  for (const TraceRow& r : trace) {
    out << r.iter << ',' << csv_number(r.phi) << ',' << csv_number(r.residual) << ','
        << csv_number(r.subgrad_norm);
    coords(out, r.x);
  }
}

void write_path_csv(std::ostream& out, const std::vector<PathHistoryRow>& history) {
  out << "outer_iter,node_index,psi";
  coord_header(out, history.empty() ? 0 : history.front().x.size());
  for (const PathHistoryRow& r : history) {
    out << r.outer_iter << ',' << r.node_index << ',' << csv_number(r.psi);
    coords(out, r.x);
  }
}

}  // namespace lipinv
