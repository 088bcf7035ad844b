#include "lipinv/cli.hpp"

#include "lipinv/clarke.hpp"
#include "lipinv/inversion.hpp"
#include "lipinv/mountain_pass.hpp"
#include "lipinv/parser.hpp"
#include "lipinv/ps_probe.hpp"
#include "lipinv/report.hpp"
#include "lipinv/zoo.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lipinv {
namespace {

constexpr const char* kFooter = R"(Map sources: zoo:<name> for a built-in (see `lipinv zoo`) or a DSL file path.
Seed: --seed, else the LIPINV_SEED environment variable, else 0.
--tol overrides the kink tolerance (eval), the sigma threshold (certify) or the
residual tolerance (invert, probe-injectivity, ps-check).

CSV columns:
  eval               f0..f{m-1},active_patterns,limiting_jacobians
  invert             iter,phi,residual,subgrad_norm,x0..x{n-1}
  certify            x0..x{n-1},status,min_singular_value,elements_count
  probe-injectivity  outer_iter,node_index,psi,x0..x{n-1}
  ps-check           run,iter,norm,phi,subgrad_norm
  zoo                name,inputs,outputs,dsl

Exit codes: 0 success, 2 usage or parse error, 3 numeric failure
(invert also returns 3 when it does not converge).)";

struct RunConfig {
  std::string command;
  std::string map_source;
  std::string point;
  std::string target;
  std::string grid;
  std::string start;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::size_t> starts;
  std::string format = "json";
  std::string out_path;
  bool no_timestamp = false;
  bool trace = false;
};

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError("invalid number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find(sep, pos);
    parts.push_back(text.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

Vector parse_vector(std::string_view text, std::size_t expected, const char* what) {
  if (text.empty()) throw ValidationError(std::string("missing ") + what);
  const auto parts = split(text, ',');
  if (parts.size() != expected) {
    throw ValidationError(std::string("dimension mismatch: ") + what + " has " +
                          std::to_string(parts.size()) + " components, map expects " +
                          std::to_string(expected));
  }
  Vector v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
  return v;
}

// lo:hi:count per axis, axes joined by 'x'; points in row-major order.
std::vector<Vector> parse_grid(std::string_view text, std::size_t n) {
  const auto axes = split(text, 'x');
  if (axes.size() != n) {
    throw ValidationError("dimension mismatch: grid has " + std::to_string(axes.size()) +
                          " axes, map expects " + std::to_string(n));
  }
  std::vector<std::vector<double>> ticks;
  for (std::string_view axis : axes) {
    const auto f = split(axis, ':');
    if (f.size() != 3) throw ValidationError("grid axis must be lo:hi:count");
    const double lo = parse_double(f[0]);
    const double hi = parse_double(f[1]);
    const double count = parse_double(f[2]);
    if (count < 1 || count != static_cast<double>(static_cast<std::size_t>(count))) {
      throw ValidationError("grid count must be a positive integer");
    }
    const auto k = static_cast<std::size_t>(count);
    std::vector<double> t;
    for (std::size_t i = 0; i < k; ++i) {
      t.push_back(k == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1));
    }
    ticks.push_back(std::move(t));
  }
  std::vector<Vector> points;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    Vector p(static_cast<Eigen::Index>(n));
    for (std::size_t d = 0; d < n; ++d) p[static_cast<Eigen::Index>(d)] = ticks[d][idx[d]];
    points.push_back(p);
    std::size_t d = n;
    while (d > 0) {
      --d;
      if (++idx[d] < ticks[d].size()) break;
      idx[d] = 0;
      if (d == 0) return points;
    }
  }
}

std::uint64_t resolve_seed(const RunConfig& cfg) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("LIPINV_SEED")) {
    std::uint64_t s = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), s);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ValidationError("LIPINV_SEED must be an unsigned integer");
    }
    return s;
  }
  return 0;
}

std::string csv_quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

class Command {
 public:
  Command(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out), seed_(resolve_seed(cfg)) {
    if (cfg.format != "json" && cfg.format != "csv") {
      throw ValidationError("--format must be json or csv");
    }
  }

  int run() {
    if (cfg_.command == "zoo") return zoo();
    if (cfg_.map_source.empty()) throw ValidationError("--map is required");
    map_ = load_map(cfg_.map_source);
    if (cfg_.command == "eval") return eval_cmd();
    if (cfg_.command == "invert") return invert_cmd();
    if (cfg_.command == "certify") return certify_cmd();
    if (cfg_.command == "probe-injectivity") return probe_cmd();
    return ps_cmd();
  }

 private:
  bool csv() const { return cfg_.format == "csv"; }

  void emit_json(Json report) {
    std::optional<std::string> ts;
    if (!cfg_.no_timestamp) ts = utc_timestamp();
    const Json doc = envelope(cfg_.command, map_.name(), seed_, std::move(report), ts);
    write(doc.dump(2) + "\n");
  }

  void write(const std::string& text) {
    if (cfg_.out_path.empty()) {
      out_ << text;
      return;
    }
    std::ofstream file(cfg_.out_path, std::ios::binary);
    if (!file) throw ValidationError("cannot open output file '" + cfg_.out_path + "'");
    file << text;
  }

  int zoo() {
    std::vector<const MapZooEntry*> entries;
    if (cfg_.map_source.empty()) {
      for (const auto& e : map_zoo()) entries.push_back(&e);
    } else {
      std::string_view name = cfg_.map_source;
      if (name.substr(0, 4) == "zoo:") name.remove_prefix(4);
      const MapZooEntry* e = find_zoo_entry(name);
      if (!e) throw ValidationError("unknown zoo map '" + std::string(name) + "'");
      entries.push_back(e);
    }
    if (csv()) {
      std::ostringstream s;
      s << "name,inputs,outputs,dsl\n";
      for (const auto* e : entries) {
        const MapDefinition m = parse_map(e->dsl);
        s << e->name << ',' << m.n_in() << ',' << m.n_out() << ',' << csv_quote(e->dsl) << '\n';
      }
      write(s.str());
      return kExitOk;
    }
    Json list = Json::array();
    for (const auto* e : entries) {
      const MapDefinition m = parse_map(e->dsl);
      list.push_back({{"name", e->name},
                      {"dsl", e->dsl},
                      {"provenance", e->provenance},
                      {"inputs", m.n_in()},
                      {"outputs", m.n_out()},
                      {"injective", e->facts.injective},
                      {"coercive", e->facts.coercive}});
    }
    std::optional<std::string> ts;
    if (!cfg_.no_timestamp) ts = utc_timestamp();
    write(envelope("zoo", "", seed_, Json{{"entries", list}}, ts).dump(2) + "\n");
    return kExitOk;
  }

  int eval_cmd() {
    const Vector x = parse_vector(cfg_.point, map_.n_in(), "--point");
    const double tol = cfg_.tol.value_or(kDefaultKinkTolerance);
    const GeneralizedJacobian gj = limiting_jacobians(map_, x, tol);
    const auto patterns = active_patterns(map_, x, tol, kDefaultPatternCap);
    if (csv()) {
      std::ostringstream s;
      for (std::size_t i = 0; i < map_.n_out(); ++i) s << 'f' << i << ',';
      s << "active_patterns,limiting_jacobians\n";
      for (double v : gj.value) s << csv_number(v) << ',';
      s << patterns.size() << ',' << gj.elements.size() << '\n';
      write(s.str());
      return kExitOk;
    }
    Json pats = Json::array();
    for (const auto& p : patterns) pats.push_back(to_string(map_, p));
    Json jacs = Json::array();
    for (const Matrix& m : gj.elements) jacs.push_back(to_json(m));
    emit_json({{"point", to_json(x)},
               {"value", to_json(gj.value)},
               {"active_patterns", patterns.size()},
               {"patterns", pats},
               {"limiting_jacobians", gj.elements.size()},
               {"jacobians", jacs}});
    return kExitOk;
  }

  SolveOptions solve_options() const {
    SolveOptions opts;
    opts.multi_start.seed = seed_;
    if (cfg_.starts) opts.multi_start.count = *cfg_.starts;
    if (cfg_.tol) opts.tol_residual = *cfg_.tol;
    return opts;
  }

  int invert_cmd() {
    const Vector y = parse_vector(cfg_.target, map_.n_out(), "--target");
    SolveOptions opts = solve_options();
    if (!cfg_.start.empty()) opts.x0 = parse_vector(cfg_.start, map_.n_in(), "--start");
    opts.record_trace = cfg_.trace || csv();
    const SolveReport rep = invert(map_, y, opts);
    if (csv()) {
      std::ostringstream s;
      write_trace_csv(s, rep.trace);
      write(s.str());
    } else {
      emit_json(to_json(rep, cfg_.trace));
    }
    return rep.status == SolveStatus::converged ? kExitOk : kExitNumeric;
  }

  int certify_cmd() {
    std::vector<Vector> points;
    if (!cfg_.grid.empty() && !cfg_.point.empty()) {
      throw ValidationError("give either --point or --grid, not both");
    }
    if (!cfg_.grid.empty()) {
      points = parse_grid(cfg_.grid, map_.n_in());
    } else {
      points.push_back(parse_vector(cfg_.point, map_.n_in(), "--point"));
    }
    RankOptions opts;
    opts.seed = seed_;
    if (cfg_.tol) opts.sigma_min = *cfg_.tol;
    std::vector<RankCertificate> certs;
    std::map<std::string, std::size_t> counts;
    for (const Vector& p : points) {
      certs.push_back(certify_point(map_, p, opts));
      ++counts[std::string(to_string(certs.back().status))];
    }
    if (csv()) {
      std::ostringstream s;
      for (std::size_t i = 0; i < map_.n_in(); ++i) s << 'x' << i << ',';
      s << "status,min_singular_value,elements_count\n";
      for (const auto& c : certs) {
        for (double v : c.point) s << csv_number(v) << ',';
        s << to_string(c.status) << ',' << csv_number(c.min_singular_value) << ','
          << c.elements_count << '\n';
      }
      write(s.str());
      return kExitOk;
    }
    Json list = Json::array();
    for (const auto& c : certs) list.push_back(to_json(c));
    Json summary;
    summary["total"] = certs.size();
    for (const auto& [status, n] : counts) summary[status] = n;
    emit_json({{"certificates", list}, {"summary", summary}});
    return kExitOk;
  }

  int probe_cmd() {
    const Vector a = parse_vector(cfg_.target, map_.n_out(), "--target");
    InjectivityOptions opts;
    opts.solve = solve_options();
    if (cfg_.starts) opts.starts = *cfg_.starts;
    opts.mountain_pass.seed = seed_;
    opts.mountain_pass.rank.seed = seed_;
    opts.mountain_pass.record_history = csv();
    const InjectivityReport rep = injectivity_probe(map_, a, opts);
    if (csv()) {
      std::ostringstream s;
      write_path_csv(s, rep.mountain_pass ? rep.mountain_pass->history
                                          : std::vector<PathHistoryRow>{});
      write(s.str());
    } else {
      emit_json(to_json(rep));
    }
    return kExitOk;
  }

  int ps_cmd() {
    const Vector y = parse_vector(cfg_.target, map_.n_out(), "--target");
    CoercivityOptions copts;
    copts.seed = seed_;
    const CoercivityReport coer = coercivity_scan(map_, copts);
    PSProbeOptions popts;
    popts.seed = seed_;
    popts.solve = solve_options();
    if (cfg_.starts) popts.n_starts = *cfg_.starts;
    const PSTrace ps = ps_sequence_probe(map_, y, popts);
    if (csv()) {
      std::ostringstream s;
      s << "run,iter,norm,phi,subgrad_norm\n";
      for (std::size_t r = 0; r < ps.runs.size(); ++r) {
        const PSRun& run = ps.runs[r];
        for (std::size_t i = 0; i < run.norms.size(); ++i) {
          s << r << ',' << i << ',' << csv_number(run.norms[i]) << ',' << csv_number(run.phi[i])
            << ',' << csv_number(run.subgradient[i]) << '\n';
        }
      }
      write(s.str());
      return kExitOk;
    }
    emit_json({{"coercivity", to_json(coer)}, {"ps", to_json(ps)}});
    return kExitOk;
  }

  const RunConfig& cfg_;
  std::ostream& out_;
  std::uint64_t seed_;
  MapDefinition map_;
};

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "RNG seed (falls back to LIPINV_SEED)");
  sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", cfg.out_path, "Write the report here instead of standard output");
  sub->add_flag("--no-timestamp", cfg.no_timestamp, "Omit the timestamp from JSON reports");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Nonsmooth global inversion toolkit", "lipinv"};
  app.footer(kFooter);
  app.require_subcommand(1, 1);

  auto* eval = app.add_subcommand("eval", "Evaluate f and its limiting Jacobians at a point");
  eval->add_option("--map", cfg.map_source, "Map source")->required();
  eval->add_option("--point", cfg.point, "Point x1,x2,...")->required();
  eval->add_option("--tol", cfg.tol, "Kink-activity tolerance");

  auto* inv = app.add_subcommand("invert", "Solve f(x) = y by multi-start nonsmooth descent");
  inv->add_option("--map", cfg.map_source, "Map source")->required();
  inv->add_option("--target", cfg.target, "Target y1,y2,...")->required();
  inv->add_option("--start", cfg.start, "Extra starting point tried first");
  inv->add_option("--starts", cfg.starts, "Number of seeded box starts");
  inv->add_option("--tol", cfg.tol, "Residual tolerance");
  inv->add_flag("--trace", cfg.trace, "Include the iterate trace in JSON output");

  auto* cert = app.add_subcommand("certify", "Maximal-rank certificates at a point or on a grid");
  cert->add_option("--map", cfg.map_source, "Map source")->required();
  cert->add_option("--point", cfg.point, "Point x1,x2,...");
  cert->add_option("--grid", cfg.grid, "Grid lo:hi:countxlo:hi:count...");
  cert->add_option("--tol", cfg.tol, "Singular-value threshold");

  auto* probe = app.add_subcommand("probe-injectivity",
                                   "Search for distinct preimages and a mountain-pass saddle");
  probe->add_option("--map", cfg.map_source, "Map source")->required();
  probe->add_option("--target", cfg.target, "Target a1,a2,...")->required();
  probe->add_option("--starts", cfg.starts, "Number of seeded starts");
  probe->add_option("--tol", cfg.tol, "Residual tolerance");

  auto* ps = app.add_subcommand("ps-check", "Coercivity scan and Palais-Smale sequence probe");
  ps->add_option("--map", cfg.map_source, "Map source")->required();
  ps->add_option("--target", cfg.target, "Target y1,y2,...")->required();
  ps->add_option("--starts", cfg.starts, "Number of far-out starts");
  ps->add_option("--tol", cfg.tol, "Residual tolerance");

  auto* zoo = app.add_subcommand("zoo", "List built-in maps");
  zoo->add_option("--map", cfg.map_source, "Show a single entry");

  for (auto* sub : {eval, inv, cert, probe, ps, zoo}) add_common(sub, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    Command cmd(cfg, out);
    return cmd.run();
  } catch (const ParseError& e) {
    err << "lipinv: parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "lipinv: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "lipinv: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "lipinv: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace lipinv
