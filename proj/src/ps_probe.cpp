#include "lipinv/ps_probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace lipinv {

std::string_view to_string(CoercivityVerdict verdict) {
  switch (verdict) {
    case CoercivityVerdict::coercive_evidence: return "coercive_evidence";
    case CoercivityVerdict::non_coercive_witness: return "non_coercive_witness";
  }
  return "?";
}

std::string_view to_string(PSVerdict verdict) {
  switch (verdict) {
    case PSVerdict::convergent_subsequence_evidence: return "convergent_subsequence_evidence";
    case PSVerdict::ps_failure_suspected: return "ps_failure_suspected";
    case PSVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::size_t default_direction_count(std::size_t n) { return n <= 3 ? 64 : 32 * n; }

std::vector<Vector> sample_directions(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Vector> out;
  out.reserve(count);
  while (out.size() < count) {
    Vector d(static_cast<Eigen::Index>(n));
    for (auto& c : d) c = gauss(rng);
    const double norm = d.norm();
    if (norm > 0.0) out.push_back(d / norm);
  }
  return out;
}

CoercivityReport coercivity_scan(const MapDefinition& map, const std::vector<Vector>& directions,
                                 const std::vector<double>& radii, double growth_factor) {
  if (radii.size() < 3) throw ValidationError("coercivity scan needs at least 3 radii");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw ValidationError("radii must be strictly increasing");
  }
  if (!(radii.front() > 0.0)) throw ValidationError("radii must be positive");
  if (directions.empty()) throw ValidationError("coercivity scan needs directions");

  CoercivityReport rep;
  rep.radii = radii;
  rep.min_growth = std::numeric_limits<double>::infinity();
  std::size_t monotone = 0;
  bool all_grow = true;
  double witness_far = std::numeric_limits<double>::infinity();
  EvalWorkspace ws;
  Vector fx;

  for (const Vector& raw : directions) {
    if (static_cast<std::size_t>(raw.size()) != map.n_in() || !(raw.norm() > 0.0)) {
      throw ValidationError("directions must be nonzero with the map's input dimension");
    }
    const Vector d = raw / raw.norm();
    std::vector<double> norms;
    try {
      for (double r : radii) {
        eval(map, Vector(r * d), ws, fx);
        norms.push_back(fx.norm());
      }
    } catch (const NumericError& e) {
      rep.skipped.push_back({d, e.what()});
      continue;
    }
    rep.directions.push_back(d);
    rep.min_growth = std::min(rep.min_growth, norms.back());
    monotone += std::is_sorted(norms.begin(), norms.end()) ? 1 : 0;
    if (norms.back() < growth_factor * norms.front()) {
      all_grow = false;
      const bool better =
          norms.back() < witness_far ||
          (norms.back() == witness_far && rep.witness_direction &&
           std::lexicographical_compare(d.begin(), d.end(), rep.witness_direction->begin(),
                                        rep.witness_direction->end()));
      if (better) {
        witness_far = norms.back();
        rep.witness_direction = d;
        rep.witness_bound = *std::max_element(norms.begin(), norms.end());
      }
    }
  }
  if (rep.directions.empty()) {
    throw NumericError("coercivity scan: every direction failed to evaluate");
  }
  rep.monotone_fraction =
      static_cast<double>(monotone) / static_cast<double>(rep.directions.size());
  rep.verdict = all_grow ? CoercivityVerdict::coercive_evidence
                         : CoercivityVerdict::non_coercive_witness;
  return rep;
}

CoercivityReport coercivity_scan(const MapDefinition& map, const CoercivityOptions& options) {
  const std::size_t count =
      options.n_directions > 0 ? options.n_directions : default_direction_count(map.n_in());
  return coercivity_scan(map, sample_directions(map.n_in(), count, options.seed), options.radii,
                         options.growth_factor);
}

std::vector<Vector> far_starts(std::size_t n, const PSProbeOptions& options) {
  auto dirs = sample_directions(n, options.n_starts, options.seed ^ 0xA5A5A5A5ULL);
  for (Vector& d : dirs) d *= options.start_radius;
  return dirs;
}

namespace {

bool tail_clusters(const std::vector<TraceRow>& trace, std::size_t tail, double tol) {
  const std::size_t first = trace.size() - std::min(tail, trace.size());
  for (std::size_t i = first; i < trace.size(); ++i) {
    for (std::size_t j = i + 1; j < trace.size(); ++j) {
      if ((trace[i].x - trace[j].x).norm() > tol) return false;
    }
  }
  return true;
}

}  // namespace

PSTrace ps_sequence_probe(const MapDefinition& map, const Vector& y,
                          const std::vector<Vector>& starts, const PSProbeOptions& options) {
  if (starts.empty()) throw ValidationError("PS probe needs at least one start");
  if (!(options.escalation > 1.0)) throw ValidationError("escalation factor must exceed 1");
  PSTrace trace;
  SolveOptions solve = options.solve;
  solve.max_iters = options.max_iters;
  solve.divergence_ball = options.divergence_ball;
  solve.record_trace = true;
  solve.multi_start.seed = options.seed;

  for (const Vector& start : starts) {
    PSRun run;
    run.start = start;
    Vector x0 = start;
    double phi_cap = 0.0;
    for (std::size_t stage = 0; stage < options.max_stages; ++stage) {
      solve.x0 = x0;
      const SolveReport rep = minimize_phi(map, y, solve);
      run.status = rep.status;
      run.stages = stage + 1;
      for (const TraceRow& row : rep.trace) {
        run.norms.push_back(row.x.norm());
        run.phi.push_back(row.phi);
        run.subgradient.push_back(row.subgrad_norm);
      }
      // Descent never raises phi, so the stage starts bound the sequence.
      if (stage == 0) {
        phi_cap = 2.0 * rep.phi_value + 1e-12;
      } else if (!(rep.trace.front().phi <= phi_cap)) {
        run.bounded = false;
      }

      const bool small = rep.subgradient_norm_est <= options.subgradient_threshold;
      if (rep.x_star.norm() > options.divergence_ball) {
        run.escaped = run.bounded && small;
        break;
      }
      if (rep.x_star.norm() < 0.5 * x0.norm()) {
        run.clustered = rep.status == SolveStatus::converged ||
                        rep.status == SolveStatus::stalled_at_nonzero_residual ||
                        (rep.status == SolveStatus::iteration_cap &&
                         tail_clusters(rep.trace, options.tail, options.cluster_tol));
        break;
      }
      if (!small || !run.bounded) break;
      // A near-critical point far out: push it further along its own ray.
      x0 = options.escalation * rep.x_star;
    }
    trace.runs.push_back(std::move(run));
  }

  const bool any_escape = std::any_of(trace.runs.begin(), trace.runs.end(),
                                      [](const PSRun& r) { return r.escaped; });
  const bool all_clustered = std::all_of(trace.runs.begin(), trace.runs.end(),
                                         [](const PSRun& r) { return r.clustered; });
  trace.verdict = any_escape      ? PSVerdict::ps_failure_suspected
                  : all_clustered ? PSVerdict::convergent_subsequence_evidence
                                  : PSVerdict::inconclusive;
  return trace;
}

PSTrace ps_sequence_probe(const MapDefinition& map, const Vector& y,
                          const PSProbeOptions& options) {
  return ps_sequence_probe(map, y, far_starts(map.n_in(), options), options);
}

}  // namespace lipinv
