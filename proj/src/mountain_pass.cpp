#include "lipinv/mountain_pass.hpp"

#include "lipinv/min_norm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <utility>

namespace lipinv {

ShiftedMap shift_map(const MapDefinition& map, const Vector& x2, const Vector& a) {
  if (static_cast<std::size_t>(x2.size()) != map.n_in() ||
      static_cast<std::size_t>(a.size()) != map.n_out()) {
    throw ValidationError("dimension mismatch: shift needs " + std::to_string(map.n_in()) +
                          " coordinates and a value with " + std::to_string(map.n_out()));
  }
  ShiftedMap shifted{map, x2, a, map};
  if (x2.isZero(0.0) && a.isZero(0.0)) return shifted;

  MapBuilder builder(map.name(), map.variables());
  std::vector<int> inputs;
  for (std::size_t i = 0; i < map.n_in(); ++i) {
    const int var = builder.variable(i);
    inputs.push_back(x2[i] == 0.0 ? var
                                  : builder.binary(NodeKind::add, var, builder.constant(x2[i])));
  }
  std::vector<int> outputs = builder.inline_map(map, inputs);
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    if (a[j] != 0.0) {
      outputs[j] = builder.binary(NodeKind::sub, outputs[j], builder.constant(a[j]));
    }
  }
  shifted.map = builder.build(std::move(outputs));
  return shifted;
}

double psi(const ShiftedMap& shifted, const Vector& x) {
  return 0.5 * eval(shifted.map, x).squaredNorm();
}

namespace {

double min_norm_subgradient(const MapDefinition& map, const Vector& x, const Vector& zero) {
  const auto subgrads = phi_subgradient_set(map, x, zero);
  return min_norm_element(subgrads).element.norm();
}

Vector sphere_point(std::mt19937_64& rng, Eigen::Index n, double radius) {
  std::normal_distribution<double> gauss;
  Vector p(n);
  do {
    for (Eigen::Index k = 0; k < n; ++k) p[k] = gauss(rng);
  } while (!(p.norm() > 0.0));
  return p * (radius / p.norm());
}

}  // namespace

double ring_infimum(const ShiftedMap& shifted, double rho, std::size_t n_samples,
                    std::uint64_t seed, std::size_t refine_iters) {
  const auto n = static_cast<Eigen::Index>(shifted.map.n_in());
  if (n_samples < 2 * static_cast<std::size_t>(n)) {
    throw ValidationError("ring sampling needs at least 2n = " + std::to_string(2 * n) +
                          " samples, got " + std::to_string(n_samples));
  }
  if (!(rho > 0.0)) throw ValidationError("ring radius must be > 0");

  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(shifted.map.n_out()));
  std::mt19937_64 rng(seed);
  std::vector<std::pair<double, Vector>> samples;
  samples.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Vector p = sphere_point(rng, n, rho);
    double value = std::numeric_limits<double>::infinity();
    try {
      value = psi(shifted, p);
    } catch (const NumericError&) {
    }
    samples.emplace_back(value, std::move(p));
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });

  double best = samples.front().first;
  const std::size_t starts = std::min<std::size_t>(8, samples.size());
  for (std::size_t s = 0; s < starts; ++s) {
    Vector p = samples[s].second;
    double value = samples[s].first;
    if (!std::isfinite(value)) continue;
    double step = rho;
    for (std::size_t it = 0; it < refine_iters && step > 1e-14 * rho; ++it) {
      const auto subgrads = phi_subgradient_set(shifted.map, p, zero);
      Vector d = min_norm_element(subgrads).element;
      const Vector radial = p / p.norm();
      d -= d.dot(radial) * radial;  // tangential part
      const double dn = d.norm();
      if (!(dn > 0.0)) break;
      bool accepted = false;
      for (int b = 0; b < 40 && !accepted; ++b, step *= 0.5) {
        Vector trial = p - (step / dn) * d;
        trial *= rho / trial.norm();
        try {
          const double tv = psi(shifted, trial);
          if (tv < value) {
            p = std::move(trial);
            value = tv;
            accepted = true;
          }
        } catch (const NumericError&) {
        }
      }
      if (!accepted) break;
      step *= 4.0;  // undo the last halving and allow growth
      step = std::min(step, rho);
    }
    best = std::min(best, value);
  }
  return best;
}

void PathPolyline::reparametrize() {
  const std::size_t m = nodes.size();
  if (m < 3) return;
  for (int pass = 0; pass < 10; ++pass) {
    std::vector<double> arc(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) arc[i] = arc[i - 1] + (nodes[i] - nodes[i - 1]).norm();
    const double total = arc.back();
    if (!(total > 0.0)) return;
    std::vector<Vector> placed;
    placed.reserve(m);
    placed.push_back(nodes.front());
    std::size_t seg = 1;
    for (std::size_t j = 1; j + 1 < m; ++j) {
      const double target = total * static_cast<double>(j) / static_cast<double>(m - 1);
      while (seg + 1 < m && arc[seg] < target) ++seg;
      const double len = arc[seg] - arc[seg - 1];
      const double t = len > 0.0 ? (target - arc[seg - 1]) / len : 0.0;
      placed.push_back(nodes[seg - 1] + t * (nodes[seg] - nodes[seg - 1]));
    }
    placed.push_back(nodes.back());
    nodes = std::move(placed);
    if (gap_spread() <= 1e-3) return;
  }
}

double PathPolyline::gap_spread() const {
  if (nodes.size() < 2) return 0.0;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < nodes.size(); ++i) gaps.push_back((nodes[i] - nodes[i - 1]).norm());
  const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
  if (!(mean > 0.0)) return 0.0;
  double worst = 0.0;
  for (double g : gaps) worst = std::max(worst, std::fabs(g - mean) / mean);
  return worst;
}

std::string_view to_string(MPClassification c) {
  switch (c) {
    case MPClassification::second_preimage_found: return "second_preimage_found";
    case MPClassification::singular_saddle: return "singular_saddle";
    case MPClassification::ps_failure_suspected: return "ps_failure_suspected";
    case MPClassification::ring_condition_failed: return "ring_condition_failed";
    case MPClassification::iteration_cap: return "iteration_cap";
  }
  return "?";
}

namespace {

struct PathState {
  PathPolyline path;
  std::vector<double> values;
  std::size_t top = 1;  // index of the highest interior node
};

PathState evaluate_path(const ShiftedMap& shifted, PathPolyline path) {
  PathState state{std::move(path), {}, 1};
  for (const Vector& node : state.path.nodes) state.values.push_back(psi(shifted, node));
  for (std::size_t i = 1; i + 1 < state.values.size(); ++i) {
    if (state.values[i] > state.values[state.top]) state.top = i;
  }
  return state;
}

// Whether the highest node has been creeping outward on a flat level for the
// whole window: the finite-run signature of a minimax sequence escaping to
// infinity.
bool drifting(const std::vector<double>& levels, const std::vector<double>& norms,
              std::size_t window, double plateau_tol) {
  if (window == 0 || levels.size() <= window) return false;
  const std::size_t last = levels.size() - 1;
  const std::size_t first = last - window;
  const double flat = std::fabs(levels[last] - levels[first]);
  if (flat > plateau_tol * std::max(1.0, std::fabs(levels[last]))) return false;
  if (!(norms[last] > norms[first])) return false;
  std::size_t outward = 0;
  for (std::size_t i = first + 1; i <= last; ++i) outward += norms[i] >= norms[i - 1] ? 1 : 0;
  return outward * 10 >= window * 9;
}

bool stationary(const std::vector<double>& levels, std::size_t window) {
  if (window == 0 || levels.size() <= window) return false;
  const double a = levels[levels.size() - 1 - window];
  const double b = levels.back();
  return std::fabs(a - b) <= 1e-10 * std::max(1.0, std::fabs(b));
}

struct Climb {
  Vector x;
  double grad = 0.0;
};

Vector min_norm_direction(const MapDefinition& map, const Vector& x, const Vector& zero) {
  const auto subgrads = phi_subgradient_set(map, x, zero);
  return min_norm_element(subgrads).element;
}

// Climbing image: follow -(d - 2 (d.tau) tau), i.e. ascend along the path
// tangent and descend across it, with the subgradient norm as merit.
Climb climb(const ShiftedMap& shifted, const Vector& start, const Vector& tau, double step,
            std::size_t max_iters) {
  const Vector zero = Vector::Zero(start.size());
  Climb c{start, 0.0};
  Vector d = min_norm_direction(shifted.map, c.x, zero);
  c.grad = d.norm();
  double t = step;
  for (std::size_t it = 0; it < max_iters && c.grad > 1e-14 && t > 1e-16; ++it) {
    const Vector dir = d - 2.0 * d.dot(tau) * tau;
    const Vector trial = c.x - t * dir;
    try {
      const Vector dt = min_norm_direction(shifted.map, trial, zero);
      if (dt.norm() < c.grad) {
        c.x = trial;
        d = dt;
        c.grad = dt.norm();
        t = std::min(1.5 * t, 1e3 * step);
        continue;
      }
    } catch (const NumericError&) {
    }
    t *= 0.5;
  }
  return c;
}

}  // namespace

MPReport mountain_pass_search(const ShiftedMap& shifted, const Vector& e,
                              const MountainPassOptions& opts) {
  const auto n = static_cast<Eigen::Index>(shifted.map.n_in());
  if (shifted.map.n_in() != shifted.map.n_out()) {
    throw ValidationError("mountain-pass search needs a square map");
  }
  if (e.size() != n) throw ValidationError("dimension mismatch: e has wrong length");
  if (!(e.norm() > 0.0)) {
    throw ValidationError("mountain-pass endpoints must differ (|e| > 0)");
  }
  if (opts.nodes < 3) throw ValidationError("string needs at least 3 nodes");
  const double rho = opts.rho.value_or(e.norm() / 4.0);
  if (!(rho > 0.0 && rho < e.norm())) {
    throw ValidationError("ring radius must satisfy 0 < rho < |e|");
  }

  const Vector zero = Vector::Zero(n);
  MPReport rep;
  rep.rho = rho;
  rep.endpoint_max = std::max(psi(shifted, zero), psi(shifted, e));
  rep.ring_infimum = ring_infimum(shifted, rho,
                                  std::max<std::size_t>(opts.ring_samples, 2 * n),
                                  opts.seed, opts.ring_refine_iters);
  rep.v = zero;
  rep.critical_point = shifted.x2;
  rep.level_c = rep.endpoint_max;
  if (!(rep.ring_infimum > rep.endpoint_max + opts.ring_tol)) {
    rep.classification = MPClassification::ring_condition_failed;
    return rep;
  }
  rep.ring_certified = true;

  // Straight segment, plus one seeded bent path; the lower one is kept.
  const std::size_t m = opts.nodes;
  PathPolyline straight;
  for (std::size_t i = 0; i < m; ++i) {
    straight.nodes.push_back(e * (static_cast<double>(i) / static_cast<double>(m - 1)));
  }
  PathState state = evaluate_path(shifted, straight);
  std::mt19937_64 rng(opts.seed ^ 0x5DEECE66DULL);
  if (n >= 2) {
    std::normal_distribution<double> gauss;
    Vector r(n);
    for (Eigen::Index k = 0; k < n; ++k) r[k] = gauss(rng);
    const Vector unit_e = e / e.norm();
    r -= r.dot(unit_e) * unit_e;
    if (r.norm() > 0.0) {
      r *= 0.5 * e.norm() / r.norm();
      PathPolyline bent;
      for (std::size_t i = 0; i < m; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(m - 1);
        bent.nodes.push_back(e * s + std::sin(std::numbers::pi * s) * r);
      }
      bent.nodes.back() = e;
      try {
        PathState candidate = evaluate_path(shifted, bent);
        if (candidate.values[candidate.top] < state.values[state.top]) state = std::move(candidate);
      } catch (const NumericError&) {
      }
    }
  }

  std::vector<double> raw_levels;
  std::vector<double> top_norms;
  double best = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool escaped = false;
  bool drift = false;

  for (std::size_t outer = 0;; ++outer) {
    const Vector& top = state.path.nodes[state.top];
    const double level = state.values[state.top];
    best = std::min(best, level);
    rep.level_history.push_back(best);
    raw_levels.push_back(level);
    top_norms.push_back(top.norm());
    rep.outer_iterations = outer;
    rep.max_node_subgradient = min_norm_subgradient(shifted.map, top, zero);
    if (opts.record_history) {
      for (std::size_t i = 0; i < m; ++i) {
        rep.history.push_back({outer, i, state.values[i], state.path.nodes[i]});
      }
    }

    if (rep.max_node_subgradient <= opts.tol) {
      converged = true;
      break;
    }
    const bool outside = std::any_of(state.path.nodes.begin(), state.path.nodes.end(),
                                     [&](const Vector& p) { return p.norm() > opts.divergence_ball; });
    if (outside) {
      escaped = true;
      break;
    }
    if (drifting(raw_levels, top_norms, opts.plateau_window, opts.plateau_tol)) {
      drift = true;
      break;
    }
    if (stationary(raw_levels, opts.plateau_window)) break;
    if (outer >= opts.max_outer) break;

    // Independent descent of every interior node, then arc-length reparametrization.
    double mean_gap = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
      mean_gap += (state.path.nodes[i] - state.path.nodes[i - 1]).norm();
    }
    mean_gap /= static_cast<double>(m - 1);
    PathPolyline next = state.path;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      const Vector& x = state.path.nodes[i];
      const double value = state.values[i];
      Vector d;
      try {
        const auto subgrads = phi_subgradient_set(shifted.map, x, zero);
        d = min_norm_element(subgrads).element;
      } catch (const NumericError&) {
        continue;
      }
      const double dn = d.norm();
      if (!(dn > 0.0)) continue;
      double t = std::min(opts.step, mean_gap / dn);
      for (int b = 0; b < 40; ++b, t *= 0.5) {
        const Vector trial = x - t * d;
        try {
          if (psi(shifted, trial) <= value - 1e-4 * t * dn * dn) {
            next.nodes[i] = trial;
            break;
          }
        } catch (const NumericError&) {
        }
      }
    }
    next.reparametrize();
    state = evaluate_path(shifted, std::move(next));
  }

  rep.level_c = best;
  rep.v = state.path.nodes[state.top];

  if (!escaped && !drift) {
    // The top node of a discrete string only approximates the saddle; climb
    // from it along the local tangent to the critical point itself.
    const std::size_t i = state.top;
    const auto& nodes = state.path.nodes;
    Vector tau = nodes[std::min(i + 1, m - 1)] - nodes[i > 0 ? i - 1 : 0];
    if (tau.norm() > 0.0) {
      tau /= tau.norm();
      try {
        const Climb c = climb(shifted, rep.v, tau, opts.step, opts.climb_iters);
        if (c.grad <= opts.tol) {
          converged = true;
          rep.v = c.x;
          rep.level_c = psi(shifted, c.x);
          rep.max_node_subgradient = c.grad;
        }
      } catch (const NumericError&) {
      }
    }
  }
  rep.critical_point = rep.v + shifted.x2;
  rep.separated_from_endpoints =
      rep.v.norm() > opts.separation && (rep.v - e).norm() > opts.separation;

  if (escaped || drift) {
    rep.classification = MPClassification::ps_failure_suspected;
    return rep;
  }
  if (!converged) {
    rep.classification = MPClassification::iteration_cap;
    return rep;
  }

  // Polish the highest node: a new zero of g means a further preimage.
  SolveOptions polish = opts.polish;
  polish.x0 = rep.v;
  const SolveReport polished = minimize_phi(shifted.map, zero, polish);
  const bool distinct = polished.x_star.norm() > opts.separation &&
                        (polished.x_star - e).norm() > opts.separation;
  if (polished.residual <= opts.preimage_tol && distinct) {
    rep.classification = MPClassification::second_preimage_found;
    rep.recovered_preimage = polished.x_star + shifted.x2;
    return rep;
  }

  const GeneralizedJacobian gj = limiting_jacobians(shifted.base, rep.critical_point);
  RankCertificate cert = max_rank_certificate(gj, opts.rank);
  if (cert.status != RankStatus::singular_element_found && gj.elements.size() > 1) {
    // The min-norm weights single out the hull member that makes v critical.
    const auto subgrads = phi_subgradient_set(gj, shifted.a);
    const MinNormResult mn = min_norm_element(subgrads);
    Matrix combo = Matrix::Zero(gj.elements[0].rows(), gj.elements[0].cols());
    for (std::size_t i = 0; i < gj.elements.size(); ++i) combo += mn.weights[i] * gj.elements[i];
    const double s = smallest_singular_value(combo);
    cert.min_singular_value = std::min(cert.min_singular_value, s);
    if (s <= opts.rank.sigma_min) {
      cert.status = RankStatus::singular_element_found;
      cert.witness = combo;
      cert.witness_weights = mn.weights;
    }
  }
  rep.saddle_certificate = cert;
  if (rep.level_c > 0.0 && cert.status == RankStatus::singular_element_found) {
    rep.classification = MPClassification::singular_saddle;
  } else {
    rep.classification = MPClassification::iteration_cap;
  }
  return rep;
}

std::string_view to_string(InjectivityOutcome outcome) {
  switch (outcome) {
    case InjectivityOutcome::counterexample_search_run: return "counterexample_search_run";
    case InjectivityOutcome::no_counterexample_found: return "no_counterexample_found";
    case InjectivityOutcome::surjectivity_failure: return "surjectivity_failure";
  }
  return "?";
}

InjectivityReport injectivity_probe(const MapDefinition& map, const Vector& a,
                                    const InjectivityOptions& options) {
  if (map.n_in() != map.n_out()) throw ValidationError("injectivity probe needs a square map");
  SolveOptions solve = options.solve;
  solve.multi_start.count = options.starts;
  const std::vector<SolveReport> reports = invert_all(map, a, solve);

  InjectivityReport rep;
  rep.starts_used = reports.size();
  for (const SolveReport& r : reports) {
    if (r.status != SolveStatus::converged) continue;
    // Tighten the preimage before comparing; keep whichever point is better.
    Vector x = r.x_star;
    const SolveReport refined =
        semismooth_newton_polish(map, a, x, 8, 1e-15, solve.kink_tol);
    if (refined.residual < r.residual) x = refined.x_star;
    const bool known = std::any_of(rep.preimages.begin(), rep.preimages.end(),
                                   [&](const Vector& p) { return (p - x).norm() < options.dedup_tol; });
    if (!known && rep.preimages.size() < options.max_preimages) rep.preimages.push_back(x);
  }
  std::sort(rep.preimages.begin(), rep.preimages.end(), [](const Vector& l, const Vector& r) {
    return std::lexicographical_compare(l.begin(), l.end(), r.begin(), r.end());
  });

  if (rep.preimages.empty()) {
    rep.outcome = InjectivityOutcome::surjectivity_failure;
    rep.best_attempt = *std::min_element(reports.begin(), reports.end(), better_report);
    return rep;
  }
  if (rep.preimages.size() == 1) {
    rep.outcome = InjectivityOutcome::no_counterexample_found;
    return rep;
  }
  rep.outcome = InjectivityOutcome::counterexample_search_run;
  const Vector& x2 = rep.preimages[0];
  const Vector& x1 = rep.preimages[1];
  const ShiftedMap shifted = shift_map(map, x2, a);
  rep.mountain_pass = mountain_pass_search(shifted, x1 - x2, options.mountain_pass);
  return rep;
}

}  // namespace lipinv
