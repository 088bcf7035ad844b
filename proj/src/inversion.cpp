#include "lipinv/inversion.hpp"

#include "lipinv/min_norm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

namespace lipinv {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::stalled_at_nonzero_residual: return "stalled_at_nonzero_residual";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::iteration_cap: return "iteration_cap";
  }
  return "?";
}

void SolveOptions::validate(std::size_t n) const {
  if (!(tol_residual > 0.0)) throw ValidationError("tol_residual must be > 0");
  if (!(armijo.c1 > 0.0 && armijo.c1 < 1.0)) throw ValidationError("Armijo c1 must lie in (0, 1)");
  if (!(armijo.backtrack > 0.0 && armijo.backtrack < 1.0)) {
    throw ValidationError("backtrack factor must lie in (0, 1)");
  }
  if (!(sampling_radius > 0.0)) throw ValidationError("sampling_radius must be > 0");
  if (!(stall_threshold >= 0.0)) throw ValidationError("stall_threshold must be >= 0");
  if (x0 && static_cast<std::size_t>(x0->size()) != n) {
    throw ValidationError("dimension mismatch: start point has " + std::to_string(x0->size()) +
                          " entries, map has " + std::to_string(n) + " inputs");
  }
  const bool has_box = multi_start.lo.size() > 0 || multi_start.hi.size() > 0;
  if (has_box) {
    if (static_cast<std::size_t>(multi_start.lo.size()) != n ||
        static_cast<std::size_t>(multi_start.hi.size()) != n) {
      throw ValidationError("dimension mismatch: multi-start box must have " + std::to_string(n) +
                            " coordinates");
    }
    if ((multi_start.hi.array() < multi_start.lo.array()).any()) {
      throw ValidationError("multi-start box has hi < lo");
    }
  }
}

std::vector<Vector> start_points(const SolveOptions& options, std::size_t n) {
  std::vector<Vector> starts;
  if (options.x0) starts.push_back(*options.x0);
  const auto dim = static_cast<Eigen::Index>(n);
  const bool has_box = options.multi_start.lo.size() > 0;
  const Vector lo = has_box ? options.multi_start.lo : Vector::Constant(dim, -10.0);
  const Vector hi = has_box ? options.multi_start.hi : Vector::Constant(dim, 10.0);
  std::mt19937_64 rng(options.multi_start.seed);
  std::uniform_real_distribution<double> unit;
  for (std::size_t s = 0; s < options.multi_start.count; ++s) {
    Vector p(dim);
    for (Eigen::Index k = 0; k < dim; ++k) p[k] = lo[k] + (hi[k] - lo[k]) * unit(rng);
    starts.push_back(std::move(p));
  }
  return starts;
}

namespace {

void check_square(const MapDefinition& map, const Vector& y) {
  if (map.n_in() != map.n_out()) {
    throw ValidationError("inversion needs a square map, got " + std::to_string(map.n_in()) +
                          " -> " + std::to_string(map.n_out()));
  }
  if (static_cast<std::size_t>(y.size()) != map.n_out()) {
    throw ValidationError("dimension mismatch: target has " + std::to_string(y.size()) +
                          " entries, map has " + std::to_string(map.n_out()) + " outputs");
  }
}

double min_norm_at(const GeneralizedJacobian& gj, const Vector& y) {
  const auto subgrads = phi_subgradient_set(gj, y);
  return min_norm_element(subgrads).element.norm();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint64_t out = 0;
  std::vector<std::uint32_t> words(2);
  seq.generate(words.begin(), words.end());
  out = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out;
}

struct Descent {
  SolveReport report;
  bool reached_stop = false;  // residual <= stop_residual
};

// Gradient-sampling descent on phi. Stops once the residual drops to
// `stop_residual`, which is tol_residual for a plain minimize_phi and the
// Newton hand-off residual inside solve_from.
Descent descend(const MapDefinition& map, const Vector& y, const Vector& x0,
                const SolveOptions& opts, double stop_residual, std::size_t max_iters,
                std::uint64_t seed, std::size_t iter_offset) {
  const auto n = static_cast<Eigen::Index>(map.n_in());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;

  Descent out;
  SolveReport& rep = out.report;
  Vector x = x0;
  double radius = opts.sampling_radius;
  EvalWorkspace ws;
  Vector fx(n);
  std::vector<Vector> generators;

  auto phi_of = [&](const Vector& p) {
    eval(map, p, ws, fx);
    const double r = (fx - y).norm();
    return 0.5 * r * r;
  };

  for (std::size_t iter = 0;; ++iter) {
    const GeneralizedJacobian gj = limiting_jacobians(map, x, opts.kink_tol);
    const double residual = (gj.value - y).norm();
    const double phi = 0.5 * residual * residual;
    if (!std::isfinite(phi)) throw NumericError("non-finite phi at the current iterate");
    generators = phi_subgradient_set(gj, y);
    const double own_norm = min_norm_element(generators).element.norm();

    rep.x_star = x;
    rep.residual = residual;
    rep.phi_value = phi;
    rep.iterations = iter;
    rep.subgradient_norm_est = own_norm;
    if (opts.record_trace) rep.trace.push_back({iter + iter_offset, phi, residual, own_norm, x});

    if (residual <= stop_residual) {
      out.reached_stop = true;
      rep.status = residual <= opts.tol_residual ? SolveStatus::converged
                                                 : SolveStatus::iteration_cap;
      return out;
    }
    if (x.norm() > opts.divergence_ball) {
      rep.status = SolveStatus::diverged;
      return out;
    }
    if (own_norm <= opts.stall_threshold) {
      rep.status = SolveStatus::stalled_at_nonzero_residual;
      return out;
    }
    if (iter >= max_iters) {
      rep.status = SolveStatus::iteration_cap;
      return out;
    }

    // Sampled subgradients from the radius-ball around x.
    for (Eigen::Index s = 0; s < 2 * n; ++s) {
      Vector dir(n);
      for (Eigen::Index k = 0; k < n; ++k) dir[k] = gauss(rng);
      const double scale = radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
      const double dn = dir.norm();
      if (!(dn > 0.0)) continue;
      try {
        for (Vector& g : phi_subgradient_set(map, Vector(x + dir * (scale / dn)), y, opts.kink_tol)) {
          generators.push_back(std::move(g));
        }
      } catch (const NumericError&) {
        // unevaluable sample point: drop it
      } catch (const PatternExplosionError&) {
      }
    }

    Vector d;
    try {
      d = min_norm_element(generators).element;
    } catch (const NumericError&) {
      radius *= 0.5;
      continue;
    }
    const double dnorm = d.norm();
    const double radius_floor = 1e-15 * std::max(1.0, x.norm());
    if (dnorm <= radius && radius > radius_floor) {
      radius *= 0.5;
      continue;
    }

    // Armijo backtracking along -d, from at most the Polyak step for a zero
    // optimal value (exact for one-dimensional linear pieces).
    bool accepted = false;
    double t = std::min(1.0, 2.0 * phi / (dnorm * dnorm));
    for (std::size_t b = 0; b <= opts.armijo.max_backtracks; ++b, t *= opts.armijo.backtrack) {
      const Vector trial = x - t * d;
      try {
        const double trial_phi = phi_of(trial);
        if (trial_phi <= phi - opts.armijo.c1 * t * dnorm * dnorm) {
          x = trial;
          accepted = true;
          break;
        }
      } catch (const NumericError&) {
      }
    }
    if (!accepted) {
      if (radius <= radius_floor) {
        rep.status = SolveStatus::iteration_cap;
        rep.note = "no descent progress at the minimum sampling radius";
        return out;
      }
      radius *= 0.5;
    }
  }
}

SolveReport solve_seeded(const MapDefinition& map, const Vector& y, const Vector& x0,
                         const SolveOptions& opts, std::uint64_t seed) {
  const double handoff = std::max(opts.tol_residual, opts.newton_switch_residual);
  Descent first = descend(map, y, x0, opts, handoff, opts.max_iters, seed, 0);
  SolveReport& rep = first.report;
  if (!first.reached_stop || rep.status == SolveStatus::converged) return rep;

  SolveReport polish = semismooth_newton_polish(map, y, rep.x_star, opts.newton_max_steps,
                                                opts.tol_residual, opts.kink_tol);
  const std::size_t used = rep.iterations + polish.iterations;
  if (polish.status == SolveStatus::converged) {
    polish.iterations = used;
    if (opts.record_trace) {
      std::vector<TraceRow> trace = std::move(rep.trace);
      for (TraceRow& row : polish.trace) {
        row.iter += rep.iterations;
        trace.push_back(std::move(row));
      }
      polish.trace = std::move(trace);
    } else {
      polish.trace.clear();
    }
    return polish;
  }

  // Newton gave up; resume descent from the better of the two points.
  const Vector resume = polish.residual < rep.residual ? polish.x_star : rep.x_star;
  const std::size_t remaining = opts.max_iters > used ? opts.max_iters - used : 0;
  Descent second = descend(map, y, resume, opts, opts.tol_residual, remaining,
                           mix_seed(seed, 1), used);
  SolveReport& fin = second.report;
  fin.iterations += used;
  if (opts.record_trace) {
    std::vector<TraceRow> trace = std::move(rep.trace);
    for (TraceRow& row : fin.trace) trace.push_back(std::move(row));
    fin.trace = std::move(trace);
  }
  if (fin.note.empty()) fin.note = polish.note;
  return fin;
}

}  // namespace

SolveReport minimize_phi(const MapDefinition& map, const Vector& y,
                         const SolveOptions& options) {
  check_square(map, y);
  options.validate(map.n_in());
  Vector x0 = options.x0 ? *options.x0 : start_points(options, map.n_in()).at(0);
  return descend(map, y, x0, options, options.tol_residual, options.max_iters,
                 options.multi_start.seed, 0)
      .report;
}

SolveReport semismooth_newton_polish(const MapDefinition& map, const Vector& y,
                                     const Vector& x0, std::size_t max_steps, double tol,
                                     double kink_tol) {
  check_square(map, y);
  if (static_cast<std::size_t>(x0.size()) != map.n_in()) {
    throw ValidationError("dimension mismatch: start point has " + std::to_string(x0.size()) +
                          " entries");
  }
  SolveReport rep;
  Vector x = x0;
  double previous = std::numeric_limits<double>::infinity();
  int increases = 0;

  auto finish = [&](SolveStatus status, const GeneralizedJacobian& gj, std::string note) {
    rep.status = status;
    rep.note = std::move(note);
    rep.subgradient_norm_est = min_norm_at(gj, y);
    return rep;
  };

  for (std::size_t step = 0;; ++step) {
    const GeneralizedJacobian gj = limiting_jacobians(map, x, kink_tol);
    const Vector r = gj.value - y;
    const double residual = r.norm();
    rep.x_star = x;
    rep.residual = residual;
    rep.phi_value = 0.5 * residual * residual;
    rep.iterations = step;
    rep.trace.push_back({step, rep.phi_value, residual, min_norm_at(gj, y), x});

    if (residual <= tol) return finish(SolveStatus::converged, gj, "");
    if (step > 0) {
      increases = residual > previous ? increases + 1 : 0;
      if (increases >= 2) return finish(SolveStatus::stalled_at_nonzero_residual, gj,
                                        "newton: residual increased twice");
    }
    if (step >= max_steps) return finish(SolveStatus::iteration_cap, gj, "newton: step cap");

    const Matrix* chosen = nullptr;
    for (const Matrix& j : gj.elements) {
      if (smallest_singular_value(j) > 1e-12) {
        chosen = &j;
        break;
      }
    }
    if (!chosen) {
      return finish(SolveStatus::stalled_at_nonzero_residual, gj,
                    "newton: singular_element_found, every limiting Jacobian is singular");
    }
    const Vector next = x - chosen->fullPivLu().solve(r);
    if (!next.allFinite()) {
      return finish(SolveStatus::stalled_at_nonzero_residual, gj, "newton: non-finite step");
    }
    try {
      (void)eval(map, next);
    } catch (const NumericError& e) {
      return finish(SolveStatus::stalled_at_nonzero_residual, gj,
                    std::string("newton: ") + e.what());
    }
    previous = residual;
    x = next;
  }
}

SolveReport solve_from(const MapDefinition& map, const Vector& y, const Vector& x0,
                       const SolveOptions& options) {
  check_square(map, y);
  options.validate(map.n_in());
  if (static_cast<std::size_t>(x0.size()) != map.n_in()) {
    throw ValidationError("dimension mismatch: start point has " + std::to_string(x0.size()) +
                          " entries");
  }
  return solve_seeded(map, y, x0, options, options.multi_start.seed);
}

std::vector<SolveReport> invert_all(const MapDefinition& map, const Vector& y,
                                    const SolveOptions& options) {
  check_square(map, y);
  options.validate(map.n_in());
  const auto starts = start_points(options, map.n_in());
  if (starts.empty()) throw ValidationError("inversion needs at least one start point");
  std::vector<SolveReport> reports;
  reports.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    reports.push_back(
        solve_seeded(map, y, starts[i], options, mix_seed(options.multi_start.seed, i)));
  }
  return reports;
}

bool better_report(const SolveReport& a, const SolveReport& b) {
  if (a.residual != b.residual) return a.residual < b.residual;
  if (a.iterations != b.iterations) return a.iterations < b.iterations;
  return std::lexicographical_compare(a.x_star.begin(), a.x_star.end(), b.x_star.begin(),
                                      b.x_star.end());
}

SolveReport invert(const MapDefinition& map, const Vector& y, const SolveOptions& options) {
  auto reports = invert_all(map, y, options);
  auto best = std::min_element(reports.begin(), reports.end(), better_report);
  return std::move(*best);
}

}  // namespace lipinv
