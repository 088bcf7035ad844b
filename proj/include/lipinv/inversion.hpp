#pragma once

#include "lipinv/clarke.hpp"
#include "lipinv/map_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lipinv {

struct ArmijoOptions {
  double c1 = 1e-4;
  double backtrack = 0.5;
  std::size_t max_backtracks = 50;
};

/// Seeded uniform starts in the box [lo, hi]; an empty box means [-10, 10]^n.
struct MultiStart {
  std::size_t count = 8;
  Vector lo;
  Vector hi;
  std::uint64_t seed = 0;
};

struct SolveOptions {
  std::optional<Vector> x0;
  MultiStart multi_start;
  double tol_residual = 1e-8;
  std::size_t max_iters = 10000;
  double sampling_radius = 1e-2;
  ArmijoOptions armijo;
  double newton_switch_residual = 1e-2;
  std::size_t newton_max_steps = 50;
  /// A min-norm subgradient at or below this marks a critical point.
  double stall_threshold = 1e-9;
  /// Iterates leaving this ball end the run as diverged.
  double divergence_ball = 1e6;
  double kink_tol = kDefaultKinkTolerance;
  bool record_trace = false;

  void validate(std::size_t n) const;
};

enum class SolveStatus {
  converged,
  stalled_at_nonzero_residual,
  diverged,
  iteration_cap,
};

std::string_view to_string(SolveStatus status);

struct TraceRow {
  std::size_t iter = 0;
  double phi = 0.0;
  double residual = 0.0;
  double subgrad_norm = 0.0;
  Vector x;
};

struct SolveReport {
  SolveStatus status = SolveStatus::iteration_cap;
  Vector x_star;
  double residual = 0.0;
  double phi_value = 0.0;
  std::size_t iterations = 0;
  double subgradient_norm_est = 0.0;
  std::vector<TraceRow> trace;
  /// Free-form context, e.g. why a Newton polish gave up.
  std::string note;
};

/// Start points used by `invert`: x0 (when given) followed by the seeded
/// multi-start box samples.
std::vector<Vector> start_points(const SolveOptions& options, std::size_t n);

/// Gradient-sampling descent on phi(x) = 0.5 |f(x) - y|^2 from opts.x0 (or
/// the first multi-start point).
SolveReport minimize_phi(const MapDefinition& map, const Vector& y,
                         const SolveOptions& options);

/// Newton iteration x <- x - J^-1 (f(x) - y) with J the first nonsingular
/// limiting Jacobian at x.
SolveReport semismooth_newton_polish(const MapDefinition& map, const Vector& y,
                                     const Vector& x0, std::size_t max_steps = 50,
                                     double tol = 1e-12,
                                     double kink_tol = kDefaultKinkTolerance);

/// Descent followed by Newton polish from a single start.
SolveReport solve_from(const MapDefinition& map, const Vector& y,
                       const Vector& x0, const SolveOptions& options);

/// One report per start point, in start order.
std::vector<SolveReport> invert_all(const MapDefinition& map, const Vector& y,
                                    const SolveOptions& options);

/// Lowest residual, then fewest iterations, then lexicographically smallest x*.
bool better_report(const SolveReport& a, const SolveReport& b);

SolveReport invert(const MapDefinition& map, const Vector& y,
                   const SolveOptions& options);

}  // namespace lipinv
