#pragma once

#include "lipinv/inversion.hpp"
#include "lipinv/map_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lipinv {

enum class CoercivityVerdict { coercive_evidence, non_coercive_witness };

std::string_view to_string(CoercivityVerdict verdict);

struct CoercivityOptions {
  /// 0 selects the default: 64 directions for n <= 3, otherwise 32 n.
  std::size_t n_directions = 0;
  std::vector<double> radii{1.0, 10.0, 100.0, 1000.0};
  double growth_factor = 10.0;
  std::uint64_t seed = 0;
};

struct SkippedDirection {
  Vector direction;
  std::string reason;
};

struct CoercivityReport {
  std::vector<Vector> directions;  // evaluated directions
  std::vector<double> radii;
  /// min over directions of |f(r d)| at the largest radius.
  double min_growth = 0.0;
  double monotone_fraction = 0.0;
  CoercivityVerdict verdict = CoercivityVerdict::non_coercive_witness;
  std::optional<Vector> witness_direction;
  /// max over radii of |f(r d)| along the witness direction.
  double witness_bound = 0.0;
  std::vector<SkippedDirection> skipped;
};

std::size_t default_direction_count(std::size_t n);

/// Seeded unit directions, uniform on the sphere.
std::vector<Vector> sample_directions(std::size_t n, std::size_t count, std::uint64_t seed);

CoercivityReport coercivity_scan(const MapDefinition& map, const CoercivityOptions& options = {});
/// Scan over an explicit direction set (normalized internally).
CoercivityReport coercivity_scan(const MapDefinition& map, const std::vector<Vector>& directions,
                                 const std::vector<double>& radii, double growth_factor = 10.0);

enum class PSVerdict { convergent_subsequence_evidence, ps_failure_suspected, inconclusive };

std::string_view to_string(PSVerdict verdict);

struct PSProbeOptions {
  std::size_t n_starts = 8;
  double start_radius = 100.0;
  std::uint64_t seed = 0;
  std::size_t max_iters = 2000;
  double cluster_tol = 1e-4;
  std::size_t tail = 8;
  double divergence_ball = 1e6;
  /// Subgradient measure counted as vanished.
  double subgradient_threshold = 1e-6;
  /// A run that stops far out at a near-critical point restarts from
  /// escalation times its endpoint, at most max_stages times in total.
  double escalation = 10.0;
  std::size_t max_stages = 12;
  /// Remaining descent settings (tolerances, sampling, line search).
  SolveOptions solve;
};

struct PSRun {
  Vector start;
  SolveStatus status = SolveStatus::iteration_cap;  // of the last stage
  std::size_t stages = 0;
  /// Per iteration, concatenated over stages.
  std::vector<double> norms;
  std::vector<double> phi;
  std::vector<double> subgradient;
  bool bounded = true;
  bool clustered = false;
  bool escaped = false;  // bounded phi, vanishing subgradient, left the ball
};

struct PSTrace {
  std::vector<PSRun> runs;
  PSVerdict verdict = PSVerdict::inconclusive;
};

/// Seeded points on the sphere of radius start_radius.
std::vector<Vector> far_starts(std::size_t n, const PSProbeOptions& options);

PSTrace ps_sequence_probe(const MapDefinition& map, const Vector& y,
                          const std::vector<Vector>& starts, const PSProbeOptions& options = {});
PSTrace ps_sequence_probe(const MapDefinition& map, const Vector& y,
                          const PSProbeOptions& options = {});

}  // namespace lipinv
