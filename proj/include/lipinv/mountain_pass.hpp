#pragma once

#include "lipinv/clarke.hpp"
#include "lipinv/inversion.hpp"
#include "lipinv/map_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace lipinv {

/// g(x) = f(x + x2) - a, materialized as its own expression DAG so every
/// evaluation and Clarke routine applies unchanged. The nonsmooth nodes of
/// `map` correspond one-to-one, in order, with those of `base`.
struct ShiftedMap {
  MapDefinition base;
  Vector x2;
  Vector a;
  MapDefinition map;
};

ShiftedMap shift_map(const MapDefinition& map, const Vector& x2, const Vector& a);

/// psi(x) = 0.5 |g(x)|^2.
double psi(const ShiftedMap& shifted, const Vector& x);

/// Estimated inf of psi over the sphere |x| = rho: seeded uniform sampling,
/// then projected descent on the sphere from the best samples.
double ring_infimum(const ShiftedMap& shifted, double rho, std::size_t n_samples,
                    std::uint64_t seed, std::size_t refine_iters = 50);

/// Discretized path joining two fixed endpoints.
struct PathPolyline {
  std::vector<Vector> nodes;

  /// Redistributes interior nodes to equal arc length along the current
  /// polyline; endpoints never move.
  void reparametrize();
  /// Largest relative deviation of a node gap from the mean gap.
  double gap_spread() const;
};

enum class MPClassification {
  second_preimage_found,
  singular_saddle,
  ps_failure_suspected,
  ring_condition_failed,
  iteration_cap,
};

std::string_view to_string(MPClassification c);

struct MountainPassOptions {
  std::size_t nodes = 33;
  std::size_t max_outer = 2000;
  double step = 0.1;
  /// Convergence: min-norm psi subgradient at the highest node.
  double tol = 1e-6;
  std::optional<double> rho;  // ring radius; |e| / 4 when unset
  std::size_t ring_samples = 256;
  std::size_t ring_refine_iters = 50;
  double ring_tol = 1e-10;
  double divergence_ball = 1e6;
  std::size_t plateau_window = 50;
  /// Iteration cap of the climbing-image refinement of the top node.
  std::size_t climb_iters = 5000;
  double plateau_tol = 1e-3;  // relative level change over the window
  double preimage_tol = 1e-6;
  double separation = 1e-4;  // distinctness from the endpoints
  std::uint64_t seed = 0;
  bool record_history = false;
  SolveOptions polish;
  RankOptions rank;
};

struct PathHistoryRow {
  std::size_t outer_iter = 0;
  std::size_t node_index = 0;
  double psi = 0.0;
  Vector x;
};

struct MPReport {
  MPClassification classification = MPClassification::iteration_cap;
  /// psi at the climbed saddle when the search converged; otherwise the best
  /// (lowest) max-node psi over all outer iterations.
  double level_c = 0.0;
  /// The climbed saddle, or the highest node of the final path, in shifted
  /// coordinates.
  Vector v;
  /// v + x2, the candidate critical point of the original map.
  Vector critical_point;
  double ring_infimum = 0.0;
  double endpoint_max = 0.0;
  double rho = 0.0;
  bool ring_certified = false;
  std::size_t outer_iterations = 0;
  double max_node_subgradient = 0.0;
  /// Running best max-node level after each outer iteration; nonincreasing.
  std::vector<double> level_history;
  std::optional<Vector> recovered_preimage;  // in original coordinates
  std::optional<RankCertificate> saddle_certificate;
  bool separated_from_endpoints = false;
  std::vector<PathHistoryRow> history;
};

/// String-method minimax search for a critical point of psi between 0 and e.
MPReport mountain_pass_search(const ShiftedMap& shifted, const Vector& e,
                              const MountainPassOptions& options = {});

struct InjectivityOptions {
  std::size_t starts = 32;
  std::size_t max_preimages = 8;
  double dedup_tol = 1e-6;
  SolveOptions solve;
  MountainPassOptions mountain_pass;
};

enum class InjectivityOutcome {
  counterexample_search_run,
  no_counterexample_found,
  surjectivity_failure,
};

std::string_view to_string(InjectivityOutcome outcome);

struct InjectivityReport {
  InjectivityOutcome outcome = InjectivityOutcome::surjectivity_failure;
  std::vector<Vector> preimages;  // lexicographically sorted
  std::size_t starts_used = 0;
  std::optional<MPReport> mountain_pass;
  std::optional<SolveReport> best_attempt;  // set on surjectivity failure
};

/// Multi-start search for distinct preimages of `a`; runs the mountain-pass
/// search between the first two when at least two are found.
InjectivityReport injectivity_probe(const MapDefinition& map, const Vector& a,
                                    const InjectivityOptions& options = {});

}  // namespace lipinv
