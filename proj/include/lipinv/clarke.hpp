#pragma once

#include "lipinv/map_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace lipinv {

inline constexpr double kJacobianDedupTolerance = 1e-12;

/// Finite generator set of the Clarke generalized Jacobian at `point`: one
/// limiting Jacobian per active sign pattern, deduplicated. The generalized
/// Jacobian itself is the (never materialized) convex hull of `elements`.
struct GeneralizedJacobian {
  Vector point;
  std::vector<Matrix> elements;
  std::vector<SignPattern> patterns;  // first pattern producing each element
  Vector value;                       // f(point)
  double tol_used = kDefaultKinkTolerance;
};

GeneralizedJacobian limiting_jacobians(const MapDefinition& map, const Vector& x,
                                       double tol = kDefaultKinkTolerance,
                                       std::size_t cap = kDefaultPatternCap);

struct DirDerivOptions {
  std::vector<double> radii{1e-2, 1e-3, 1e-4};
  std::vector<double> steps{1e-2, 1e-4, 1e-6};
  std::size_t samples_per_radius = 64;
  std::uint64_t seed = 0;
};

struct DirDerivEstimate {
  double value = 0.0;  // largest difference quotient seen
  std::size_t samples_used = 0;
  double spread = 0.0;  // value minus the mean of the top decile
};

/// Sampled lower estimate of the generalized directional derivative
/// f0(u; z) = limsup_{w -> u, t -> 0+} (f(w + t z) - f(w)) / t of a
/// scalar-valued map. The samples for radius i depend only on (seed, i, j),
/// so raising samples_per_radius only adds quotients.
DirDerivEstimate gen_dir_derivative(const MapDefinition& map, const Vector& u,
                                    const Vector& z,
                                    const DirDerivOptions& options = {});

/// {J^T (f(x) - y) : J a limiting Jacobian at x}; the subdifferential of
/// phi(x) = 0.5 |f(x) - y|^2 is taken as the convex hull of these vectors.
std::vector<Vector> phi_subgradient_set(const MapDefinition& map, const Vector& x,
                                        const Vector& y,
                                        double tol = kDefaultKinkTolerance);
std::vector<Vector> phi_subgradient_set(const GeneralizedJacobian& jacobian,
                                        const Vector& y);

enum class RankStatus {
  certified_maximal_rank,
  singular_element_found,
  hull_test_inconclusive,
};

std::string_view to_string(RankStatus status);

struct RankOptions {
  double sigma_min = 1e-8;
  std::size_t hull_probes = 256;
  std::uint64_t seed = 0;
};

struct RankCertificate {
  RankStatus status = RankStatus::hull_test_inconclusive;
  Vector point;
  std::size_t elements_count = 0;
  /// Smallest singular value over every element and hull probe examined.
  double min_singular_value = 0.0;
  std::optional<Matrix> witness;
  /// Convex weights over the elements when the witness is a hull probe.
  std::optional<std::vector<double>> witness_weights;
};

double smallest_singular_value(const Matrix& a);

/// Maximal-rank test for the hull of the limiting Jacobians: exact on every
/// element, a determinant-sign refutation on every pair, a fixed grid along
/// the hull edges, then randomized (Dirichlet-uniform weights) interior probes.
RankCertificate max_rank_certificate(const GeneralizedJacobian& jacobian,
                                     const RankOptions& options = {});

RankCertificate certify_point(const MapDefinition& map, const Vector& x,
                              const RankOptions& options = {},
                              double tol = kDefaultKinkTolerance);

}  // namespace lipinv
