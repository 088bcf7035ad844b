#pragma once

#include "lipinv/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace lipinv {

struct MinNormOptions {
  std::size_t max_iters = 500;
  double tol = 1e-10;
};

struct MinNormResult {
  Vector element;
  std::vector<double> weights;  // convex weights over the generators
  std::size_t iterations = 0;
  bool converged = false;
};

/// Euclidean projection onto the probability simplex.
void project_to_simplex(std::span<double> v);

/// Minimum-norm point of conv(generators), by projected gradient on the
/// simplex of convex weights, started from the shortest generator.
MinNormResult min_norm_element(std::span<const Vector> generators,
                               const MinNormOptions& options = {});

}  // namespace lipinv
