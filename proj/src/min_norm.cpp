#include "lipinv/min_norm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace lipinv {

void project_to_simplex(std::span<double> v) {
  if (v.empty()) return;
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
}

MinNormResult min_norm_element(std::span<const Vector> generators,
                               const MinNormOptions& options) {
  if (generators.empty()) throw ValidationError("min-norm element of an empty set");
  const auto dim = generators[0].size();
  const std::size_t k = generators.size();
  Matrix g(dim, static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    if (generators[i].size() != dim) {
      throw ValidationError("min-norm generators have mismatched dimensions");
    }
    g.col(static_cast<Eigen::Index>(i)) = generators[i];
  }
  if (!g.allFinite()) throw NumericError("non-finite subgradient in min-norm problem");

  const Matrix gram = g.transpose() * g;
  Eigen::Index best = 0;
  gram.diagonal().minCoeff(&best);

  MinNormResult result;
  Vector lambda = Vector::Zero(static_cast<Eigen::Index>(k));
  lambda[best] = 1.0;

  const double lipschitz =
      k > 1 ? 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly)
                        .eigenvalues()
                        .maxCoeff()
            : 0.0;
  if (lipschitz > 0.0) {
    const double step = 1.0 / lipschitz;
    Vector next(lambda.size());
    for (std::size_t it = 0; it < options.max_iters; ++it) {
      next = lambda - step * 2.0 * (gram * lambda);
      project_to_simplex(std::span<double>(next.data(), static_cast<std::size_t>(next.size())));
      const double change = (next - lambda).cwiseAbs().maxCoeff();
      lambda.swap(next);
      result.iterations = it + 1;
      if (change <= options.tol) {
        result.converged = true;
        break;
      }
    }
  } else {
    result.converged = true;
  }

  result.element = g * lambda;

  // Exact solve on the support the iteration settled on: minimize |G_S w|^2
  // subject to sum(w) = 1 through the KKT system; kept only if feasible and
  // no longer than the iterate.
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] > 1e-12) support.push_back(i);
  }
  if (support.size() > 1) {
    const auto s = static_cast<Eigen::Index>(support.size());
    Matrix kkt = Matrix::Zero(s + 1, s + 1);
    for (Eigen::Index a = 0; a < s; ++a) {
      for (Eigen::Index b = 0; b < s; ++b) kkt(a, b) = gram(support[a], support[b]);
      kkt(a, s) = kkt(s, a) = 1.0;
    }
    Vector rhs = Vector::Zero(s + 1);
    rhs[s] = 1.0;
    const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    Vector exact = Vector::Zero(lambda.size());
    bool feasible = sol.allFinite();
    for (Eigen::Index a = 0; a < s && feasible; ++a) {
      if (sol[a] < -1e-14) feasible = false;
      exact[support[a]] = std::max(0.0, sol[a]);
    }
    if (feasible && exact.sum() > 0.0) {
      exact /= exact.sum();
      const Vector candidate = g * exact;
      if (candidate.squaredNorm() <= result.element.squaredNorm()) {
        lambda = exact;
        result.element = candidate;
      }
    }
  }

  // The starting vertex is a feasible point too; never return something longer.
  if (generators[best].squaredNorm() < result.element.squaredNorm()) {
    lambda.setZero();
    lambda[best] = 1.0;
    result.element = generators[best];
  }
  if (!result.element.allFinite()) throw NumericError("min-norm QP produced a non-finite point");
  result.weights.assign(lambda.data(), lambda.data() + lambda.size());
  return result;
}

}  // namespace lipinv
