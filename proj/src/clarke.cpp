#include "lipinv/clarke.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace lipinv {

GeneralizedJacobian limiting_jacobians(const MapDefinition& map, const Vector& x,
                                       double tol, std::size_t cap) {
  GeneralizedJacobian gj;
  gj.point = x;
  gj.tol_used = tol;
  EvalWorkspace ws;
  gj.value = Vector(static_cast<Eigen::Index>(map.n_out()));
  eval(map, x, ws, gj.value);
  for (const SignPattern& pattern : active_patterns(map, x, tol, cap)) {
    Matrix jac = eval_piece(map, x, pattern, ws).jacobian;
    const bool duplicate = std::any_of(
        gj.elements.begin(), gj.elements.end(), [&](const Matrix& e) {
          return (e - jac).cwiseAbs().maxCoeff() <= kJacobianDedupTolerance;
        });
    if (!duplicate) {
      gj.elements.push_back(std::move(jac));
      gj.patterns.push_back(pattern);
    }
  }
  return gj;
}

DirDerivEstimate gen_dir_derivative(const MapDefinition& map, const Vector& u,
                                    const Vector& z,
                                    const DirDerivOptions& options) {
  if (map.n_out() != 1) {
    throw ValidationError("generalized directional derivative needs a scalar map, got " +
                          std::to_string(map.n_out()) + " outputs");
  }
  if (static_cast<std::size_t>(u.size()) != map.n_in() || z.size() != u.size()) {
    throw ValidationError("dimension mismatch between map, point and direction");
  }
  if (!(z.norm() > 0.0)) throw ValidationError("direction must be nonzero");
  if (options.radii.empty() || options.steps.empty()) {
    throw ValidationError("radius and step schedules must be nonempty");
  }

  const auto n = u.size();
  EvalWorkspace ws;
  Vector fw(1), fwt(1);
  std::vector<double> quotients;
  quotients.reserve(options.radii.size() * options.samples_per_radius *
                    options.steps.size());

  for (std::size_t i = 0; i < options.radii.size(); ++i) {
    const double radius = options.radii[i];
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit;
    for (std::size_t j = 0; j < options.samples_per_radius; ++j) {
      Vector dir(n);
      for (Eigen::Index k = 0; k < n; ++k) dir[k] = gauss(rng);
      const double scale =
          radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
      const double dn = dir.norm();
      const Vector w = dn > 0.0 ? Vector(u + dir * (scale / dn)) : u;
      eval(map, w, ws, fw);
      for (double t : options.steps) {
        const Vector wt = w + t * z;
        // Divide by the step actually taken; the nominal t carries the
        // rounding of w + t z into the quotient.
        const double t_eff = (wt - w).dot(z) / z.squaredNorm();
        if (!(t_eff > 0.0)) continue;
        eval(map, wt, ws, fwt);
        const double q = (fwt[0] - fw[0]) / t_eff;
        if (!std::isfinite(q)) {
          throw NumericError("non-finite difference quotient at t=" +
                             std::to_string(t));
        }
        quotients.push_back(q);
      }
    }
  }

  DirDerivEstimate est;
  est.samples_used = quotients.size();
  if (quotients.empty()) return est;
  std::sort(quotients.begin(), quotients.end(), std::greater<>());
  est.value = quotients.front();
  const std::size_t top = std::max<std::size_t>(1, quotients.size() / 10);
  const double mean =
      std::accumulate(quotients.begin(), quotients.begin() + top, 0.0) /
      static_cast<double>(top);
  est.spread = est.value - mean;
  return est;
}

std::vector<Vector> phi_subgradient_set(const GeneralizedJacobian& jacobian,
                                        const Vector& y) {
  if (y.size() != jacobian.value.size()) {
    throw ValidationError("dimension mismatch: target has " +
                          std::to_string(y.size()) + " entries, map has " +
                          std::to_string(jacobian.value.size()) + " outputs");
  }
  const Vector residual = jacobian.value - y;
  std::vector<Vector> out;
  out.reserve(jacobian.elements.size());
  for (const Matrix& j : jacobian.elements) out.emplace_back(j.transpose() * residual);
  return out;
}

std::vector<Vector> phi_subgradient_set(const MapDefinition& map, const Vector& x,
                                        const Vector& y, double tol) {
  return phi_subgradient_set(limiting_jacobians(map, x, tol), y);
}

std::string_view to_string(RankStatus status) {
  switch (status) {
    case RankStatus::certified_maximal_rank: return "certified_maximal_rank";
    case RankStatus::singular_element_found: return "singular_element_found";
    case RankStatus::hull_test_inconclusive: return "hull_test_inconclusive";
  }
  return "?";
}

double smallest_singular_value(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().minCoeff();
}

RankCertificate max_rank_certificate(const GeneralizedJacobian& jacobian,
                                     const RankOptions& options) {
  if (jacobian.elements.empty()) {
    throw ValidationError("generalized Jacobian has no elements");
  }
  for (const Matrix& e : jacobian.elements) {
    if (e.rows() != e.cols()) {
      throw ValidationError("maximal-rank test needs square Jacobians, got " +
                            std::to_string(e.rows()) + "x" + std::to_string(e.cols()));
    }
  }
  RankCertificate cert;
  cert.point = jacobian.point;
  cert.elements_count = jacobian.elements.size();
  cert.min_singular_value = std::numeric_limits<double>::infinity();

  for (const Matrix& e : jacobian.elements) {
    const double s = smallest_singular_value(e);
    if (s < cert.min_singular_value) {
      cert.min_singular_value = s;
      if (s <= options.sigma_min) cert.witness = e;
    }
  }
  if (cert.witness) {
    cert.status = RankStatus::singular_element_found;
    return cert;
  }

  cert.status = RankStatus::certified_maximal_rank;
  const std::size_t k = jacobian.elements.size();
  auto near_threshold = [&](double s) { return s - options.sigma_min <= 10.0 * options.sigma_min; };
  for (const Matrix& e : jacobian.elements) {
    if (near_threshold(smallest_singular_value(e))) cert.status = RankStatus::hull_test_inconclusive;
  }
  if (k == 1) return cert;

  const auto& elems = jacobian.elements;
  auto segment = [&](std::size_t i, std::size_t j, double t) -> Matrix {
    return (1.0 - t) * elems[i] + t * elems[j];
  };
  auto pair_weights = [&](std::size_t i, std::size_t j, double t) {
    std::vector<double> w(k, 0.0);
    w[i] = 1.0 - t;
    w[j] = t;
    return w;
  };

  // Opposite determinant signs force a singular matrix on the segment
  // between the two elements; bisect to exhibit it.
  std::vector<double> dets;
  for (const Matrix& e : elems) dets.push_back(e.determinant());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (!((dets[i] < 0.0 && dets[j] > 0.0) || (dets[i] > 0.0 && dets[j] < 0.0))) continue;
      double lo = 0.0, hi = 1.0;
      const bool lo_negative = dets[i] < 0.0;
      for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ((segment(i, j, mid).determinant() < 0.0) == lo_negative ? lo : hi) = mid;
      }
      const double s_lo = smallest_singular_value(segment(i, j, lo));
      const double s_hi = smallest_singular_value(segment(i, j, hi));
      const double t = s_lo <= s_hi ? lo : hi;
      cert.status = RankStatus::singular_element_found;
      cert.min_singular_value = std::min({cert.min_singular_value, s_lo, s_hi});
      cert.witness = segment(i, j, t);
      cert.witness_weights = pair_weights(i, j, t);
      return cert;
    }
  }

  // Edges of the hull, on a fixed grid; skipped when there are too many.
  constexpr std::size_t kEdgeSamples = 32;
  constexpr std::size_t kMaxEdgeElements = 64;
  if (k <= kMaxEdgeElements) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        for (std::size_t q = 1; q < kEdgeSamples; ++q) {
          const double t = static_cast<double>(q) / static_cast<double>(kEdgeSamples);
          const Matrix m = segment(i, j, t);
          const double s = smallest_singular_value(m);
          cert.min_singular_value = std::min(cert.min_singular_value, s);
          if (s <= options.sigma_min) {
            cert.status = RankStatus::singular_element_found;
            cert.witness = m;
            cert.witness_weights = pair_weights(i, j, t);
            return cert;
          }
          if (near_threshold(s)) cert.status = RankStatus::hull_test_inconclusive;
        }
      }
    }
  }

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit;
  std::vector<double> weights(k);
  Matrix combo;
  for (std::size_t probe = 0; probe < options.hull_probes; ++probe) {
    double total = 0.0;
    for (double& w : weights) {
      w = -std::log1p(-unit(rng));  // Exp(1) draws; normalized below
      total += w;
    }
    combo.setZero(jacobian.elements[0].rows(), jacobian.elements[0].cols());
    for (std::size_t i = 0; i < k; ++i) {
      weights[i] /= total;
      combo += weights[i] * jacobian.elements[i];
    }
    const double s = smallest_singular_value(combo);
    if (s < cert.min_singular_value) cert.min_singular_value = s;
    if (s <= options.sigma_min) {
      cert.status = RankStatus::singular_element_found;
      cert.witness = combo;
      cert.witness_weights = weights;
      return cert;
    }
    if (near_threshold(s)) cert.status = RankStatus::hull_test_inconclusive;
  }
  return cert;
}

RankCertificate certify_point(const MapDefinition& map, const Vector& x,
                              const RankOptions& options, double tol) {
  return max_rank_certificate(limiting_jacobians(map, x, tol), options);
}

}  // namespace lipinv
