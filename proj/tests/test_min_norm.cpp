#include "oracles.hpp"

#include "lipinv/min_norm.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace lipinv;
using oracle::vec;

TEST_CASE("simplex projection") {
  std::vector<double> v{0.2, 0.3, 0.5};
  project_to_simplex(v);
  CHECK(v == std::vector<double>{0.2, 0.3, 0.5});

  std::vector<double> w{3.0, 0.0, -1.0};
  project_to_simplex(w);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == 0.0);
  CHECK(w[2] == 0.0);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(5);
    for (double& c : x) c = 3 * g(rng);
    project_to_simplex(x);
    CHECK(std::accumulate(x.begin(), x.end(), 0.0) == doctest::Approx(1.0));
    for (double c : x) CHECK(c >= 0.0);
  }
}

TEST_CASE("min-norm element of simple hulls") {
  const std::vector<Vector> seg{vec({1, 1}), vec({1, -1})};
  const MinNormResult r = min_norm_element(seg);
  CHECK((r.element - vec({1, 0})).norm() < 1e-9);
  CHECK(r.weights[0] == doctest::Approx(0.5));

  // Origin inside the hull.
  const std::vector<Vector> tri{vec({1, 0}), vec({-1, 1}), vec({-1, -1})};
  CHECK(min_norm_element(tri).element.norm() < 1e-6);

  const std::vector<Vector> single{vec({3, 4})};
  CHECK(min_norm_element(single).element == vec({3, 4}));
  CHECK_THROWS(min_norm_element(std::vector<Vector>{}));
}

TEST_CASE("min-norm element against a brute-force simplex scan") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vector> gens;
    for (int k = 0; k < 3; ++k) gens.push_back(vec({g(rng) + 1.5, g(rng)}));
    const MinNormResult r = min_norm_element(gens);
    double brute = INFINITY;
    const int n = 300;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; i + j <= n; ++j) {
        const double a = double(i) / n, b = double(j) / n;
        brute = std::min(brute, (a * gens[0] + b * gens[1] + (1 - a - b) * gens[2]).norm());
      }
    }
    CHECK(r.element.norm() <= brute + 1e-9);
    // Never worse than the shortest generator.
    double shortest = INFINITY;
    for (const Vector& v : gens) shortest = std::min(shortest, v.norm());
    CHECK(r.element.norm() <= shortest);
    CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(1.0));
  }
}
