#include "oracles.hpp"

#include "lipinv/inversion.hpp"
#include "lipinv/parser.hpp"
#include "lipinv/zoo.hpp"

#include <doctest.h>

using namespace lipinv;
using oracle::vec;

namespace {

SolveOptions from(const Vector& x0) {
  SolveOptions o;
  o.x0 = x0;
  return o;
}

}  // namespace

TEST_CASE("options are validated") {
  SolveOptions o;
  o.tol_residual = 0;
  CHECK_THROWS_AS(o.validate(2), ValidationError);
  o = SolveOptions{};
  o.armijo.c1 = 1.5;
  CHECK_THROWS_AS(o.validate(2), ValidationError);
  o = SolveOptions{};
  o.armijo.backtrack = 1.0;
  CHECK_THROWS_AS(o.validate(2), ValidationError);
  o = SolveOptions{};
  o.x0 = vec({1});
  CHECK_THROWS_AS(o.validate(2), ValidationError);
  CHECK_THROWS_AS(invert(parse_map("f(x, y) = (x)"), vec({0}), SolveOptions{}), ValidationError);
}

TEST_CASE("descent on the paper map") {
  const MapDefinition m = zoo_map("paper");
  SolveOptions o = from(vec({5, 5}));
  o.record_trace = true;
  const SolveReport r = minimize_phi(m, vec({1, -1}), o);
  CHECK(r.status == SolveStatus::converged);
  CHECK(r.residual <= 1e-8);
  CHECK((r.x_star - vec({1, 1})).norm() < 1e-7);
  // Monotone descent.
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].phi <= r.trace[i - 1].phi);
  CHECK(r.trace.front().x == vec({5, 5}));
}

TEST_CASE("a start at a preimage converges immediately") {
  for (const MapZooEntry& e : map_zoo()) {
    const MapDefinition m = parse_map(e.dsl);
    const Vector x0 = vec({0.7, -0.4});
    const SolveReport r = minimize_phi(m, eval(m, x0), from(x0));
    CHECK(r.status == SolveStatus::converged);
    CHECK(r.iterations == 0);
    CHECK(r.x_star == x0);
  }
}

TEST_CASE("the origin is a critical point of complex squaring") {
  const SolveReport r = minimize_phi(zoo_map("complexsq"), vec({1, 0}), from(vec({0, 0})));
  CHECK(r.status == SolveStatus::stalled_at_nonzero_residual);
  CHECK(r.phi_value == doctest::Approx(0.5));
  CHECK(r.subgradient_norm_est <= SolveOptions{}.stall_threshold);
}

TEST_CASE("semismooth Newton") {
  const MapDefinition m = zoo_map("paper");
  const SolveReport a = semismooth_newton_polish(m, vec({-3, 3}), vec({-0.9, -1.2}));
  CHECK(a.status == SolveStatus::converged);
  CHECK(a.residual <= 1e-12);
  CHECK(a.iterations <= 3);
  CHECK((a.x_star - vec({-1, -1})).norm() < 1e-12);

  // Correct region: exactly one step on a piecewise-linear map.
  const SolveReport one = semismooth_newton_polish(m, vec({2, -2}), vec({0.5, 0.5}));
  CHECK(one.iterations == 1);
  CHECK(one.residual == 0.0);

  const SolveReport wrong = semismooth_newton_polish(m, vec({1, -1}), vec({-2, 3}));
  CHECK(wrong.status == SolveStatus::converged);
  CHECK(wrong.iterations <= 4);
  CHECK((wrong.x_star - vec({1, 1})).norm() < 1e-12);

  const MapDefinition id = zoo_map("identity2");
  const SolveReport idr = semismooth_newton_polish(id, vec({4, -7}), vec({100, 3}));
  CHECK(idr.iterations == 1);
  CHECK(idr.x_star == vec({4, -7}));
}

TEST_CASE("Newton on an everywhere singular Jacobian gives up") {
  const SolveReport r = semismooth_newton_polish(zoo_map("complexsq"), vec({1, 0}), vec({0, 0}));
  CHECK(r.status != SolveStatus::converged);
  CHECK_FALSE(r.note.empty());
}

TEST_CASE("invert on the paper map") {
  const MapDefinition m = zoo_map("paper");
  const SolveReport zero = invert(m, vec({0, 0}), SolveOptions{});
  CHECK(zero.status == SolveStatus::converged);
  CHECK(zero.x_star.norm() < 1e-9);

  const SolveReport r = invert(m, vec({2.4, -0.6}), SolveOptions{});
  CHECK(r.status == SolveStatus::converged);
  CHECK((r.x_star - vec({2.4, 0.6})).norm() < 1e-9);
  CHECK((r.x_star - oracle::paper_preimage(2.4, -0.6)).norm() < 1e-9);
}

TEST_CASE("invert on complex squaring finds a square root of unity") {
  SolveOptions o;
  o.multi_start.lo = vec({-2, -2});
  o.multi_start.hi = vec({2, 2});
  const SolveReport r = invert(zoo_map("complexsq"), vec({1, 0}), o);
  CHECK(r.status == SolveStatus::converged);
  CHECK(std::min((r.x_star - vec({1, 0})).norm(), (r.x_star + vec({1, 0})).norm()) < 1e-8);
  CHECK((eval(zoo_map("complexsq"), r.x_star) - vec({1, 0})).norm() <= 1e-8);
}

TEST_CASE("start points") {
  SolveOptions o;
  o.multi_start.count = 5;
  o.multi_start.seed = 3;
  const auto a = start_points(o, 2);
  CHECK(a.size() == 5);
  for (const Vector& p : a) CHECK(p.cwiseAbs().maxCoeff() <= 10.0);
  CHECK(start_points(o, 2) == a);
  o.x0 = vec({1, 2});
  const auto b = start_points(o, 2);
  CHECK(b.size() == 6);
  CHECK(b.front() == vec({1, 2}));
}

TEST_CASE("best report ordering") {
  SolveReport a, b;
  a.residual = 1e-9;
  b.residual = 1e-10;
  CHECK(better_report(b, a));
  b.residual = a.residual;
  a.iterations = 3;
  b.iterations = 5;
  CHECK(better_report(a, b));
  b.iterations = 3;
  a.x_star = vec({0, 1});
  b.x_star = vec({0, 2});
  CHECK(better_report(a, b));
  CHECK_FALSE(better_report(b, a));
}

TEST_CASE("reports are independent of evaluation order") {
  SolveOptions o;
  o.multi_start.seed = 11;
  const auto all = invert_all(zoo_map("complexsq"), vec({0, 1}), o);
  auto reversed = all;
  std::reverse(reversed.begin(), reversed.end());
  const auto best = *std::min_element(all.begin(), all.end(), better_report);
  const auto best_rev = *std::min_element(reversed.begin(), reversed.end(), better_report);
  CHECK(best.x_star == best_rev.x_star);
  CHECK(invert(zoo_map("complexsq"), vec({0, 1}), o).x_star == best.x_star);
}

TEST_CASE("status invariants across zoo maps and targets") {
  for (const MapZooEntry& e : map_zoo()) {
    const MapDefinition m = parse_map(e.dsl);
    for (const Vector& y : {vec({0, 0}), vec({1, -1}), vec({-3, 2})}) {
      SolveOptions o;
      o.max_iters = 300;
      for (const SolveReport& r : invert_all(m, y, o)) {
        if (r.status == SolveStatus::converged) {
          CHECK(r.residual <= o.tol_residual);
          CHECK((eval(m, r.x_star) - y).norm() <= o.tol_residual);
        }
        if (r.status == SolveStatus::stalled_at_nonzero_residual) {
          CHECK(r.residual > o.tol_residual);
          CHECK(r.subgradient_norm_est <= o.stall_threshold);
        }
      }
    }
  }
}

TEST_CASE("analytic inverses of the zoo agree with invert") {
  for (const MapZooEntry& e : map_zoo()) {
    if (!e.facts.analytic_inverse) continue;
    const MapDefinition m = parse_map(e.dsl);
    for (const Vector& y : {vec({0.5, 0.5}), vec({-4, 1}), vec({3, -2})}) {
      const SolveReport r = invert(m, y, SolveOptions{});
      CHECK(r.status == SolveStatus::converged);
      CHECK((r.x_star - e.facts.analytic_inverse(y)).norm() < 1e-7);
    }
  }
}
