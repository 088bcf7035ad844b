#include "oracles.hpp"

#include "lipinv/parser.hpp"
#include "lipinv/ps_probe.hpp"
#include "lipinv/zoo.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace lipinv;
using oracle::vec;

namespace {

// |f(r d)| for the paper map, branch by branch: each coordinate scales by 1 or 3.
double paper_growth(const Vector& d, double r) {
  const double u = d[0] > 0 ? d[0] : 3 * d[0];
  const double v = d[1] > 0 ? -d[1] : -3 * d[1];
  return r * std::hypot(u, v);
}

}  // namespace

TEST_CASE("direction sampling") {
  CHECK(default_direction_count(1) == 64);
  CHECK(default_direction_count(3) == 64);
  CHECK(default_direction_count(4) == 128);
  const auto a = sample_directions(3, 20, 5);
  const auto b = sample_directions(3, 20, 5);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].size() == 3);
    CHECK(std::fabs(a[i].norm() - 1.0) < 1e-12);
    CHECK(a[i] == b[i]);
  }
  CHECK(sample_directions(3, 20, 6)[0] != a[0]);
}

TEST_CASE("paper map is coercive") {
  const MapDefinition m = zoo_map("paper");
  const CoercivityReport rep = coercivity_scan(m, CoercivityOptions{.seed = 3});
  CHECK(rep.verdict == CoercivityVerdict::coercive_evidence);
  CHECK(rep.directions.size() == 64);
  CHECK(rep.skipped.empty());
  CHECK_FALSE(rep.witness_direction.has_value());
  // |f(x)| >= |x| on every branch, and f(0) = 0.
  const double rmax = rep.radii.back();
  CHECK(rep.min_growth >= rmax - eval(m, Vector::Zero(2)).norm() - 1e-9);
  double expected = INFINITY;
  for (const Vector& d : rep.directions) expected = std::min(expected, paper_growth(d, rmax));
  CHECK(rep.min_growth == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rep.monotone_fraction == doctest::Approx(1.0));
}

TEST_CASE("identity grows exactly with the radius") {
  const MapDefinition m = zoo_map("identity2");
  const CoercivityReport rep = coercivity_scan(m, CoercivityOptions{.n_directions = 16});
  CHECK(rep.directions.size() == 16);
  CHECK(rep.min_growth == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(rep.verdict == CoercivityVerdict::coercive_evidence);
}

TEST_CASE("exponential map has a bounded ray") {
  const MapDefinition m = zoo_map("expmap");
  const CoercivityReport rep = coercivity_scan(m, CoercivityOptions{.seed = 1});
  CHECK(rep.verdict == CoercivityVerdict::non_coercive_witness);
  REQUIRE(rep.witness_direction.has_value());
  CHECK((*rep.witness_direction)[0] < 0);
  // Along a ray with d_x < 0 the image norm is exp(r d_x) <= 1.
  CHECK(rep.witness_bound <= 1.0);
  // Rays with large positive d_x overflow at r = 1000 and are reported, not hidden.
  CHECK_FALSE(rep.skipped.empty());
  CHECK(rep.directions.size() + rep.skipped.size() == 64);
  for (const auto& s : rep.skipped) {
    CHECK(s.direction[0] > 0);
    CHECK_FALSE(s.reason.empty());
  }

  const CoercivityReport axis = coercivity_scan(m, {vec({-2, 0})}, {1, 10, 100});
  REQUIRE(axis.witness_direction.has_value());
  CHECK(axis.witness_bound == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("scan is invariant under permuting directions") {
  const MapDefinition m = zoo_map("paper");
  auto dirs = sample_directions(2, 30, 11);
  const CoercivityReport a = coercivity_scan(m, dirs, {1, 10, 100});
  std::reverse(dirs.begin(), dirs.end());
  const CoercivityReport b = coercivity_scan(m, dirs, {1, 10, 100});
  CHECK(a.min_growth == b.min_growth);
  CHECK(a.monotone_fraction == b.monotone_fraction);
  CHECK(a.verdict == b.verdict);

  const MapDefinition e = zoo_map("expmap");
  auto edirs = sample_directions(2, 30, 12);
  const CoercivityReport c = coercivity_scan(e, edirs, {1, 10, 100});
  std::rotate(edirs.begin(), edirs.begin() + 7, edirs.end());
  const CoercivityReport d = coercivity_scan(e, edirs, {1, 10, 100});
  REQUIRE(c.witness_direction.has_value());
  REQUIRE(d.witness_direction.has_value());
  CHECK(*c.witness_direction == *d.witness_direction);
  CHECK(c.witness_bound == d.witness_bound);
}

TEST_CASE("radii are validated") {
  const MapDefinition m = zoo_map("paper");
  const auto dirs = sample_directions(2, 4, 0);
  CHECK_THROWS_AS(coercivity_scan(m, dirs, {1, 10}), ValidationError);
  CHECK_THROWS_AS(coercivity_scan(m, dirs, {1, 10, 10}), ValidationError);
  CHECK_THROWS_AS(coercivity_scan(m, dirs, {-1, 10, 100}), ValidationError);
  CHECK_THROWS_AS(coercivity_scan(m, dirs, {100, 10, 1}), ValidationError);
  CHECK_NOTHROW(coercivity_scan(m, dirs, {0.5, 2, 3}));
}

TEST_CASE("far starts") {
  PSProbeOptions o;
  o.n_starts = 5;
  o.start_radius = 50;
  const auto s = far_starts(3, o);
  REQUIRE(s.size() == 5);
  for (const Vector& x : s) CHECK(x.norm() == doctest::Approx(50.0));
  CHECK(far_starts(3, o)[2] == s[2]);
}

TEST_CASE("PS probe on well-behaved maps") {
  PSProbeOptions o;
  o.n_starts = 4;
  for (const char* name : {"paper", "identity2"}) {
    const PSTrace t = ps_sequence_probe(zoo_map(name), vec({1, -1}), o);
    CHECK(t.verdict == PSVerdict::convergent_subsequence_evidence);
    REQUIRE(t.runs.size() == 4);
    for (const PSRun& r : t.runs) {
      CHECK(r.clustered);
      CHECK_FALSE(r.escaped);
      CHECK(r.bounded);
      CHECK(r.norms.size() == r.phi.size());
      CHECK(r.norms.size() == r.subgradient.size());
      CHECK(r.stages >= 1);
    }
  }
}

TEST_CASE("PS probe on the exponential map") {
  PSProbeOptions o;
  o.n_starts = 4;
  o.seed = 7;
  const PSTrace t = ps_sequence_probe(zoo_map("expmap"), vec({0, 0}), o);
  CHECK(t.verdict == PSVerdict::ps_failure_suspected);
  bool any = false;
  for (const PSRun& r : t.runs) {
    if (!r.escaped) continue;
    any = true;
    CHECK(r.bounded);
    CHECK(r.norms.back() > o.divergence_ball);
    CHECK(r.subgradient.back() <= o.subgradient_threshold);
    // phi stays bounded by the value at the first stage's endpoint.
    CHECK(r.phi.back() <= r.phi.front());
  }
  CHECK(any);

  // An explicit start on the negative axis escapes by escalation.
  const PSTrace one = ps_sequence_probe(zoo_map("expmap"), vec({0, 0}), {vec({-100, 0})}, o);
  REQUIRE(one.runs.size() == 1);
  CHECK(one.runs[0].escaped);
  CHECK(one.runs[0].stages > 1);
  CHECK(one.runs[0].start == vec({-100, 0}));
}

TEST_CASE("PS probe is deterministic") {
  PSProbeOptions o;
  o.n_starts = 3;
  o.seed = 4;
  const PSTrace a = ps_sequence_probe(zoo_map("complexsq"), vec({0, 1}), o);
  const PSTrace b = ps_sequence_probe(zoo_map("complexsq"), vec({0, 1}), o);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].norms == b.runs[i].norms);
    CHECK(a.runs[i].start == b.runs[i].start);
  }
  CHECK(a.verdict == b.verdict);
}
