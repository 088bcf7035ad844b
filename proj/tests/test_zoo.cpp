#include "oracles.hpp"

#include "lipinv/clarke.hpp"
#include "lipinv/mountain_pass.hpp"
#include "lipinv/parser.hpp"
#include "lipinv/ps_probe.hpp"
#include "lipinv/zoo.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

using namespace lipinv;
using oracle::vec;

TEST_CASE("every entry parses under its own name") {
  std::set<std::string> names;
  for (const MapZooEntry& e : map_zoo()) {
    CAPTURE(e.name);
    CHECK(names.insert(e.name).second);
    const MapDefinition m = parse_map(e.dsl);
    CHECK(m.name() == e.name);
    CHECK(m.n_in() == 2);
    CHECK(m.n_out() == 2);
    CHECK_FALSE(e.provenance.empty());
    CHECK(find_zoo_entry(e.name) == &e);
  }
  CHECK(names.size() == 5);
  CHECK(find_zoo_entry("nope") == nullptr);
  CHECK_THROWS_AS(zoo_map("nope"), ValidationError);
}

TEST_CASE("load_map accepts built-ins and files") {
  const MapDefinition a = load_map("zoo:paper");
  CHECK(a.name() == "paper");
  CHECK_THROWS_AS(load_map("zoo:missing"), ValidationError);
  CHECK_THROWS_AS(load_map("/nonexistent/dir/map.txt"), ValidationError);

  const std::string path = "lipinv_test_zoo_map.txt";
  {
    std::ofstream f(path);
    f << "g(x, y) = (x + y, x - y)\n";
  }
  const MapDefinition g = load_map(path);
  std::remove(path.c_str());
  CHECK(g.name() == "g");
  CHECK(eval(g, vec({1, 2})) == vec({3, -1}));
}

TEST_CASE("analytic inverses round trip") {
  for (const MapZooEntry& e : map_zoo()) {
    if (!e.facts.analytic_inverse) continue;
    CAPTURE(e.name);
    const MapDefinition m = parse_map(e.dsl);
    for (const Vector& y : oracle::smooth_points(m, 50, 9, -5, 5)) {
      const Vector x = e.facts.analytic_inverse(y);
      CHECK((eval(m, x) - y).norm() <= 1e-12 * (1 + y.norm()));
    }
  }
  // Independent branch-wise oracle for the paper map.
  const auto& inv = find_zoo_entry("paper")->facts.analytic_inverse;
  CHECK((inv(vec({-3, 4})) - oracle::paper_preimage(-3, 4)).norm() < 1e-15);
}

TEST_CASE("listed singular points certify singular") {
  for (const MapZooEntry& e : map_zoo()) {
    CAPTURE(e.name);
    const MapDefinition m = parse_map(e.dsl);
    for (const Vector& p : e.facts.singular_points) {
      const RankCertificate c = certify_point(m, p);
      CHECK(c.status == RankStatus::singular_element_found);
      CHECK(c.min_singular_value <= 1e-8);
      CHECK(oracle::sigma_min(oracle::central_fd_jacobian(m, p, 1e-6)) < 1e-5);
    }
  }
}

TEST_CASE("collisions share an image") {
  for (const MapZooEntry& e : map_zoo()) {
    CAPTURE(e.name);
    if (!e.facts.collision) {
      CHECK(e.facts.injective);
      continue;
    }
    CHECK_FALSE(e.facts.injective);
    const auto& [p, q] = *e.facts.collision;
    const MapDefinition m = parse_map(e.dsl);
    CHECK((p - q).norm() > 1e-3);
    CHECK((eval(m, p) - eval(m, q)).norm() < 1e-12);
  }
}

TEST_CASE("coercive flags agree with the scan") {
  for (const MapZooEntry& e : map_zoo()) {
    CAPTURE(e.name);
    const CoercivityReport r = coercivity_scan(parse_map(e.dsl), CoercivityOptions{.seed = 2});
    CHECK((r.verdict == CoercivityVerdict::coercive_evidence) == e.facts.coercive);
  }
}

TEST_CASE("injective entries show no counterexample") {
  InjectivityOptions o;
  o.starts = 16;
  for (const MapZooEntry& e : map_zoo()) {
    if (!e.facts.injective) continue;
    CAPTURE(e.name);
    const InjectivityReport r = injectivity_probe(parse_map(e.dsl), vec({0.7, -1.3}), o);
    CHECK(r.outcome == InjectivityOutcome::no_counterexample_found);
    CHECK(r.preimages.size() == 1);
  }
}
