#include "lipinv/zoo.hpp"

#include "lipinv/parser.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

namespace lipinv {
namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Branch-wise inverse of (2x - |x|, |y| - 2y).
Vector paper_inverse(const Vector& y) {
  const double u = y[0];
  const double v = y[1];
  return vec2(u >= 0.0 ? u : u / 3.0, v <= 0.0 ? -v : -v / 3.0);
}

std::vector<MapZooEntry> build_zoo() {
  std::vector<MapZooEntry> zoo;

  MapZooEntry paper{"paper", "paper(x, y) = (2*x - abs(x), abs(y) - 2*y)",
                    "piecewise-linear example with kinks on both axes", {}};
  paper.facts.analytic_inverse = paper_inverse;
  paper.facts.coercive = true;
  paper.facts.injective = true;
  zoo.push_back(std::move(paper));

  MapZooEntry identity{"identity2", "identity2(x, y) = (x, y)", "identity on the plane", {}};
  identity.facts.analytic_inverse = [](const Vector& y) { return y; };
  identity.facts.coercive = true;
  identity.facts.injective = true;
  zoo.push_back(std::move(identity));

  MapZooEntry complexsq{"complexsq", "complexsq(x, y) = (x^2 - y^2, 2*x*y)",
                        "complex squaring z -> z^2; rank drops at the origin", {}};
  complexsq.facts.singular_points = {vec2(0.0, 0.0)};
  complexsq.facts.coercive = true;
  complexsq.facts.collision = std::make_pair(vec2(1.0, 0.0), vec2(-1.0, 0.0));
  zoo.push_back(std::move(complexsq));

  MapZooEntry expmap{"expmap", "expmap(x, y) = (exp(x)*cos(y), exp(x)*sin(y))",
                     "complex exponential; |f| = exp(x), periodic in y", {}};
  expmap.facts.collision = std::make_pair(vec2(0.0, 0.0), vec2(0.0, 2.0 * std::numbers::pi));
  zoo.push_back(std::move(expmap));

  MapZooEntry scaled{"scaled_paper", "scaled_paper(x, y) = (10*(2*x - abs(x)), 10*(abs(y) - 2*y))",
                     "paper map scaled by 10", {}};
  scaled.facts.analytic_inverse = [](const Vector& y) { return paper_inverse(y / 10.0); };
  scaled.facts.coercive = true;
  scaled.facts.injective = true;
  zoo.push_back(std::move(scaled));

  return zoo;
}

}  // namespace

const std::vector<MapZooEntry>& map_zoo() {
  static const std::vector<MapZooEntry> zoo = build_zoo();
  return zoo;
}

const MapZooEntry* find_zoo_entry(std::string_view name) {
  for (const auto& entry : map_zoo()) {
    if (entry.name == name) return &entry;
  }
  return nullptr;
}

MapDefinition zoo_map(std::string_view name) {
  const MapZooEntry* entry = find_zoo_entry(name);
  if (!entry) throw ValidationError("unknown zoo map '" + std::string(name) + "'");
  return parse_map(entry->dsl);
}

MapDefinition load_map(std::string_view source) {
  constexpr std::string_view prefix = "zoo:";
  if (source.substr(0, prefix.size()) == prefix) return zoo_map(source.substr(prefix.size()));
  std::ifstream in{std::string(source)};
  if (!in) throw ValidationError("cannot open map file '" + std::string(source) + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_map(text.str());
}

}  // namespace lipinv
