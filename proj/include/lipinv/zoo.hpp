#pragma once

#include "lipinv/map_model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lipinv {

/// Facts about a built-in map that the toolkit can re-derive on its own.
struct ZooFacts {
  /// Closed-form inverse for bijective entries.
  std::function<Vector(const Vector&)> analytic_inverse;
  /// Points where some limiting Jacobian is singular.
  std::vector<Vector> singular_points;
  bool coercive = false;
  bool injective = false;
  /// Two distinct points with equal image, for non-injective entries.
  std::optional<std::pair<Vector, Vector>> collision;
};

struct MapZooEntry {
  std::string name;
  std::string dsl;
  std::string provenance;
  ZooFacts facts;
};

const std::vector<MapZooEntry>& map_zoo();

/// nullptr when no entry has that name.
const MapZooEntry* find_zoo_entry(std::string_view name);

MapDefinition zoo_map(std::string_view name);

/// "zoo:<name>" selects a built-in; anything else is read as a DSL file path.
MapDefinition load_map(std::string_view source);

}  // namespace lipinv
