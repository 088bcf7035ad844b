#include "lipinv/map_model.hpp"

#include <bit>
#include <cmath>
#include <utility>

namespace lipinv {

int arity(NodeKind kind) {
  switch (kind) {
    case NodeKind::var:
    case NodeKind::constant:
      return 0;
    case NodeKind::neg:
    case NodeKind::abs:
    case NodeKind::relu:
    case NodeKind::sin:
    case NodeKind::cos:
    case NodeKind::exp:
    case NodeKind::pow_int:
      return 1;
    case NodeKind::add:
    case NodeKind::sub:
    case NodeKind::mul:
    case NodeKind::div:
    case NodeKind::max:
    case NodeKind::min:
      return 2;
  }
  return 0;
}

bool is_nonsmooth(NodeKind kind) {
  return kind == NodeKind::abs || kind == NodeKind::max ||
         kind == NodeKind::min || kind == NodeKind::relu;
}

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::var: return "var";
    case NodeKind::constant: return "const";
    case NodeKind::add: return "add";
    case NodeKind::sub: return "sub";
    case NodeKind::mul: return "mul";
    case NodeKind::div: return "div";
    case NodeKind::neg: return "neg";
    case NodeKind::abs: return "abs";
    case NodeKind::max: return "max";
    case NodeKind::min: return "min";
    case NodeKind::relu: return "relu";
    case NodeKind::sin: return "sin";
    case NodeKind::cos: return "cos";
    case NodeKind::exp: return "exp";
    case NodeKind::pow_int: return "pow-int";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// MapBuilder

MapBuilder::MapBuilder(std::string name, std::vector<std::string> variables)
    : name_(std::move(name)), variables_(std::move(variables)) {
  if (variables_.empty()) {
    throw ValidationError("a map needs at least one input variable");
  }
}

void MapBuilder::check_id(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw ValidationError("node id " + std::to_string(id) + " out of range");
  }
}

int MapBuilder::intern(const ExprNode& node) {
  const Key key{node.kind, node.children[0], node.children[1],
                std::bit_cast<std::uint64_t>(node.value), node.index};
  if (auto it = interned_.find(key); it != interned_.end()) return it->second;
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  interned_.emplace(key, id);
  return id;
}

int MapBuilder::variable(std::size_t index) {
  if (index >= variables_.size()) {
    throw ValidationError("variable index " + std::to_string(index) +
                          " >= input dimension " +
                          std::to_string(variables_.size()));
  }
  ExprNode node;
  node.kind = NodeKind::var;
  node.index = static_cast<int>(index);
  return intern(node);
}

int MapBuilder::constant(double value) {
  if (!std::isfinite(value)) {
    throw ValidationError("constants must be finite");
  }
  ExprNode node;
  node.kind = NodeKind::constant;
  node.value = value;
  return intern(node);
}

int MapBuilder::unary(NodeKind kind, int child) {
  if (arity(kind) != 1 || kind == NodeKind::pow_int) {
    throw ValidationError(std::string("arity mismatch: ") +
                          std::string(kind_name(kind)) + " is not unary");
  }
  check_id(child);
  if (kind == NodeKind::neg && nodes_[child].kind == NodeKind::constant) {
    return constant(-nodes_[child].value);
  }
  ExprNode node;
  node.kind = kind;
  node.children = {child, -1};
  return intern(node);
}

int MapBuilder::binary(NodeKind kind, int lhs, int rhs) {
  if (arity(kind) != 2) {
    throw ValidationError(std::string("arity mismatch: ") +
                          std::string(kind_name(kind)) + " is not binary");
  }
  check_id(lhs);
  check_id(rhs);
  ExprNode node;
  node.kind = kind;
  node.children = {lhs, rhs};
  return intern(node);
}

int MapBuilder::power(int base, int exponent) {
  check_id(base);
  if (exponent < 0) {
    throw ValidationError("integer powers must have a nonnegative exponent");
  }
  ExprNode node;
  node.kind = NodeKind::pow_int;
  node.children = {base, -1};
  node.index = exponent;
  return intern(node);
}

std::vector<int> MapBuilder::inline_map(const MapDefinition& source,
                                        std::span<const int> inputs) {
  if (inputs.size() != source.n_in()) {
    throw ValidationError("dimension mismatch: inlining a map with " +
                          std::to_string(source.n_in()) + " inputs on " +
                          std::to_string(inputs.size()) + " arguments");
  }
  for (int id : inputs) check_id(id);
  std::vector<int> remap(source.nodes().size(), -1);
  for (std::size_t i = 0; i < source.nodes().size(); ++i) {
    const ExprNode& node = source.nodes()[i];
    const int c0 = node.children[0] >= 0 ? remap[node.children[0]] : -1;
    const int c1 = node.children[1] >= 0 ? remap[node.children[1]] : -1;
    switch (node.kind) {
      case NodeKind::var: remap[i] = inputs[node.index]; break;
      case NodeKind::constant: remap[i] = constant(node.value); break;
      case NodeKind::pow_int: remap[i] = power(c0, node.index); break;
      default:
        remap[i] = arity(node.kind) == 1 ? unary(node.kind, c0)
                                         : binary(node.kind, c0, c1);
    }
  }
  std::vector<int> outputs;
  outputs.reserve(source.n_out());
  for (int id : source.outputs()) outputs.push_back(remap[id]);
  return outputs;
}

MapDefinition MapBuilder::build(std::vector<int> outputs) const {
  if (outputs.empty()) {
    throw ValidationError("a map needs at least one output");
  }
  for (int id : outputs) check_id(id);
  // Keep variables and whatever the outputs reach; folding can strand nodes.
  std::vector<char> keep(nodes_.size(), 0);
  for (int id : outputs) keep[static_cast<std::size_t>(id)] = 1;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    if (nodes_[i].kind == NodeKind::var) keep[i] = 1;
    if (!keep[i]) continue;
    for (int c : nodes_[i].children) {
      if (c >= 0) keep[static_cast<std::size_t>(c)] = 1;
    }
  }
  std::vector<int> remap(nodes_.size(), -1);
  MapDefinition map;
  map.name_ = name_;
  map.variables_ = variables_;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!keep[i]) continue;
    ExprNode node = nodes_[i];
    for (int& c : node.children) {
      if (c >= 0) c = remap[static_cast<std::size_t>(c)];
    }
    remap[i] = static_cast<int>(map.nodes_.size());
    if (is_nonsmooth(node.kind)) map.nonsmooth_.push_back(remap[i]);
    map.nodes_.push_back(node);
  }
  for (int id : outputs) map.outputs_.push_back(remap[static_cast<std::size_t>(id)]);
  return map;
}

// ---------------------------------------------------------------------------
// Evaluation

std::string to_string(const MapDefinition& map, const SignPattern& pattern) {
  std::string out = "{";
  const auto nonsmooth = map.nonsmooth_nodes();
  for (std::size_t k = 0; k < pattern.branches.size(); ++k) {
    if (k > 0) out += ',';
    const bool first = pattern.branches[k] == Branch::first;
    const NodeKind kind = k < nonsmooth.size()
                              ? map.nodes()[nonsmooth[k]].kind
                              : NodeKind::abs;
    if (kind == NodeKind::max || kind == NodeKind::min) {
      out += first ? 'L' : 'R';
    } else {
      out += first ? '+' : '-';
    }
  }
  out += '}';
  return out;
}

namespace {

double int_power(double base, int exponent) {
  double result = 1.0;
  for (int e = exponent; e > 0; e >>= 1) {
    if (e & 1) result *= base;
    base *= base;
  }
  return result;
}

double switching_quantity(const ExprNode& node, std::span<const double> v) {
  switch (node.kind) {
    case NodeKind::abs:
    case NodeKind::relu:
      return v[node.children[0]];
    case NodeKind::max:
      return v[node.children[0]] - v[node.children[1]];
    case NodeKind::min:
      return v[node.children[1]] - v[node.children[0]];
    default:
      return 0.0;
  }
}

void check_input(const MapDefinition& map, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != map.n_in()) {
    throw ValidationError("dimension mismatch: map '" + map.name() +
                          "' expects " + std::to_string(map.n_in()) +
                          " inputs, got " + std::to_string(x.size()));
  }
}

// Forward sweep over the DAG. With `pattern` null every nonsmooth node takes
// its natural branch; gradients are only accumulated when `with_gradient`.
void sweep(const MapDefinition& map, const Vector& x,
           const SignPattern* pattern, bool with_gradient,
           EvalWorkspace& ws, const EvalOptions& options) {
  check_input(map, x);
  const auto nodes = map.nodes();
  const std::size_t n = map.n_in();
  if (pattern && pattern->branches.size() != map.nonsmooth_nodes().size()) {
    throw ValidationError("sign pattern length " +
                          std::to_string(pattern->branches.size()) +
                          " does not match " +
                          std::to_string(map.nonsmooth_nodes().size()) +
                          " nonsmooth nodes");
  }
  ws.values.assign(nodes.size(), 0.0);
  if (with_gradient) ws.gradients.assign(nodes.size() * n, 0.0);

  auto& v = ws.values;
  auto grad = [&](int id) { return ws.gradients.data() + id * n; };
  std::size_t slot = 0;  // position in the nonsmooth list

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const ExprNode& node = nodes[i];
    const int a = node.children[0];
    const int b = node.children[1];
    double* g = with_gradient ? grad(static_cast<int>(i)) : nullptr;
    // g = ca * grad(a) + cb * grad(b)
    auto combine = [&](double ca, double cb) {
      if (!g) return;
      const double* ga = grad(a);
      const double* gb = b >= 0 ? grad(b) : nullptr;
      for (std::size_t j = 0; j < n; ++j) {
        g[j] = ca * ga[j] + (gb ? cb * gb[j] : 0.0);
      }
    };

    double value = 0.0;
    switch (node.kind) {
      case NodeKind::var:
        value = x[node.index];
        if (g) g[node.index] = 1.0;
        break;
      case NodeKind::constant:
        value = node.value;
        break;
      case NodeKind::add:
        value = v[a] + v[b];
        combine(1.0, 1.0);
        break;
      case NodeKind::sub:
        value = v[a] - v[b];
        combine(1.0, -1.0);
        break;
      case NodeKind::mul:
        value = v[a] * v[b];
        combine(v[b], v[a]);
        break;
      case NodeKind::div:
        if (!(std::fabs(v[b]) > options.div_epsilon)) {
          throw NumericError("division by near-zero denominator", static_cast<int>(i));
        }
        value = v[a] / v[b];
        combine(1.0 / v[b], -value / v[b]);
        break;
      case NodeKind::neg:
        value = -v[a];
        combine(-1.0, 0.0);
        break;
      case NodeKind::sin:
        value = std::sin(v[a]);
        combine(std::cos(v[a]), 0.0);
        break;
      case NodeKind::cos:
        value = std::cos(v[a]);
        combine(-std::sin(v[a]), 0.0);
        break;
      case NodeKind::exp:
        value = std::exp(v[a]);
        combine(value, 0.0);
        break;
      case NodeKind::pow_int:
        value = int_power(v[a], node.index);
        combine(node.index == 0 ? 0.0
                                : node.index * int_power(v[a], node.index - 1),
                0.0);
        break;
      case NodeKind::abs:
      case NodeKind::relu:
      case NodeKind::max:
      case NodeKind::min: {
        const double s = switching_quantity(node, v);
        const bool first =
            pattern ? pattern->branches[slot] == Branch::first : s >= 0.0;
        ++slot;
        if (node.kind == NodeKind::abs) {
          // The natural branch uses fabs so eval is exactly |a|.
          value = pattern ? (first ? v[a] : -v[a]) : std::fabs(v[a]);
          combine(first ? 1.0 : -1.0, 0.0);
        } else if (node.kind == NodeKind::relu) {
          value = first ? (pattern ? v[a] : std::max(v[a], 0.0)) : 0.0;
          combine(first ? 1.0 : 0.0, 0.0);
        } else {
          value = first ? v[a] : v[b];
          combine(first ? 1.0 : 0.0, first ? 0.0 : 1.0);
        }
        break;
      }
    }
    if (!std::isfinite(value)) {
      throw NumericError("non-finite intermediate value", static_cast<int>(i));
    }
    v[i] = value;
  }
}

}  // namespace

void eval(const MapDefinition& map, const Vector& x, EvalWorkspace& workspace,
          Vector& out, const EvalOptions& options) {
  sweep(map, x, nullptr, false, workspace, options);
  out.resize(static_cast<Eigen::Index>(map.n_out()));
  for (std::size_t k = 0; k < map.n_out(); ++k) {
    out[k] = workspace.values[map.outputs()[k]];
  }
}

Vector eval(const MapDefinition& map, const Vector& x,
            const EvalOptions& options) {
  EvalWorkspace workspace;
  Vector out;
  eval(map, x, workspace, out, options);
  return out;
}

std::vector<double> switching_quantities(const MapDefinition& map,
                                         const Vector& x,
                                         const EvalOptions& options) {
  EvalWorkspace ws;
  sweep(map, x, nullptr, false, ws, options);
  std::vector<double> s;
  s.reserve(map.nonsmooth_nodes().size());
  for (int id : map.nonsmooth_nodes()) {
    s.push_back(switching_quantity(map.nodes()[id], ws.values));
  }
  return s;
}

bool is_active(const MapDefinition& map, const Vector& x,
               const SignPattern& pattern, double tol,
               const EvalOptions& options) {
  const auto s = switching_quantities(map, x, options);
  if (pattern.branches.size() != s.size()) return false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const bool first = pattern.branches[k] == Branch::first;
    if (first ? s[k] < -tol : s[k] > tol) return false;
  }
  return true;
}

std::vector<SignPattern> active_patterns(const MapDefinition& map,
                                         const Vector& x, double tol,
                                         std::size_t cap,
                                         const EvalOptions& options) {
  if (!(tol >= 0.0)) throw ValidationError("kink tolerance must be >= 0");
  const auto s = switching_quantities(map, x, options);
  SignPattern base;
  base.branches.resize(s.size(), Branch::first);
  std::vector<std::size_t> near;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (std::fabs(s[k]) <= tol) {
      near.push_back(k);
    } else if (s[k] < 0.0) {
      base.branches[k] = Branch::second;
    }
  }
  if (near.size() > cap) throw PatternExplosionError(near.size(), cap);

  const std::size_t count = std::size_t{1} << near.size();
  std::vector<SignPattern> patterns(count, base);
  // The earliest near-active node is the most significant digit, which makes
  // counting order coincide with lexicographic order.
  for (std::size_t mask = 0; mask < count; ++mask) {
    for (std::size_t j = 0; j < near.size(); ++j) {
      const bool second = (mask >> (near.size() - 1 - j)) & 1U;
      patterns[mask].branches[near[j]] = second ? Branch::second : Branch::first;
    }
  }
  return patterns;
}

PieceEvaluation eval_piece(const MapDefinition& map, const Vector& x,
                           const SignPattern& pattern, EvalWorkspace& workspace,
                           const EvalOptions& options) {
  sweep(map, x, &pattern, true, workspace, options);
  const std::size_t n = map.n_in();
  const std::size_t m = map.n_out();
  PieceEvaluation result{Vector(static_cast<Eigen::Index>(m)),
                         Matrix(static_cast<Eigen::Index>(m),
                                static_cast<Eigen::Index>(n))};
  for (std::size_t k = 0; k < m; ++k) {
    const int id = map.outputs()[k];
    result.value[k] = workspace.values[id];
    for (std::size_t j = 0; j < n; ++j) {
      result.jacobian(k, j) = workspace.gradients[id * n + j];
    }
  }
  return result;
}

PieceEvaluation eval_piece(const MapDefinition& map, const Vector& x,
                           const SignPattern& pattern,
                           const EvalOptions& options) {
  EvalWorkspace workspace;
  return eval_piece(map, x, pattern, workspace, options);
}

Matrix eval_piece_jacobian(const MapDefinition& map, const Vector& x,
                           const SignPattern& pattern,
                           const EvalOptions& options) {
  return eval_piece(map, x, pattern, options).jacobian;
}

}  // namespace lipinv
