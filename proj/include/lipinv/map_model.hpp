#pragma once

#include "lipinv/types.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace lipinv {

inline constexpr double kDefaultKinkTolerance = 1e-9;
inline constexpr std::size_t kDefaultPatternCap = 20;

enum class NodeKind : std::uint8_t {
  var,
  constant,
  add,
  sub,
  mul,
  div,
  neg,
  abs,
  max,
  min,
  relu,
  sin,
  cos,
  exp,
  pow_int,
};

int arity(NodeKind kind);
bool is_nonsmooth(NodeKind kind);
std::string_view kind_name(NodeKind kind);

/// One vertex of the expression DAG. Children always have smaller ids than
/// their parent, so node order is a topological order.
struct ExprNode {
  NodeKind kind = NodeKind::constant;
  std::array<int, 2> children{-1, -1};
  double value = 0.0;  // constant payload
  int index = 0;       // variable index, or exponent for pow_int

  bool operator==(const ExprNode&) const = default;
};

/// A piecewise-smooth map R^n -> R^m. Immutable once built; all nonsmoothness
/// lives in abs/max/min/relu nodes, listed in ascending node id order.
class MapDefinition {
 public:
  const std::string& name() const { return name_; }
  std::size_t n_in() const { return variables_.size(); }
  std::size_t n_out() const { return outputs_.size(); }
  const std::vector<std::string>& variables() const { return variables_; }
  std::span<const ExprNode> nodes() const { return nodes_; }
  std::span<const int> outputs() const { return outputs_; }
  std::span<const int> nonsmooth_nodes() const { return nonsmooth_; }

  bool operator==(const MapDefinition&) const = default;

 private:
  friend class MapBuilder;

  std::string name_;
  std::vector<std::string> variables_;
  std::vector<ExprNode> nodes_;
  std::vector<int> outputs_;
  std::vector<int> nonsmooth_;
};

/// Hash-consing DAG builder: structurally identical nodes are created once.
class MapBuilder {
 public:
  MapBuilder(std::string name, std::vector<std::string> variables);

  int variable(std::size_t index);
  int constant(double value);
  /// neg of a constant folds into a negated constant.
  int unary(NodeKind kind, int child);
  int binary(NodeKind kind, int lhs, int rhs);
  int power(int base, int exponent);

  /// Copies every node of `source`, substituting `inputs[i]` for variable i.
  /// Returns the ids of the copied outputs.
  std::vector<int> inline_map(const MapDefinition& source,
                              std::span<const int> inputs);

  std::size_t size() const { return nodes_.size(); }
  MapDefinition build(std::vector<int> outputs) const;

 private:
  int intern(const ExprNode& node);
  void check_id(int id) const;

  using Key = std::tuple<NodeKind, int, int, std::uint64_t, int>;

  std::string name_;
  std::vector<std::string> variables_;
  std::vector<ExprNode> nodes_;
  std::map<Key, int> interned_;
};

/// Branch selected at a nonsmooth node. `first` is the side where the
/// switching quantity is nonnegative: `+` for abs/relu, the left operand for
/// max/min.
enum class Branch : std::uint8_t { first, second };

struct SignPattern {
  std::vector<Branch> branches;  // one per nonsmooth node

  auto operator<=>(const SignPattern&) const = default;
};

/// Renders as e.g. `{+,-}` or `{L,R}` depending on node kinds.
std::string to_string(const MapDefinition& map, const SignPattern& pattern);

struct EvalOptions {
  /// Division is rejected when |denominator| <= div_epsilon.
  double div_epsilon = 1e-12;
};

/// Caller-owned scratch space; lets evaluation run without allocating and
/// keeps concurrent evaluations independent.
struct EvalWorkspace {
  std::vector<double> values;
  std::vector<double> gradients;  // row-major, one n_in row per node
};

struct PieceEvaluation {
  Vector value;
  Matrix jacobian;
};

Vector eval(const MapDefinition& map, const Vector& x,
            const EvalOptions& options = {});
void eval(const MapDefinition& map, const Vector& x, EvalWorkspace& workspace,
          Vector& out, const EvalOptions& options = {});

/// Signed distance of each nonsmooth node from its kink: the abs/relu
/// argument, a - b for max(a, b), b - a for min(a, b).
std::vector<double> switching_quantities(const MapDefinition& map,
                                         const Vector& x,
                                         const EvalOptions& options = {});

bool is_active(const MapDefinition& map, const Vector& x,
               const SignPattern& pattern, double tol,
               const EvalOptions& options = {});

/// Every pattern active at x within tol, in lexicographic order
/// (first < second, nonsmooth nodes in id order).
std::vector<SignPattern> active_patterns(const MapDefinition& map,
                                         const Vector& x,
                                         double tol = kDefaultKinkTolerance,
                                         std::size_t cap = kDefaultPatternCap,
                                         const EvalOptions& options = {});

/// Value and exact Jacobian of the selection function obtained by fixing
/// every nonsmooth node to its branch in `pattern` (forward accumulation).
PieceEvaluation eval_piece(const MapDefinition& map, const Vector& x,
                           const SignPattern& pattern,
                           const EvalOptions& options = {});
PieceEvaluation eval_piece(const MapDefinition& map, const Vector& x,
                           const SignPattern& pattern, EvalWorkspace& workspace,
                           const EvalOptions& options = {});

Matrix eval_piece_jacobian(const MapDefinition& map, const Vector& x,
                           const SignPattern& pattern,
                           const EvalOptions& options = {});

}  // namespace lipinv
