#include "lipinv/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>
#include <utility>
#include <vector>

namespace lipinv {

namespace {

enum class Tok { ident, number, lparen, rparen, comma, equals, plus, minus,
                 star, slash, caret, end };

struct Token {
  Tok kind = Tok::end;
  std::string_view text;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.offset = pos_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t end = pos_;
        while (end < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[end])) ||
                src_[end] == '_')) {
          ++end;
        }
        t.kind = Tok::ident;
        t.text = src_.substr(pos_, end - pos_);
        pos_ = end;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        t.kind = Tok::number;
        t.text = src_.substr(pos_, number_length());
        pos_ += t.text.size();
      } else {
        switch (c) {
          case '(': t.kind = Tok::lparen; break;
          case ')': t.kind = Tok::rparen; break;
          case ',': t.kind = Tok::comma; break;
          case '=': t.kind = Tok::equals; break;
          case '+': t.kind = Tok::plus; break;
          case '-': t.kind = Tok::minus; break;
          case '*': t.kind = Tok::star; break;
          case '/': t.kind = Tok::slash; break;
          case '^': t.kind = Tok::caret; break;
          default:
            fail(std::string("unexpected character '") + c + "'", pos_);
        }
        t.text = src_.substr(pos_, 1);
        ++pos_;
      }
      out.push_back(t);
    }
  }

  [[noreturn]] void fail(const std::string& message, std::size_t offset) const {
    throw_at(src_, message, offset);
  }

  [[noreturn]] static void throw_at(std::string_view src,
                                    const std::string& message,
                                    std::size_t offset) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset && i < src.size(); ++i) {
      if (src[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(message, offset, line, column);
  }

 private:
  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::size_t number_length() const {
    std::size_t end = pos_;
    auto digits = [&] {
      const std::size_t start = end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      return end - start;
    };
    std::size_t mantissa = digits();
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      mantissa += digits();
    }
    if (mantissa == 0) fail("malformed number", pos_);
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t save = end++;
      if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
      if (digits() == 0) end = save;  // `2e` is the number 2 followed by `e`
    }
    return end - pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view src, std::vector<Token> tokens)
      : src_(src), tokens_(std::move(tokens)) {}

  MapDefinition parse(const ParseOptions& options) {
    const Token name = expect(Tok::ident, "map name");
    expect(Tok::lparen, "'('");
    std::vector<std::string> vars;
    std::vector<std::size_t> var_offsets;
    do {
      const Token v = expect(Tok::ident, "variable name");
      for (const auto& existing : vars) {
        if (existing == v.text) fail("duplicate variable '" + std::string(v.text) + "'", v.offset);
      }
      if (is_reserved(v.text)) {
        fail("'" + std::string(v.text) + "' is a function name", v.offset);
      }
      vars.emplace_back(v.text);
    } while (accept(Tok::comma));
    expect(Tok::rparen, "')' after variable list");
    expect(Tok::equals, "'='");

    builder_.emplace(std::string(name.text), vars);
    vars_ = std::move(vars);

    const std::size_t tuple_offset = peek().offset;
    expect(Tok::lparen, "'(' opening the output tuple");
    std::vector<int> outputs;
    do {
      outputs.push_back(expression());
    } while (accept(Tok::comma));
    expect(Tok::rparen, "')' closing the output tuple");
    if (peek().kind != Tok::end) fail("trailing input after map definition", peek().offset);

    if (options.expected_inputs && *options.expected_inputs != vars_.size()) {
      fail("dimension mismatch: expected " + std::to_string(*options.expected_inputs) +
               " inputs, found " + std::to_string(vars_.size()),
           name.offset);
    }
    if (options.expected_outputs && *options.expected_outputs != outputs.size()) {
      fail("dimension mismatch: expected " + std::to_string(*options.expected_outputs) +
               " outputs, found " + std::to_string(outputs.size()),
           tuple_offset);
    }
    return builder_->build(std::move(outputs));
  }

 private:
  static bool is_reserved(std::string_view id) {
    return id == "abs" || id == "relu" || id == "sin" || id == "cos" ||
           id == "exp" || id == "max" || id == "min";
  }

  const Token& peek() const { return tokens_[pos_]; }

  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    ++pos_;
    return true;
  }

  Token expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) {
      const Token& t = peek();
      fail("expected " + what + ", found " +
               (t.kind == Tok::end ? std::string("end of input")
                                   : "'" + std::string(t.text) + "'"),
           t.offset);
    }
    return tokens_[pos_++];
  }

  [[noreturn]] void fail(const std::string& message, std::size_t offset) const {
    Lexer::throw_at(src_, message, offset);
  }

  int expression() {
    int lhs = term();
    while (true) {
      if (accept(Tok::plus)) {
        lhs = builder_->binary(NodeKind::add, lhs, term());
      } else if (accept(Tok::minus)) {
        lhs = builder_->binary(NodeKind::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = unary();
    while (true) {
      if (accept(Tok::star)) {
        lhs = builder_->binary(NodeKind::mul, lhs, unary());
      } else if (accept(Tok::slash)) {
        lhs = builder_->binary(NodeKind::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    if (accept(Tok::minus)) return builder_->unary(NodeKind::neg, unary());
    return power();
  }

  int power() {
    const int base = primary();
    if (!accept(Tok::caret)) return base;
    const Token& t = peek();
    if (t.kind == Tok::minus) fail("integer powers must have a nonnegative exponent", t.offset);
    const Token exponent = expect(Tok::number, "integer exponent");
    int k = 0;
    const auto* first = exponent.text.data();
    const auto* last = first + exponent.text.size();
    auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec != std::errc{} || ptr != last) {
      fail("exponent must be a nonnegative integer literal", exponent.offset);
    }
    return builder_->power(base, k);
  }

  int primary() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::number: {
        ++pos_;
        double value = 0.0;
        const auto* first = t.text.data();
        const auto* last = first + t.text.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
          fail("malformed number '" + std::string(t.text) + "'", t.offset);
        }
        return builder_->constant(value);
      }
      case Tok::lparen: {
        ++pos_;
        const int inner = expression();
        expect(Tok::rparen, "')'");
        return inner;
      }
      case Tok::ident:
        ++pos_;
        if (peek().kind == Tok::lparen) return call(t);
        for (std::size_t i = 0; i < vars_.size(); ++i) {
          if (vars_[i] == t.text) return builder_->variable(i);
        }
        fail("unknown identifier '" + std::string(t.text) + "'", t.offset);
      default:
        fail("expected an expression, found " +
                 (t.kind == Tok::end ? std::string("end of input")
                                     : "'" + std::string(t.text) + "'"),
             t.offset);
    }
  }

  int call(const Token& name) {
    const std::string_view f = name.text;
    const bool fold = f == "max" || f == "min";
    const NodeKind fold_kind = f == "max" ? NodeKind::max : NodeKind::min;
    expect(Tok::lparen, "'('");
    // max/min fold as each argument arrives, so node order matches the
    // printed left-nested form.
    std::vector<int> args;
    std::size_t count = 0;
    int acc = -1;
    if (peek().kind != Tok::rparen) {
      do {
        const int arg = expression();
        ++count;
        if (fold) {
          acc = count == 1 ? arg : builder_->binary(fold_kind, acc, arg);
        } else {
          args.push_back(arg);
        }
      } while (accept(Tok::comma));
    }
    expect(Tok::rparen, "')' closing the argument list");

    auto unary_kind = [&]() -> std::optional<NodeKind> {
      if (f == "abs") return NodeKind::abs;
      if (f == "relu") return NodeKind::relu;
      if (f == "sin") return NodeKind::sin;
      if (f == "cos") return NodeKind::cos;
      if (f == "exp") return NodeKind::exp;
      return std::nullopt;
    }();
    if (unary_kind) {
      if (count != 1) {
        fail("arity mismatch: " + std::string(f) + " takes 1 argument, got " +
                 std::to_string(count),
             name.offset);
      }
      return builder_->unary(*unary_kind, args[0]);
    }
    if (fold) {
      if (count < 2) {
        fail("arity mismatch: " + std::string(f) + " takes at least 2 arguments, got " +
                 std::to_string(count),
             name.offset);
      }
      return acc;
    }
    fail("unknown function '" + std::string(f) + "'", name.offset);
  }

  std::string_view src_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::optional<MapBuilder> builder_;
  std::vector<std::string> vars_;
};

void print_node(const MapDefinition& map, int id, std::string& out) {
  const ExprNode& node = map.nodes()[id];
  const int a = node.children[0];
  const int b = node.children[1];
  auto infix = [&](const char* op) {
    out += '(';
    print_node(map, a, out);
    out += op;
    print_node(map, b, out);
    out += ')';
  };
  auto call = [&](std::string_view fn) {
    out += fn;
    out += '(';
    print_node(map, a, out);
    if (b >= 0) {
      out += ", ";
      print_node(map, b, out);
    }
    out += ')';
  };
  switch (node.kind) {
    case NodeKind::var: out += map.variables()[node.index]; break;
    case NodeKind::constant:
      if (std::signbit(node.value)) {
        out += "(-" + format_number(-node.value) + ")";
      } else {
        out += format_number(node.value);
      }
      break;
    case NodeKind::add: infix(" + "); break;
    case NodeKind::sub: infix(" - "); break;
    case NodeKind::mul: infix(" * "); break;
    case NodeKind::div: infix(" / "); break;
    case NodeKind::neg:
      out += "(-";
      print_node(map, a, out);
      out += ')';
      break;
    case NodeKind::pow_int:
      out += '(';
      print_node(map, a, out);
      out += ")^" + std::to_string(node.index);
      break;
    default: call(kind_name(node.kind)); break;
  }
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

MapDefinition parse_map(std::string_view text, const ParseOptions& options) {
  Lexer lexer(text);
  Parser parser(text, lexer.run());
  return parser.parse(options);
}

std::string to_dsl(const MapDefinition& map) {
  std::string out = map.name() + "(";
  for (std::size_t i = 0; i < map.variables().size(); ++i) {
    if (i > 0) out += ", ";
    out += map.variables()[i];
  }
  out += ") = (";
  for (std::size_t k = 0; k < map.n_out(); ++k) {
    if (k > 0) out += ", ";
    print_node(map, map.outputs()[k], out);
  }
  out += ')';
  return out;
}

}  // namespace lipinv
