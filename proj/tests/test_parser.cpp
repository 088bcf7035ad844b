#include "oracles.hpp"

#include "lipinv/map_model.hpp"
#include "lipinv/parser.hpp"

#include <doctest.h>

#include <random>

using namespace lipinv;
using oracle::vec;

TEST_CASE("grammar basics") {
  const MapDefinition m = parse_map("  f ( x , y )=( x+y ,x*y-1.5e1 ,  -x/2 )  ");
  CHECK(m.name() == "f");
  CHECK(m.variables() == std::vector<std::string>{"x", "y"});
  CHECK(eval(m, vec({3, 4})) == vec({7, -3, -1.5}));
}

TEST_CASE("comments and newlines") {
  const MapDefinition m = parse_map("# header\nf(x) = ( # trailing\n  x^3 )\n# end");
  CHECK(eval(m, vec({2}))[0] == 8);
}

TEST_CASE("precedence and associativity") {
  const MapDefinition m = parse_map("f(x) = (1 - 2 - 3, 2 * 3 ^ 2, -x^2, 8 / 4 / 2)");
  CHECK(eval(m, vec({3})) == vec({-4, 18, -9, 1}));
}

TEST_CASE("elementary functions") {
  const MapDefinition m = parse_map("f(x) = (sin(x), cos(x), exp(x), relu(x), relu(-x))");
  const Vector v = eval(m, vec({0.5}));
  CHECK(v[0] == std::sin(0.5));
  CHECK(v[1] == std::cos(0.5));
  CHECK(v[2] == std::exp(0.5));
  CHECK(v[3] == 0.5);
  CHECK(v[4] == 0.0);
}

TEST_CASE("n-ary max and min desugar left to right") {
  const MapDefinition m = parse_map("f(x,y,z) = (max(x, y, z), min(x, y, z))");
  CHECK(m.nonsmooth_nodes().size() == 4);
  CHECK(eval(m, vec({1, 5, 3})) == vec({5, 1}));
  CHECK(to_dsl(m).find("max(max(x, y), z)") != std::string::npos);
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse_map("f(x) = (x +\n  * 2)");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
    CHECK(e.offset() == 14);
  }
  CHECK_THROWS_AS(parse_map("f(x) = (x"), ParseError);
  CHECK_THROWS_AS(parse_map("f(x) = (x) extra"), ParseError);
  CHECK_THROWS_AS(parse_map("f(x) = (x $ 2)"), ParseError);
  CHECK_THROWS_AS(parse_map(""), ParseError);
}

TEST_CASE("semantic errors") {
  CHECK_THROWS_WITH_AS(parse_map("f(x) = (abs(x, x))"), doctest::Contains("arity mismatch"), ParseError);
  CHECK_THROWS_WITH_AS(parse_map("f(x) = (max(x))"), doctest::Contains("arity mismatch"), ParseError);
  CHECK_THROWS_WITH_AS(parse_map("f(x) = (x + z)"), doctest::Contains("unknown identifier"), ParseError);
  CHECK_THROWS_WITH_AS(parse_map("f(x) = (foo(x))"), doctest::Contains("unknown function"), ParseError);
  CHECK_THROWS_WITH_AS(parse_map("f(x, x) = (x)"), doctest::Contains("duplicate variable"), ParseError);
  CHECK_THROWS_AS(parse_map("f(abs) = (abs)"), ParseError);
  CHECK_THROWS_AS(parse_map("f(x) = (x^1.5)"), ParseError);
  CHECK_THROWS_AS(parse_map("f(x) = (x^-1)"), ParseError);
}

TEST_CASE("expected dimensions") {
  ParseOptions opts;
  opts.expected_inputs = 2;
  CHECK_THROWS_WITH_AS(parse_map("f(x) = (x)", opts), doctest::Contains("dimension mismatch"), ParseError);
  CHECK_NOTHROW(parse_map("f(x, y) = (x)", opts));
  opts.expected_outputs = 2;
  CHECK_THROWS_AS(parse_map("f(x, y) = (x)", opts), ParseError);
}

TEST_CASE("node order is a function of the text") {
  const char* text = "f(x,y) = (2*x - abs(x), abs(y) - 2*y)";
  CHECK(parse_map(text) == parse_map(text));
}

TEST_CASE("format_number round-trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(0.1) == "0.1");
}

namespace {

// Random well-formed expression over the given variables.
std::string random_expr(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  if (depth == 0 || pick(4) == 0) {
    if (pick(3) == 0) {
      std::uniform_real_distribution<double> u(-10, 10);
      const double c = pick(2) ? std::round(u(rng)) : u(rng);
      return c < 0 ? "(" + format_number(c) + ")" : format_number(c);
    }
    return vars[static_cast<std::size_t>(pick(static_cast<int>(vars.size())))];
  }
  const auto sub = [&] { return random_expr(rng, vars, depth - 1); };
  switch (pick(12)) {
    case 0: return "(" + sub() + " + " + sub() + ")";
    case 1: return "(" + sub() + " - " + sub() + ")";
    case 2: return sub() + " * " + sub();
    case 3: return "(" + sub() + ") / (1 + abs(" + sub() + "))";
    case 4: return "-" + sub();
    case 5: return "abs(" + sub() + ")";
    case 6: return "max(" + sub() + ", " + sub() + ", " + sub() + ")";
    case 7: return "min(" + sub() + ", " + sub() + ")";
    case 8: return "relu(" + sub() + ")";
    case 9: return "sin(" + sub() + ") + cos(" + sub() + ")";
    case 10: return "exp(-abs(" + sub() + "))";
    default: return "(" + sub() + ")^" + std::to_string(pick(4));
  }
}

}  // namespace

TEST_CASE("print then parse is a fixed point") {
  std::mt19937_64 rng(20240601);
  const std::vector<std::string> vars{"x", "y", "z"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text = "g(x, y, z) = (";
    const int outs = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < outs; ++k) text += (k ? ", " : "") + random_expr(rng, vars, 4);
    text += ")";
    CAPTURE(text);
    const MapDefinition m = parse_map(text);
    const std::string printed = to_dsl(m);
    const MapDefinition again = parse_map(printed);
    CHECK(again == m);
    CHECK(to_dsl(again) == printed);
    // Same values, too, where evaluation is defined.
    const Vector x = vec({0.3, -1.1, 0.7});
    try {
      CHECK(eval(again, x) == eval(m, x));
    } catch (const NumericError&) {
    }
  }
}
