#include "oracles.hpp"

#include "lipinv/cli.hpp"
#include "lipinv/report.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

using namespace lipinv;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"lipinv"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Json report(const Result& r) {
  REQUIRE(r.code == kExitOk);
  return Json::parse(r.out)["report"];
}

double dist(const Json& a, std::initializer_list<double> b) {
  double s = 0;
  std::size_t i = 0;
  for (double v : b) {
    const double d = a.at(i++).get<double>() - v;
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("eval") {
  const Json p = report(run({"eval", "--map", "zoo:paper", "--point", "0,0", "--no-timestamp"}));
  CHECK(dist(p["value"], {0, 0}) == 0.0);
  CHECK(p["limiting_jacobians"] == 4);
  const Json i = report(run({"eval", "--map", "zoo:identity2", "--point", "3,4"}));
  CHECK(dist(i["value"], {3, 4}) == 0.0);
  CHECK(i["limiting_jacobians"] == 1);

  const std::string path = "lipinv_test_cli_map.txt";
  {
    std::ofstream f(path);
    f << "f(x, y) = (x + y, y)\n";
  }
  const Result bad = run({"eval", "--map", path.c_str(), "--point", "1"});
  std::remove(path.c_str());
  CHECK(bad.code == kExitUsage);
  CHECK(bad.out.empty());
  CHECK(bad.err.find("dimension mismatch") != std::string::npos);
}

TEST_CASE("invert") {
  const Json p = report(run({"invert", "--map", "zoo:paper", "--target", "1,-1", "--seed", "7"}));
  CHECK(p["status"] == "converged");
  CHECK(dist(p["x_star"], {1, 1}) < 1e-9);
  const Json s = report(run({"invert", "--map", "zoo:complexsq", "--target", "1,0"}));
  CHECK(s["status"] == "converged");
  CHECK(std::min(dist(s["x_star"], {1, 0}), dist(s["x_star"], {-1, 0})) < 1e-8);
  const Json z = report(run({"invert", "--map", "zoo:paper", "--target", "0,0"}));
  CHECK(dist(z["x_star"], {0, 0}) < 1e-9);

  const Result csv = run({"invert", "--map", "zoo:paper", "--target", "1,-1", "--format", "csv"});
  CHECK(csv.code == kExitOk);
  CHECK(csv.out.rfind("iter,phi,residual,subgrad_norm,x0,x1\n", 0) == 0);
}

TEST_CASE("certify") {
  const Json g = report(run({"certify", "--map", "zoo:paper", "--grid", "-2:2:5x-2:2:5"}));
  CHECK(g["summary"]["total"] == 25);
  CHECK(g["summary"]["certified_maximal_rank"] == 25);
  const Json s = report(run({"certify", "--map", "zoo:complexsq", "--point", "0,0"}));
  CHECK(s["certificates"][0]["status"] == "singular_element_found");
  const Json i = report(run({"certify", "--map", "zoo:identity2", "--point", "0,0"}));
  CHECK(i["certificates"][0]["status"] == "certified_maximal_rank");
  CHECK(i["certificates"][0]["min_singular_value"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("probe-injectivity and ps-check") {
  const Json sq = report(run({"probe-injectivity", "--map", "zoo:complexsq", "--target", "1,0"}));
  CHECK(sq["preimages"].size() == 2);
  CHECK(sq["mountain_pass"]["classification"] == "singular_saddle");
  CHECK(dist(sq["mountain_pass"]["critical_point"], {0, 0}) < 1e-6);
  const Json p = report(run({"probe-injectivity", "--map", "zoo:paper", "--target", "1,-1"}));
  CHECK(p["outcome"] == "no_counterexample_found");
  const Json e = report(run({"ps-check", "--map", "zoo:expmap", "--target", "0,0"}));
  CHECK(e["coercivity"]["verdict"] == "non_coercive_witness");
  CHECK(e["ps"]["verdict"] == "ps_failure_suspected");
}

TEST_CASE("exit codes") {
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"eval", "--help"}).code == kExitOk);
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"eval", "--map", "zoo:paper"}).code == kExitUsage);
  CHECK(run({"eval", "--map", "zoo:nope", "--point", "0,0"}).code == kExitUsage);
  CHECK(run({"eval", "--map", "zoo:paper", "--point", "0,x"}).code == kExitUsage);
  CHECK(run({"eval", "--map", "zoo:paper", "--point", "0,0", "--format", "xml"}).code ==
        kExitUsage);
  CHECK(run({"certify", "--map", "zoo:paper", "--grid", "1:2"}).code == kExitUsage);
  const Result overflow = run({"eval", "--map", "zoo:expmap", "--point", "1000,0"});
  CHECK(overflow.code == kExitNumeric);
  CHECK_FALSE(overflow.err.empty());

  const std::string path = "lipinv_test_cli_sq.txt";
  {
    std::ofstream f(path);
    f << "h(x, y) = (x^2 + 1, y)\n";
  }
  const Result miss = run({"invert", "--map", path.c_str(), "--target", "0,0"});
  std::remove(path.c_str());
  CHECK(miss.code == kExitNumeric);
}

TEST_CASE("output file and timestamps") {
  const std::string path = "lipinv_test_cli_out.json";
  const Result r = run({"eval", "--map", "zoo:paper", "--point", "1,1", "--out", path.c_str()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.empty());
  std::ifstream f(path);
  const Json j = Json::parse(f);
  std::remove(path.c_str());
  CHECK(j["command"] == "eval");
  CHECK(j.contains("timestamp"));
  CHECK_FALSE(Json::parse(run({"zoo", "--no-timestamp"}).out).contains("timestamp"));
}

TEST_CASE("seed falls back to the environment") {
  setenv("LIPINV_SEED", "42", 1);
  const Json a = Json::parse(run({"zoo", "--no-timestamp"}).out);
  const Json b = Json::parse(run({"zoo", "--seed", "3", "--no-timestamp"}).out);
  setenv("LIPINV_SEED", "many", 1);
  const Result bad = run({"zoo"});
  unsetenv("LIPINV_SEED");
  const Json c = Json::parse(run({"zoo", "--no-timestamp"}).out);
  CHECK(a["seed"] == 42);
  CHECK(b["seed"] == 3);
  CHECK(bad.code == kExitUsage);
  CHECK(c["seed"] == 0);
}

TEST_CASE("the executable behaves like run_cli") {
  const auto [code, out] = oracle::run_command(std::string(LIPINV_TOOL_PATH) +
                                               " eval --map zoo:paper --point 0,0 --no-timestamp");
  CHECK(code == kExitOk);
  CHECK(out == run({"eval", "--map", "zoo:paper", "--point", "0,0", "--no-timestamp"}).out);
  CHECK(oracle::run_command(std::string(LIPINV_TOOL_PATH) + " nope 2>/dev/null").first ==
        kExitUsage);
}
