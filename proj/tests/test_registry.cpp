#include "run_config.hpp"

#include <duality_lab/registry.hpp>

#include <doctest.h>

#include <set>

using namespace duality_lab;
using cli::RunConfig;
using nlohmann::json;

TEST_CASE("every manifest identity has exactly one suite") {
  std::multiset<std::string> names;
  for (const auto& s : suites()) names.insert(s.name);
  for (const auto& m : identity_manifest()) {
    INFO(m);
    CHECK(names.count(m) == 1);
  }
  for (const auto& s : suites()) {
    CHECK(find_suite(s.name) == &s);
    CHECK_FALSE(s.description.empty());
    CHECK(s.tolerance > 0);
    CHECK(static_cast<bool>(s.run));
  }
  CHECK(find_suite("no-such-suite") == nullptr);
}

TEST_CASE("default grids cover both boundary regimes") {
  for (const char* name : {"asc-duality", "aw-duality", "reversibility-asip"}) {
    const auto& g = find_suite(name)->default_grid;
    bool hi = false, lo = false;
    for (const auto& p : g.points()) {
      const auto b = p.rho ? *p.rho : *p.lambda;
      (b > -1 ? hi : lo) = true;
    }
    INFO(name);
    CHECK(hi);
    CHECK(lo);
  }
}

TEST_CASE("empty grid gives no reports") {
  CHECK(grid_sweep({"asc-duality"}, GridSpec{}, SuiteOptions{}, 2).empty());
  CHECK(grid_sweep({}, find_suite("asc-duality")->default_grid, SuiteOptions{}, 1).empty());
  CHECK_THROWS_AS(grid_sweep({"bogus"}, GridSpec{}, SuiteOptions{}, 1), Error);
}

TEST_CASE("sweep order is deterministic and independent of jobs") {
  GridSpec g;
  g.q = {0.4, 0.7};
  g.k = {{0.8, 1.2}};
  g.rho = {0.5, -8};
  SuiteOptions o;
  o.max_total = 2;
  const auto a = grid_sweep({"asc-duality", "triangular-duality"}, g, o, 1);
  const auto b = grid_sweep({"asc-duality", "triangular-duality"}, g, o, 4);
  REQUIRE(a.size() == 8);
  REQUIRE(b.size() == 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].suite == b[i].suite);
    CHECK(a[i].params == b[i].params);
    CHECK(a[i].max_rel == b[i].max_rel);
    CHECK(a[i].pass);
  }
  CHECK(a[0].suite == "asc-duality");
  CHECK(a[4].suite == "triangular-duality");
}

TEST_CASE("points outside a suite's regime are skipped, not failed") {
  Params p;
  p.q = 0.5;
  p.k = {1, 1};  // no rho
  const auto r = run_suite(*find_suite("asc-duality"), p, SuiteOptions{});
  CHECK(is_skipped(r));
  CHECK(r.pass);
  CHECK(r.n_cases == 0);
  const auto s = summarize({r});
  REQUIRE(s.size() == 1);
  CHECK(s[0].pass);
}

TEST_CASE("tolerance overrides reach the suite") {
  GridSpec g;
  g.q = {0.5};
  g.k = {{1, 1}};
  g.rho = {0.3};
  SuiteOptions o;
  o.tolerances["asc-duality"] = 1e-300;
  const auto r = grid_sweep({"asc-duality"}, g, o, 1);
  REQUIRE(r.size() == 1);
  CHECK(r[0].tolerance == 1e-300);
}

TEST_CASE("sample points") {
  const auto a = sample_points(3, 5);
  CHECK(a == sample_points(3, 5));
  REQUIRE(a.size() == 5);
  for (const auto& x : a)
    for (double v : x) {
      CHECK(v > 0.1);
      CHECK(v < 2.0);
    }
}

TEST_CASE("run config round trip") {
  RunConfig c;
  c.command = "sweep";
  c.suites = {"aw-duality", "eigen"};
  c.q = {0.4, 0.7};
  c.k = {{0.3, 1.2}, {1, 1, 1}};
  c.lambda = {0.5};
  c.rho = {-8.5};
  c.v = {0.3, 2};
  c.sigma = {0.7};
  c.sites = 3;
  c.max_n = 2;
  c.tolerance = 1e-7;
  c.seed = 123456789012345ULL;
  c.output = "out.json";
  c.format = "csv";
  c.precision = "standard";
  c.richardson = true;
  c.jobs = 3;
  c.n_values = {0, 1, 2};
  c.x_values = {4};
  const json j = c;
  const auto back = json::parse(j.dump()).get<RunConfig>();
  CHECK(back == c);
  CHECK(json(back) == j);
  CHECK(back == json(back).get<RunConfig>());
  CHECK(RunConfig{} == json(RunConfig{}).get<RunConfig>());
}

TEST_CASE("run config validation") {
  RunConfig c;
  c.command = "check";
  CHECK_THROWS_AS(cli::validate(c), Error);  // no suite
  c.suites = {"asc-duality"};
  CHECK_NOTHROW(cli::validate(c));
  c.sites = 7;
  CHECK_THROWS_AS(cli::validate(c), Error);
  c.sites = 2;
  c.max_n = 9;
  CHECK_THROWS_AS(cli::validate(c), Error);
  c.max_n = 3;
  c.format = "xml";
  CHECK_THROWS_AS(cli::validate(c), Error);
  c.format = "json";
  c.suites = {"nope"};
  CHECK_THROWS_AS(cli::validate(c), Error);
  CHECK_THROWS_AS(json::parse(R"({"command":"check","colour":"red"})").get<RunConfig>(), Error);
}

TEST_CASE("list parsing") {
  CHECK(cli::parse_list("0.4,0.7") == std::vector<double>{0.4, 0.7});
  CHECK(cli::parse_k_list("1,1;0.5,2") == std::vector<std::vector<double>>{{1, 1}, {0.5, 2}});
  CHECK(cli::parse_range("0..3") == std::vector<int>{0, 1, 2, 3});
  CHECK(cli::parse_range("0,2,5") == std::vector<int>{0, 2, 5});
  CHECK_THROWS_AS(cli::parse_list("0.4,abc"), Error);
  CHECK_THROWS_AS(cli::parse_range("1.5"), Error);
}

TEST_CASE("report schema") {
  CheckReport r;
  r.suite = "asc-duality";
  r.params = "q=0.5";
  r.n_cases = 10;
  r.max_abs = 1e-20;
  r.max_rel = 0.0;
  r.tolerance = 1e-9;
  r.pass = true;
  r.worst_case = "eta=(1,0)";
  const auto j = cli::report_json(r);
  for (const char* key : {"suite", "params", "n_cases", "max_abs", "max_rel", "tolerance", "pass", "worst_case"})
    CHECK(j.contains(key));
  CHECK(j.size() == 8);
  const auto header = cli::report_csv_header();
  CHECK(header == "suite,params,n_cases,max_abs,max_rel,tolerance,pass,worst_case");
  r.params = "k=(1,2)";
  CHECK(cli::report_csv_row(r).find("\"k=(1,2)\"") != std::string::npos);
}

TEST_CASE("json numbers with huge exponents become strings") {
  CHECK(cli::number_json(1.5).is_number());
  CHECK(cli::number_json(0.0).is_number());
  CHECK(cli::number_json(1e-301).is_string());
  CHECK(cli::number_json(1e301).is_string());
  CHECK(cli::number_json(1e-299).is_number());
  CHECK(cli::number_json(INFINITY).is_string());
  CHECK(cli::number_json(NAN).is_string());
  CHECK(std::stod(cli::number_json(1e-301).get<std::string>()) == 1e-301);
}
