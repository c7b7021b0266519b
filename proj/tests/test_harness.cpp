#include "rdbc/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rdbc;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(RDBC_TEST_DIR) / "harness_out" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

Scenario short_fast(double horizon = 0.2) {
  Scenario sc = builtin_scenario("fast-ci");
  sc.horizon = horizon;
  return sc;
}

}  // namespace

TEST_CASE("scenario JSON round trip") {
  for (const std::string& name : builtin_names()) {
    CAPTURE(name);
    const Scenario sc = builtin_scenario(name);
    CHECK(parse_scenario(to_json(sc)) == sc);
  }
  Scenario custom = short_fast();
  custom.initial.preset.clear();
  custom.initial.u0.assign(custom.nx + 1, 0.25);
  custom.initial.uhat0.assign(custom.nx + 1, 0.0);
  custom.trigger.kappa2 = 3.0;
  custom.stc.psi1 = 0.5;
  custom.scheme = Scheme::Stc;
  const json j = to_json(custom);
  CHECK(parse_scenario(json::parse(j.dump())) == custom);
}

TEST_CASE("unknown keys and malformed values are rejected") {
  json j = to_json(short_fast());
  j["plant"]["gama"] = 1.0;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = to_json(short_fast());
  j["extra"] = 1;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = to_json(short_fast());
  j["grid"]["dt"] = "fast";
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = to_json(short_fast());
  j["scheme"]["type"] = "sometimes";
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = to_json(short_fast());
  j["grid"]["horizon"] = 0.00015;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = to_json(short_fast());
  j["initial_data"] = {{"u0", {1.0, 2.0}}, {"uhat0", {1.0, 2.0}}};
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = to_json(short_fast());
  j["plant"]["theta1"] = 1;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  CHECK_THROWS_AS(load_scenario("no-such-scenario"), ConfigError);
}

TEST_CASE("scenario files load like builtins") {
  const std::filesystem::path dir = scratch("load");
  std::filesystem::create_directories(dir);
  const Scenario sc = short_fast();
  std::ofstream(dir / "s.json") << to_json(sc).dump(2);
  CHECK(load_scenario((dir / "s.json").string()) == sc);
}

TEST_CASE("builtin scenarios") {
  const Scenario baseline = builtin_scenario("baseline");
  CHECK(baseline.plant == PlantParams{0.001, 0.01, 5.1, 0, 1});
  CHECK(baseline.nx == 200);
  CHECK(baseline.dt == 1e-3);
  CHECK(baseline.trigger.B == 7.7304e4);
  CHECK(builtin_scenario("baseline-petc").scheme == Scheme::Petc);
  CHECK(builtin_scenario("baseline-stc").design_for(Scheme::Stc).gamma == 1e12);
  CHECK(builtin_scenario("fast-ci").plant == PlantParams{1.0, 8.0, 9.0, 0, 1});
  for (const std::string& name : builtin_names()) CHECK_NOTHROW(builtin_scenario(name).validate());
}

TEST_CASE("initial profiles") {
  const auto [u, uhat] = initial_profiles(builtin_scenario("baseline"));
  CHECK(u.size() == 201);
  CHECK(u(100) == doctest::Approx(5 * 0.0625));
  CHECK(uhat(100) == doctest::Approx(0.0625));
  Scenario zero = short_fast();
  zero.initial.preset = "zero";
  const auto [z, zh] = initial_profiles(zero);
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zh.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identical inputs give identical bytes") {
  const Scenario sc = short_fast();
  const auto a = scratch("det_a"), b = scratch("det_b");
  write_outputs(run_scenario(sc), a.string());
  write_outputs(run_scenario(sc), b.string());
  for (const char* f : {"trace.csv", "events.csv", "report.txt"}) {
    CAPTURE(f);
    const std::string sa = slurp(a / f);
    CHECK_FALSE(sa.empty());
    CHECK(sa == slurp(b / f));
  }
}

TEST_CASE("zero horizon") {
  for (Scheme s : {Scheme::Cetc, Scheme::Petc, Scheme::Stc}) {
    Scenario sc = short_fast(0.0);
    sc.scheme = s;
    const ScenarioRun run = run_scenario(sc);
    CHECK(run.result.steps() == 1);
    CHECK(run.result.events.size() == 1);
    CHECK(run.passed());
  }
}

TEST_CASE("comparison runs all schemes on shared kernels") {
  const Comparison c = compare_schemes(short_fast(0.5));
  REQUIRE(c.runs.size() == 3);
  REQUIRE(c.rows.size() == 3);
  CHECK(c.runs[0].kernels == c.runs[1].kernels);
  CHECK(c.runs[1].kernels == c.runs[2].kernels);
  for (const SchemeSummary& row : c.rows) {
    CHECK(row.monitors_passed);
    CHECK(row.events >= 1);
    std::size_t counted = 0;
    for (const DwellStats& q : row.quartiles) counted += q.count;
    CHECK(counted + 1 == row.events);
  }
  std::ostringstream os;
  write_comparison(os, c);
  CHECK(os.str().find("stc") != std::string::npos);
}

TEST_CASE("parameter table and kernel export") {
  const Scenario sc = builtin_scenario("fast-ci");
  const auto ks = scenario_kernels(sc);
  const TriggerParams tp = scenario_trigger(sc, *ks, Scheme::Cetc);
  const auto rows = parameter_table(*ks, tp);
  bool has_tau = false;
  for (const ParameterRow& r : rows) {
    CHECK_FALSE(r.source.empty());
    if (r.name == "tau") has_tau = r.value == tp.tau;
  }
  CHECK(has_tau);

  const auto dir = scratch("kernels");
  write_kernel_tables(*ks, dir.string());
  CHECK(slurp(dir / "kernels.csv").rfind("x,y,K,L\n", 0) == 0);
  CHECK(slurp(dir / "observer_kernels.csv").rfind("x,y,P,Q\n", 0) == 0);
}

TEST_CASE("infeasible trigger design") {
  Scenario sc = builtin_scenario("baseline");
  sc.kernel_n = 128;
  sc.trigger.B = 1e-6;
  const auto ks = scenario_kernels(sc);
  CHECK_THROWS_AS(scenario_trigger(sc, *ks, Scheme::Cetc), InfeasibleParameters);
  sc.trigger.require_assumption2 = false;
  CHECK_NOTHROW(scenario_trigger(sc, *ks, Scheme::Cetc));
}
