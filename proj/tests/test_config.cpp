#include <doctest.h>

#include "nomad/config.hpp"
#include "nomad/io.hpp"

using namespace nomad;

namespace {

Json minimal_config() {
  return Json{{"model", {{"lambda", 1.0}, {"gamma", 0.8}, {"beta", 4.0}}},
              {"resource",
               {{"states", {"0", "1"}}, {"rates", {{0.0, 0.25}, {0.25, 0.0}}}}},
              {"sharing",
               {{"kind", "power"}, {"alpha", 1.0}, {"level_payoffs", {0.0, 1.0}}}},
              {"solver",
               {{"L", 40}, {"k", 8}, {"eps0", 1e-5}, {"eps1", 1e-7}, {"eps2", 1e-8},
                {"max_restarts", 12}}}};
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("config: minimal document parses and round-trips") {
  RunConfig cfg = parse_config(minimal_config());
  CHECK(cfg.model.gamma == 0.8);
  CHECK(cfg.resource.size() == 2);
  CHECK(cfg.sharing.kind == SharingFunction::Kind::power);
  CHECK(cfg.solver.L == 40);
  RunConfig again = parse_config(config_to_json(cfg));
  CHECK(again.solver.eps2 == cfg.solver.eps2);
  CHECK(again.resource.rates == cfg.resource.rates);
}

TEST_CASE("config: missing keys are named in the error") {
  Json doc = minimal_config();
  doc["model"].erase("gamma");
  try {
    parse_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("model.gamma") != std::string::npos);
  }
}

TEST_CASE("config: unknown keys are rejected with their path") {
  Json doc = minimal_config();
  doc["solver"]["epsilon"] = 1.0;
  try {
    parse_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("solver.epsilon") != std::string::npos);
  }
  Json doc2 = minimal_config();
  doc2["extra"] = 1;
  CHECK_THROWS_AS(parse_config(doc2), ConfigError);
}

TEST_CASE("config: domain validation surfaces as config errors") {
  Json doc = minimal_config();
  doc["model"]["gamma"] = 1.5;
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
  Json doc2 = minimal_config();
  doc2["resource"]["rates"][0][1] = 0.0;
  CHECK_THROWS_AS(parse_config(doc2), ConfigError);
  Json doc3 = minimal_config();
  doc3["sharing"]["kind"] = "exotic";
  CHECK_THROWS_AS(parse_config(doc3), ConfigError);
}

TEST_CASE("config: sweep, casestudy and simulate blocks") {
  Json doc = minimal_config();
  doc["sweep"] = {{"parameter", "mu"}, {"values", {0.25, 1.0, 4.0}}};
  doc["casestudy"] = {{"f", {1.2e4, 1.44e4}},
                      {"commissions", {{0.15, 0.15}, {0.2, 0.2}}},
                      {"n_locations", 12}};
  doc["simulate"] = {{"kind", "finite"}, {"horizon", 100.0}, {"K", 10}};
  RunConfig cfg = parse_config(doc);
  REQUIRE(cfg.sweep.has_value());
  CHECK(cfg.sweep->values.size() == 3);
  REQUIRE(cfg.casestudy.has_value());
  CHECK(cfg.casestudy->commissions.size() == 2);
  REQUIRE(cfg.simulate.has_value());
  CHECK(cfg.simulate->K == 10);

  Json bad = doc;
  bad["simulate"]["kind"] = "imaginary";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("config: number formatting uses 12 significant digits") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.25) == "0.25");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(1.23456789012345e-7) == "1.23456789012e-07");
  CHECK(format_number(2e5) == "200000");
}

TEST_CASE("config: csv writers are byte stable") {
  SweepRow row;
  row.parameter = "mu";
  row.value = 0.25;
  row.x_star = Vector(2);
  row.x_star << 7.25, 21.5;
  row.V_sw_star = 1.0 / 7.0;
  row.kappa_star = 3.5;
  row.W_L = 0.4;
  row.W_A = 0.1;
  row.dist = 1e-9;
  row.accepted = true;
  row.solved = true;
  const std::string a = sweep_csv({row}, 2);
  const std::string b = sweep_csv({row}, 2);
  CHECK(a == b);
  CHECK(a.find("param,value,x_0,x_1,V_sw,kappa,W_L,W_A,dist,accepted\n") == 0);
  CHECK(a.find("0.142857142857") != std::string::npos);
  CHECK(a.find('\r') == std::string::npos);
}

TEST_SUITE_END();
