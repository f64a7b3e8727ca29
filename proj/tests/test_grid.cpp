#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "floodmit/case_io.hpp"
#include "floodmit/grid.hpp"
#include "support/toys.hpp"

using namespace floodmit;

TEST_CASE("case json round trip is canonical") {
  GridCase gc = toys::two_sub_toy();
  std::string once = case_to_json(gc);
  GridCase back = case_from_json(once);
  CHECK(back.substations.size() == 2);
  CHECK(back.branches.size() == 1);
  CHECK(case_to_json(back) == once);  // byte-stable reserialization
}

TEST_CASE("minimal two-bus case file loads") {
  auto path = std::filesystem::temp_directory_path() / "fm_toy_case.json";
  save_case(toys::two_sub_toy(), path.string());
  GridCase gc = load_case(path.string());
  CHECK(gc.substations.size() == 2);
  CHECK(gc.buses.size() == 2);
  CHECK(gc.branches.size() == 1);
  CHECK(gc.reference_bus == 0);
  std::filesystem::remove(path);
}

TEST_CASE("validation lists offending entities") {
  GridCase gc = toys::two_sub_toy();
  gc.branches[0].to_bus = "nope";
  CHECK_THROWS_WITH_AS(gc.finalize(), doctest::Contains("branch 'l1'"), ValidationError);

  GridCase gc2 = toys::two_sub_toy();
  gc2.buses[1].is_reference = true;
  CHECK_THROWS_WITH_AS(gc2.finalize(), doctest::Contains("reference"), ValidationError);

  // multiple violations reported together
  GridCase gc3 = toys::two_sub_toy();
  gc3.branches[0].to_bus = "nope";
  gc3.buses[1].is_reference = true;
  try {
    gc3.finalize();
    CHECK(false);
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("branch 'l1'") != std::string::npos);
    CHECK(msg.find("reference") != std::string::npos);
  }
}

TEST_CASE("convert_depths uses strict thresholds") {
  auto t = toys::default_thresholds();
  auto xi = convert_depths({0.3}, t);
  CHECK(xi.at(0, 1));
  CHECK_FALSE(xi.at(0, 2));
  CHECK_FALSE(xi.at(0, 3));

  xi = convert_depths({0.0}, t);
  CHECK_FALSE(xi.at(0, 1));

  xi = convert_depths({1.2}, t);
  CHECK(xi.at(0, 1));
  CHECK(xi.at(0, 2));
  CHECK(xi.at(0, 3));
  CHECK(xi.inexorable(0));

  // barrier of exactly the flood height protects
  xi = convert_depths({0.534}, t);
  CHECK(xi.at(0, 1));
  CHECK_FALSE(xi.at(0, 2));

  CHECK_THROWS_AS(convert_depths({-0.1}, t), InputError);
}

TEST_CASE("convert_depths output is row-monotone and dominated by the max scenario") {
  toys::SplitMix rng(77);
  auto t = toys::default_thresholds();
  GridCase gc = toys::two_sub_toy();
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<double>> rows;
    int ns = 1 + rng.below(3);
    for (int w = 0; w < ns; ++w)
      rows.push_back({rng.range(0, 1.5), rng.range(0, 1.5)});
    ScenarioSet set = toys::equiprobable(gc, rows);
    auto xmax = convert_depths(aggregate_max(set).depths, t);
    for (const auto& s : set.scenarios) {
      auto xi = convert_depths(s.depths, t);
      for (int k = 0; k < xi.subs; ++k) {
        for (int r = 1; r < xi.levels; ++r)
          if (xi.at(k, r + 1)) CHECK(xi.at(k, r));
        for (int r = 1; r <= xi.levels; ++r)
          if (xi.at(k, r)) CHECK(xmax.at(k, r));
      }
    }
  }
}

TEST_CASE("aggregate mean and max") {
  GridCase gc = toys::two_sub_toy();
  ScenarioSet set = toys::equiprobable(gc, {{0.8, 0.0}, {0.0, 0.0}});
  CHECK(aggregate_mean(set).depths[0] == doctest::Approx(0.4));
  CHECK(aggregate_max(set).depths[0] == doctest::Approx(0.8));

  ScenarioSet single = toys::single_scenario(gc, {0.7, 0.1});
  CHECK(aggregate_mean(single).depths[0] == doctest::Approx(0.7));
  CHECK(aggregate_max(single).depths[1] == doctest::Approx(0.1));

  ScenarioSet weighted;
  weighted.thresholds = toys::default_thresholds();
  weighted.scenarios = {{"a", 0.25, {1.0, 0.0}}, {"b", 0.75, {0.2, 0.0}}};
  weighted.validate(gc);
  CHECK(aggregate_mean(weighted).depths[0] == doctest::Approx(0.4));

  ScenarioSet empty;
  CHECK_THROWS_AS(aggregate_mean(empty), InputError);
}

TEST_CASE("component_status product form") {
  GridCase gc = toys::two_sub_toy();
  auto t = toys::default_thresholds();
  MitigationPlan none = MitigationPlan::empty(2, 3);

  auto xi = convert_depths({0.0, 0.3}, t);  // k2 flooded to level 1
  auto st = component_status(gc, none, xi);
  CHECK(st.bus_up[0]);
  CHECK_FALSE(st.bus_up[1]);
  CHECK_FALSE(st.edge_up[0]);

  MitigationPlan prot = none;
  prot.set(1, 1, true);
  st = component_status(gc, prot, xi);
  CHECK(st.bus_up[1]);
  CHECK(st.edge_up[0]);

  // top level flooded: no plan helps
  auto xi2 = convert_depths({0.0, 1.4}, t);
  MitigationPlan part = none;
  part.set(1, 1, true);
  part.set(1, 2, true);
  st = component_status(gc, part, xi2);
  CHECK_FALSE(st.bus_up[1]);
}

TEST_CASE("component_status is monotone in mitigation") {
  toys::SplitMix rng(123);
  GridCase gc = toys::random_case(5);
  auto t = toys::default_thresholds();
  int nsub = static_cast<int>(gc.substations.size());
  for (int rep = 0; rep < 40; ++rep) {
    std::vector<double> depths(nsub);
    for (auto& d : depths) d = rng.range(0.0, 1.5);
    auto xi = convert_depths(depths, t);
    MitigationPlan a = MitigationPlan::empty(nsub, 3);
    for (int k = 0; k < nsub; ++k) {
      int lvl = rng.below(3);
      for (int r = 1; r <= lvl; ++r) a.set(k, r, true);
    }
    MitigationPlan b = a;
    int k = rng.below(nsub);
    int next = b.achieved_level(k) + 1;
    if (next <= 2) b.set(k, next, true);
    auto sa = component_status(gc, a, xi);
    auto sb = component_status(gc, b, xi);
    for (size_t n = 0; n < sa.bus_up.size(); ++n) CHECK(sb.bus_up[n] >= sa.bus_up[n]);
    for (size_t e = 0; e < sa.edge_up.size(); ++e) {
      CHECK(sb.edge_up[e] >= sa.edge_up[e]);
      CHECK(sa.edge_up[e] ==
            std::min(sa.bus_up[gc.edges[e].from_bus], sa.bus_up[gc.edges[e].to_bus]));
    }
  }
}

TEST_CASE("ac residuals vanish on constructed solutions") {
  GridCase gc = toys::two_sub_toy();
  OperatingPoint pt;
  pt.v = {1.0, 1.0};
  pt.theta = {0.0, -0.01};
  pt.gen_p = {0.0};
  pt.gen_q = {0.0};
  pt.load_served = {0.0};
  // Eq: from-flow = -v*v*b*sin(theta_n - theta_m)
  double pf = -1.0 * 1.0 * (-10.0) * std::sin(0.01);
  CHECK(pf == doctest::Approx(0.0999983).epsilon(1e-4));
  pt.flow_from_p = {pf};
  pt.flow_from_q = {-(-10.0) * (1 - std::cos(0.01))};
  pt.flow_to_p = {-1.0 * 1.0 * (-10.0) * std::sin(-0.01)};
  pt.flow_to_q = {-(-10.0) * (1 - std::cos(-0.01))};

  auto rep = ac_residuals(gc, pt);
  double ohm_worst = 0.0;
  for (auto& [name, r] : rep.residuals)
    if (name.find("ohm") != std::string::npos) ohm_worst = std::max(ohm_worst, std::abs(r));
  CHECK(ohm_worst < 1e-12);

  // zero-injection symmetric case
  OperatingPoint zero = pt;
  zero.theta = {0.0, 0.0};
  zero.flow_from_p = {0.0};
  zero.flow_from_q = {0.0};
  zero.flow_to_p = {0.0};
  zero.flow_to_q = {0.0};
  auto rep2 = ac_residuals(gc, zero);
  CHECK(rep2.max_abs < 1e-15);

  // a perturbed flow shows up one-for-one
  OperatingPoint bad = zero;
  bad.flow_from_p = {0.05};
  auto rep3 = ac_residuals(gc, bad);
  double worst = 0.0;
  for (auto& [name, r] : rep3.residuals) worst = std::max(worst, std::abs(r));
  CHECK(worst == doctest::Approx(0.05));

  OperatingPoint missing = zero;
  missing.gen_p.clear();
  CHECK_THROWS_AS(ac_residuals(gc, missing), InputError);
}

TEST_CASE("scenario file round trip and validation") {
  GridCase gc = toys::two_sub_toy();
  ScenarioSet set = toys::equiprobable(gc, {{0.8, 0.0}, {0.0, 0.3}});
  std::string text = scenarios_to_json(set, gc);
  ScenarioSet back = scenarios_from_json(text, gc);
  CHECK(back.scenarios.size() == 2);
  CHECK(back.scenarios[1].depths[1] == doctest::Approx(0.3));

  ScenarioSet bad = set;
  bad.scenarios[0].prob = 0.4;  // sums to 0.9
  CHECK_THROWS_WITH_AS(bad.validate(gc), doctest::Contains("probabilities"), ValidationError);

  ScenarioSet bad2 = set;
  bad2.thresholds = {0.0, 0.534, 0.534};
  CHECK_THROWS_AS(bad2.validate(gc), ValidationError);
}

TEST_CASE("plan codes and json") {
  GridCase gc = toys::two_sub_toy();
  MitigationPlan p = MitigationPlan::empty(2, 3);
  p.set(0, 1, true);
  p.set(1, 1, true);
  p.set(1, 2, true);
  CHECK(plan_code(p, gc) == "k1=1;k2=2");
  CHECK(plan_from_code("k1=1;k2=2", gc, 3) == p);
  CHECK(plan_from_code("", gc, 3) == MitigationPlan::empty(2, 3));
  CHECK(plan_to_json(p, gc) == "{\"k1\":1,\"k2\":2}");
  CHECK(plan_from_json("{\"k1\":1,\"k2\":2}", gc, 3) == p);
}
