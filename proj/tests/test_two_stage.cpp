#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "floodmit/two_stage.hpp"
#include "support/toys.hpp"

using namespace floodmit;
using namespace floodmit::study;

namespace {

StudyContext ctx_of(const GridCase& gc, const ScenarioSet& scen,
                    PfVariant v = PfVariant::DC) {
  return make_context(gc, scen, v);
}

}  // namespace

TEST_CASE("single scenario collapses sp, ro, ews, mws to the deterministic value") {
  GridCase gc = toys::two_sub_toy();
  ScenarioSet scen = toys::single_scenario(gc, {0.0, 0.3});
  StudyContext ctx = ctx_of(gc, scen);
  auto sp = solve_study(ctx, StudyKind::SP, 1);
  auto ro = solve_study(ctx, StudyKind::RO, 1);
  auto ews = solve_study(ctx, StudyKind::EWS, 1);
  auto mws = solve_study(ctx, StudyKind::MWS, 1);
  CHECK(sp.z == doctest::Approx(ro.z).epsilon(1e-9));
  CHECK(ews.z == doctest::Approx(sp.z).epsilon(1e-9));
  CHECK(mws.z == doctest::Approx(sp.z).epsilon(1e-9));
  // budget 1 protects the load substation: no shed
  CHECK(sp.z == doctest::Approx(0.0).epsilon(1e-9));
  REQUIRE(sp.plan.has_value());
  CHECK(sp.plan->at(1, 1));
}

TEST_CASE("budget zero forces the empty plan") {
  GridCase gc = toys::two_sub_toy();
  ScenarioSet scen = toys::equiprobable(gc, {{0.0, 0.3}, {0.8, 0.0}});
  StudyContext ctx = ctx_of(gc, scen);
  auto sp = solve_study(ctx, StudyKind::SP, 0);
  REQUIRE(sp.plan.has_value());
  CHECK(plan_cost(*sp.plan, ctx.costs) == 0);
  // z equals the probability-weighted no-plan recourse values
  double expect = 0.0;
  for (size_t w = 0; w < ctx.xi.size(); ++w)
    expect += scen.scenarios[w].prob *
              recourse_value(ctx, ctx.xi[w], MitigationPlan::empty(2, 3));
  CHECK(sp.z == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("sp and ro match brute-force enumeration across budgets") {
  GridCase gc = toys::two_sub_toy();
  ScenarioSet scen = toys::equiprobable(gc, {{0.0, 0.3}, {0.8, 0.0}});
  StudyContext ctx = ctx_of(gc, scen);
  long cap = budget_threshold(ThresholdKind::SP, gc, scen, ctx.costs);
  toys::OracleCache oracle;
  oracle.build(ctx, cap + 1);
  for (long f = 0; f <= cap + 1; ++f) {
    auto sp = solve_study(ctx, StudyKind::SP, f);
    auto ro = solve_study(ctx, StudyKind::RO, f);
    CHECK(sp.z == doctest::Approx(oracle.sp(f)).epsilon(1e-7));
    CHECK(ro.z == doctest::Approx(oracle.ro(f)).epsilon(1e-7));
    CHECK(ro.z >= sp.z - 1e-9);
    auto ews = solve_study(ctx, StudyKind::EWS, f);
    auto mws = solve_study(ctx, StudyKind::MWS, f);
    CHECK(ews.z == doctest::Approx(oracle.ews(f)).epsilon(1e-7));
    CHECK(mws.z == doctest::Approx(oracle.mws(f)).epsilon(1e-7));
  }
}

TEST_CASE("study result identities") {
  GridCase gc = toys::two_sub_toy();
  ScenarioSet scen = toys::equiprobable(gc, {{0.0, 0.3}, {0.8, 0.0}});
  StudyContext ctx = ctx_of(gc, scen);
  auto sp = solve_study(ctx, StudyKind::SP, 2);
  double agg = 0.0;
  for (size_t w = 0; w < sp.scenario_objectives.size(); ++w)
    agg += scen.scenarios[w].prob * sp.scenario_objectives[w];
  CHECK(sp.z == doctest::Approx(agg).epsilon(1e-9));

  auto ro = solve_study(ctx, StudyKind::RO, 2);
  double worst = 0.0;
  for (double v : ro.scenario_objectives) worst = std::max(worst, v);
  CHECK(ro.z == doctest::Approx(worst).epsilon(1e-9));
}

TEST_CASE("ev solution and eev bound") {
  GridCase gc = toys::two_sub_toy();
  // mean depths (0.4, 0.15): both substations at level 1 in the EV scenario
  ScenarioSet scen = toys::equiprobable(gc, {{0.8, 0.0}, {0.0, 0.3}});
  StudyContext ctx = ctx_of(gc, scen);
  auto ev = solve_study(ctx, StudyKind::EV, 2);
  REQUIRE(ev.plan.has_value());
  CHECK(ev.plan->at(0, 1));
  CHECK(ev.plan->at(1, 1));

  auto eev = solve_study(ctx, StudyKind::EEV, 2);
  auto sp = solve_study(ctx, StudyKind::SP, 2);
  CHECK(eev.z >= sp.z - 1e-9);  // VSS >= 0
  double manual = 0.0;
  for (size_t w = 0; w < ctx.xi.size(); ++w)
    manual += scen.scenarios[w].prob * recourse_value(ctx, ctx.xi[w], *ev.plan);
  CHECK(eev.z == doctest::Approx(manual).epsilon(1e-9));

  // identical scenarios: no uncertainty, EEV = SP and EVPI = 0
  ScenarioSet same = toys::equiprobable(gc, {{0.0, 0.3}, {0.0, 0.3}});
  StudyContext ctx2 = ctx_of(gc, same);
  auto sp2 = solve_study(ctx2, StudyKind::SP, 1);
  CHECK(solve_study(ctx2, StudyKind::EEV, 1).z == doctest::Approx(sp2.z).epsilon(1e-9));
  CHECK(solve_study(ctx2, StudyKind::EWS, 1).z == doctest::Approx(sp2.z).epsilon(1e-9));
  CHECK(solve_study(ctx2, StudyKind::MMV, 1).z == doctest::Approx(sp2.z).epsilon(1e-9));
  CHECK(solve_study(ctx2, StudyKind::MWS, 1).z == doctest::Approx(sp2.z).epsilon(1e-9));
}

TEST_CASE("bound sandwiches and monotone budgets on random instances") {
  for (unsigned seed : {0u, 3u, 6u}) {
    GridCase gc = toys::random_case(seed, 3);
    ScenarioSet scen = toys::random_scenarios(gc, seed);
    StudyContext ctx = ctx_of(gc, scen);
    long cap = budget_threshold(ThresholdKind::SP, gc, scen, ctx.costs);
    double prev_sp = 1e300, prev_ro = 1e300, prev_ews = 1e300, prev_mws = 1e300;
    for (long f = 0; f <= cap; ++f) {
      double sp = solve_study(ctx, StudyKind::SP, f).z;
      double ro = solve_study(ctx, StudyKind::RO, f).z;
      double ews = solve_study(ctx, StudyKind::EWS, f).z;
      double eev = solve_study(ctx, StudyKind::EEV, f).z;
      double mws = solve_study(ctx, StudyKind::MWS, f).z;
      double mmv = solve_study(ctx, StudyKind::MMV, f).z;
      CHECK(ews <= sp + 1e-7);
      CHECK(sp <= eev + 1e-7);
      CHECK(mws <= ro + 1e-7);
      CHECK(ro <= mmv + 1e-7);
      CHECK(ro >= sp - 1e-9);
      CHECK(sp <= prev_sp + 1e-9);
      CHECK(ro <= prev_ro + 1e-9);
      CHECK(ews <= prev_ews + 1e-9);
      CHECK(mws <= prev_mws + 1e-9);
      prev_sp = sp;
      prev_ro = ro;
      prev_ews = ews;
      prev_mws = mws;
    }
    // constant above the threshold
    CHECK(solve_study(ctx, StudyKind::SP, cap + 3).z == doctest::Approx(prev_sp).epsilon(1e-9));
  }
}

TEST_CASE("mv plan spends nothing on hopeless substations") {
  GridCase gc = toys::three_sub_toy();
  // max scenario floods k3 beyond the last threshold; k1 and k2 are
  // coverable, and covering them strictly beats every alternative
  ScenarioSet scen = toys::equiprobable(gc, {{0.3, 0.3, 1.3}, {0.0, 0.0, 0.2}});
  StudyContext ctx = ctx_of(gc, scen);
  auto mv = solve_study(ctx, StudyKind::MV, 5);
  REQUIRE(mv.plan.has_value());
  CHECK(mv.plan->achieved_level(2) == 0);
  CHECK(mv.plan->at(0, 1));
  CHECK(mv.plan->at(1, 1));
  CHECK(mv.scenario_objectives[0] == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("greedy warmstart traces the documented rule") {
  GridCase gc = toys::two_sub_toy();
  ScenarioSet scen = toys::single_scenario(gc, {0.3, 0.3});  // both flooded to level 1
  StudyContext ctx = ctx_of(gc, scen);

  // budget 1: only the load substation is worth anything
  MitigationPlan g1 = greedy_warmstart(ctx, 1, false);
  CHECK(g1.at(1, 1));
  CHECK_FALSE(g1.at(0, 1));

  // budget 2: load substation first, then the generator's (it restores the
  // branch only once the other end is up)
  MitigationPlan g2 = greedy_warmstart(ctx, 2, false);
  CHECK(g2.at(1, 1));
  CHECK(g2.at(0, 1));

  CHECK(greedy_warmstart(ctx, 0, false) == MitigationPlan::empty(2, 3));

  toys::SplitMix rng(77);
  for (unsigned seed = 0; seed < 8; ++seed) {
    GridCase rc = toys::random_case(seed);
    ScenarioSet rs = toys::random_scenarios(rc, seed);
    StudyContext rctx = ctx_of(rc, rs);
    long budget = rng.below(8);
    for (bool wc : {false, true}) {
      MitigationPlan g = greedy_warmstart(rctx, budget, wc);
      CHECK(is_feasible(g, rctx.costs, budget));
    }
  }
}

TEST_CASE("warmstart leaves certified optima unchanged") {
  GridCase gc = toys::random_case(4, 3);
  ScenarioSet scen = toys::random_scenarios(gc, 4);
  StudyContext warm = ctx_of(gc, scen);
  StudyContext cold = warm;
  cold.use_warmstart = false;
  for (long f : {0L, 2L, 4L}) {
    auto a = solve_study(warm, StudyKind::SP, f);
    auto b = solve_study(cold, StudyKind::SP, f);
    CHECK(a.z == doctest::Approx(b.z).epsilon(1e-9));
    CHECK(a.nodes <= b.nodes);
  }
}

TEST_CASE("optimized thresholds: stagnation oracle") {
  for (unsigned seed : {1u, 5u}) {
    GridCase gc = toys::random_case(seed, 3);
    ScenarioSet scen = toys::random_scenarios(gc, seed);
    StudyContext ctx = ctx_of(gc, scen);
    long sp_cap = budget_threshold(ThresholdKind::SP, gc, scen, ctx.costs);

    long ro_thr = optimized_budget_threshold(ctx, StudyKind::RO);
    CHECK(ro_thr <= sp_cap);
    // oracle: smallest budget whose RO value reaches the floor
    double floor_z = solve_study(ctx, StudyKind::RO, sp_cap).z;
    long first = sp_cap;
    for (long f = 0; f <= sp_cap; ++f) {
      if (solve_study(ctx, StudyKind::RO, f).z <= floor_z + 1e-9) {
        first = f;
        break;
      }
    }
    CHECK(ro_thr == first);

    long mws_thr = optimized_budget_threshold(ctx, StudyKind::MWS);
    double mws_floor = solve_study(ctx, StudyKind::MWS, sp_cap).z;
    long mfirst = sp_cap;
    for (long f = 0; f <= sp_cap; ++f) {
      if (solve_study(ctx, StudyKind::MWS, f).z <= mws_floor + 1e-9) {
        mfirst = f;
        break;
      }
    }
    CHECK(mws_thr == mfirst);
  }
}

TEST_CASE("single-scenario optimized threshold equals the per-scenario minimum cost") {
  GridCase gc = toys::two_sub_toy();
  ScenarioSet scen = toys::single_scenario(gc, {0.0, 0.3});
  StudyContext ctx = ctx_of(gc, scen);
  // protecting k2 to level 1 reaches the floor; k1 adds nothing
  CHECK(optimized_budget_threshold(ctx, StudyKind::RO) == 1);
  CHECK(optimized_budget_threshold(ctx, StudyKind::MWS) == 1);
}

TEST_CASE("uniqueness check: symmetric tie vs strict optimum") {
  GridCase gc = toys::two_sub_toy();
  // both substations flooded at level 1, budget 1: every plan sheds the
  // full load, so alternatives tie
  ScenarioSet tie = toys::single_scenario(gc, {0.3, 0.3});
  StudyContext ctx = ctx_of(gc, tie);
  auto rep = check_uniqueness(ctx, StudyKind::SP, 1);
  CHECK_FALSE(rep.unique);
  REQUIRE(rep.alternate.has_value());
  CHECK(rep.alternate_z == doctest::Approx(rep.z).epsilon(1e-9));
  CHECK_FALSE(*rep.alternate == rep.plan);

  // asymmetric: only the load substation matters, strictly better and unique
  ScenarioSet uniq = toys::single_scenario(gc, {0.0, 0.3});
  StudyContext ctx2 = ctx_of(gc, uniq);
  auto rep2 = check_uniqueness(ctx2, StudyKind::SP, 1);
  CHECK(rep2.unique);
  CHECK(rep2.plan.at(1, 1));

  // enumeration agrees on both calls
  toys::OracleCache oracle;
  oracle.build(ctx, 1);
  int optima = 0;
  for (size_t p = 0; p < oracle.plans.size(); ++p)
    if (oracle.cost[p] <= 1 &&
        std::abs(oracle.sp(1) - oracle.value[p][0]) <= 1e-9)
      ++optima;
  CHECK(optima > 1);
}

TEST_CASE("cross evaluation gaps") {
  GridCase gc = toys::random_case(2, 3);
  ScenarioSet scen = toys::random_scenarios(gc, 2);
  StudyContext ctx = ctx_of(gc, scen);
  auto sp = solve_study(ctx, StudyKind::SP, 2);
  auto ro = solve_study(ctx, StudyKind::RO, 2);
  // evaluating a model's own plan reproduces its optimum
  CHECK(eval_plan(ctx, StudyKind::SP, *sp.plan) == doctest::Approx(sp.z).epsilon(1e-9));
  CHECK(eval_plan(ctx, StudyKind::RO, *ro.plan) == doctest::Approx(ro.z).epsilon(1e-9));
  // a foreign plan can only be worse
  CHECK(eval_plan(ctx, StudyKind::RO, *sp.plan) >= ro.z - 1e-9);
  CHECK(eval_plan(ctx, StudyKind::SP, *ro.plan) >= sp.z - 1e-9);
}

TEST_CASE("linearized status logic reproduces the product formulas") {
  toys::SplitMix rng(31);
  for (unsigned seed = 0; seed < 6; ++seed) {
    GridCase gc = toys::random_case(seed);
    ScenarioSet scen = toys::random_scenarios(gc, seed);
    StudyContext ctx = ctx_of(gc, scen);
    std::vector<const IndicatorMatrix*> xis;
    std::vector<double> probs;
    for (size_t w = 0; w < ctx.xi.size(); ++w) {
      xis.push_back(&ctx.xi[w]);
      probs.push_back(scen.scenarios[w].prob);
    }
    ExtensiveBuild eb = build_extensive(ctx, false, xis, probs, 100);
    // fix the plan variables to a random cumulative plan and re-solve
    MitigationPlan p = MitigationPlan::empty(static_cast<int>(gc.substations.size()), 3);
    for (int k = 0; k < p.subs; ++k) {
      int lvl = rng.below(3);
      for (int r = 1; r <= lvl; ++r) p.set(k, r, true);
    }
    for (int k = 0; k < p.subs; ++k)
      for (int r = 1; r <= 3; ++r) {
        double v = p.at(k, r) ? 1.0 : 0.0;
        int xv = eb.x_vars[static_cast<size_t>(k) * 3 + (r - 1)];
        eb.model.vars[xv].lo = v;
        eb.model.vars[xv].hi = std::min(eb.model.vars[xv].hi, v);
        eb.model.vars[xv].lo = std::min(eb.model.vars[xv].lo, eb.model.vars[xv].hi);
      }
    auto res = engine::solve_model(eb.model, ctx.ecfg);
    REQUIRE(res.status == engine::SolveStatus::Optimal);
    for (size_t w = 0; w < xis.size(); ++w) {
      ComponentStatus st = component_status(gc, p, *xis[w]);
      for (size_t k = 0; k < gc.substations.size(); ++k) {
        double a = eb.blocks[w].alpha_of(static_cast<int>(k), res.values);
        CHECK(a == doctest::Approx(st.bus_up[gc.sub_buses[k].front()] ? 1.0 : 0.0)
                       .epsilon(1e-7));
      }
      for (size_t e = 0; e < gc.edges.size(); ++e) {
        double b = eb.blocks[w].beta_of(static_cast<int>(e), res.values);
        CHECK(b == doctest::Approx(st.edge_up[e] ? 1.0 : 0.0).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("ohm rows bind exactly on closed branches of extensive solutions") {
  GridCase gc = toys::random_case(8, 3);
  ScenarioSet scen = toys::random_scenarios(gc, 8);
  for (PfVariant v : {PfVariant::DC, PfVariant::LPAC_C}) {
    StudyContext ctx = ctx_of(gc, scen, v);
    std::vector<const IndicatorMatrix*> xis;
    std::vector<double> probs;
    for (size_t w = 0; w < ctx.xi.size(); ++w) {
      xis.push_back(&ctx.xi[w]);
      probs.push_back(scen.scenarios[w].prob);
    }
    ExtensiveBuild eb = build_extensive(ctx, false, xis, probs, 3);
    auto res = engine::solve_model(eb.model, ctx.ecfg);
    REQUIRE(res.status == engine::SolveStatus::Optimal);
    // every big-M Ohm pair with its edge closed collapses to an equality
    for (const auto& c : eb.model.lin_cons) {
      if (c.name.find("ohm") == std::string::npos) continue;
      bool ge = c.name.find("_ge") != std::string::npos;
      bool le = c.name.find("_le") != std::string::npos;
      if (!ge && !le) continue;  // already an equality row
      // find the block edge status through the beta variable in the row
      double beta_val = 1.0;
      for (const auto& t : c.terms)
        if (eb.model.vars[t.var].group == "beta") beta_val = res.values[t.var];
      if (beta_val < 1.0 - 1e-7) continue;
      double act = eb.model.eval_expr(c.terms, res.values);
      CHECK(std::abs(act - c.rhs) <= 1e-7);
    }
  }
}
