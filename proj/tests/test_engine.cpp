#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "floodmit/engine.hpp"
#include "floodmit/lp_export.hpp"
#include "support/toys.hpp"

using namespace floodmit;
using namespace floodmit::engine;
using model::LinTerm;
using model::ModelIR;
using model::Sense;
using model::VarKind;

TEST_CASE("lp basics") {
  // max x s.t. x <= 1  (as min -x)
  ModelIR m;
  int x = m.add_var("x", VarKind::Continuous, 0.0, 10.0);
  m.add_lin("c", {{x, 1.0}}, Sense::LE, 1.0);
  m.set_objective({{x, -1.0}}, 0.0);
  auto res = solve_lp(m);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(-1.0));
  CHECK(res.values[x] == doctest::Approx(1.0));
}

TEST_CASE("lp infeasible pair") {
  ModelIR m;
  int x = m.add_var("x", VarKind::Continuous, -10.0, 10.0);
  m.add_lin("a", {{x, 1.0}}, Sense::GE, 2.0);
  m.add_lin("b", {{x, 1.0}}, Sense::LE, 1.0);
  m.set_objective({{x, 1.0}}, 0.0);
  CHECK(solve_lp(m).status == SolveStatus::Infeasible);
}

TEST_CASE("lp with equalities and upper-bounded vars") {
  // min 2a + b  s.t.  a + b = 1,  b <= 0.4, a <= 0.8
  ModelIR m;
  int a = m.add_var("a", VarKind::Continuous, 0.0, 0.8);
  int b = m.add_var("b", VarKind::Continuous, 0.0, 0.4);
  m.add_lin("sum", {{a, 1.0}, {b, 1.0}}, Sense::EQ, 1.0);
  m.set_objective({{a, 2.0}, {b, 1.0}}, 0.0);
  auto res = solve_lp(m);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.values[b] == doctest::Approx(0.4));
  CHECK(res.values[a] == doctest::Approx(0.6));
  CHECK(res.objective == doctest::Approx(1.6));
}

TEST_CASE("lp free variables") {
  // min x + y s.t. x + y >= -3, x - y = 1
  ModelIR m;
  double inf = std::numeric_limits<double>::infinity();
  int x = m.add_var("x", VarKind::Continuous, -inf, inf);
  int y = m.add_var("y", VarKind::Continuous, -inf, inf);
  m.add_lin("lb", {{x, 1.0}, {y, 1.0}}, Sense::GE, -3.0);
  m.add_lin("eq", {{x, 1.0}, {y, -1.0}}, Sense::EQ, 1.0);
  m.set_objective({{x, 1.0}, {y, 1.0}}, 0.0);
  auto res = solve_lp(m);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(-3.0));
  CHECK(res.values[x] - res.values[y] == doctest::Approx(1.0));
}

TEST_CASE("milp knapsack") {
  // max 2x1 + 3x2 s.t. x1 + x2 <= 1 -> 3
  ModelIR m;
  int x1 = m.add_var("x1", VarKind::Binary, 0.0, 1.0);
  int x2 = m.add_var("x2", VarKind::Binary, 0.0, 1.0);
  m.add_lin("cap", {{x1, 1.0}, {x2, 1.0}}, Sense::LE, 1.0);
  m.set_objective({{x1, -2.0}, {x2, -3.0}}, 0.0);
  auto res = solve_milp(m);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(-3.0));
  CHECK(res.values[x2] == doctest::Approx(1.0));
  CHECK(std::abs(res.best_bound - res.objective) <= 1e-9 * (1 + std::abs(res.objective)));
}

TEST_CASE("milp infeasible") {
  ModelIR m;
  int x1 = m.add_var("x1", VarKind::Binary, 0.0, 1.0);
  int x2 = m.add_var("x2", VarKind::Binary, 0.0, 1.0);
  m.add_lin("a", {{x1, 1.0}, {x2, 1.0}}, Sense::GE, 2.0);
  m.add_lin("b", {{x1, 1.0}, {x2, 1.0}}, Sense::LE, 1.0);
  m.set_objective({{x1, 1.0}}, 0.0);
  CHECK(solve_milp(m).status == SolveStatus::Infeasible);
}

namespace {

// Random bounded model, feasible by construction around a sampled point.
ModelIR random_model(toys::SplitMix& rng, int nbin, int ncont, int nrows) {
  ModelIR m;
  std::vector<double> x0;
  for (int j = 0; j < nbin; ++j) {
    m.add_var("b" + std::to_string(j), VarKind::Binary, 0.0, 1.0);
    x0.push_back(rng.uniform() < 0.5 ? 0.0 : 1.0);
  }
  for (int j = 0; j < ncont; ++j) {
    double lo = rng.range(-2.0, 0.0), hi = lo + rng.range(0.5, 3.0);
    m.add_var("c" + std::to_string(j), VarKind::Continuous, lo, hi);
    x0.push_back(rng.range(lo, hi));
  }
  int n = nbin + ncont;
  for (int i = 0; i < nrows; ++i) {
    std::vector<LinTerm> t;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < 0.5) continue;
      double c = rng.range(-2.0, 2.0);
      t.push_back({j, c});
      act += c * x0[j];
    }
    if (t.empty()) continue;
    double roll = rng.uniform();
    if (roll < 0.45)
      m.add_lin("r" + std::to_string(i), std::move(t), Sense::LE, act + rng.range(0.0, 1.0));
    else if (roll < 0.9)
      m.add_lin("r" + std::to_string(i), std::move(t), Sense::GE, act - rng.range(0.0, 1.0));
    else
      m.add_lin("r" + std::to_string(i), std::move(t), Sense::EQ, act);
  }
  std::vector<LinTerm> obj;
  for (int j = 0; j < n; ++j) obj.push_back({j, rng.range(-1.0, 1.0)});
  m.set_objective(std::move(obj), rng.range(-1.0, 1.0));
  return m;
}

double enumerate_milp(const ModelIR& m, const EngineConfig& cfg) {
  std::vector<int> bins;
  for (size_t j = 0; j < m.vars.size(); ++j)
    if (m.vars[j].kind == VarKind::Binary) bins.push_back(static_cast<int>(j));
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << bins.size()); ++mask) {
    ModelIR fixed = m;
    for (size_t i = 0; i < bins.size(); ++i) {
      double v = (mask >> i) & 1 ? 1.0 : 0.0;
      fixed.vars[bins[i]].lo = v;
      fixed.vars[bins[i]].hi = v;
    }
    auto res = solve_lp(fixed, cfg);
    if (res.status == SolveStatus::Optimal) best = std::min(best, res.objective);
  }
  return best;
}

}  // namespace

TEST_CASE("milp equals exhaustive enumeration on random instances") {
  EngineConfig cfg;
  int solved = 0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    toys::SplitMix rng(1000 + seed);
    int nbin = 1 + rng.below(8);
    ModelIR m = random_model(rng, nbin, 2 + rng.below(4), 3 + rng.below(6));
    double brute = enumerate_milp(m, cfg);
    auto res = solve_milp(m, cfg);
    if (std::isinf(brute)) {
      CHECK(res.status == SolveStatus::Infeasible);
      continue;
    }
    ++solved;
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(brute).epsilon(1e-7));
    CHECK(m.max_violation(res.values) <= 1e-6);
    for (size_t j = 0; j < m.vars.size(); ++j)
      if (m.vars[j].kind == VarKind::Binary)
        CHECK(std::min(res.values[j], 1.0 - res.values[j]) <= 1e-6);
  }
  CHECK(solved > 50);  // generator keeps most instances feasible
}

TEST_CASE("bound trace sandwiches the optimum and runs are deterministic") {
  toys::SplitMix rng(42);
  ModelIR m = random_model(rng, 8, 4, 8);
  auto r1 = solve_milp(m);
  auto r2 = solve_milp(m);
  REQUIRE(r1.status == SolveStatus::Optimal);
  CHECK(r1.nodes == r2.nodes);
  CHECK(r1.objective == r2.objective);
  CHECK(r1.values == r2.values);
  CHECK(r1.bound_trace == r2.bound_trace);
  for (double b : r1.bound_trace) CHECK(b <= r1.objective + 1e-9);
}

TEST_CASE("warmstart never changes the optimum and cannot add nodes") {
  toys::SplitMix rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    ModelIR m = random_model(rng, 6, 3, 6);
    auto cold = solve_milp(m);
    if (cold.status != SolveStatus::Optimal) continue;
    auto warm = solve_milp(m, {}, &cold.values);
    REQUIRE(warm.status == SolveStatus::Optimal);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-12));
    CHECK(warm.nodes <= cold.nodes);
  }
}

TEST_CASE("node cap reports a gap") {
  toys::SplitMix rng(11);
  ModelIR m = random_model(rng, 10, 4, 8);
  EngineConfig tight;
  tight.node_cap = 1;
  auto res = solve_milp(m, tight);
  CHECK(res.status == SolveStatus::CapReached);
}

TEST_CASE("outer approximation reaches the circle boundary") {
  // min -p s.t. p^2 + q^2 <= 1
  ModelIR m;
  int p = m.add_var("p", VarKind::Continuous, -2.0, 2.0);
  int q = m.add_var("q", VarKind::Continuous, -2.0, 2.0);
  m.add_quad("disc", {{p, 1.0}, {q, 1.0}}, {}, 1.0);
  m.set_objective({{p, -1.0}}, 0.0);
  auto res = oa_refine(m);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.values[p] == doctest::Approx(1.0).epsilon(2e-6));
  CHECK(res.cuts > 0);

  // beta = 0 with the box rows forces the origin; no cuts needed
  ModelIR m0;
  int p0 = m0.add_var("p", VarKind::Continuous, -2.0, 2.0);
  int q0 = m0.add_var("q", VarKind::Continuous, -2.0, 2.0);
  int be = m0.add_var("be", VarKind::Continuous, 0.0, 0.0);
  int tag = 0;
  for (auto [v, s] : {std::pair<int, double>{p0, 1.0}, {p0, -1.0}, {q0, 1.0}, {q0, -1.0}})
    m0.add_lin("box" + std::to_string(tag++), {{v, s}, {be, -1.0}}, Sense::LE, 0.0);
  int qid = m0.add_quad("disc", {{p0, 1.0}, {q0, 1.0}}, {{be, -1.0}}, 0.0);
  m0.quad_cons[qid].disc_scale_var = be;
  m0.quad_cons[qid].disc_radius = 1.0;
  m0.set_objective({{p0, -1.0}}, 0.0);
  auto res0 = oa_refine(m0);
  REQUIRE(res0.status == SolveStatus::Optimal);
  CHECK(res0.values[p0] == doctest::Approx(0.0));
  CHECK(res0.cuts == 0);
}

TEST_CASE("disc cuts are supported by the true set (closed form)") {
  ModelIR m;
  int p = m.add_var("p", VarKind::Continuous, -3.0, 3.0);
  int q = m.add_var("q", VarKind::Continuous, -3.0, 3.0);
  int be = m.add_var("be", VarKind::Binary, 0.0, 1.0);
  double radius = 1.7;
  int qid = m.add_quad("disc", {{p, 1.0}, {q, 1.0}}, {{be, -radius * radius}}, 0.0);
  m.quad_cons[qid].disc_scale_var = be;
  m.quad_cons[qid].disc_radius = radius;

  toys::SplitMix rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v0(m.vars.size(), 0.0);
    v0[p] = rng.range(-3.0, 3.0);
    v0[q] = rng.range(-3.0, 3.0);
    if (std::hypot(v0[p], v0[q]) < 1e-6) continue;
    auto cut = oa_cut_for(m, m.quad_cons[0], v0, rep);
    // closed-form maximum of the cut activity over the true disc set, for
    // each binary level of the scale variable
    double a = 0.0, b = 0.0, cbe = 0.0;
    for (const auto& t : cut.terms) {
      if (t.var == p) a = t.coef;
      if (t.var == q) b = t.coef;
      if (t.var == be) cbe = t.coef;
    }
    double max_beta1 = std::hypot(a, b) * radius + cbe;
    double max_beta0 = 0.0;  // disc collapses to the origin
    CHECK(std::max(max_beta0, max_beta1) <= cut.rhs + 1e-9);
    // the violated point itself is cut off
    double viol = v0[p] * v0[p] + v0[q] * v0[q] - radius * radius;
    if (viol > 1e-6) {
      double lhs = a * v0[p] + b * v0[q] + cbe * 1.0;
      CHECK(lhs > cut.rhs + 1e-12);
    }
  }
}

TEST_CASE("gradient cuts underestimate convex quadratic rows") {
  ModelIR m;
  int x = m.add_var("x", VarKind::Continuous, -4.0, 4.0);
  int y = m.add_var("y", VarKind::Continuous, -4.0, 4.0);
  m.add_quad("qc", {{x, 0.7}}, {{y, 1.0}}, 2.0);  // 0.7 x^2 + y <= 2
  toys::SplitMix rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v0 = {rng.range(-4.0, 4.0), rng.range(-4.0, 4.0)};
    auto cut = oa_cut_for(m, m.quad_cons[0], v0, rep);
    // every boundary point of the true set satisfies the cut
    for (double xv = -4.0; xv <= 4.0; xv += 0.25) {
      double ymax = 2.0 - 0.7 * xv * xv;
      double lhs = 0.0;
      for (const auto& t : cut.terms) lhs += t.coef * (t.var == x ? xv : ymax);
      CHECK(lhs <= cut.rhs + 1e-9);
    }
  }
}

TEST_CASE("lp export format") {
  ModelIR m;
  int x = m.add_var("x", VarKind::Binary, 0.0, 1.0);
  int y = m.add_var("y", VarKind::Continuous, -1.5, 2.5);
  int z = m.add_var("z", VarKind::Continuous, 0.0, 1.0);
  m.add_lin("c1", {{x, 2.0}, {y, -1.0}}, Sense::LE, 1.0);
  m.add_lin("c2", {{y, 1.0}}, Sense::GE, -1.0);
  m.add_quad("qc1", {{y, 1.0}, {z, 1.0}}, {{x, -1.0}}, 0.0);
  m.set_objective({{x, 1.0}, {y, 0.5}}, 0.25);
  std::string lp = model::to_lp_format(m);
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("Binaries\n x\n") != std::string::npos);
  CHECK(lp.find("qc1: [ 1 y ^ 2 + 1 z ^ 2 ] - 1 x <= 0") != std::string::npos);
  CHECK(lp.find("-1.5 <= y <= 2.5") != std::string::npos);
  CHECK(lp.find("+ 0.25") != std::string::npos);  // objective offset
  CHECK(lp.rfind("End\n") == lp.size() - 4);
  CHECK(model::to_lp_format(m) == lp);  // byte-identical re-render
}
