#include "floodmit/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace floodmit::engine {

using model::LinConstraint;
using model::LinTerm;
using model::ModelIR;
using model::QuadConstraint;
using model::Sense;
using model::VarKind;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void variable_bounds(const ModelIR& m, std::vector<double>& lo, std::vector<double>& hi) {
  const size_t n = m.vars.size();
  lo.resize(n);
  hi.resize(n);
  for (size_t j = 0; j < n; ++j) {
    lo[j] = m.vars[j].lo;
    hi[j] = m.vars[j].hi;
  }
}

}  // namespace

SolveResult solve_lp(const ModelIR& m, const EngineConfig& cfg) {
  detail::SimplexSolver solver(m);
  std::vector<double> lo, hi;
  variable_bounds(m, lo, hi);
  auto out = solver.solve(lo, hi, cfg);
  SolveResult res;
  res.status = out.status;
  res.pivots = out.pivots;
  if (out.status == SolveStatus::Optimal) {
    res.objective = out.objective;
    res.best_bound = out.objective;
    res.values = std::move(out.x);
  }
  return res;
}

SolveResult solve_milp(const ModelIR& m, const EngineConfig& cfg,
                       const std::vector<double>* warmstart) {
  if (!m.quad_cons.empty())
    throw EngineError("solve_milp: model has quadratic rows; use oa_refine");

  std::vector<int> binaries;
  for (size_t j = 0; j < m.vars.size(); ++j)
    if (m.vars[j].kind == VarKind::Binary) binaries.push_back(static_cast<int>(j));
  if (binaries.empty()) return solve_lp(m, cfg);

  detail::SimplexSolver solver(m);

  struct Node {
    double bound;
    long seq;
    std::vector<double> lo, hi;
  };
  struct Worse {
    bool operator()(const Node& a, const Node& b) const {
      if (a.bound != b.bound) return a.bound > b.bound;
      return a.seq > b.seq;  // FIFO among equal bounds
    }
  };
  std::priority_queue<Node, std::vector<Node>, Worse> open;

  SolveResult res;
  double incumbent = kInf;
  std::vector<double> inc_values;

  if (warmstart && warmstart->size() == m.vars.size()) {
    bool integral = true;
    for (int b : binaries) {
      double v = (*warmstart)[b];
      if (std::min(v, 1.0 - v) > cfg.integrality_tol) integral = false;
    }
    if (integral && m.max_violation(*warmstart) <= cfg.feasibility_tol) {
      incumbent = m.eval_objective(*warmstart);
      inc_values = *warmstart;
    }
  }

  Node root;
  root.bound = -kInf;
  root.seq = 0;
  variable_bounds(m, root.lo, root.hi);
  open.push(std::move(root));
  long seq = 1;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    double gap_eps = cfg.relative_gap * (1.0 + std::abs(incumbent));
    if (incumbent < kInf && node.bound >= incumbent - gap_eps) {
      res.best_bound = std::min(incumbent, node.bound);
      break;
    }
    if (res.nodes >= cfg.node_cap) {
      res.status = SolveStatus::CapReached;
      res.objective = incumbent;
      res.values = inc_values;
      res.best_bound = std::isfinite(node.bound) ? node.bound : -kInf;
      return res;
    }
    ++res.nodes;

    auto lp = solver.solve(node.lo, node.hi, cfg);
    res.pivots += lp.pivots;
    if (lp.status == SolveStatus::Infeasible) continue;
    if (lp.status == SolveStatus::Unbounded) {
      res.status = SolveStatus::Unbounded;
      return res;
    }
    if (lp.status == SolveStatus::CapReached) {
      res.status = SolveStatus::CapReached;
      res.objective = incumbent;
      res.values = inc_values;
      return res;
    }
    res.bound_trace.push_back(std::isfinite(node.bound)
                                  ? std::min(node.bound, lp.objective)
                                  : lp.objective);
    if (incumbent < kInf && lp.objective >= incumbent - gap_eps) continue;

    int branch_var = -1;
    double branch_score = cfg.integrality_tol;  // anything closer to 0/1 counts as integral
    for (int b : binaries) {
      double v = lp.x[b];
      double score = std::min(v, 1.0 - v);
      if (score > branch_score) {
        branch_score = score;
        branch_var = b;
      }
    }
    if (branch_var < 0) {
      incumbent = lp.objective;
      inc_values = lp.x;
      continue;
    }

    Node down;
    down.bound = lp.objective;
    down.seq = seq++;
    down.lo = node.lo;
    down.hi = node.hi;
    down.hi[branch_var] = 0.0;
    Node up;
    up.bound = lp.objective;
    up.seq = seq++;
    up.lo = std::move(node.lo);
    up.hi = std::move(node.hi);
    up.lo[branch_var] = 1.0;
    open.push(std::move(down));
    open.push(std::move(up));
  }

  if (incumbent < kInf) {
    res.status = SolveStatus::Optimal;
    res.objective = incumbent;
    res.values = std::move(inc_values);
    if (res.best_bound == -kInf) res.best_bound = incumbent;  // tree exhausted
    return res;
  }
  res.status = SolveStatus::Infeasible;
  return res;
}

LinConstraint oa_cut_for(const ModelIR& m, const QuadConstraint& q,
                         const std::vector<double>& v0, int serial) {
  LinConstraint cut;
  cut.name = q.name + "_cut" + std::to_string(serial);
  cut.sense = Sense::LE;

  // Disc rows get the supporting tangent of the circle itself.
  if (q.quad.size() == 2) {
    double c0 = q.quad[0].coef;
    bool uniform = std::abs(q.quad[1].coef - c0) < 1e-15;
    int ip = q.quad[0].var, iq = q.quad[1].var;
    double p0 = v0[ip], q0 = v0[iq];
    double norm = std::hypot(p0, q0);
    if (uniform && norm > 1e-10) {
      if (q.disc_scale_var >= 0) {
        cut.terms = {{ip, p0 / norm}, {iq, q0 / norm}, {q.disc_scale_var, -q.disc_radius}};
        cut.rhs = 0.0;
        return cut;
      }
      if (q.lin.empty() && q.rhs > 0.0) {
        double radius = std::sqrt(q.rhs / c0);
        cut.terms = {{ip, p0 / norm}, {iq, q0 / norm}};
        cut.rhs = radius;
        return cut;
      }
    }
  }

  // Plain gradient cut of the convex left side.
  std::map<int, double> terms;
  double rhs = q.rhs;
  for (const auto& t : q.quad) {
    terms[t.var] += 2.0 * t.coef * v0[t.var];
    rhs += t.coef * v0[t.var] * v0[t.var];
  }
  for (const auto& t : q.lin) terms[t.var] += t.coef;
  for (const auto& [var, coef] : terms)
    if (coef != 0.0) cut.terms.push_back({var, coef});
  cut.rhs = rhs;
  (void)m;
  return cut;
}

SolveResult oa_refine(const ModelIR& m, const EngineConfig& cfg,
                      const std::vector<double>* warmstart) {
  ModelIR work = m;
  work.quad_cons.clear();

  SolveResult res;
  long nodes = 0, pivots = 0;
  int cuts = 0;
  for (int round = 0; round <= cfg.cut_cap; ++round) {
    res = work.binary_count() > 0 ? solve_milp(work, cfg, warmstart) : solve_lp(work, cfg);
    nodes += res.nodes;
    pivots += res.pivots;
    res.nodes = nodes;
    res.pivots = pivots;
    res.cuts = cuts;
    if (res.status != SolveStatus::Optimal) return res;

    const QuadConstraint* worst = nullptr;
    double worst_viol = cfg.oa_violation_tol;
    for (const auto& q : m.quad_cons) {
      double lhs = 0.0;
      for (const auto& t : q.quad) lhs += t.coef * res.values[t.var] * res.values[t.var];
      for (const auto& t : q.lin) lhs += t.coef * res.values[t.var];
      double viol = lhs - q.rhs;
      if (viol > worst_viol) {
        worst_viol = viol;
        worst = &q;
      }
    }
    if (!worst) return res;
    work.lin_cons.push_back(oa_cut_for(m, *worst, res.values, cuts));
    ++cuts;
  }
  res.status = SolveStatus::CapReached;
  res.cuts = cuts;
  return res;
}

SolveResult solve_model(const ModelIR& m, const EngineConfig& cfg,
                        const std::vector<double>* warmstart) {
  if (!m.quad_cons.empty()) return oa_refine(m, cfg, warmstart);
  if (m.binary_count() > 0) return solve_milp(m, cfg, warmstart);
  return solve_lp(m, cfg);
}

}  // namespace floodmit::engine
