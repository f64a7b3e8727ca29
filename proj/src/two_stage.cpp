#include "floodmit/two_stage.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

namespace floodmit::study {

using model::LinTerm;
using model::Sense;
using model::VarKind;

const char* to_string(StudyKind k) {
  switch (k) {
    case StudyKind::SP: return "sp";
    case StudyKind::RO: return "ro";
    case StudyKind::EV: return "ev";
    case StudyKind::EEV: return "eev";
    case StudyKind::EWS: return "ews";
    case StudyKind::MV: return "mv";
    case StudyKind::MMV: return "mmv";
    case StudyKind::MWS: return "mws";
  }
  return "sp";
}

std::optional<StudyKind> study_kind_from_string(const std::string& s) {
  for (StudyKind k : {StudyKind::SP, StudyKind::RO, StudyKind::EV, StudyKind::EEV, StudyKind::EWS,
                      StudyKind::MV, StudyKind::MMV, StudyKind::MWS})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

StudyContext make_context(const GridCase& gc, const ScenarioSet& scen, PfVariant v,
                          const engine::EngineConfig& ecfg) {
  StudyContext ctx;
  ctx.gc = &gc;
  ctx.scen = &scen;
  ctx.variant = v;
  ctx.costs = default_cost_table(gc, scen.level_count());
  for (const auto& s : scen.scenarios) ctx.xi.push_back(convert_depths(s.depths, scen.thresholds));
  ctx.xi_mean = convert_depths(aggregate_mean(scen).depths, scen.thresholds);
  ctx.xi_max = convert_depths(aggregate_max(scen).depths, scen.thresholds);
  ctx.bm = bigm::calibrate(gc, v, gc.config);
  ctx.vg = recourse::variant_geometry(v, gc.config);
  ctx.ecfg = ecfg;
  ctx.ecfg.feasibility_tol = gc.config.tol.feasibility;
  ctx.ecfg.integrality_tol = gc.config.tol.integrality;
  ctx.ecfg.oa_violation_tol = gc.config.tol.oa_violation;
  return ctx;
}

ExtensiveBuild build_extensive(const StudyContext& ctx, bool worst_case,
                               const std::vector<const IndicatorMatrix*>& xis,
                               const std::vector<double>& probs, long budget) {
  const GridCase& gc = *ctx.gc;
  const int levels = ctx.levels();
  const int nsub = static_cast<int>(gc.substations.size());

  ExtensiveBuild eb;
  eb.levels = levels;
  eb.weights = probs;
  auto& m = eb.model;

  eb.x_vars.assign(static_cast<size_t>(nsub) * levels, -1);
  for (int k = 0; k < nsub; ++k) {
    for (int r = 1; r <= levels; ++r) {
      double hi = r == levels ? 0.0 : 1.0;  // top level is unattainable
      eb.x_vars[static_cast<size_t>(k) * levels + (r - 1)] = m.add_var(
          "x_" + std::to_string(k) + "_" + std::to_string(r), VarKind::Binary, 0.0, hi, "x");
    }
  }
  for (int k = 0; k < nsub; ++k)
    for (int r = 1; r < levels; ++r)
      m.add_lin("cum_" + std::to_string(k) + "_" + std::to_string(r),
                {{eb.x_vars[static_cast<size_t>(k) * levels + r], 1.0},
                 {eb.x_vars[static_cast<size_t>(k) * levels + (r - 1)], -1.0}},
                Sense::LE, 0.0);
  {
    std::vector<LinTerm> knap;
    for (int k = 0; k < nsub; ++k)
      for (int r = 1; r <= levels; ++r)
        knap.push_back({eb.x_vars[static_cast<size_t>(k) * levels + (r - 1)],
                        static_cast<double>(ctx.costs.at(k, r))});
    m.add_lin("budget", std::move(knap), Sense::LE, static_cast<double>(budget));
  }

  recourse::XRef xr;
  xr.vars = &eb.x_vars;
  xr.levels = levels;
  for (size_t w = 0; w < xis.size(); ++w)
    eb.blocks.push_back(recourse::emit_block(m, gc, *xis[w], xr, ctx.vg, ctx.bm,
                                             recourse::ChiMode::Free,
                                             "w" + std::to_string(w) + "_"));

  if (!worst_case) {
    std::vector<LinTerm> obj;
    double offset = 0.0;
    for (size_t w = 0; w < eb.blocks.size(); ++w) {
      for (const auto& t : eb.blocks[w].objective) obj.push_back({t.var, probs[w] * t.coef});
      offset += probs[w] * eb.blocks[w].obj_offset;
    }
    m.set_objective(std::move(obj), offset);
  } else {
    double zmax = 0.0;
    for (const auto& d : gc.loads) zmax += gc.config.lambda_shed * d.p_load;
    for (const auto& g : gc.generators) zmax += gc.config.lambda_over * std::max(g.p_max, 0.0);
    eb.epigraph = m.add_var("z", VarKind::Continuous, 0.0, zmax + 1.0, "z");
    for (size_t w = 0; w < eb.blocks.size(); ++w) {
      std::vector<LinTerm> t{{eb.epigraph, 1.0}};
      for (const auto& bt : eb.blocks[w].objective) t.push_back({bt.var, -bt.coef});
      m.add_lin("epi_" + std::to_string(w), std::move(t), Sense::GE, eb.blocks[w].obj_offset);
    }
    m.set_objective({{eb.epigraph, 1.0}}, 0.0);
  }
  m.check();
  return eb;
}

MitigationPlan extract_plan(const ExtensiveBuild& eb, const std::vector<double>& values,
                            const GridCase& gc) {
  MitigationPlan p =
      MitigationPlan::empty(static_cast<int>(gc.substations.size()), eb.levels);
  for (int k = 0; k < p.subs; ++k)
    for (int r = 1; r <= eb.levels; ++r)
      if (values[eb.x_vars[static_cast<size_t>(k) * eb.levels + (r - 1)]] > 0.5)
        p.set(k, r, true);
  return p;
}

double recourse_value(const StudyContext& ctx, const IndicatorMatrix& xi,
                      const MitigationPlan& plan) {
  auto rb = recourse::build_recourse(ctx.variant, *ctx.gc, xi, plan, ctx.bm);
  return recourse::solve_recourse(rb, *ctx.gc, ctx.ecfg).objective;
}

namespace {

long coverage_sum(const StudyContext& ctx, const IndicatorMatrix& xi) {
  long total = 0;
  for (size_t k = 0; k < ctx.gc->substations.size(); ++k)
    total += coverage_cost(static_cast<int>(k), xi, ctx.costs);
  return total;
}

// Assemble a full extensive-form point from a plan and its per-scenario
// recourse solutions; used to install warmstarts.
std::vector<double> assemble_point(const StudyContext& ctx, const ExtensiveBuild& eb,
                                   const MitigationPlan& plan,
                                   const std::vector<recourse::RecourseSolution>& sols,
                                   const std::vector<recourse::RecourseBuild>& builds,
                                   const std::vector<const IndicatorMatrix*>& xis) {
  std::vector<double> v(eb.model.vars.size(), 0.0);
  for (int k = 0; k < plan.subs; ++k)
    for (int r = 1; r <= eb.levels; ++r)
      v[eb.x_vars[static_cast<size_t>(k) * eb.levels + (r - 1)]] = plan.at(k, r) ? 1.0 : 0.0;
  double worst = 0.0;
  for (size_t w = 0; w < eb.blocks.size(); ++w) {
    const auto& dst = eb.blocks[w];
    const auto& src = builds[w].vars;
    const auto& val = sols[w].values;
    auto copy = [&](const std::vector<int>& to, const std::vector<int>& from) {
      for (size_t i = 0; i < to.size(); ++i)
        if (to[i] >= 0 && from[i] >= 0) v[to[i]] = val[from[i]];
    };
    copy(dst.theta, src.theta);
    copy(dst.delta, src.delta);
    copy(dst.gen_p, src.gen_p);
    copy(dst.gen_ov, src.gen_ov);
    copy(dst.gen_q, src.gen_q);
    copy(dst.flow_p, src.flow_p);
    copy(dst.flow_p_fwd, src.flow_p_fwd);
    copy(dst.flow_q_fwd, src.flow_q_fwd);
    copy(dst.flow_p_rev, src.flow_p_rev);
    copy(dst.flow_q_rev, src.flow_q_rev);
    copy(dst.sin_fwd, src.sin_fwd);
    copy(dst.sin_rev, src.sin_rev);
    copy(dst.cos_fwd, src.cos_fwd);
    copy(dst.cos_rev, src.cos_rev);
    copy(dst.phi, src.phi);
    if (dst.chi >= 0) v[dst.chi] = sols[w].chi;
    ComponentStatus st = component_status(*ctx.gc, plan, *xis[w]);
    for (size_t k = 0; k < dst.alpha.size(); ++k)
      if (dst.alpha[k] >= 0)
        v[dst.alpha[k]] = st.bus_up[ctx.gc->sub_buses[k].front()] ? 1.0 : 0.0;
    for (size_t e = 0; e < dst.beta.size(); ++e)
      if (dst.beta[e] >= 0) v[dst.beta[e]] = st.edge_up[e] ? 1.0 : 0.0;
    worst = std::max(worst, sols[w].objective);
  }
  if (eb.epigraph >= 0) v[eb.epigraph] = worst;
  return v;
}

struct ExtensiveOutcome {
  double z = 0.0;
  MitigationPlan plan;
  long nodes = 0;
};

// Per-scenario fixed-plan recourse solves shared by warmstart assembly and
// plan evaluation.
std::vector<recourse::RecourseSolution> recourse_sweep(
    const StudyContext& ctx, const std::vector<const IndicatorMatrix*>& xis,
    const MitigationPlan& plan, std::vector<recourse::RecourseBuild>* keep_builds = nullptr) {
  std::vector<recourse::RecourseSolution> out(xis.size());
  std::vector<recourse::RecourseBuild> builds(xis.size());
  for (size_t w = 0; w < xis.size(); ++w) {
    builds[w] = recourse::build_recourse(ctx.variant, *ctx.gc, *xis[w], plan, ctx.bm);
    out[w] = recourse::solve_recourse(builds[w], *ctx.gc, ctx.ecfg);
  }
  if (keep_builds) *keep_builds = std::move(builds);
  return out;
}

}  // namespace

MitigationPlan greedy_warmstart(const StudyContext& ctx, long budget, bool worst_case) {
  const GridCase& gc = *ctx.gc;
  const int levels = ctx.levels();
  const int nsub = static_cast<int>(gc.substations.size());
  MitigationPlan plan = MitigationPlan::empty(nsub, levels);
  if (budget <= 0) return plan;

  std::vector<double> sub_load(nsub, 0.0);
  std::vector<double> sub_gen(nsub, 0.0);
  for (const auto& d : gc.loads) sub_load[gc.bus_sub[gc.bus_index.at(d.bus_id)]] += d.p_load;
  for (const auto& g : gc.generators)
    sub_gen[gc.bus_sub[gc.bus_index.at(g.bus_id)]] += std::max(g.p_max, 0.0);
  std::vector<double> edge_cap(gc.edges.size(), 0.0);
  for (size_t e = 0; e < gc.edges.size(); ++e)
    for (int l : gc.edges[e].branches) edge_cap[e] += gc.branches[l].s_max;
  double total_load = gc.total_p_load();

  auto sub_up = [&](const MitigationPlan& p, const IndicatorMatrix& xi, int k) {
    for (int r = 1; r <= levels; ++r)
      if (xi.at(k, r) && !p.at(k, r)) return false;
    return true;
  };
  auto score = [&](const MitigationPlan& p, const IndicatorMatrix& xi) {
    double s = 0.0;
    std::vector<char> up(nsub);
    for (int k = 0; k < nsub; ++k) {
      up[k] = sub_up(p, xi, k);
      if (up[k]) s += ctx.greedy_w_load * sub_load[k];
    }
    for (size_t e = 0; e < gc.edges.size(); ++e) {
      int ka = gc.bus_sub[gc.edges[e].from_bus];
      int kb = gc.bus_sub[gc.edges[e].to_bus];
      if (up[ka] && up[kb]) s += ctx.greedy_w_cap * edge_cap[e];
    }
    return s;
  };
  auto worst_scenario = [&](const MitigationPlan& p) {
    size_t worst = 0;
    double worst_sev = -1.0;
    for (size_t w = 0; w < ctx.xi.size(); ++w) {
      double serviceable = 0.0, avail = 0.0;
      for (int k = 0; k < nsub; ++k) {
        if (!sub_up(p, ctx.xi[w], k)) continue;
        serviceable += sub_load[k];
        avail += sub_gen[k];
      }
      double sev = total_load - std::min(serviceable, avail);
      if (sev > worst_sev + 1e-12) {
        worst_sev = sev;
        worst = w;
      }
    }
    return worst;
  };

  long remaining = budget;
  while (true) {
    size_t wstar = worst_case ? worst_scenario(plan) : 0;
    int best_k = -1;
    double best_rate = 0.0;
    for (int k = 0; k < nsub; ++k) {
      int next = plan.achieved_level(k) + 1;
      if (next > levels - 1) continue;  // top level cannot be bought
      long c = ctx.costs.at(k, next);
      if (c > remaining) continue;
      MitigationPlan trial = plan;
      trial.set(k, next, true);
      double gain = 0.0;
      if (worst_case) {
        gain = score(trial, ctx.xi[wstar]) - score(plan, ctx.xi[wstar]);
      } else {
        for (size_t w = 0; w < ctx.xi.size(); ++w)
          gain += ctx.scen->scenarios[w].prob * (score(trial, ctx.xi[w]) - score(plan, ctx.xi[w]));
      }
      double rate = gain / static_cast<double>(c);
      if (rate > best_rate + 1e-12) {
        best_rate = rate;
        best_k = k;
      }
    }
    if (best_k < 0) break;
    int next = plan.achieved_level(best_k) + 1;
    plan.set(best_k, next, true);
    remaining -= ctx.costs.at(best_k, next);
  }
  return plan;
}

namespace {

ExtensiveOutcome solve_extensive_impl(const StudyContext& ctx, bool worst_case,
                                      const std::vector<const IndicatorMatrix*>& xis,
                                      const std::vector<double>& probs, long budget,
                                      const NoGoodCut* cut) {
  ExtensiveBuild eb = build_extensive(ctx, worst_case, xis, probs, budget);
  if (cut) {
    std::vector<LinTerm> t;
    for (auto [k, r] : cut->zero_coords)
      t.push_back({eb.x_vars[static_cast<size_t>(k) * eb.levels + (r - 1)], 1.0});
    eb.model.add_lin("no_good", std::move(t), Sense::GE, 1.0);
  }

  std::vector<double> warm;
  const std::vector<double>* warm_ptr = nullptr;
  if (ctx.use_warmstart && !cut) {
    MitigationPlan g = greedy_warmstart(ctx, budget, worst_case);
    std::vector<recourse::RecourseBuild> builds;
    auto sols = recourse_sweep(ctx, xis, g, &builds);
    warm = assemble_point(ctx, eb, g, sols, builds, xis);
    warm_ptr = &warm;
  }

  auto res = engine::solve_model(eb.model, ctx.ecfg, warm_ptr);
  if (res.status == engine::SolveStatus::Infeasible)
    throw engine::EngineError("extensive form reported infeasible (recourse should be complete)");
  if (res.status != engine::SolveStatus::Optimal)
    throw engine::EngineError("extensive form did not solve to optimality");
  ExtensiveOutcome out;
  out.z = res.objective;
  out.plan = extract_plan(eb, res.values, *ctx.gc);
  out.nodes = res.nodes;
  return out;
}

}  // namespace

StudyResult solve_study(const StudyContext& ctx, StudyKind kind, long budget) {
  auto t0 = std::chrono::steady_clock::now();
  StudyResult out;
  out.kind = kind;
  out.variant = ctx.variant;
  out.budget = budget;

  std::vector<const IndicatorMatrix*> xis;
  std::vector<double> probs;
  for (size_t w = 0; w < ctx.xi.size(); ++w) {
    xis.push_back(&ctx.xi[w]);
    probs.push_back(ctx.scen->scenarios[w].prob);
  }

  auto finish = [&](double z) {
    out.z = z;
    out.millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
    return out;
  };
  auto eval_scenarios = [&](const MitigationPlan& plan) {
    auto sols = recourse_sweep(ctx, xis, plan);
    out.scenario_objectives.clear();
    for (const auto& s : sols) out.scenario_objectives.push_back(s.objective);
  };

  switch (kind) {
    case StudyKind::SP:
    case StudyKind::RO: {
      auto oc = solve_extensive_impl(ctx, kind == StudyKind::RO, xis, probs, budget, nullptr);
      out.plan = oc.plan;
      out.nodes = oc.nodes;
      eval_scenarios(oc.plan);
      return finish(oc.z);
    }
    case StudyKind::EV:
    case StudyKind::MV: {
      bool mv = kind == StudyKind::MV;
      const IndicatorMatrix& agg = mv ? ctx.xi_max : ctx.xi_mean;
      long cap = coverage_sum(ctx, agg);
      long f = std::min(budget, cap);
      auto oc = solve_extensive_impl(ctx, false, {&agg}, {1.0}, f, nullptr);
      out.plan = oc.plan;
      out.nodes = oc.nodes;
      out.scenario_objectives = {oc.z};
      return finish(oc.z);
    }
    case StudyKind::EEV:
    case StudyKind::MMV: {
      StudyKind inner = kind == StudyKind::EEV ? StudyKind::EV : StudyKind::MV;
      StudyResult ev = solve_study(ctx, inner, budget);
      out.plan = ev.plan;
      out.nodes = ev.nodes;
      eval_scenarios(*ev.plan);
      double z = 0.0;
      if (kind == StudyKind::EEV) {
        for (size_t w = 0; w < out.scenario_objectives.size(); ++w)
          z += probs[w] * out.scenario_objectives[w];
      } else {
        for (double v : out.scenario_objectives) z = std::max(z, v);
      }
      return finish(z);
    }
    case StudyKind::EWS:
    case StudyKind::MWS: {
      // Independent per-scenario problems; parallel solves, ordered reduce.
      std::vector<std::future<ExtensiveOutcome>> futs;
      for (size_t w = 0; w < xis.size(); ++w) {
        futs.push_back(std::async(std::launch::async, [&, w]() {
          long f = std::min(budget, coverage_sum(ctx, *xis[w]));
          return solve_extensive_impl(ctx, false, {xis[w]}, {1.0}, f, nullptr);
        }));
      }
      double z = kind == StudyKind::EWS ? 0.0 : -1.0;
      for (size_t w = 0; w < futs.size(); ++w) {
        auto oc = futs[w].get();
        out.nodes += oc.nodes;
        out.scenario_objectives.push_back(oc.z);
        if (kind == StudyKind::EWS)
          z += probs[w] * oc.z;
        else
          z = std::max(z, oc.z);
      }
      return finish(z);
    }
  }
  return finish(0.0);
}

double eval_plan(const StudyContext& ctx, StudyKind kind, const MitigationPlan& plan) {
  std::vector<const IndicatorMatrix*> xis;
  for (const auto& x : ctx.xi) xis.push_back(&x);
  auto sols = recourse_sweep(ctx, xis, plan);
  if (kind == StudyKind::RO || kind == StudyKind::MMV || kind == StudyKind::MWS) {
    double z = 0.0;
    for (const auto& s : sols) z = std::max(z, s.objective);
    return z;
  }
  double z = 0.0;
  for (size_t w = 0; w < sols.size(); ++w) z += ctx.scen->scenarios[w].prob * sols[w].objective;
  return z;
}

long optimized_budget_threshold(const StudyContext& ctx, StudyKind kind) {
  if (kind != StudyKind::RO && kind != StudyKind::MWS)
    throw InputError("optimized_budget_threshold: defined for RO and MWS only");
  long sp_cap = budget_threshold(ThresholdKind::SP, *ctx.gc, *ctx.scen, ctx.costs);

  auto min_cost_at_opt = [&](const std::vector<const IndicatorMatrix*>& xis,
                             const std::vector<double>& probs, bool worst_case, long cap) {
    auto base = solve_extensive_impl(ctx, worst_case, xis, probs, cap, nullptr);
    double pin = base.z + 1e-9 * (1.0 + std::abs(base.z));
    ExtensiveBuild eb = build_extensive(ctx, worst_case, xis, probs, cap);
    // Pin the loss, then minimize plan cost.
    if (worst_case) {
      int zv = eb.epigraph;
      eb.model.vars[zv].hi = pin;
    } else {
      std::vector<LinTerm> t;
      double offset = 0.0;
      for (size_t w = 0; w < eb.blocks.size(); ++w) {
        for (const auto& bt : eb.blocks[w].objective) t.push_back({bt.var, probs[w] * bt.coef});
        offset += probs[w] * eb.blocks[w].obj_offset;
      }
      eb.model.add_lin("loss_pin", std::move(t), Sense::LE, pin - offset);
    }
    std::vector<LinTerm> cost_obj;
    for (int k = 0; k < static_cast<int>(ctx.gc->substations.size()); ++k)
      for (int r = 1; r <= eb.levels; ++r)
        cost_obj.push_back({eb.x_vars[static_cast<size_t>(k) * eb.levels + (r - 1)],
                            static_cast<double>(ctx.costs.at(k, r))});
    eb.model.set_objective(std::move(cost_obj), 0.0);
    auto res = engine::solve_model(eb.model, ctx.ecfg);
    if (res.status != engine::SolveStatus::Optimal)
      throw engine::EngineError("threshold pass did not solve");
    return plan_cost(extract_plan(eb, res.values, *ctx.gc), ctx.costs);
  };

  if (kind == StudyKind::RO) {
    std::vector<const IndicatorMatrix*> xis;
    std::vector<double> probs;
    for (size_t w = 0; w < ctx.xi.size(); ++w) {
      xis.push_back(&ctx.xi[w]);
      probs.push_back(ctx.scen->scenarios[w].prob);
    }
    return min_cost_at_opt(xis, probs, true, sp_cap);
  }
  long worst = 0;
  for (size_t w = 0; w < ctx.xi.size(); ++w) {
    long cap = coverage_sum(ctx, ctx.xi[w]);
    worst = std::max(worst, min_cost_at_opt({&ctx.xi[w]}, {1.0}, false, cap));
  }
  return worst;
}

UniquenessReport check_uniqueness(const StudyContext& ctx, StudyKind kind, long budget) {
  if (kind != StudyKind::SP && kind != StudyKind::RO)
    throw InputError("check_uniqueness: defined for SP and RO");
  std::vector<const IndicatorMatrix*> xis;
  std::vector<double> probs;
  for (size_t w = 0; w < ctx.xi.size(); ++w) {
    xis.push_back(&ctx.xi[w]);
    probs.push_back(ctx.scen->scenarios[w].prob);
  }
  UniquenessReport rep;
  auto base = solve_extensive_impl(ctx, kind == StudyKind::RO, xis, probs, budget, nullptr);
  rep.z = base.z;
  rep.plan = base.plan;
  NoGoodCut cut = no_good_cut(base.plan);
  if (cut.infeasible_by_construction) {
    rep.unique = true;
    return rep;
  }
  ExtensiveOutcome restricted;
  try {
    restricted = solve_extensive_impl(ctx, kind == StudyKind::RO, xis, probs, budget, &cut);
  } catch (const engine::EngineError&) {
    rep.unique = true;  // cut emptied the feasible set
    return rep;
  }
  double tol = 1e-9 * (1.0 + std::abs(base.z));
  if (restricted.z > base.z + tol) {
    rep.unique = true;
  } else {
    rep.unique = false;
    rep.alternate = restricted.plan;
    rep.alternate_z = restricted.z;
  }
  return rep;
}

}  // namespace floodmit::study
