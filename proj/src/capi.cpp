#include "floodmit.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "floodmit/case_io.hpp"
#include "floodmit/engine.hpp"
#include "floodmit/geometry.hpp"
#include "floodmit/lp_export.hpp"
#include "floodmit/two_stage.hpp"

using namespace floodmit;

struct fm_case {
  GridCase gc;
};
struct fm_scenarios {
  ScenarioSet set;
};
struct fm_study {
  study::StudyResult result;
  std::string plan_code;
  std::string plan_json;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

fm_status fail(fm_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
fm_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    std::string msg = e.what();
    return fail(msg.rfind("cannot", 0) == 0 ? FM_ERR_IO : FM_ERR_PARSE, msg);
  } catch (const ValidationError& e) {
    return fail(FM_ERR_VALIDATION, e.what());
  } catch (const InputError& e) {
    return fail(FM_ERR_INVALID_ARG, e.what());
  } catch (const engine::EngineError& e) {
    return fail(FM_ERR_SOLVER, e.what());
  } catch (const geom::ConvergenceError& e) {
    return fail(FM_ERR_SOLVER, e.what());
  } catch (const std::exception& e) {
    return fail(FM_ERR_INTERNAL, e.what());
  }
}

fm_status need(bool ok, const char* what) {
  return ok ? FM_OK : fail(FM_ERR_INVALID_ARG, std::string("null or invalid argument: ") + what);
}

study::StudyContext context_for(const fm_case* c, const fm_scenarios* s, PfVariant v) {
  return study::make_context(c->gc, s->set, v);
}

fm_status parse_kind(const char* kind, study::StudyKind& out) {
  auto k = kind ? study::study_kind_from_string(kind) : std::nullopt;
  if (!k) return fail(FM_ERR_INVALID_ARG, "unknown study kind");
  out = *k;
  return FM_OK;
}

fm_status parse_pf(const char* pf, PfVariant& out) {
  auto v = pf ? pf_variant_from_string(pf) : std::nullopt;
  if (!v) return fail(FM_ERR_INVALID_ARG, "unknown power flow variant");
  out = *v;
  return FM_OK;
}

}  // namespace

extern "C" {

const char* fm_version(void) { return "0.1.0"; }

const char* fm_last_error(void) { return g_last_error.c_str(); }

void fm_string_free(char* s) { std::free(s); }

fm_status fm_case_load(const char* path, fm_case** out) {
  if (fm_status st = need(path && out, "fm_case_load")) return st;
  return guarded([&] {
    auto* c = new fm_case{load_case(path)};
    *out = c;
    return FM_OK;
  });
}

fm_status fm_case_parse(const char* json_text, const char* name, fm_case** out) {
  if (fm_status st = need(json_text && out, "fm_case_parse")) return st;
  return guarded([&] {
    auto* c = new fm_case{case_from_json(json_text, name ? name : "")};
    *out = c;
    return FM_OK;
  });
}

void fm_case_free(fm_case* c) { delete c; }

fm_status fm_case_to_json(const fm_case* c, char** out) {
  if (fm_status st = need(c && out, "fm_case_to_json")) return st;
  return guarded([&] {
    *out = dup_string(case_to_json(c->gc));
    return FM_OK;
  });
}

fm_status fm_case_name(const fm_case* c, char** out) {
  if (fm_status st = need(c && out, "fm_case_name")) return st;
  *out = dup_string(c->gc.name);
  return FM_OK;
}

fm_status fm_config_override(fm_case* c, const char* json_text) {
  if (fm_status st = need(c && json_text, "fm_config_override")) return st;
  return guarded([&] {
    c->gc.config = config_overridden(c->gc.config, json_text);
    c->gc.finalize();
    return FM_OK;
  });
}

fm_status fm_config_hash(const fm_case* c, char** out) {
  if (fm_status st = need(c && out, "fm_config_hash")) return st;
  *out = dup_string(fnv1a_hex(config_to_json(c->gc.config)));
  return FM_OK;
}

fm_status fm_scenarios_load(const fm_case* c, const char* path, fm_scenarios** out) {
  if (fm_status st = need(c && path && out, "fm_scenarios_load")) return st;
  return guarded([&] {
    auto* s = new fm_scenarios{load_scenarios(path, c->gc)};
    *out = s;
    return FM_OK;
  });
}

fm_status fm_scenarios_parse(const fm_case* c, const char* json_text, fm_scenarios** out) {
  if (fm_status st = need(c && json_text && out, "fm_scenarios_parse")) return st;
  return guarded([&] {
    auto* s = new fm_scenarios{scenarios_from_json(json_text, c->gc)};
    *out = s;
    return FM_OK;
  });
}

void fm_scenarios_free(fm_scenarios* s) { delete s; }

fm_status fm_scenarios_levels(const fm_scenarios* s, int* out) {
  if (fm_status st = need(s && out, "fm_scenarios_levels")) return st;
  *out = s->set.level_count();
  return FM_OK;
}

fm_status fm_scenarios_count(const fm_scenarios* s, int* out) {
  if (fm_status st = need(s && out, "fm_scenarios_count")) return st;
  *out = static_cast<int>(s->set.scenarios.size());
  return FM_OK;
}

fm_status fm_validate(const fm_case* c, const fm_scenarios* s, char** report) {
  if (fm_status st = need(c && report, "fm_validate")) return st;
  try {
    GridCase copy = c->gc;
    copy.finalize();
    if (s) s->set.validate(c->gc);
    *report = dup_string("");
    return FM_OK;
  } catch (const ValidationError& e) {
    *report = dup_string(e.what());
    return fail(FM_ERR_VALIDATION, e.what());
  } catch (const std::exception& e) {
    return fail(FM_ERR_INTERNAL, e.what());
  }
}

fm_status fm_solve_study(const fm_case* c, const fm_scenarios* s, const char* kind,
                         const char* pf, long budget, int use_warmstart, fm_study** out) {
  if (fm_status st = need(c && s && out, "fm_solve_study")) return st;
  study::StudyKind k;
  PfVariant v;
  if (fm_status st = parse_kind(kind, k)) return st;
  if (fm_status st = parse_pf(pf, v)) return st;
  if (budget < 0) return fail(FM_ERR_INVALID_ARG, "budget must be nonnegative");
  return guarded([&] {
    study::StudyContext ctx = context_for(c, s, v);
    ctx.use_warmstart = use_warmstart != 0;
    auto* handle = new fm_study;
    handle->result = study::solve_study(ctx, k, budget);
    if (handle->result.plan) {
      handle->plan_code = plan_code(*handle->result.plan, c->gc);
      handle->plan_json = plan_to_json(*handle->result.plan, c->gc);
    }
    *out = handle;
    return FM_OK;
  });
}

fm_status fm_study_objective(const fm_study* st, double* out) {
  if (fm_status rc = need(st && out, "fm_study_objective")) return rc;
  *out = st->result.z;
  return FM_OK;
}

fm_status fm_study_plan_code(const fm_study* st, char** out) {
  if (fm_status rc = need(st && out, "fm_study_plan_code")) return rc;
  *out = dup_string(st->plan_code);
  return FM_OK;
}

fm_status fm_study_summary_json(const fm_study* st, char** out) {
  if (fm_status rc = need(st && out, "fm_study_summary_json")) return rc;
  nlohmann::json j;
  j["kind"] = study::to_string(st->result.kind);
  j["pf"] = to_string(st->result.variant);
  j["budget"] = st->result.budget;
  j["z"] = st->result.z;
  j["plan"] = st->plan_code;
  if (!st->plan_json.empty()) j["plan_levels"] = nlohmann::json::parse(st->plan_json);
  j["scenario_objectives"] = st->result.scenario_objectives;
  j["nodes"] = st->result.nodes;
  j["millis"] = st->result.millis;
  *out = dup_string(j.dump());
  return FM_OK;
}

void fm_study_free(fm_study* st) { delete st; }

fm_status fm_budget_threshold(const fm_case* c, const fm_scenarios* s, const char* kind,
                              long* out) {
  if (fm_status st = need(c && s && kind && out, "fm_budget_threshold")) return st;
  ThresholdKind tk;
  std::string k = kind;
  if (k == "sp")
    tk = ThresholdKind::SP;
  else if (k == "eev")
    tk = ThresholdKind::EEV;
  else if (k == "ews")
    tk = ThresholdKind::EWS;
  else if (k == "mmv")
    tk = ThresholdKind::MMV;
  else
    return fail(FM_ERR_INVALID_ARG, "threshold kind must be sp, eev, ews, or mmv");
  return guarded([&] {
    *out = budget_threshold(tk, c->gc, s->set, default_cost_table(c->gc, s->set.level_count()));
    return FM_OK;
  });
}

fm_status fm_optimized_threshold(const fm_case* c, const fm_scenarios* s, const char* kind,
                                 const char* pf, long* out) {
  if (fm_status st = need(c && s && kind && out, "fm_optimized_threshold")) return st;
  PfVariant v;
  if (fm_status st = parse_pf(pf, v)) return st;
  std::string k = kind;
  if (k != "ro" && k != "mws")
    return fail(FM_ERR_INVALID_ARG, "optimized threshold kind must be ro or mws");
  return guarded([&] {
    study::StudyContext ctx = context_for(c, s, v);
    *out = study::optimized_budget_threshold(
        ctx, k == "ro" ? study::StudyKind::RO : study::StudyKind::MWS);
    return FM_OK;
  });
}

fm_status fm_eval_plan(const fm_case* c, const fm_scenarios* s, const char* kind, const char* pf,
                       const char* plan, double* out) {
  if (fm_status st = need(c && s && plan && out, "fm_eval_plan")) return st;
  study::StudyKind k;
  PfVariant v;
  if (fm_status st = parse_kind(kind, k)) return st;
  if (fm_status st = parse_pf(pf, v)) return st;
  return guarded([&] {
    study::StudyContext ctx = context_for(c, s, v);
    MitigationPlan p = plan_from_code(plan, c->gc, s->set.level_count());
    *out = study::eval_plan(ctx, k, p);
    return FM_OK;
  });
}

fm_status fm_plan_cost(const fm_case* c, int levels, const char* plan, long* out) {
  if (fm_status st = need(c && plan && out && levels > 0, "fm_plan_cost")) return st;
  return guarded([&] {
    MitigationPlan p = plan_from_code(plan, c->gc, levels);
    *out = plan_cost(p, default_cost_table(c->gc, levels));
    return FM_OK;
  });
}

fm_status fm_plan_similarity(const fm_case* c, int levels, const char* plan_a,
                             const char* plan_b, double* abs_out, double* rel_out) {
  if (fm_status st =
          need(c && plan_a && plan_b && abs_out && rel_out && levels > 0, "fm_plan_similarity"))
    return st;
  return guarded([&] {
    CostTable costs = default_cost_table(c->gc, levels);
    MitigationPlan a = plan_from_code(plan_a, c->gc, levels);
    MitigationPlan b = plan_from_code(plan_b, c->gc, levels);
    *abs_out = abs_sim(a, b, costs);
    *rel_out = rel_sim(a, b, costs);
    return FM_OK;
  });
}

fm_status fm_uniqueness_json(const fm_case* c, const fm_scenarios* s, const char* kind,
                             const char* pf, long budget, char** out) {
  if (fm_status st = need(c && s && out, "fm_uniqueness_json")) return st;
  study::StudyKind k;
  PfVariant v;
  if (fm_status st = parse_kind(kind, k)) return st;
  if (fm_status st = parse_pf(pf, v)) return st;
  return guarded([&] {
    study::StudyContext ctx = context_for(c, s, v);
    auto rep = study::check_uniqueness(ctx, k, budget);
    nlohmann::json j;
    j["unique"] = rep.unique;
    j["z"] = rep.z;
    j["plan"] = plan_code(rep.plan, c->gc);
    if (rep.alternate) {
      j["alternate"] = plan_code(*rep.alternate, c->gc);
      j["alternate_z"] = rep.alternate_z;
    }
    *out = dup_string(j.dump());
    return FM_OK;
  });
}

fm_status fm_geometry_json(int tangent_count, double theta_delta_max, unsigned seed, char** out) {
  if (fm_status st = need(out != nullptr, "fm_geometry_json")) return st;
  return guarded([&] {
    nlohmann::json j;
    auto opt = geom::optimal_tangent_points(tangent_count, theta_delta_max, seed);
    j["t"] = tangent_count;
    j["theta_delta_max"] = theta_delta_max;
    j["optimal"] = opt.points;
    j["optimal_error"] = geom::max_relax_error(opt);
    if (tangent_count >= 2) {
      auto eq = geom::equidistant_tangent_points(tangent_count, theta_delta_max);
      j["equidistant"] = eq.points;
      j["equidistant_error"] = geom::max_relax_error(eq);
    }
    *out = dup_string(j.dump());
    return FM_OK;
  });
}

fm_status fm_geometry_envelope_csv(int tangent_count, double theta_delta_max, unsigned seed,
                                   int samples, char** out) {
  if (fm_status st = need(out && samples > 1, "fm_geometry_envelope_csv")) return st;
  return guarded([&] {
    auto opt = geom::optimal_tangent_points(tangent_count, theta_delta_max, seed);
    geom::TangentSet eq;
    if (tangent_count >= 2) eq = geom::equidistant_tangent_points(tangent_count, theta_delta_max);
    std::ostringstream os;
    os.precision(17);
    os << "theta,cos,envelope_optimal,envelope_equidistant\n";
    auto env = [](const geom::TangentSet& ts, double th) {
      double e = std::numeric_limits<double>::infinity();
      for (double p : ts.points) e = std::min(e, geom::b1(th, p));
      return e;
    };
    for (int i = 0; i < samples; ++i) {
      double th = -theta_delta_max + 2.0 * theta_delta_max * i / (samples - 1);
      os << th << ',' << std::cos(th) << ',' << env(opt, th) << ',';
      if (!eq.points.empty())
        os << env(eq, th);
      else
        os << "";
      os << '\n';
    }
    *out = dup_string(os.str());
    return FM_OK;
  });
}

fm_status fm_bigm_audit_csv(const fm_case* c, const char* pf, int samples, unsigned seed,
                            char** out) {
  if (fm_status st = need(c && out && samples > 0, "fm_bigm_audit_csv")) return st;
  PfVariant v;
  if (fm_status st = parse_pf(pf, v)) return st;
  return guarded([&] {
    auto rows = bigm::audit(c->gc, v, c->gc.config, samples, seed);
    *out = dup_string(bigm::audit_csv(rows, v));
    return FM_OK;
  });
}

fm_status fm_export_lp(const fm_case* c, const fm_scenarios* s, const char* kind, const char* pf,
                       long budget, const char* path) {
  if (fm_status st = need(c && s && path, "fm_export_lp")) return st;
  study::StudyKind k;
  PfVariant v;
  if (fm_status st = parse_kind(kind, k)) return st;
  if (fm_status st = parse_pf(pf, v)) return st;
  return guarded([&] {
    study::StudyContext ctx = context_for(c, s, v);
    std::vector<const IndicatorMatrix*> xis;
    std::vector<double> probs;
    bool worst = false;
    switch (k) {
      case study::StudyKind::SP:
      case study::StudyKind::RO:
        for (size_t w = 0; w < ctx.xi.size(); ++w) {
          xis.push_back(&ctx.xi[w]);
          probs.push_back(s->set.scenarios[w].prob);
        }
        worst = k == study::StudyKind::RO;
        break;
      case study::StudyKind::EV:
        xis = {&ctx.xi_mean};
        probs = {1.0};
        break;
      case study::StudyKind::MV:
        xis = {&ctx.xi_max};
        probs = {1.0};
        break;
      default:
        throw InputError("export supports sp, ro, ev, and mv models");
    }
    auto eb = study::build_extensive(ctx, worst, xis, probs, budget);
    model::export_lp(eb.model, path);
    return FM_OK;
  });
}

}  // extern "C"
