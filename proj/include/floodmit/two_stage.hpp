#pragma once

#include <optional>
#include <string>
#include <vector>

#include "floodmit/recourse.hpp"

namespace floodmit::study {

/// SP minimizes expected loss, RO worst-case loss. EV/MV solve the mean
/// and max aggregate scenarios; EEV/MMV evaluate those plans under the
/// true uncertainty (upper bounds); EWS/MWS drop nonanticipativity
/// (lower bounds).
enum class StudyKind { SP, RO, EV, EEV, EWS, MV, MMV, MWS };

const char* to_string(StudyKind k);
std::optional<StudyKind> study_kind_from_string(const std::string& s);

/// Everything a sequence of solves on one (case, scenarios, variant)
/// triple shares: indicators, calibrated big-M ranges, relaxation
/// geometry. Immutable once built; safe to share across threads.
struct StudyContext {
  const GridCase* gc = nullptr;
  const ScenarioSet* scen = nullptr;
  PfVariant variant = PfVariant::DC;
  CostTable costs;
  std::vector<IndicatorMatrix> xi;  // per scenario
  IndicatorMatrix xi_mean, xi_max;
  bigm::BigMSet bm;
  recourse::VariantGeometry vg;
  engine::EngineConfig ecfg;
  bool use_warmstart = true;
  double greedy_w_load = 1.0;
  double greedy_w_cap = 0.5;
  int levels() const { return scen->level_count(); }
};

StudyContext make_context(const GridCase& gc, const ScenarioSet& scen, PfVariant v,
                          const engine::EngineConfig& ecfg = {});

struct StudyResult {
  StudyKind kind = StudyKind::SP;
  PfVariant variant = PfVariant::DC;
  long budget = 0;
  double z = 0.0;
  std::optional<MitigationPlan> plan;       // absent for EWS/MWS
  std::vector<double> scenario_objectives;  // recourse value per scenario at the plan
  long nodes = 0;
  long millis = 0;
};

StudyResult solve_study(const StudyContext& ctx, StudyKind kind, long budget);

/// Loss of a fixed plan under the chosen risk measure (expectation for
/// SP-style evaluation, maximum for RO-style).
double eval_plan(const StudyContext& ctx, StudyKind kind, const MitigationPlan& plan);

/// Recourse optimum for one fixed (plan, indicators) pair.
double recourse_value(const StudyContext& ctx, const IndicatorMatrix& xi,
                      const MitigationPlan& plan);

/// Iterative warmstart heuristic: repeatedly buy the single-level upgrade
/// with the best restored-capacity-and-load benefit per unit cost.
/// Worst-case mode scores against the running approximate worst scenario.
MitigationPlan greedy_warmstart(const StudyContext& ctx, long budget, bool worst_case);

/// Minimum plan cost that still achieves the optimal loss, solved
/// lexicographically: optimize loss at the precomputable budget cap, then
/// re-solve for minimum cost with the loss pinned. Defined for RO and MWS,
/// whose thresholds depend on the optimization itself.
long optimized_budget_threshold(const StudyContext& ctx, StudyKind kind);

struct UniquenessReport {
  bool unique = true;
  double z = 0.0;
  MitigationPlan plan;
  std::optional<MitigationPlan> alternate;
  double alternate_z = 0.0;
};

/// Re-solves with the excluding cut on the optimal plan; the optimum is
/// unique when the restricted problem is strictly worse.
UniquenessReport check_uniqueness(const StudyContext& ctx, StudyKind kind, long budget);

struct ExtensiveBuild {
  model::ModelIR model;
  std::vector<int> x_vars;  // (substation, level) plan layout
  std::vector<recourse::BlockVars> blocks;
  std::vector<double> weights;  // per-block probabilities (SP form)
  int epigraph = -1;            // RO form
  int levels = 0;
};

/// Deterministic-equivalent model: shared plan variables, one recourse
/// block per scenario, expectation objective or epigraph on the maximum.
ExtensiveBuild build_extensive(const StudyContext& ctx, bool worst_case,
                               const std::vector<const IndicatorMatrix*>& xis,
                               const std::vector<double>& probs, long budget);

MitigationPlan extract_plan(const ExtensiveBuild& eb, const std::vector<double>& values,
                            const GridCase& gc);

}  // namespace floodmit::study
