#pragma once

#include <optional>
#include <string>
#include <vector>

#include "floodmit/bigm.hpp"
#include "floodmit/engine.hpp"
#include "floodmit/geometry.hpp"
#include "floodmit/grid.hpp"
#include "floodmit/mitigation.hpp"
#include "floodmit/model_ir.hpp"

namespace floodmit::recourse {

/// How the infeasibility indicator enters a built model. Free is the
/// full formulation; the forced modes pin the indicator for oracles and
/// diagnostics.
enum class ChiMode { Free, ForceZero, ForceOne };

/// Relaxation data shared by every block of a build: cosine tangents for
/// the fine variant and the unit-radius disc polygon for the linear ones.
struct VariantGeometry {
  PfVariant variant = PfVariant::DC;
  geom::TangentSet tangents;            // fine-variant cosine tangents
  std::vector<geom::HalfPlane> disc;    // unit-radius polygon halfplanes
};

VariantGeometry variant_geometry(PfVariant v, const Config& cfg);

/// First-stage reference inside a block: either a fixed plan (statuses
/// fold to constants) or the shared plan variables of an extensive form.
struct XRef {
  const MitigationPlan* fixed = nullptr;
  const std::vector<int>* vars = nullptr;  // (k,r) -> variable id, plan layout
  int levels = 0;
};

/// Variable ids of one scenario block; -1 entries mean the quantity is a
/// constant in this block (see the *_const companions).
struct BlockVars {
  PfVariant variant = PfVariant::DC;
  int chi = -1;
  double chi_const = 0.0;
  std::vector<int> theta;                   // per bus
  std::vector<int> delta;                   // per load
  std::vector<int> gen_p, gen_ov, gen_q;    // per generator
  std::vector<int> flow_p;                  // DC: per branch
  std::vector<int> flow_p_fwd, flow_q_fwd;  // LPAC: per branch
  std::vector<int> flow_p_rev, flow_q_rev;
  std::vector<int> sin_fwd, sin_rev;  // per edge
  std::vector<int> cos_fwd, cos_rev;  // per edge
  std::vector<int> phi;               // per bus
  std::vector<int> alpha;             // per substation
  std::vector<double> alpha_const;
  std::vector<int> beta;  // per edge
  std::vector<double> beta_const;
  std::vector<model::LinTerm> objective;  // load-shed + overgeneration terms
  double obj_offset = 0.0;

  double alpha_of(int k, const std::vector<double>& v) const {
    return alpha[k] >= 0 ? v[alpha[k]] : alpha_const[k];
  }
  double beta_of(int e, const std::vector<double>& v) const {
    return beta[e] >= 0 ? v[beta[e]] : beta_const[e];
  }
  double chi_of(const std::vector<double>& v) const { return chi >= 0 ? v[chi] : chi_const; }
};

/// Appends one recourse block to the model. With a fixed plan the
/// component statuses fold to constants and conditional rows become plain
/// equalities or vanish; with plan variables the linearized status logic
/// and big-M rows are emitted.
BlockVars emit_block(model::ModelIR& m, const GridCase& gc, const IndicatorMatrix& xi,
                     const XRef& x, const VariantGeometry& vg, const bigm::BigMSet& bm,
                     ChiMode chi_mode, const std::string& prefix);

struct RecourseBuild {
  model::ModelIR model;
  BlockVars vars;
};

/// Standalone recourse model for a fixed plan and realization.
RecourseBuild build_recourse(PfVariant v, const GridCase& gc, const IndicatorMatrix& xi,
                             const MitigationPlan& x, const bigm::BigMSet& bm,
                             ChiMode chi_mode = ChiMode::Free);

RecourseBuild build_dc(const GridCase& gc, const IndicatorMatrix& xi, const MitigationPlan& x,
                       const bigm::BigMSet& bm, ChiMode chi_mode = ChiMode::Free);
RecourseBuild build_lpac(const GridCase& gc, const IndicatorMatrix& xi, const MitigationPlan& x,
                         const bigm::BigMSet& bm, PfVariant v, ChiMode chi_mode = ChiMode::Free);

struct RecourseSolution {
  double objective = 0.0;
  double shed = 0.0;      // active power left unserved
  double overgen = 0.0;   // active power discarded at generators
  double chi = 0.0;
  std::vector<double> values;  // aligned with the build's model variables
};

/// Zero-flow all-shed point: indicator raised, no generation, no flow, no
/// load served, angles and magnitude deviations zero, cosines one,
/// statuses per the product formulas. Feasible in every variant, objective
/// lambda_shed * total load.
std::vector<double> trivial_solution_values(const RecourseBuild& rb, const GridCase& gc,
                                            const IndicatorMatrix& xi, const MitigationPlan& x);

RecourseSolution extract_solution(const RecourseBuild& rb, const GridCase& gc,
                                  const std::vector<double>& values);

/// Certified-optimal solve of a built recourse model. The trivial point
/// keeps the model feasible for every (x, xi), so the optimum never
/// exceeds lambda_shed * total load.
RecourseSolution solve_recourse(const RecourseBuild& rb, const GridCase& gc,
                                const engine::EngineConfig& cfg = {});

}  // namespace floodmit::recourse
