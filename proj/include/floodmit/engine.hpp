#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "floodmit/model_ir.hpp"

namespace floodmit::engine {

struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EngineConfig {
  double feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  double oa_violation_tol = 1e-6;
  double relative_gap = 1e-9;  // certified-optimality gap
  long node_cap = 1000000;
  long pivot_cap = 5000000;  // simplex iterations per LP
  int cut_cap = 5000;        // outer-approximation rounds
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, CapReached };

struct SolveResult {
  SolveStatus status = SolveStatus::CapReached;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> values;  // structural variables of the input model
  double best_bound = -std::numeric_limits<double>::infinity();
  long nodes = 0;
  long pivots = 0;
  int cuts = 0;
  std::vector<double> bound_trace;  // best bound after each expanded node
};

/// Two-phase primal simplex on the linear part of the model; binaries are
/// relaxed to their bounds, quadratic rows ignored. Optimality is
/// certified by reduced costs, infeasibility by a positive phase-1 optimum.
SolveResult solve_lp(const model::ModelIR& m, const EngineConfig& cfg = {});

/// Best-bound branch and bound over the tagged binaries; requires a model
/// without quadratic rows. Branches on the most fractional binary, ties by
/// lowest index; node selection ties break by insertion order, so runs are
/// reproducible. An optional warmstart point is installed as the initial
/// incumbent when it checks feasible and integral.
SolveResult solve_milp(const model::ModelIR& m, const EngineConfig& cfg = {},
                       const std::vector<double>* warmstart = nullptr);

/// Outer-approximation loop for convex quadratic rows: solve the current
/// linear (MI)LP, cut the most violated quadratic row at its optimum,
/// repeat until the worst violation is within tolerance.
SolveResult oa_refine(const model::ModelIR& m, const EngineConfig& cfg = {},
                      const std::vector<double>* warmstart = nullptr);

/// Dispatch on model content: quadratics -> oa_refine, binaries ->
/// solve_milp, else solve_lp.
SolveResult solve_model(const model::ModelIR& m, const EngineConfig& cfg = {},
                        const std::vector<double>* warmstart = nullptr);

/// The linear cut oa_refine would emit for quadratic row q violated at v0.
model::LinConstraint oa_cut_for(const model::ModelIR& m, const model::QuadConstraint& q,
                                const std::vector<double>& v0, int serial);

namespace detail {

struct LpOutcome {
  SolveStatus status = SolveStatus::CapReached;
  double objective = 0.0;
  std::vector<double> x;  // structural values
  long pivots = 0;
};

/// Reusable simplex over a fixed constraint matrix; per-solve structural
/// bounds support branch-and-bound bound fixing without re-assembly.
class SimplexSolver {
 public:
  explicit SimplexSolver(const model::ModelIR& m);
  LpOutcome solve(const std::vector<double>& lo, const std::vector<double>& hi,
                  const EngineConfig& cfg);
  int num_structural() const { return n_; }

 private:
  struct Col {
    std::vector<std::pair<int, double>> entries;
  };
  int m_ = 0;  // rows
  int n_ = 0;  // structural columns
  std::vector<Col> cols_;           // structural columns, sparse
  std::vector<double> rhs_;
  std::vector<model::Sense> sense_;
  std::vector<double> obj_;         // structural objective coefficients
  double obj_offset_ = 0.0;
};

}  // namespace detail

}  // namespace floodmit::engine
