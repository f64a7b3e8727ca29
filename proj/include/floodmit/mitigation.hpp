#pragma once

#include <utility>
#include <vector>

#include "floodmit/grid.hpp"

namespace floodmit {

/// Marginal resource cost per (substation, level), level-major per
/// substation. Derived from substation size class: small substations cost
/// 1/2/3 units for levels 1/2/3, medium 2/4/6, large 3/6/9.
struct CostTable {
  int levels = 0;
  int subs = 0;
  std::vector<int> c;

  int at(int k, int r) const { return c[static_cast<size_t>(k) * levels + (r - 1)]; }
  void set(int k, int r, int v) { c[static_cast<size_t>(k) * levels + (r - 1)] = v; }
};

CostTable default_cost_table(const GridCase& gc, int levels);

/// Sum of marginal costs over the set bits of x.
long plan_cost(const MitigationPlan& x, const CostTable& costs);

/// Membership in the first-stage feasible set: levels cumulative, top
/// level unprotectable, total cost within budget.
bool is_feasible(const MitigationPlan& x, const CostTable& costs, long budget);

/// Cumulative cost to cover all flooded levels of substation k in the
/// given indicators; 0 when k's flooding reaches the top level (no amount
/// of protection helps there) or when k is dry.
long coverage_cost(int k, const IndicatorMatrix& xi, const CostTable& costs);

enum class ThresholdKind { SP, EEV, EWS, MMV };

/// Maximum useful budget, computed from scenario indicators and costs.
/// SP sums, per substation, the worst mitigable coverage cost over
/// scenarios; EWS takes the worst per-scenario total; EEV and MMV price
/// the mean and max aggregate scenarios.
long budget_threshold(ThresholdKind kind, const GridCase& gc, const ScenarioSet& scen,
                      const CostTable& costs);

/// Cost-weighted inner product of two plans.
double abs_sim(const MitigationPlan& a, const MitigationPlan& b, const CostTable& costs);

/// abs_sim normalized by the more resource-intensive plan's cost; two
/// empty plans compare as identical (1).
double rel_sim(const MitigationPlan& a, const MitigationPlan& b, const CostTable& costs);

/// Linear cut sum_{(k,r): x*_{kr}=0} x_{kr} >= 1 excluding x*. When the
/// plan saturates the budget the cut removes only x*; otherwise it also
/// removes every superset of x*.
struct NoGoodCut {
  std::vector<std::pair<int, int>> zero_coords;  // (substation, level) pairs with x* = 0
  bool infeasible_by_construction = false;       // x* was all ones
};
NoGoodCut no_good_cut(const MitigationPlan& x_star);

}  // namespace floodmit
