#include "floodmit/mitigation.hpp"

#include <algorithm>

namespace floodmit {

CostTable default_cost_table(const GridCase& gc, int levels) {
  CostTable t;
  t.subs = static_cast<int>(gc.substations.size());
  t.levels = levels;
  t.c.assign(static_cast<size_t>(t.subs) * levels, 0);
  for (int k = 0; k < t.subs; ++k) {
    int base = 1;
    switch (gc.substations[k].size_class) {
      case SizeClass::Small: base = 1; break;
      case SizeClass::Medium: base = 2; break;
      case SizeClass::Large: base = 3; break;
    }
    for (int r = 1; r <= levels; ++r) t.set(k, r, base * r);
  }
  return t;
}

long plan_cost(const MitigationPlan& x, const CostTable& costs) {
  long total = 0;
  for (int k = 0; k < x.subs; ++k)
    for (int r = 1; r <= x.levels; ++r)
      if (x.at(k, r)) total += costs.at(k, r);
  return total;
}

bool is_feasible(const MitigationPlan& x, const CostTable& costs, long budget) {
  for (int k = 0; k < x.subs; ++k) {
    for (int r = 1; r < x.levels; ++r)
      if (x.at(k, r + 1) && !x.at(k, r)) return false;
    if (x.levels > 0 && x.at(k, x.levels)) return false;
  }
  return plan_cost(x, costs) <= budget;
}

long coverage_cost(int k, const IndicatorMatrix& xi, const CostTable& costs) {
  if (xi.inexorable(k)) return 0;
  long total = 0;
  for (int r = 1; r <= xi.levels; ++r)
    if (xi.at(k, r)) total += costs.at(k, r);
  return total;
}

long budget_threshold(ThresholdKind kind, const GridCase& gc, const ScenarioSet& scen,
                      const CostTable& costs) {
  std::vector<IndicatorMatrix> xis;
  xis.reserve(scen.scenarios.size());
  for (const auto& s : scen.scenarios) xis.push_back(convert_depths(s.depths, scen.thresholds));

  const int subs = static_cast<int>(gc.substations.size());
  switch (kind) {
    case ThresholdKind::SP: {
      long total = 0;
      for (int k = 0; k < subs; ++k) {
        long worst = 0;
        for (const auto& xi : xis) worst = std::max(worst, coverage_cost(k, xi, costs));
        total += worst;
      }
      return total;
    }
    case ThresholdKind::EWS: {
      long worst = 0;
      for (const auto& xi : xis) {
        long total = 0;
        for (int k = 0; k < subs; ++k) total += coverage_cost(k, xi, costs);
        worst = std::max(worst, total);
      }
      return worst;
    }
    case ThresholdKind::EEV:
    case ThresholdKind::MMV: {
      FloodScenario agg =
          kind == ThresholdKind::EEV ? aggregate_mean(scen) : aggregate_max(scen);
      IndicatorMatrix xi = convert_depths(agg.depths, scen.thresholds);
      long total = 0;
      for (int k = 0; k < subs; ++k) total += coverage_cost(k, xi, costs);
      return total;
    }
  }
  return 0;
}

double abs_sim(const MitigationPlan& a, const MitigationPlan& b, const CostTable& costs) {
  double total = 0.0;
  for (int k = 0; k < a.subs; ++k)
    for (int r = 1; r <= a.levels; ++r)
      if (a.at(k, r) && b.at(k, r)) total += costs.at(k, r);
  return total;
}

double rel_sim(const MitigationPlan& a, const MitigationPlan& b, const CostTable& costs) {
  double ca = static_cast<double>(plan_cost(a, costs));
  double cb = static_cast<double>(plan_cost(b, costs));
  double denom = std::max(ca, cb);
  if (denom == 0.0) return 1.0;  // two empty plans are identical
  return abs_sim(a, b, costs) / denom;
}

NoGoodCut no_good_cut(const MitigationPlan& x_star) {
  NoGoodCut cut;
  for (int k = 0; k < x_star.subs; ++k)
    for (int r = 1; r <= x_star.levels; ++r)
      if (!x_star.at(k, r)) cut.zero_coords.emplace_back(k, r);
  cut.infeasible_by_construction = cut.zero_coords.empty();
  return cut;
}

}  // namespace floodmit
