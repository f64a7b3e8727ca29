#include "floodmit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace floodmit {

const char* to_string(SizeClass s) {
  switch (s) {
    case SizeClass::Small: return "small";
    case SizeClass::Medium: return "medium";
    case SizeClass::Large: return "large";
  }
  return "small";
}

std::optional<SizeClass> size_class_from_string(const std::string& s) {
  if (s == "small") return SizeClass::Small;
  if (s == "medium") return SizeClass::Medium;
  if (s == "large") return SizeClass::Large;
  return std::nullopt;
}

double GridCase::total_p_load() const {
  double t = 0.0;
  for (const auto& d : loads) t += d.p_load;
  return t;
}

namespace {

class ViolationList {
 public:
  void add(const std::string& msg) { msgs_.push_back(msg); }
  bool empty() const { return msgs_.empty(); }
  [[noreturn]] void raise() const {
    std::ostringstream os;
    for (size_t i = 0; i < msgs_.size(); ++i) {
      if (i) os << '\n';
      os << msgs_[i];
    }
    throw ValidationError(os.str());
  }
  void raise_if_any() const {
    if (!empty()) raise();
  }

 private:
  std::vector<std::string> msgs_;
};

}  // namespace

void GridCase::finalize() {
  ViolationList v;

  sub_index.clear();
  bus_index.clear();
  branch_index.clear();

  for (size_t i = 0; i < substations.size(); ++i) {
    const auto& s = substations[i];
    if (s.id.empty()) v.add("substation #" + std::to_string(i) + ": empty id");
    if (!sub_index.emplace(s.id, static_cast<int>(i)).second)
      v.add("substation '" + s.id + "': duplicate id");
    if (s.bus_ids.empty()) v.add("substation '" + s.id + "': bus_ids empty");
  }
  for (size_t i = 0; i < buses.size(); ++i) {
    const auto& b = buses[i];
    if (!bus_index.emplace(b.id, static_cast<int>(i)).second)
      v.add("bus '" + b.id + "': duplicate id");
    if (!(b.v_min > 0.0)) v.add("bus '" + b.id + "': v_min must be positive");
    if (!(b.v_min <= b.v_target && b.v_target <= b.v_max))
      v.add("bus '" + b.id + "': requires v_min <= v_target <= v_max");
  }
  for (size_t i = 0; i < branches.size(); ++i) {
    const auto& l = branches[i];
    if (!branch_index.emplace(l.id, static_cast<int>(i)).second)
      v.add("branch '" + l.id + "': duplicate id");
  }

  // Substation <-> bus cross references; every bus in exactly one substation.
  bus_sub.assign(buses.size(), -1);
  sub_buses.assign(substations.size(), {});
  for (size_t k = 0; k < substations.size(); ++k) {
    for (const auto& bid : substations[k].bus_ids) {
      auto it = bus_index.find(bid);
      if (it == bus_index.end()) {
        v.add("substation '" + substations[k].id + "': unknown bus '" + bid + "'");
        continue;
      }
      if (bus_sub[it->second] != -1) {
        v.add("bus '" + bid + "': listed by more than one substation");
        continue;
      }
      bus_sub[it->second] = static_cast<int>(k);
      sub_buses[k].push_back(it->second);
    }
  }
  for (size_t n = 0; n < buses.size(); ++n) {
    if (bus_sub[n] == -1)
      v.add("bus '" + buses[n].id + "': not listed by any substation");
    else if (substations[bus_sub[n]].id != buses[n].substation_id)
      v.add("bus '" + buses[n].id + "': substation_id '" + buses[n].substation_id +
            "' disagrees with owning substation '" + substations[bus_sub[n]].id + "'");
  }

  reference_bus = -1;
  int refs = 0;
  for (size_t n = 0; n < buses.size(); ++n) {
    if (buses[n].is_reference) {
      ++refs;
      if (reference_bus < 0) reference_bus = static_cast<int>(n);
    }
  }
  if (refs == 0) v.add("case: no reference bus");
  if (refs > 1) v.add("case: " + std::to_string(refs) + " reference buses, expected exactly one");

  // Branch endpoints and edge table.
  edges.clear();
  branch_edge.assign(branches.size(), -1);
  std::map<std::pair<int, int>, int> edge_of;
  for (size_t l = 0; l < branches.size(); ++l) {
    const auto& br = branches[l];
    auto fi = bus_index.find(br.from_bus);
    auto ti = bus_index.find(br.to_bus);
    if (fi == bus_index.end()) v.add("branch '" + br.id + "': unknown from_bus '" + br.from_bus + "'");
    if (ti == bus_index.end()) v.add("branch '" + br.id + "': unknown to_bus '" + br.to_bus + "'");
    if (fi == bus_index.end() || ti == bus_index.end()) continue;
    if (fi->second == ti->second) v.add("branch '" + br.id + "': from_bus equals to_bus");
    if (!(br.s_max > 0.0)) v.add("branch '" + br.id + "': s_max must be positive");
    if (br.b == 0.0 && br.g == 0.0) v.add("branch '" + br.id + "': b and g both zero");

    std::pair<int, int> key{std::min(fi->second, ti->second), std::max(fi->second, ti->second)};
    auto [it, inserted] = edge_of.emplace(key, static_cast<int>(edges.size()));
    if (inserted) {
      Edge e;
      // Edge orientation follows the first branch listed on it.
      e.from_bus = fi->second;
      e.to_bus = ti->second;
      edges.push_back(e);
    }
    branch_edge[l] = it->second;
    edges[it->second].branches.push_back(static_cast<int>(l));
  }

  gens_at_bus.assign(buses.size(), {});
  std::set<std::string> gen_ids;
  for (size_t g = 0; g < generators.size(); ++g) {
    const auto& gen = generators[g];
    if (!gen_ids.insert(gen.id).second) v.add("generator '" + gen.id + "': duplicate id");
    if (!(0.0 <= gen.p_min && gen.p_min <= gen.p_max))
      v.add("generator '" + gen.id + "': requires 0 <= p_min <= p_max");
    if (!(gen.q_min <= gen.q_max)) v.add("generator '" + gen.id + "': requires q_min <= q_max");
    auto it = bus_index.find(gen.bus_id);
    if (it == bus_index.end())
      v.add("generator '" + gen.id + "': unknown bus '" + gen.bus_id + "'");
    else
      gens_at_bus[it->second].push_back(static_cast<int>(g));
  }

  loads_at_bus.assign(buses.size(), {});
  std::set<std::string> load_ids;
  for (size_t d = 0; d < loads.size(); ++d) {
    const auto& ld = loads[d];
    if (!load_ids.insert(ld.id).second) v.add("load '" + ld.id + "': duplicate id");
    if (ld.p_load < 0.0) v.add("load '" + ld.id + "': p_load must be nonnegative");
    auto it = bus_index.find(ld.bus_id);
    if (it == bus_index.end())
      v.add("load '" + ld.id + "': unknown bus '" + ld.bus_id + "'");
    else
      loads_at_bus[it->second].push_back(static_cast<int>(d));
  }

  const auto& cfg = config;
  if (!(cfg.lambda_shed > 0.0)) v.add("config: lambda_shed must be positive");
  if (cfg.lambda_over < 0.0) v.add("config: lambda_over must be nonnegative");
  if (!(cfg.theta_delta_max > 0.0 && cfg.theta_delta_max <= cfg.theta_max))
    v.add("config: requires 0 < theta_delta_max <= theta_max");
  if (cfg.t_cos < 1) v.add("config: t_cos must be at least 1");

  v.raise_if_any();
}

void ScenarioSet::validate(const GridCase& gc) const {
  ViolationList v;
  if (thresholds.empty()) v.add("scenarios: thresholds empty");
  if (!thresholds.empty() && thresholds.front() != 0.0)
    v.add("scenarios: first threshold must be 0");
  for (size_t r = 1; r < thresholds.size(); ++r)
    if (!(thresholds[r - 1] < thresholds[r]))
      v.add("scenarios: thresholds not strictly ascending at position " + std::to_string(r));

  if (scenarios.empty()) v.add("scenarios: empty scenario list");
  double total = 0.0;
  std::set<std::string> ids;
  for (const auto& s : scenarios) {
    if (!ids.insert(s.id).second) v.add("scenario '" + s.id + "': duplicate id");
    if (!(s.prob >= 0.0 && s.prob <= 1.0))
      v.add("scenario '" + s.id + "': probability outside [0,1]");
    total += s.prob;
    if (s.depths.size() != gc.substations.size())
      v.add("scenario '" + s.id + "': depth vector size mismatch");
    for (size_t k = 0; k < s.depths.size() && k < gc.substations.size(); ++k)
      if (s.depths[k] < 0.0)
        v.add("scenario '" + s.id + "': negative depth at substation '" +
              gc.substations[k].id + "'");
  }
  if (!scenarios.empty() && std::abs(total - 1.0) > 1e-9)
    v.add("scenarios: probabilities sum to " + std::to_string(total) + ", expected 1");
  v.raise_if_any();
}

int IndicatorMatrix::flooded_level(int k) const {
  int lvl = 0;
  for (int r = 1; r <= levels; ++r)
    if (at(k, r)) lvl = r;
  return lvl;
}

MitigationPlan MitigationPlan::empty(int subs, int levels) {
  MitigationPlan p;
  p.subs = subs;
  p.levels = levels;
  p.x.assign(static_cast<size_t>(subs) * levels, 0);
  return p;
}

int MitigationPlan::achieved_level(int k) const {
  int lvl = 0;
  for (int r = 1; r <= levels; ++r) {
    if (!at(k, r)) break;
    lvl = r;
  }
  return lvl;
}

IndicatorMatrix convert_depths(const std::vector<double>& depths,
                               const std::vector<double>& thresholds) {
  for (size_t k = 0; k < depths.size(); ++k)
    if (depths[k] < 0.0)
      throw InputError("convert_depths: negative depth at substation ordinal " +
                       std::to_string(k));
  IndicatorMatrix m;
  m.subs = static_cast<int>(depths.size());
  m.levels = static_cast<int>(thresholds.size());
  m.xi.assign(static_cast<size_t>(m.subs) * m.levels, 0);
  for (int k = 0; k < m.subs; ++k)
    for (int r = 1; r <= m.levels; ++r)
      m.xi[static_cast<size_t>(k) * m.levels + (r - 1)] =
          depths[k] > thresholds[r - 1] ? 1 : 0;
  return m;
}

FloodScenario aggregate_mean(const ScenarioSet& set) {
  if (set.scenarios.empty()) throw InputError("aggregate_mean: empty scenario set");
  FloodScenario out;
  out.id = "mean";
  out.prob = 1.0;
  out.depths.assign(set.scenarios.front().depths.size(), 0.0);
  for (const auto& s : set.scenarios)
    for (size_t k = 0; k < out.depths.size(); ++k) out.depths[k] += s.prob * s.depths[k];
  return out;
}

FloodScenario aggregate_max(const ScenarioSet& set) {
  if (set.scenarios.empty()) throw InputError("aggregate_max: empty scenario set");
  FloodScenario out;
  out.id = "max";
  out.prob = 1.0;
  out.depths.assign(set.scenarios.front().depths.size(), 0.0);
  for (const auto& s : set.scenarios)
    for (size_t k = 0; k < out.depths.size(); ++k)
      out.depths[k] = std::max(out.depths[k], s.depths[k]);
  return out;
}

bool ComponentStatus::sub_up(const GridCase& gc, int k) const {
  for (int n : gc.sub_buses[k])
    if (!bus_up[n]) return false;
  return true;
}

ComponentStatus component_status(const GridCase& gc, const MitigationPlan& x,
                                 const IndicatorMatrix& xi) {
  ComponentStatus st;
  st.bus_up.assign(gc.buses.size(), 1);
  const int levels = xi.levels;
  for (size_t k = 0; k < gc.substations.size(); ++k) {
    int up = 1;
    for (int r = 1; r <= levels; ++r)
      if (xi.at(static_cast<int>(k), r) && !x.at(static_cast<int>(k), r)) up = 0;
    for (int n : gc.sub_buses[k]) st.bus_up[n] = static_cast<std::uint8_t>(up);
  }
  st.edge_up.assign(gc.edges.size(), 0);
  for (size_t e = 0; e < gc.edges.size(); ++e)
    st.edge_up[e] = st.bus_up[gc.edges[e].from_bus] && st.bus_up[gc.edges[e].to_bus];
  return st;
}

ResidualReport ac_residuals(const GridCase& gc, const OperatingPoint& pt) {
  const size_t nb = gc.buses.size(), nl = gc.branches.size();
  auto need = [&](size_t have, size_t want, const char* what) {
    if (have != want)
      throw InputError(std::string("ac_residuals: missing or missized field '") + what + "'");
  };
  need(pt.v.size(), nb, "v");
  need(pt.theta.size(), nb, "theta");
  need(pt.gen_p.size(), gc.generators.size(), "gen_p");
  need(pt.gen_q.size(), gc.generators.size(), "gen_q");
  need(pt.load_served.size(), gc.loads.size(), "load_served");
  need(pt.flow_from_p.size(), nl, "flow_from_p");
  need(pt.flow_from_q.size(), nl, "flow_from_q");
  need(pt.flow_to_p.size(), nl, "flow_to_p");
  need(pt.flow_to_q.size(), nl, "flow_to_q");
  if (!pt.bus_active.empty()) need(pt.bus_active.size(), nb, "bus_active");
  if (!pt.branch_active.empty()) need(pt.branch_active.size(), nl, "branch_active");

  auto bus_on = [&](int n) { return pt.bus_active.empty() || pt.bus_active[n]; };
  auto branch_on = [&](int l) { return pt.branch_active.empty() || pt.branch_active[l]; };

  ResidualReport rep;
  auto push = [&](std::string name, double r) {
    rep.max_abs = std::max(rep.max_abs, std::abs(r));
    rep.residuals.emplace_back(std::move(name), r);
  };

  // Bus balance: generation minus served demand equals flow leaving the bus.
  for (size_t n = 0; n < nb; ++n) {
    if (!bus_on(static_cast<int>(n))) continue;
    double p = 0.0, q = 0.0;
    for (int g : gc.gens_at_bus[n]) {
      p += pt.gen_p[g];
      q += pt.gen_q[g];
    }
    for (int d : gc.loads_at_bus[n]) {
      p -= gc.loads[d].p_load * pt.load_served[d];
      q -= gc.loads[d].q_load * pt.load_served[d];
    }
    for (size_t l = 0; l < nl; ++l) {
      if (!branch_on(static_cast<int>(l))) continue;
      int f = gc.bus_index.at(gc.branches[l].from_bus);
      int t = gc.bus_index.at(gc.branches[l].to_bus);
      if (f == static_cast<int>(n)) {
        p -= pt.flow_from_p[l];
        q -= pt.flow_from_q[l];
      } else if (t == static_cast<int>(n)) {
        p -= pt.flow_to_p[l];
        q -= pt.flow_to_q[l];
      }
    }
    push("p_balance[" + gc.buses[n].id + "]", p);
    push("q_balance[" + gc.buses[n].id + "]", q);
  }

  // Directed Ohm's law, both orientations of every branch.
  for (size_t l = 0; l < nl; ++l) {
    if (!branch_on(static_cast<int>(l))) continue;
    const auto& br = gc.branches[l];
    int f = gc.bus_index.at(br.from_bus);
    int t = gc.bus_index.at(br.to_bus);
    if (!bus_on(f) || !bus_on(t)) continue;
    auto ohm = [&](int n, int m, double pf, double qf, const char* dir) {
      double vn = pt.v[n], vm = pt.v[m];
      double dth = pt.theta[n] - pt.theta[m];
      double pe = vn * vn * br.g - vn * vm * br.g * std::cos(dth) - vn * vm * br.b * std::sin(dth);
      double qe = -vn * vn * br.b + vn * vm * br.b * std::cos(dth) - vn * vm * br.g * std::sin(dth);
      push("p_ohm[" + br.id + ":" + dir + "]", pf - pe);
      push("q_ohm[" + br.id + ":" + dir + "]", qf - qe);
    };
    ohm(f, t, pt.flow_from_p[l], pt.flow_from_q[l], "from");
    ohm(t, f, pt.flow_to_p[l], pt.flow_to_q[l], "to");
  }
  return rep;
}

}  // namespace floodmit
