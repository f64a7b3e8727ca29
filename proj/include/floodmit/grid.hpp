#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace floodmit {

/// Raised when input files cannot be parsed at all.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when parsed data violates a structural invariant. The message
/// lists every violation found, one per line, each naming the offending
/// entity.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SizeClass { Small, Medium, Large };

const char* to_string(SizeClass s);
std::optional<SizeClass> size_class_from_string(const std::string& s);

struct Substation {
  std::string id;
  std::vector<std::string> bus_ids;
  SizeClass size_class = SizeClass::Small;
};

struct Bus {
  std::string id;
  std::string substation_id;
  double v_target = 1.0;
  double v_min = 0.9;
  double v_max = 1.1;
  bool is_reference = false;
};

struct Branch {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double b = 0.0;      // series susceptance, per unit
  double g = 0.0;      // series conductance, per unit
  double s_max = 1.0;  // apparent-power flow limit, per unit
};

struct Generator {
  std::string id;
  std::string bus_id;
  double p_min = 0.0, p_max = 0.0;
  double q_min = 0.0, q_max = 0.0;
};

struct Load {
  std::string id;
  std::string bus_id;
  double p_load = 0.0;
  double q_load = 0.0;
};

struct Tolerances {
  double feasibility = 1e-7;
  double integrality = 1e-6;
  double oa_violation = 1e-6;
};

struct Config {
  double lambda_shed = 1.0;
  double lambda_over = 1e-3;
  double theta_max = 3.14159265358979323846;        // bound on any bus angle
  double theta_delta_max = 1.57079632679489661923;  // bound on adjacent angle difference
  int t_cos = 7;  // tangent count for the fine cosine relaxation
  Tolerances tol;
};

/// Static network data plus run configuration. Immutable once validated;
/// the index tables below are derived during validation and safe to share
/// across threads.
struct GridCase {
  std::string name;
  std::vector<Substation> substations;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::vector<Load> loads;
  Config config;

  // Derived lookup tables, populated by finalize().
  std::unordered_map<std::string, int> sub_index;
  std::unordered_map<std::string, int> bus_index;
  std::unordered_map<std::string, int> branch_index;
  std::vector<int> bus_sub;                     // bus ordinal -> substation ordinal
  std::vector<std::vector<int>> sub_buses;      // substation ordinal -> bus ordinals
  std::vector<std::vector<int>> gens_at_bus;
  std::vector<std::vector<int>> loads_at_bus;

  // Unique undirected bus pairs carrying at least one branch.
  struct Edge {
    int from_bus = -1;
    int to_bus = -1;
    std::vector<int> branches;
  };
  std::vector<Edge> edges;
  std::vector<int> branch_edge;  // branch ordinal -> edge ordinal
  int reference_bus = -1;

  double total_p_load() const;

  /// Rebuilds the index tables and checks every invariant. Throws
  /// ValidationError listing all violations.
  void finalize();
};

/// Flood depths for one realization, dense over substation ordinals.
struct FloodScenario {
  std::string id;
  double prob = 1.0;
  std::vector<double> depths;  // meters, one per substation ordinal
};

struct ScenarioSet {
  std::vector<double> thresholds;  // t_1 = 0 < t_2 < ... < t_rhat
  std::vector<FloodScenario> scenarios;

  int level_count() const { return static_cast<int>(thresholds.size()); }
  /// Checks probabilities, threshold ordering, and depth validity
  /// against the case. Throws ValidationError.
  void validate(const GridCase& gc) const;
};

/// Binary flood indicators per (substation, level). Level r is stored at
/// column r-1; rows are monotone by construction: flooding to level r+1
/// implies flooding to level r.
struct IndicatorMatrix {
  int levels = 0;
  int subs = 0;
  std::vector<std::uint8_t> xi;  // sub-major

  bool at(int k, int r) const { return xi[static_cast<size_t>(k) * levels + (r - 1)] != 0; }
  /// Highest flooded level at substation k, 0 if dry.
  int flooded_level(int k) const;
  /// True when flooding at k reaches the top (unattainable) level.
  bool inexorable(int k) const { return levels > 0 && at(k, levels); }
};

/// First-stage decisions per (substation, level), same layout as
/// IndicatorMatrix. Constructed plans are arbitrary binary matrices;
/// cumulative/top-level feasibility is checked by mitigation::is_feasible.
struct MitigationPlan {
  int levels = 0;
  int subs = 0;
  std::vector<std::uint8_t> x;

  static MitigationPlan empty(int subs, int levels);
  bool at(int k, int r) const { return x[static_cast<size_t>(k) * levels + (r - 1)] != 0; }
  void set(int k, int r, bool v) { x[static_cast<size_t>(k) * levels + (r - 1)] = v ? 1 : 0; }
  /// Highest level r with x_{k,1..r} all set; 0 for none. Meaningful for
  /// cumulative plans.
  int achieved_level(int k) const;
  bool operator==(const MitigationPlan&) const = default;
};

/// xi_{kr} = 1 iff depth strictly exceeds t_r. Strict: a barrier of height
/// exactly t protects a flood of depth t.
IndicatorMatrix convert_depths(const std::vector<double>& depths,
                               const std::vector<double>& thresholds);

FloodScenario aggregate_mean(const ScenarioSet& set);
FloodScenario aggregate_max(const ScenarioSet& set);

struct ComponentStatus {
  std::vector<std::uint8_t> bus_up;   // per bus ordinal
  std::vector<std::uint8_t> edge_up;  // per edge ordinal
  bool sub_up(const GridCase& gc, int k) const;
};

/// Direct evaluation of the status product formulas: a bus is up iff every
/// flooded level of its substation is mitigated; an edge is up iff both
/// endpoint buses are.
ComponentStatus component_status(const GridCase& gc, const MitigationPlan& x,
                                 const IndicatorMatrix& xi);

/// A candidate operating point for residual evaluation against the four
/// core power-flow equations. Flows are directed: entry l of flow_from is
/// measured leaving the from-bus of branch l, flow_to leaving the to-bus.
struct OperatingPoint {
  std::vector<double> v;         // per bus
  std::vector<double> theta;     // per bus
  std::vector<double> gen_p;     // per generator
  std::vector<double> gen_q;     // per generator
  std::vector<double> load_served;  // fraction per load
  std::vector<double> flow_from_p, flow_from_q;
  std::vector<double> flow_to_p, flow_to_q;
  std::vector<std::uint8_t> bus_active;     // optional; empty = all active
  std::vector<std::uint8_t> branch_active;  // optional; empty = all active
};

struct ResidualReport {
  std::vector<std::pair<std::string, double>> residuals;
  double max_abs = 0.0;
};

/// Residuals of active/reactive bus balance and directed Ohm's-law
/// equations at the given point. Exact zero on points constructed by
/// direct substitution.
ResidualReport ac_residuals(const GridCase& gc, const OperatingPoint& pt);

}  // namespace floodmit
