#include "floodmit/case_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace floodmit {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* hexd = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hexd[h & 0xF];
    h >>= 4;
  }
  return out;
}

namespace {

json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(std::string("malformed JSON in ") + what);
  return j;
}

double num(const json& j, const char* key, const std::string& ctx, double dflt,
           bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ParseError(ctx + ": missing '" + key + "'");
    return dflt;
  }
  if (!j.at(key).is_number()) throw ParseError(ctx + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::string str(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw ParseError(ctx + ": missing string '" + key + "'");
  return j.at(key).get<std::string>();
}

json config_json(const Config& c) {
  json j;
  j["lambda_shed"] = c.lambda_shed;
  j["lambda_over"] = c.lambda_over;
  j["theta_max"] = c.theta_max;
  j["theta_delta_max"] = c.theta_delta_max;
  j["t_cos"] = c.t_cos;
  j["feasibility_tol"] = c.tol.feasibility;
  j["integrality_tol"] = c.tol.integrality;
  j["oa_violation_tol"] = c.tol.oa_violation;
  return j;
}

Config config_from(const json& j, const Config& base) {
  Config c = base;
  c.lambda_shed = num(j, "lambda_shed", "config", c.lambda_shed);
  c.lambda_over = num(j, "lambda_over", "config", c.lambda_over);
  c.theta_max = num(j, "theta_max", "config", c.theta_max);
  c.theta_delta_max = num(j, "theta_delta_max", "config", c.theta_delta_max);
  c.t_cos = static_cast<int>(num(j, "t_cos", "config", c.t_cos));
  c.tol.feasibility = num(j, "feasibility_tol", "config", c.tol.feasibility);
  c.tol.integrality = num(j, "integrality_tol", "config", c.tol.integrality);
  c.tol.oa_violation = num(j, "oa_violation_tol", "config", c.tol.oa_violation);
  return c;
}

}  // namespace

GridCase case_from_json(const std::string& text, const std::string& name) {
  json j = parse(text, "case file");
  if (!j.is_object()) throw ParseError("case file: top level must be an object");
  GridCase gc;
  gc.name = name;
  for (const auto& js : j.value("substations", json::array())) {
    Substation s;
    s.id = str(js, "id", "substation");
    for (const auto& b : js.value("bus_ids", json::array())) s.bus_ids.push_back(b.get<std::string>());
    auto sc = size_class_from_string(js.value("size_class", "small"));
    if (!sc) throw ParseError("substation '" + s.id + "': unknown size_class");
    s.size_class = *sc;
    gc.substations.push_back(std::move(s));
  }
  for (const auto& jb : j.value("buses", json::array())) {
    Bus b;
    b.id = str(jb, "id", "bus");
    b.substation_id = str(jb, "substation_id", "bus '" + b.id + "'");
    b.v_target = num(jb, "v_target", "bus '" + b.id + "'", 1.0);
    b.v_min = num(jb, "v_min", "bus '" + b.id + "'", 0.9);
    b.v_max = num(jb, "v_max", "bus '" + b.id + "'", 1.1);
    b.is_reference = jb.value("is_reference", false);
    gc.buses.push_back(std::move(b));
  }
  for (const auto& jl : j.value("branches", json::array())) {
    Branch l;
    l.id = str(jl, "id", "branch");
    l.from_bus = str(jl, "from_bus", "branch '" + l.id + "'");
    l.to_bus = str(jl, "to_bus", "branch '" + l.id + "'");
    l.b = num(jl, "b", "branch '" + l.id + "'", 0.0, true);
    l.g = num(jl, "g", "branch '" + l.id + "'", 0.0);
    l.s_max = num(jl, "s_max", "branch '" + l.id + "'", 1.0, true);
    gc.branches.push_back(std::move(l));
  }
  for (const auto& jg : j.value("generators", json::array())) {
    Generator g;
    g.id = str(jg, "id", "generator");
    g.bus_id = str(jg, "bus_id", "generator '" + g.id + "'");
    g.p_min = num(jg, "p_min", "generator '" + g.id + "'", 0.0);
    g.p_max = num(jg, "p_max", "generator '" + g.id + "'", 0.0, true);
    g.q_min = num(jg, "q_min", "generator '" + g.id + "'", 0.0);
    g.q_max = num(jg, "q_max", "generator '" + g.id + "'", 0.0);
    gc.generators.push_back(std::move(g));
  }
  for (const auto& jd : j.value("loads", json::array())) {
    Load d;
    d.id = str(jd, "id", "load");
    d.bus_id = str(jd, "bus_id", "load '" + d.id + "'");
    d.p_load = num(jd, "p_load", "load '" + d.id + "'", 0.0, true);
    d.q_load = num(jd, "q_load", "load '" + d.id + "'", 0.0);
    gc.loads.push_back(std::move(d));
  }
  if (j.contains("config")) gc.config = config_from(j.at("config"), Config{});
  gc.finalize();
  return gc;
}

std::string case_to_json(const GridCase& gc) {
  json j;
  j["substations"] = json::array();
  for (const auto& s : gc.substations) {
    json js;
    js["id"] = s.id;
    js["bus_ids"] = s.bus_ids;
    js["size_class"] = to_string(s.size_class);
    j["substations"].push_back(js);
  }
  j["buses"] = json::array();
  for (const auto& b : gc.buses) {
    json jb;
    jb["id"] = b.id;
    jb["substation_id"] = b.substation_id;
    jb["v_target"] = b.v_target;
    jb["v_min"] = b.v_min;
    jb["v_max"] = b.v_max;
    jb["is_reference"] = b.is_reference;
    j["buses"].push_back(jb);
  }
  j["branches"] = json::array();
  for (const auto& l : gc.branches) {
    json jl;
    jl["id"] = l.id;
    jl["from_bus"] = l.from_bus;
    jl["to_bus"] = l.to_bus;
    jl["b"] = l.b;
    jl["g"] = l.g;
    jl["s_max"] = l.s_max;
    j["branches"].push_back(jl);
  }
  j["generators"] = json::array();
  for (const auto& g : gc.generators) {
    json jg;
    jg["id"] = g.id;
    jg["bus_id"] = g.bus_id;
    jg["p_min"] = g.p_min;
    jg["p_max"] = g.p_max;
    jg["q_min"] = g.q_min;
    jg["q_max"] = g.q_max;
    j["generators"].push_back(jg);
  }
  j["loads"] = json::array();
  for (const auto& d : gc.loads) {
    json jd;
    jd["id"] = d.id;
    jd["bus_id"] = d.bus_id;
    jd["p_load"] = d.p_load;
    jd["q_load"] = d.q_load;
    j["loads"].push_back(jd);
  }
  j["config"] = config_json(gc.config);
  return j.dump(2) + "\n";
}

GridCase load_case(const std::string& path) {
  std::string name = path;
  auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  auto dot = name.rfind(".json");
  if (dot != std::string::npos) name = name.substr(0, dot);
  return case_from_json(read_text_file(path), name);
}

void save_case(const GridCase& gc, const std::string& path) {
  write_text_file(path, case_to_json(gc));
}

ScenarioSet scenarios_from_json(const std::string& text, const GridCase& gc) {
  json j = parse(text, "scenario file");
  ScenarioSet set;
  for (const auto& t : j.value("thresholds", json::array())) set.thresholds.push_back(t.get<double>());
  for (const auto& js : j.value("scenarios", json::array())) {
    FloodScenario s;
    s.id = str(js, "id", "scenario");
    s.prob = num(js, "prob", "scenario '" + s.id + "'", 1.0, true);
    s.depths.assign(gc.substations.size(), 0.0);
    if (js.contains("depths")) {
      for (auto it = js.at("depths").begin(); it != js.at("depths").end(); ++it) {
        auto found = gc.sub_index.find(it.key());
        if (found == gc.sub_index.end())
          throw ValidationError("scenario '" + s.id + "': unknown substation '" + it.key() + "'");
        s.depths[found->second] = it.value().get<double>();
      }
    }
    set.scenarios.push_back(std::move(s));
  }
  set.validate(gc);
  return set;
}

std::string scenarios_to_json(const ScenarioSet& set, const GridCase& gc) {
  json j;
  j["thresholds"] = set.thresholds;
  j["scenarios"] = json::array();
  for (const auto& s : set.scenarios) {
    json js;
    js["id"] = s.id;
    js["prob"] = s.prob;
    json depths = json::object();
    for (size_t k = 0; k < s.depths.size(); ++k)
      if (s.depths[k] > 0.0) depths[gc.substations[k].id] = s.depths[k];
    js["depths"] = depths;
    j["scenarios"].push_back(js);
  }
  return j.dump(2) + "\n";
}

ScenarioSet load_scenarios(const std::string& path, const GridCase& gc) {
  return scenarios_from_json(read_text_file(path), gc);
}

void save_scenarios(const ScenarioSet& set, const GridCase& gc, const std::string& path) {
  write_text_file(path, scenarios_to_json(set, gc));
}

std::string plan_to_json(const MitigationPlan& p, const GridCase& gc) {
  json j = json::object();
  for (size_t k = 0; k < gc.substations.size(); ++k) {
    int lvl = p.achieved_level(static_cast<int>(k));
    if (lvl > 0) j[gc.substations[k].id] = lvl;
  }
  return j.dump();
}

MitigationPlan plan_from_json(const std::string& text, const GridCase& gc, int levels) {
  json j = parse(text, "plan");
  MitigationPlan p = MitigationPlan::empty(static_cast<int>(gc.substations.size()), levels);
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto found = gc.sub_index.find(it.key());
    if (found == gc.sub_index.end())
      throw ValidationError("plan: unknown substation '" + it.key() + "'");
    int lvl = it.value().get<int>();
    if (lvl < 0 || lvl > levels)
      throw ValidationError("plan: level out of range for substation '" + it.key() + "'");
    for (int r = 1; r <= lvl; ++r) p.set(found->second, r, true);
  }
  return p;
}

std::string plan_code(const MitigationPlan& p, const GridCase& gc) {
  std::map<std::string, int> by_id;
  for (size_t k = 0; k < gc.substations.size(); ++k) {
    int lvl = p.achieved_level(static_cast<int>(k));
    if (lvl > 0) by_id[gc.substations[k].id] = lvl;
  }
  std::string out;
  for (const auto& [id, lvl] : by_id) {
    if (!out.empty()) out += ';';
    out += id + "=" + std::to_string(lvl);
  }
  return out;
}

MitigationPlan plan_from_code(const std::string& code, const GridCase& gc, int levels) {
  MitigationPlan p = MitigationPlan::empty(static_cast<int>(gc.substations.size()), levels);
  size_t pos = 0;
  while (pos < code.size()) {
    size_t semi = code.find(';', pos);
    if (semi == std::string::npos) semi = code.size();
    std::string item = code.substr(pos, semi - pos);
    size_t eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("plan code: expected 'id=level' in '" + item + "'");
    std::string id = item.substr(0, eq);
    int lvl = std::stoi(item.substr(eq + 1));
    auto found = gc.sub_index.find(id);
    if (found == gc.sub_index.end())
      throw ValidationError("plan code: unknown substation '" + id + "'");
    if (lvl < 0 || lvl > levels)
      throw ValidationError("plan code: level out of range for substation '" + id + "'");
    for (int r = 1; r <= lvl; ++r) p.set(found->second, r, true);
    pos = semi + 1;
  }
  return p;
}

Config config_overridden(const Config& base, const std::string& text) {
  return config_from(parse(text, "config override"), base);
}

std::string config_to_json(const Config& cfg) { return config_json(cfg).dump(); }

}  // namespace floodmit
