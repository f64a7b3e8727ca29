// floodmit command-line front end. Talks to the planning core exclusively
// through the C API in floodmit.h; file formats and sweep orchestration
// live here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <semaphore>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "floodmit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;
constexpr int kExitIo = 3;

int exit_code_for(fm_status st) {
  switch (st) {
    case FM_OK: return kExitOk;
    case FM_ERR_IO: return kExitIo;
    case FM_ERR_SOLVER: return kExitSolver;
    default: return kExitValidation;
  }
}

[[noreturn]] void die(fm_status st, const std::string& context) {
  std::cerr << "error: " << context << ": " << fm_last_error() << "\n";
  std::exit(exit_code_for(st));
}

struct CaseHandle {
  fm_case* ptr = nullptr;
  ~CaseHandle() { fm_case_free(ptr); }
};
struct ScenHandle {
  fm_scenarios* ptr = nullptr;
  ~ScenHandle() { fm_scenarios_free(ptr); }
};

std::string take_string(char* s) {
  std::string out = s ? s : "";
  fm_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "'\n";
    std::exit(kExitIo);
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    std::exit(kExitIo);
  }
  out << text;
}

void load_inputs(const std::string& case_path, const std::string& scen_path,
                 const std::string& config_path, CaseHandle& gc, ScenHandle& scen) {
  if (fm_status st = fm_case_load(case_path.c_str(), &gc.ptr)) die(st, case_path);
  std::string cfg = config_path;
  if (cfg.empty())
    if (const char* env = std::getenv("FLOODMIT_CONFIG")) cfg = env;
  if (!cfg.empty())
    if (fm_status st = fm_config_override(gc.ptr, read_file(cfg).c_str())) die(st, cfg);
  if (!scen_path.empty())
    if (fm_status st = fm_scenarios_load(gc.ptr, scen_path.c_str(), &scen.ptr))
      die(st, scen_path);
}

std::vector<long> parse_budgets(const std::string& spec) {
  std::vector<long> out;
  auto range = spec.find("..");
  if (range != std::string::npos) {
    long lo = std::stol(spec.substr(0, range));
    long hi = std::stol(spec.substr(range + 2));
    for (long f = lo; f <= hi; ++f) out.push_back(f);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stol(item));
  return out;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string make_uuid() {
  std::random_device rd;
  std::uniform_int_distribution<std::uint64_t> d;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(d(rd) & 0xffffffff), static_cast<unsigned>(d(rd) & 0xffff),
                static_cast<unsigned>(d(rd) & 0xffff), static_cast<unsigned>(d(rd) & 0xffff),
                static_cast<unsigned long long>(d(rd) & 0xffffffffffffULL));
  return buf;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

// --- sweep ------------------------------------------------------------

struct SweepCell {
  std::string kind, pf;
  long budget = 0;
};

struct CellResult {
  std::string status = "ok";
  double z = 0.0;
  std::string plan;
  std::string summary_json;
};

int run_sweep(const std::string& case_path, const std::string& scen_path,
              const std::string& config_path, std::vector<std::string> kinds,
              std::vector<std::string> pfs, const std::string& budget_spec,
              const std::string& out_dir, bool warmstart, int jobs) {
  CaseHandle gc;
  ScenHandle scen;
  load_inputs(case_path, scen_path, config_path, gc, scen);
  std::vector<long> budgets = parse_budgets(budget_spec);
  if (budgets.empty() || kinds.empty() || pfs.empty()) {
    std::cerr << "error: sweep needs at least one kind, pf, and budget\n";
    return kExitValidation;
  }

  std::filesystem::create_directories(out_dir);
  std::string case_name = take_string([&] {
    char* s = nullptr;
    fm_case_name(gc.ptr, &s);
    return s;
  }());
  std::string config_hash = take_string([&] {
    char* s = nullptr;
    fm_config_hash(gc.ptr, &s);
    return s;
  }());

  std::vector<SweepCell> cells;
  for (const auto& kind : kinds)
    for (const auto& pf : pfs)
      for (long f : budgets) cells.push_back({kind, pf, f});

  // Worker pool: cells are independent solves; results land in cell order
  // and a single writer emits the ledger afterwards.
  if (jobs < 1) jobs = 1;
  std::counting_semaphore<256> gate(std::min(jobs, 256));
  std::vector<std::future<CellResult>> futs;
  futs.reserve(cells.size());
  for (const auto& cell : cells) {
    futs.push_back(std::async(std::launch::async, [&, cell]() {
      gate.acquire();
      CellResult r;
      fm_study* st = nullptr;
      fm_status rc = fm_solve_study(gc.ptr, scen.ptr, cell.kind.c_str(), cell.pf.c_str(),
                                    cell.budget, warmstart ? 1 : 0, &st);
      if (rc != FM_OK) {
        r.status = "error:" + std::to_string(static_cast<int>(rc));
      } else {
        fm_study_objective(st, &r.z);
        char* plan = nullptr;
        fm_study_plan_code(st, &plan);
        r.plan = take_string(plan);
        char* summary = nullptr;
        fm_study_summary_json(st, &summary);
        r.summary_json = take_string(summary);
        fm_study_free(st);
      }
      gate.release();
      return r;
    }));
  }

  std::string run_uuid = make_uuid();
  std::string stamp = iso_timestamp();
  std::string ledger_path = out_dir + "/ledger.csv";
  bool fresh = !std::filesystem::exists(ledger_path);
  std::ofstream ledger(ledger_path, std::ios::app);
  if (!ledger) {
    std::cerr << "error: cannot write '" << ledger_path << "'\n";
    return kExitIo;
  }
  if (fresh)
    ledger << "run_uuid,timestamp,case,kind,pf,budget,status,z,plan,plan_hash,config_hash,"
              "nodes,millis\n";

  std::map<std::pair<std::string, std::string>, std::ostringstream> series;
  bool any_failed = false;
  for (size_t i = 0; i < cells.size(); ++i) {
    CellResult r = futs[i].get();
    const auto& cell = cells[i];
    long nodes = 0, millis = 0;
    if (r.status == "ok") {
      auto j = nlohmann::json::parse(r.summary_json, nullptr, false);
      if (!j.is_discarded()) {
        nodes = j.value("nodes", 0L);
        millis = j.value("millis", 0L);
      }
    } else {
      any_failed = true;
    }
    char* plan_hash_c = nullptr;
    std::string plan_hash;
    (void)plan_hash_c;
    {
      // ledger hashes are over the plan code text
      std::ostringstream h;
      h << std::hex;
      std::uint64_t fnv = 1469598103934665603ull;
      for (unsigned char ch : r.plan) {
        fnv ^= ch;
        fnv *= 1099511628211ull;
      }
      char buf[17];
      std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv));
      plan_hash = buf;
    }
    ledger << run_uuid << ',' << stamp << ',' << case_name << ',' << cell.kind << ',' << cell.pf
           << ',' << cell.budget << ',' << r.status << ',' << fmt_double(r.z) << ',' << r.plan
           << ',' << plan_hash << ',' << config_hash << ',' << nodes << ',' << millis << '\n';
    if (r.status == "ok") {
      auto& os = series[{cell.kind, cell.pf}];
      if (os.str().empty()) os << "budget,z\n";
      os << cell.budget << ',' << fmt_double(r.z) << '\n';
    }
  }
  ledger.close();
  for (auto& [key, os] : series)
    write_file(out_dir + "/series_" + key.first + "_" + key.second + ".csv", os.str());
  std::cout << "sweep: " << cells.size() << " cells -> " << ledger_path << "\n";
  return any_failed ? kExitSolver : kExitOk;
}

// --- similarity ---------------------------------------------------------

struct LedgerRow {
  std::string kind, pf, status, plan;
  long budget = 0;
  double z = 0.0;
};

std::vector<LedgerRow> read_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "'\n";
    std::exit(kExitIo);
  }
  std::vector<LedgerRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f = split_csv(line);
    // a trailing empty plan field collapses in split_csv; re-split strictly
    f.clear();
    std::string item;
    std::stringstream ss(line);
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() < 13) continue;
    LedgerRow r;
    r.kind = f[3];
    r.pf = f[4];
    r.budget = std::stol(f[5]);
    r.status = f[6];
    r.z = std::stod(f[7]);
    r.plan = f[8];
    rows.push_back(std::move(r));
  }
  return rows;
}

int run_similarity(const std::string& case_path, const std::string& scen_path,
                   const std::string& config_path, const std::string& ledger_a,
                   const std::string& ledger_b, const std::string& out_path) {
  CaseHandle gc;
  ScenHandle scen;
  load_inputs(case_path, scen_path, config_path, gc, scen);
  int levels = 0;
  fm_scenarios_levels(scen.ptr, &levels);
  std::string case_name = take_string([&] {
    char* s = nullptr;
    fm_case_name(gc.ptr, &s);
    return s;
  }());

  auto rows_a = read_ledger(ledger_a);
  auto rows_b = read_ledger(ledger_b);
  std::map<std::pair<std::string, long>, const LedgerRow*> index_b;
  for (const auto& r : rows_b)
    if (r.status == "ok") index_b[{r.kind, r.budget}] = &r;

  std::ostringstream os;
  os << "case,kind,budget,pf_a,pf_b,abs_sim,rel_sim,gap_ab,gap_ba,gap_kind\n";
  int matched = 0;
  for (const auto& a : rows_a) {
    if (a.status != "ok") continue;
    auto it = index_b.find({a.kind, a.budget});
    if (it == index_b.end()) continue;
    const LedgerRow& b = *it->second;
    ++matched;
    if (a.plan == b.plan) continue;  // only differing plans are reported
    double abs_v = 0.0, rel_v = 0.0;
    if (fm_status st =
            fm_plan_similarity(gc.ptr, levels, a.plan.c_str(), b.plan.c_str(), &abs_v, &rel_v))
      die(st, "plan similarity");
    double a_in_b = 0.0, b_in_a = 0.0;
    if (fm_status st = fm_eval_plan(gc.ptr, scen.ptr, b.kind.c_str(), b.pf.c_str(),
                                    a.plan.c_str(), &a_in_b))
      die(st, "cross evaluation");
    if (fm_status st = fm_eval_plan(gc.ptr, scen.ptr, a.kind.c_str(), a.pf.c_str(),
                                    b.plan.c_str(), &b_in_a))
      die(st, "cross evaluation");
    bool relative = b.z != 0.0 && a.z != 0.0;
    double gap_ab = relative ? (a_in_b - b.z) / b.z : a_in_b - b.z;
    double gap_ba = relative ? (b_in_a - a.z) / a.z : b_in_a - a.z;
    os << case_name << ',' << a.kind << ',' << a.budget << ',' << a.pf << ',' << b.pf << ','
       << fmt_double(abs_v) << ',' << fmt_double(rel_v) << ',' << fmt_double(gap_ab) << ','
       << fmt_double(gap_ba) << ',' << (relative ? "rel" : "abs") << '\n';
  }
  if (matched == 0) {
    std::cerr << "error: no matching (kind, budget) keys between the ledgers\n";
    return kExitValidation;
  }
  write_file(out_path, os.str());
  std::cout << "similarity: " << matched << " matched keys -> " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flood-mitigation planning toolkit for transmission grids"};
  app.require_subcommand(1);

  std::string case_path, scen_path, config_path, out_path, kind = "sp", pf = "dc";
  std::string kinds_csv = "sp", pfs_csv = "dc", budgets_spec, manifest_path;
  std::string ledger_a, ledger_b, external_solver;
  long budget = 0;
  unsigned seed = 0;
  int tangent_count = 7, samples = 100000, jobs = static_cast<int>(
      std::max(1u, std::thread::hardware_concurrency()));
  double theta_delta = 1.57079632679489661923;
  bool no_warmstart = false;

  auto add_common = [&](CLI::App* cmd, bool need_scen) {
    cmd->add_option("--case", case_path, "case file (JSON)")->required();
    if (need_scen) cmd->add_option("--scenarios", scen_path, "scenario file (JSON)")->required();
    cmd->add_option("--config", config_path,
                    "config override JSON (defaults to $FLOODMIT_CONFIG)");
  };

  auto* validate = app.add_subcommand("validate", "check case and scenario invariants");
  validate->add_option("--case", case_path)->required();
  validate->add_option("--scenarios", scen_path);
  validate->add_option("--config", config_path);

  auto* sweep = app.add_subcommand("sweep", "solve a budget sweep and write a results ledger");
  add_common(sweep, true);
  sweep->add_option("--kind", kinds_csv, "comma list: sp,ro,ev,eev,ews,mv,mmv,mws");
  sweep->add_option("--pf", pfs_csv, "comma list: dc,lpac-c,lpac-f,qpac");
  sweep->add_option("--budget", budgets_spec, "range a..b or comma list")->required();
  sweep->add_option("--out", out_path, "output directory")->required();
  sweep->add_option("--jobs", jobs, "worker pool size");
  sweep->add_flag("--no-warmstart", no_warmstart, "disable the greedy warmstart");
  sweep->add_option("--manifest", manifest_path, "JSON manifest overriding the flags above");

  auto* similarity = app.add_subcommand("similarity", "compare plans across two sweep ledgers");
  add_common(similarity, true);
  similarity->add_option("--ledger-a", ledger_a)->required();
  similarity->add_option("--ledger-b", ledger_b)->required();
  similarity->add_option("--out", out_path)->required();

  auto* geometry = app.add_subcommand("geometry", "cosine tangent calibration and plot data");
  geometry->add_option("--t", tangent_count, "tangent count");
  geometry->add_option("--theta-delta", theta_delta, "angle-difference bound (radians)");
  geometry->add_option("--seed", seed);
  geometry->add_option("--samples", samples, "envelope sample count");
  geometry->add_option("--out", out_path, "output directory");

  auto* export_lp = app.add_subcommand("export-lp", "write the deterministic equivalent in LP format");
  add_common(export_lp, true);
  export_lp->add_option("--kind", kind, "sp | ro | ev | mv");
  export_lp->add_option("--pf", pf);
  export_lp->add_option("--budget", budget)->required();
  export_lp->add_option("--out", out_path)->required();
  export_lp->add_option("--external-solver", external_solver,
                        "solver command to cross-check the exported file");

  auto* bigm = app.add_subcommand("bigm-audit", "sampled validity audit of the big-M ranges");
  add_common(bigm, false);
  bigm->add_option("--pf", pf);
  bigm->add_option("--samples", samples);
  bigm->add_option("--seed", seed);
  bigm->add_option("--out", out_path)->required();

  auto* uniq = app.add_subcommand("uniqueness", "no-good-cut uniqueness check of an optimum");
  add_common(uniq, true);
  uniq->add_option("--kind", kind, "sp | ro");
  uniq->add_option("--pf", pf);
  uniq->add_option("--budget", budget)->required();
  uniq->add_option("--out", out_path, "write the JSON report here as well");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    CaseHandle gc;
    ScenHandle scen;
    load_inputs(case_path, scen_path, config_path, gc, scen);
    char* report = nullptr;
    fm_status st = fm_validate(gc.ptr, scen.ptr, &report);
    std::string text = take_string(report);
    if (st == FM_OK) {
      std::cout << "ok\n";
      return kExitOk;
    }
    std::cerr << text << "\n";
    return exit_code_for(st);
  }

  if (sweep->parsed()) {
    std::vector<std::string> kinds = split_csv(kinds_csv);
    std::vector<std::string> pfs = split_csv(pfs_csv);
    if (!manifest_path.empty()) {
      auto j = nlohmann::json::parse(read_file(manifest_path), nullptr, false);
      if (j.is_discarded()) {
        std::cerr << "error: malformed manifest\n";
        return kExitValidation;
      }
      case_path = j.value("case", case_path);
      scen_path = j.value("scenarios", scen_path);
      if (j.contains("kinds")) kinds = j.at("kinds").get<std::vector<std::string>>();
      if (j.contains("pfs")) pfs = j.at("pfs").get<std::vector<std::string>>();
      if (j.contains("budgets")) {
        if (j.at("budgets").is_string())
          budgets_spec = j.at("budgets").get<std::string>();
        else {
          budgets_spec.clear();
          for (auto& b : j.at("budgets")) budgets_spec += std::to_string(b.get<long>()) + ",";
        }
      }
      out_path = j.value("out", out_path);
    }
    return run_sweep(case_path, scen_path, config_path, kinds, pfs, budgets_spec, out_path,
                     !no_warmstart, jobs);
  }

  if (similarity->parsed())
    return run_similarity(case_path, scen_path, config_path, ledger_a, ledger_b, out_path);

  if (geometry->parsed()) {
    char* json = nullptr;
    if (fm_status st = fm_geometry_json(tangent_count, theta_delta, seed, &json))
      die(st, "geometry");
    std::string text = take_string(json);
    std::cout << text << "\n";
    if (!out_path.empty()) {
      std::filesystem::create_directories(out_path);
      write_file(out_path + "/tangents.json", text + "\n");
      char* csv = nullptr;
      if (fm_status st =
              fm_geometry_envelope_csv(tangent_count, theta_delta, seed, samples, &csv))
        die(st, "geometry envelope");
      write_file(out_path + "/envelope.csv", take_string(csv));
    }
    return kExitOk;
  }

  if (export_lp->parsed()) {
    CaseHandle gc;
    ScenHandle scen;
    load_inputs(case_path, scen_path, config_path, gc, scen);
    if (fm_status st =
            fm_export_lp(gc.ptr, scen.ptr, kind.c_str(), pf.c_str(), budget, out_path.c_str()))
      die(st, "export");
    std::cout << "wrote " << out_path << "\n";
    if (!external_solver.empty()) {
      fm_study* st_handle = nullptr;
      if (fm_status st = fm_solve_study(gc.ptr, scen.ptr, kind.c_str(), pf.c_str(), budget, 1,
                                        &st_handle))
        die(st, "embedded solve");
      double embedded = 0.0;
      fm_study_objective(st_handle, &embedded);
      fm_study_free(st_handle);
      std::string cmd = external_solver + " " + out_path;
      FILE* pipe = popen(cmd.c_str(), "r");
      if (!pipe) {
        std::cerr << "error: cannot run '" << cmd << "'\n";
        return kExitIo;
      }
      std::string output;
      char buf[256];
      while (fgets(buf, sizeof(buf), pipe)) output += buf;
      int rc = pclose(pipe);
      double external = std::nan("");
      std::istringstream is(output);
      std::string line, last;
      while (std::getline(is, line))
        if (!line.empty()) last = line;
      try {
        external = std::stod(last);
      } catch (...) {
      }
      std::cout << "embedded objective: " << fmt_double(embedded) << "\n";
      std::cout << "external objective: " << (std::isnan(external) ? "n/a" : fmt_double(external))
                << "\n";
      if (rc != 0 || std::isnan(external)) return kExitSolver;
      std::cout << "difference: " << fmt_double(std::abs(embedded - external)) << "\n";
    }
    return kExitOk;
  }

  if (bigm->parsed()) {
    CaseHandle gc;
    ScenHandle scen;
    load_inputs(case_path, "", config_path, gc, scen);
    char* csv = nullptr;
    if (fm_status st = fm_bigm_audit_csv(gc.ptr, pf.c_str(), samples, seed, &csv))
      die(st, "bigm audit");
    write_file(out_path, take_string(csv));
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
  }

  if (uniq->parsed()) {
    CaseHandle gc;
    ScenHandle scen;
    load_inputs(case_path, scen_path, config_path, gc, scen);
    char* json = nullptr;
    if (fm_status st =
            fm_uniqueness_json(gc.ptr, scen.ptr, kind.c_str(), pf.c_str(), budget, &json))
      die(st, "uniqueness");
    std::string text = take_string(json);
    std::cout << text << "\n";
    if (!out_path.empty()) write_file(out_path, text + "\n");
    return kExitOk;
  }

  return kExitOk;
}
