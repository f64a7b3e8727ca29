#include "floodmit/bigm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace floodmit {

const char* to_string(PfVariant v) {
  switch (v) {
    case PfVariant::DC: return "dc";
    case PfVariant::LPAC_C: return "lpac-c";
    case PfVariant::LPAC_F: return "lpac-f";
    case PfVariant::QPAC: return "qpac";
  }
  return "dc";
}

std::optional<PfVariant> pf_variant_from_string(const std::string& s) {
  if (s == "dc" || s == "DC") return PfVariant::DC;
  if (s == "lpac-c" || s == "LPAC-C" || s == "lpac_c") return PfVariant::LPAC_C;
  if (s == "lpac-f" || s == "LPAC-F" || s == "lpac_f") return PfVariant::LPAC_F;
  if (s == "qpac" || s == "QPAC") return PfVariant::QPAC;
  return std::nullopt;
}

namespace bigm {

namespace {

struct TermAccum {
  double lo = 0.0, hi = 0.0;
  void constant(double c) {
    lo += c;
    hi += c;
  }
  void box(double coef, double vlo, double vhi) {
    lo += std::min(coef * vlo, coef * vhi);
    hi += std::max(coef * vlo, coef * vhi);
  }
};

struct Ends {
  double vn, vm;          // voltage targets at the directed endpoints
  double phn_lo, phn_hi;  // magnitude-deviation boxes
  double phm_lo, phm_hi;
};

Ends ends_of(const GridCase& gc, int branch, bool forward) {
  const auto& br = gc.branches[branch];
  int f = gc.bus_index.at(br.from_bus);
  int t = gc.bus_index.at(br.to_bus);
  int n = forward ? f : t;
  int m = forward ? t : f;
  Ends e;
  e.vn = gc.buses[n].v_target;
  e.vm = gc.buses[m].v_target;
  e.phn_lo = gc.buses[n].v_min - e.vn;
  e.phn_hi = gc.buses[n].v_max - e.vn;
  e.phm_lo = gc.buses[m].v_min - e.vm;
  e.phm_hi = gc.buses[m].v_max - e.vm;
  return e;
}

struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

}  // namespace

void open_cos_range(PfVariant v, const Config& cfg, double& lo, double& hi) {
  hi = 1.0;
  lo = v == PfVariant::LPAC_C ? 1.0 : std::cos(cfg.theta_delta_max);
}

double dc_rhs_value(const Branch& branch, double sin_hat) { return -branch.b * sin_hat; }

Interval dc_interval(const Branch& branch, const Config& cfg) {
  double span = std::abs(branch.b) * 2.0 * cfg.theta_max;
  return {-span, span};
}

double lpac_active_rhs(const GridCase& gc, int branch, bool forward, double chi, double sin_hat,
                       double cos_hat) {
  const auto& br = gc.branches[branch];
  Ends e = ends_of(gc, branch, forward);
  return e.vn * br.g * (e.vm - e.vn) * chi + e.vn * e.vn * br.g -
         e.vn * e.vm * (br.g * cos_hat + br.b * sin_hat);
}

double lpac_reactive_rhs(const GridCase& gc, int branch, bool forward, double chi, double sin_hat,
                         double cos_hat, double phi_n, double phi_m) {
  const auto& br = gc.branches[branch];
  Ends e = ends_of(gc, branch, forward);
  return e.vn * br.b * (e.vn - e.vm) * chi - e.vn * e.vn * br.b -
         e.vn * e.vm * (br.g * sin_hat - br.b * cos_hat) - e.vn * br.b * (phi_n - phi_m) -
         (e.vn - e.vm) * br.b * phi_n;
}

DirectedIntervals lpac_intervals(const GridCase& gc, int branch, bool forward, PfVariant v,
                                 const Config& cfg) {
  const auto& br = gc.branches[branch];
  Ends e = ends_of(gc, branch, forward);
  double cos_lo, cos_hi;
  open_cos_range(v, cfg, cos_lo, cos_hi);
  const double sin_span = 2.0 * cfg.theta_max;

  DirectedIntervals out;
  {
    TermAccum a;
    a.box(e.vn * br.g * (e.vm - e.vn), 0.0, 1.0);  // chi
    a.constant(e.vn * e.vn * br.g);
    a.box(-e.vn * e.vm * br.g, cos_lo, cos_hi);
    a.box(-e.vn * e.vm * br.b, -sin_span, sin_span);
    out.active = {a.lo, a.hi};
  }
  {
    TermAccum a;
    a.box(e.vn * br.b * (e.vn - e.vm), 0.0, 1.0);  // chi
    a.constant(-e.vn * e.vn * br.b);
    a.box(-e.vn * e.vm * br.g, -sin_span, sin_span);
    a.box(e.vn * e.vm * br.b, cos_lo, cos_hi);
    a.box(-br.b * (2.0 * e.vn - e.vm), e.phn_lo, e.phn_hi);  // phi_n
    a.box(e.vn * br.b, e.phm_lo, e.phm_hi);                  // phi_m
    out.reactive = {a.lo, a.hi};
  }
  return out;
}

BigMSet calibrate(const GridCase& gc, PfVariant v, const Config& cfg) {
  BigMSet set;
  const int nl = static_cast<int>(gc.branches.size());
  if (v == PfVariant::DC) {
    set.dc.reserve(nl);
    for (int l = 0; l < nl; ++l) set.dc.push_back(dc_interval(gc.branches[l], cfg));
  } else {
    set.fwd.reserve(nl);
    set.rev.reserve(nl);
    for (int l = 0; l < nl; ++l) {
      set.fwd.push_back(lpac_intervals(gc, l, true, v, cfg));
      set.rev.push_back(lpac_intervals(gc, l, false, v, cfg));
    }
  }
  return set;
}

std::vector<AuditRow> audit(const GridCase& gc, PfVariant v, const Config& cfg, int samples,
                            unsigned seed) {
  std::vector<AuditRow> rows;
  const double sin_span = 2.0 * cfg.theta_max;
  double cos_lo, cos_hi;
  open_cos_range(v, cfg, cos_lo, cos_hi);

  for (size_t l = 0; l < gc.branches.size(); ++l) {
    SplitMix rng(0xb16a0ull + seed * 2654435761ull + l);
    if (v == PfVariant::DC) {
      AuditRow row;
      row.branch_id = gc.branches[l].id;
      row.kind = "dc";
      row.range = dc_interval(gc.branches[l], cfg);
      double worst = -std::numeric_limits<double>::infinity();
      for (int s = 0; s < samples; ++s) {
        double val = dc_rhs_value(gc.branches[l], rng.range(-sin_span, sin_span));
        worst = std::max(worst, std::max(row.range.lo - val, val - row.range.hi));
      }
      row.max_violation = worst;
      rows.push_back(std::move(row));
      continue;
    }
    for (bool forward : {true, false}) {
      Ends e = ends_of(gc, static_cast<int>(l), forward);
      DirectedIntervals iv = lpac_intervals(gc, static_cast<int>(l), forward, v, cfg);
      AuditRow act, rea;
      act.branch_id = rea.branch_id = gc.branches[l].id;
      act.forward = rea.forward = forward;
      act.kind = "active";
      rea.kind = "reactive";
      act.range = iv.active;
      rea.range = iv.reactive;
      double worst_a = -std::numeric_limits<double>::infinity();
      double worst_r = worst_a;
      for (int s = 0; s < samples; ++s) {
        double chi = rng.uniform() < 0.5 ? 0.0 : 1.0;
        double sh = rng.range(-sin_span, sin_span);
        double ch = rng.range(cos_lo, cos_hi);
        double pn = rng.range(e.phn_lo, e.phn_hi);
        double pm = rng.range(e.phm_lo, e.phm_hi);
        double va = lpac_active_rhs(gc, static_cast<int>(l), forward, chi, sh, ch);
        double vr = lpac_reactive_rhs(gc, static_cast<int>(l), forward, chi, sh, ch, pn, pm);
        worst_a = std::max(worst_a, std::max(iv.active.lo - va, va - iv.active.hi));
        worst_r = std::max(worst_r, std::max(iv.reactive.lo - vr, vr - iv.reactive.hi));
      }
      act.max_violation = worst_a;
      rea.max_violation = worst_r;
      rows.push_back(std::move(act));
      rows.push_back(std::move(rea));
    }
  }
  return rows;
}

std::string audit_csv(const std::vector<AuditRow>& rows, PfVariant v) {
  std::ostringstream os;
  os << "branch,direction,variant,kind,lo,hi,max_violation\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.branch_id << ',' << (r.forward ? "fwd" : "rev") << ',' << to_string(v) << ','
       << r.kind << ',' << r.range.lo << ',' << r.range.hi << ',' << r.max_violation << '\n';
  }
  return os.str();
}

}  // namespace bigm
}  // namespace floodmit
