#include "floodmit/recourse.hpp"

#include <algorithm>
#include <cmath>

namespace floodmit::recourse {

using model::LinTerm;
using model::ModelIR;
using model::Sense;
using model::VarKind;

namespace {

// A component status that is either a model variable or a 0/1 constant.
struct SRef {
  int var = -1;
  double cval = 1.0;
  bool is_const() const { return var < 0; }
  static SRef constant(double v) { return {-1, v}; }
  static SRef of(int var) { return {var, 0.0}; }
};

void snap_tiny(std::vector<geom::HalfPlane>& hps) {
  for (auto& h : hps) {
    if (std::abs(h.cp) < 1e-15) h.cp = 0.0;
    if (std::abs(h.cq) < 1e-15) h.cq = 0.0;
  }
}

}  // namespace

VariantGeometry variant_geometry(PfVariant v, const Config& cfg) {
  VariantGeometry vg;
  vg.variant = v;
  switch (v) {
    case PfVariant::DC:
      break;
    case PfVariant::LPAC_C:
      vg.disc = geom::disc_halfplanes(geom::square_disc_angles(), 1.0);
      break;
    case PfVariant::LPAC_F:
      vg.tangents = geom::variant_tangent_set(cfg);
      vg.disc = geom::disc_halfplanes(geom::dodecagon_disc_angles(), 1.0);
      break;
    case PfVariant::QPAC:
      // the coarse square seeds the cutting loop; the exact disc is quadratic
      vg.disc = geom::disc_halfplanes(geom::square_disc_angles(), 1.0);
      break;
  }
  snap_tiny(vg.disc);
  return vg;
}

BlockVars emit_block(ModelIR& m, const GridCase& gc, const IndicatorMatrix& xi, const XRef& x,
                     const VariantGeometry& vg, const bigm::BigMSet& bm, ChiMode chi_mode,
                     const std::string& pfx) {
  const Config& cfg = gc.config;
  const double thmax = cfg.theta_max;
  const double tdm = cfg.theta_delta_max;
  const bool lpac = vg.variant != PfVariant::DC;
  const bool xfixed = x.fixed != nullptr;
  const int levels = xi.levels;
  const int nsub = static_cast<int>(gc.substations.size());
  const int nbus = static_cast<int>(gc.buses.size());
  const int nbr = static_cast<int>(gc.branches.size());
  const int nedge = static_cast<int>(gc.edges.size());

  BlockVars bv;
  bv.variant = vg.variant;

  ComponentStatus fixed_status;
  if (xfixed) fixed_status = component_status(gc, *x.fixed, xi);

  // Substation statuses.
  std::vector<SRef> alpha(nsub);
  bv.alpha.assign(nsub, -1);
  bv.alpha_const.assign(nsub, 1.0);
  for (int k = 0; k < nsub; ++k) {
    if (xfixed) {
      double v = fixed_status.bus_up[gc.sub_buses[k].front()] ? 1.0 : 0.0;
      alpha[k] = SRef::constant(v);
      bv.alpha_const[k] = v;
      continue;
    }
    std::vector<int> flooded;
    for (int r = 1; r <= levels; ++r)
      if (xi.at(k, r)) flooded.push_back(r);
    if (flooded.empty()) {
      alpha[k] = SRef::constant(1.0);
      bv.alpha_const[k] = 1.0;
    } else if (xi.at(k, levels)) {
      // top-level flooding cannot be mitigated
      alpha[k] = SRef::constant(0.0);
      bv.alpha_const[k] = 0.0;
    } else {
      int av = m.add_var(pfx + "al_" + std::to_string(k), VarKind::Continuous, 0.0, 1.0, "alpha");
      alpha[k] = SRef::of(av);
      bv.alpha[k] = av;
      std::vector<LinTerm> low{{av, 1.0}};
      for (int r : flooded) {
        int xv = (*x.vars)[static_cast<size_t>(k) * x.levels + (r - 1)];
        m.add_lin(pfx + "al_ub_" + std::to_string(k) + "_" + std::to_string(r),
                  {{av, 1.0}, {xv, -1.0}}, Sense::LE, 0.0);
        low.push_back({xv, -1.0});
      }
      m.add_lin(pfx + "al_lb_" + std::to_string(k), std::move(low), Sense::GE,
                1.0 - static_cast<double>(flooded.size()));
    }
  }

  // Infeasibility indicator.
  SRef chi;
  switch (chi_mode) {
    case ChiMode::Free:
      bv.chi = m.add_var(pfx + "chi", VarKind::Binary, 0.0, 1.0, "chi");
      chi = SRef::of(bv.chi);
      break;
    case ChiMode::ForceZero:
      chi = SRef::constant(0.0);
      bv.chi_const = 0.0;
      break;
    case ChiMode::ForceOne:
      chi = SRef::constant(1.0);
      bv.chi_const = 1.0;
      break;
  }

  // Edge statuses from endpoint substations.
  std::vector<SRef> beta(nedge);
  bv.beta.assign(nedge, -1);
  bv.beta_const.assign(nedge, 1.0);
  for (int e = 0; e < nedge; ++e) {
    SRef a = alpha[gc.bus_sub[gc.edges[e].from_bus]];
    SRef b = alpha[gc.bus_sub[gc.edges[e].to_bus]];
    SRef out;
    if (a.is_const() && b.is_const()) {
      out = SRef::constant(a.cval * b.cval);
    } else if (a.is_const()) {
      out = a.cval == 0.0 ? SRef::constant(0.0) : b;
    } else if (b.is_const()) {
      out = b.cval == 0.0 ? SRef::constant(0.0) : a;
    } else if (a.var == b.var) {
      out = a;
    } else {
      int be = m.add_var(pfx + "be_" + std::to_string(e), VarKind::Continuous, 0.0, 1.0, "beta");
      m.add_lin(pfx + "be_lb_" + std::to_string(e), {{be, 1.0}, {a.var, -1.0}, {b.var, -1.0}},
                Sense::GE, -1.0);
      m.add_lin(pfx + "be_ub1_" + std::to_string(e), {{be, 1.0}, {a.var, -1.0}}, Sense::LE, 0.0);
      m.add_lin(pfx + "be_ub2_" + std::to_string(e), {{be, 1.0}, {b.var, -1.0}}, Sense::LE, 0.0);
      out = SRef::of(be);
    }
    beta[e] = out;
    if (out.is_const())
      bv.beta_const[e] = out.cval;
    else
      bv.beta[e] = out.var;
  }

  // Bus angles; the reference angle is pinned.
  bv.theta.resize(nbus);
  for (int n = 0; n < nbus; ++n) {
    double lo = n == gc.reference_bus ? 0.0 : -thmax;
    double hi = n == gc.reference_bus ? 0.0 : thmax;
    bv.theta[n] = m.add_var(pfx + "th_" + std::to_string(n), VarKind::Continuous, lo, hi, "theta");
  }

  // Magnitude deviations (warm-start linearization).
  if (lpac) {
    bv.phi.resize(nbus);
    for (int n = 0; n < nbus; ++n) {
      const Bus& bus = gc.buses[n];
      bv.phi[n] = m.add_var(pfx + "ph_" + std::to_string(n), VarKind::Continuous,
                            bus.v_min - bus.v_target, bus.v_max - bus.v_target, "phi");
    }
  }

  // Load served fractions.
  bv.delta.resize(gc.loads.size());
  for (size_t d = 0; d < gc.loads.size(); ++d) {
    double hi = 1.0;
    if (chi.is_const() && chi.cval == 1.0) hi = 0.0;  // indicator raised sheds everything
    bv.delta[d] = m.add_var(pfx + "dl_" + std::to_string(d), VarKind::Continuous, 0.0, hi, "delta");
    if (!chi.is_const())
      m.add_lin(pfx + "dl_chi_" + std::to_string(d), {{bv.delta[d], 1.0}, {chi.var, 1.0}},
                Sense::LE, 1.0);
  }

  // Generators.
  bv.gen_p.resize(gc.generators.size());
  bv.gen_ov.resize(gc.generators.size());
  if (lpac) bv.gen_q.resize(gc.generators.size());
  for (size_t g = 0; g < gc.generators.size(); ++g) {
    const Generator& gen = gc.generators[g];
    int n = gc.bus_index.at(gen.bus_id);
    SRef a = alpha[gc.bus_sub[n]];

    double lo, hi;
    if (a.is_const()) {
      hi = gen.p_max * a.cval;
      if (chi.is_const())
        lo = gen.p_min * (a.cval - chi.cval);
      else
        lo = gen.p_min * (a.cval - 1.0);
    } else {
      hi = gen.p_max;
      lo = chi.is_const() ? -gen.p_min * chi.cval : -gen.p_min;
      if (chi.is_const() && chi.cval == 0.0) lo = 0.0;
    }
    int pg = m.add_var(pfx + "pg_" + std::to_string(g), VarKind::Continuous, lo, hi, "pg");
    bv.gen_p[g] = pg;

    if (gen.p_min > 0.0) {
      if (a.is_const() && !chi.is_const()) {
        m.add_lin(pfx + "pg_lo_" + std::to_string(g), {{pg, 1.0}, {chi.var, gen.p_min}}, Sense::GE,
                  gen.p_min * a.cval);
      } else if (!a.is_const()) {
        std::vector<LinTerm> t{{pg, 1.0}, {a.var, -gen.p_min}};
        double rhs = 0.0;
        if (chi.is_const())
          rhs = -gen.p_min * chi.cval;
        else
          t.push_back({chi.var, gen.p_min});
        m.add_lin(pfx + "pg_lo_" + std::to_string(g), std::move(t), Sense::GE, rhs);
      }
    }
    if (!a.is_const())
      m.add_lin(pfx + "pg_hi_" + std::to_string(g), {{pg, 1.0}, {a.var, -gen.p_max}}, Sense::LE,
                0.0);

    int ov = m.add_var(pfx + "ov_" + std::to_string(g), VarKind::Continuous, 0.0,
                       std::max(gen.p_max, 0.0), "ov");
    bv.gen_ov[g] = ov;
    m.add_lin(pfx + "ov_cap_" + std::to_string(g), {{ov, 1.0}, {pg, -1.0}}, Sense::LE, 0.0);

    if (lpac) {
      double qlo, qhi;
      if (a.is_const()) {
        qlo = gen.q_min * a.cval;
        qhi = gen.q_max * a.cval;
      } else {
        qlo = std::min(gen.q_min, 0.0);
        qhi = std::max(gen.q_max, 0.0);
      }
      int qg = m.add_var(pfx + "qg_" + std::to_string(g), VarKind::Continuous, qlo, qhi, "qg");
      bv.gen_q[g] = qg;
      if (!a.is_const()) {
        m.add_lin(pfx + "qg_lo_" + std::to_string(g), {{qg, 1.0}, {a.var, -gen.q_min}}, Sense::GE,
                  0.0);
        m.add_lin(pfx + "qg_hi_" + std::to_string(g), {{qg, 1.0}, {a.var, -gen.q_max}}, Sense::LE,
                  0.0);
      }
    }
  }

  // Angle-difference surrogates per edge (per direction for LPAC).
  auto add_sin = [&](int e, bool fwd) {
    const auto& edge = gc.edges[e];
    int n = fwd ? edge.from_bus : edge.to_bus;
    int mbus = fwd ? edge.to_bus : edge.from_bus;
    const SRef& be = beta[e];
    double lo = -2.0 * thmax, hi = 2.0 * thmax;
    if (be.is_const()) {
      if (be.cval == 1.0) {
        lo = -tdm;
        hi = tdm;
      }
    }
    std::string name = pfx + "sn_" + std::to_string(e) + (fwd ? "_f" : "_r");
    int sn = m.add_var(name, VarKind::Continuous, lo, hi, "sn");
    m.add_lin(name + "_eq", {{sn, 1.0}, {bv.theta[n], -1.0}, {bv.theta[mbus], 1.0}}, Sense::EQ,
              0.0);
    if (!be.is_const()) {
      double w = 2.0 * thmax - tdm;
      m.add_lin(name + "_ub", {{sn, 1.0}, {be.var, w}}, Sense::LE, 2.0 * thmax);
      m.add_lin(name + "_lb", {{sn, 1.0}, {be.var, -w}}, Sense::GE, -2.0 * thmax);
    }
    return sn;
  };

  const double cos_floor = std::cos(tdm);
  auto add_cos = [&](int e, bool fwd) {
    double lo = vg.variant == PfVariant::LPAC_C ? 1.0 : cos_floor;
    std::string name = pfx + "cs_" + std::to_string(e) + (fwd ? "_f" : "_r");
    return m.add_var(name, VarKind::Continuous, lo, 1.0, "cs");
  };

  // Cosine relaxation rows for one directed edge.
  auto add_cos_rows = [&](int e, bool fwd, int sn, int cs) {
    const SRef& be = beta[e];
    std::string tag = pfx + "cos_" + std::to_string(e) + (fwd ? "_f" : "_r");
    if (vg.variant == PfVariant::LPAC_F) {
      if (be.is_const() && be.cval == 0.0) return;
      int idx = 0;
      for (double th : vg.tangents.points) {
        ++idx;
        double s = std::sin(th);
        if (th == 0.0) continue;  // tangent at zero is the cs <= 1 bound
        double rhs = th * s + std::cos(th);
        if (be.is_const()) {
          m.add_lin(tag + "_" + std::to_string(idx), {{cs, 1.0}, {sn, s}}, Sense::LE, rhs);
        } else {
          double worst = std::min(geom::b1(-2.0 * thmax, th), geom::b1(2.0 * thmax, th));
          double slack = 1.0 - worst;
          m.add_lin(tag + "_" + std::to_string(idx), {{cs, 1.0}, {sn, s}, {be.var, slack}},
                    Sense::LE, rhs + slack);
        }
      }
    } else if (vg.variant == PfVariant::QPAC) {
      if (be.is_const() && be.cval == 0.0) return;
      double kappa = (1.0 - cos_floor) / (tdm * tdm);
      if (be.is_const()) {
        m.add_quad(tag, {{sn, kappa}}, {{cs, 1.0}}, 1.0);
      } else {
        double relax = kappa * 4.0 * thmax * thmax;  // 1 - B2(2*theta_max)
        m.add_quad(tag, {{sn, kappa}}, {{cs, 1.0}, {be.var, relax}}, 1.0 + relax);
      }
    }
  };

  if (!lpac) {
    // DC: one undirected flow per branch, one sine surrogate per edge.
    std::vector<int> sin_e(nedge);
    bv.sin_fwd.resize(nedge);
    for (int e = 0; e < nedge; ++e) {
      sin_e[e] = add_sin(e, true);
      bv.sin_fwd[e] = sin_e[e];
    }
    bv.flow_p.resize(nbr);
    for (int l = 0; l < nbr; ++l) {
      const Branch& br = gc.branches[l];
      int e = gc.branch_edge[l];
      const SRef& be = beta[e];
      double cap = be.is_const() ? br.s_max * be.cval : br.s_max;
      int pf = m.add_var(pfx + "pf_" + std::to_string(l), VarKind::Continuous, -cap, cap, "pf");
      bv.flow_p[l] = pf;
      if (!be.is_const()) {
        m.add_lin(pfx + "pf_ub_" + std::to_string(l), {{pf, 1.0}, {be.var, -br.s_max}}, Sense::LE,
                  0.0);
        m.add_lin(pfx + "pf_lb_" + std::to_string(l), {{pf, 1.0}, {be.var, br.s_max}}, Sense::GE,
                  0.0);
      }
      // Conditional Ohm's law; the sine surrogate is oriented with the
      // edge, flip its sign for anti-aligned branches.
      double sgn = gc.bus_index.at(br.from_bus) == gc.edges[e].from_bus ? 1.0 : -1.0;
      const bigm::Interval& iv = bm.dc[l];
      if (be.is_const()) {
        if (be.cval == 1.0)
          m.add_lin(pfx + "ohm_" + std::to_string(l), {{pf, -1.0}, {sin_e[e], -br.b * sgn}},
                    Sense::EQ, 0.0);
      } else {
        m.add_lin(pfx + "ohm_ge_" + std::to_string(l),
                  {{pf, -1.0}, {sin_e[e], -br.b * sgn}, {be.var, iv.lo}}, Sense::GE, iv.lo);
        m.add_lin(pfx + "ohm_le_" + std::to_string(l),
                  {{pf, -1.0}, {sin_e[e], -br.b * sgn}, {be.var, iv.hi}}, Sense::LE, iv.hi);
      }
    }
    // Flow balance.
    for (int n = 0; n < nbus; ++n) {
      std::vector<LinTerm> t;
      for (int g : gc.gens_at_bus[n]) {
        t.push_back({bv.gen_p[g], 1.0});
        t.push_back({bv.gen_ov[g], -1.0});
      }
      for (int d : gc.loads_at_bus[n])
        if (gc.loads[d].p_load != 0.0) t.push_back({bv.delta[d], -gc.loads[d].p_load});
      for (int l = 0; l < nbr; ++l) {
        if (gc.bus_index.at(gc.branches[l].from_bus) == n)
          t.push_back({bv.flow_p[l], -1.0});
        else if (gc.bus_index.at(gc.branches[l].to_bus) == n)
          t.push_back({bv.flow_p[l], 1.0});
      }
      if (!t.empty())
        m.add_lin(pfx + "kcl_" + std::to_string(n), std::move(t), Sense::EQ, 0.0);
    }
  } else {
    // LPAC: directed surrogates per edge, directed flows per branch.
    bv.sin_fwd.resize(nedge);
    bv.sin_rev.resize(nedge);
    bv.cos_fwd.resize(nedge);
    bv.cos_rev.resize(nedge);
    for (int e = 0; e < nedge; ++e) {
      bv.sin_fwd[e] = add_sin(e, true);
      bv.sin_rev[e] = add_sin(e, false);
      bv.cos_fwd[e] = add_cos(e, true);
      bv.cos_rev[e] = add_cos(e, false);
      add_cos_rows(e, true, bv.sin_fwd[e], bv.cos_fwd[e]);
      add_cos_rows(e, false, bv.sin_rev[e], bv.cos_rev[e]);
    }

    bv.flow_p_fwd.resize(nbr);
    bv.flow_q_fwd.resize(nbr);
    bv.flow_p_rev.resize(nbr);
    bv.flow_q_rev.resize(nbr);
    for (int l = 0; l < nbr; ++l) {
      const Branch& br = gc.branches[l];
      int e = gc.branch_edge[l];
      const SRef& be = beta[e];
      bool aligned = gc.bus_index.at(br.from_bus) == gc.edges[e].from_bus;

      for (bool from_side : {true, false}) {
        double cap = be.is_const() ? br.s_max * be.cval : br.s_max;
        std::string side = from_side ? "_f" : "_r";
        int pf = m.add_var(pfx + "pfl_" + std::to_string(l) + side, VarKind::Continuous, -cap,
                           cap, "pf");
        int qf = m.add_var(pfx + "qfl_" + std::to_string(l) + side, VarKind::Continuous, -cap,
                           cap, "qf");
        (from_side ? bv.flow_p_fwd : bv.flow_p_rev)[l] = pf;
        (from_side ? bv.flow_q_fwd : bv.flow_q_rev)[l] = qf;
        if (be.is_const() && be.cval == 0.0) continue;  // flows pinned to zero

        // Apparent-power geometry.
        std::string dtag = pfx + "disc_" + std::to_string(l) + side;
        int idx = 0;
        for (const auto& hp : vg.disc) {
          ++idx;
          // the coarse square matches the box bounds; skip axis planes
          bool axis = (hp.cp == 0.0 && std::abs(hp.cq) == 1.0) ||
                      (hp.cq == 0.0 && std::abs(hp.cp) == 1.0);
          if (be.is_const() && axis) continue;
          std::vector<LinTerm> t;
          if (hp.cp != 0.0) t.push_back({pf, hp.cp});
          if (hp.cq != 0.0) t.push_back({qf, hp.cq});
          if (be.is_const()) {
            m.add_lin(dtag + "_" + std::to_string(idx), std::move(t), Sense::LE, br.s_max);
          } else {
            t.push_back({be.var, -br.s_max});
            m.add_lin(dtag + "_" + std::to_string(idx), std::move(t), Sense::LE, 0.0);
          }
        }
        if (vg.variant == PfVariant::QPAC) {
          auto& qc = m.quad_cons;
          (void)qc;
          if (be.is_const()) {
            int qid = m.add_quad(dtag + "_q", {{pf, 1.0}, {qf, 1.0}}, {}, br.s_max * br.s_max);
            m.quad_cons[qid].disc_radius = br.s_max;
          } else {
            int qid = m.add_quad(dtag + "_q", {{pf, 1.0}, {qf, 1.0}},
                                 {{be.var, -br.s_max * br.s_max}}, 0.0);
            m.quad_cons[qid].disc_scale_var = be.var;
            m.quad_cons[qid].disc_radius = br.s_max;
          }
        }

        // Directed Ohm rows; the sine/cosine surrogate of this direction.
        bool dir_fwd = from_side == aligned;
        int sn = dir_fwd ? bv.sin_fwd[e] : bv.sin_rev[e];
        int cs = dir_fwd ? bv.cos_fwd[e] : bv.cos_rev[e];
        int nb = from_side ? gc.bus_index.at(br.from_bus) : gc.bus_index.at(br.to_bus);
        int mb = from_side ? gc.bus_index.at(br.to_bus) : gc.bus_index.at(br.from_bus);
        double vn = gc.buses[nb].v_target, vm = gc.buses[mb].v_target;

        const bigm::DirectedIntervals& iv = from_side ? bm.fwd[l] : bm.rev[l];

        // active: -pf + chi*[vn g (vm - vn)] + vn^2 g - vn vm g cs - vn vm b sn
        {
          std::vector<LinTerm> t{{pf, -1.0}};
          double cchi = vn * br.g * (vm - vn);
          double cconst = vn * vn * br.g;
          if (!chi.is_const() && cchi != 0.0) t.push_back({chi.var, cchi});
          if (chi.is_const()) cconst += cchi * chi.cval;
          if (vn * vm * br.g != 0.0) t.push_back({cs, -vn * vm * br.g});
          if (vn * vm * br.b != 0.0) t.push_back({sn, -vn * vm * br.b});
          std::string tag = pfx + "ohm_p_" + std::to_string(l) + side;
          if (be.is_const()) {
            m.add_lin(tag, std::move(t), Sense::EQ, -cconst);
          } else {
            auto t2 = t;
            t.push_back({be.var, iv.active.lo});
            m.add_lin(tag + "_ge", std::move(t), Sense::GE, iv.active.lo - cconst);
            t2.push_back({be.var, iv.active.hi});
            m.add_lin(tag + "_le", std::move(t2), Sense::LE, iv.active.hi - cconst);
          }
        }
        // reactive: -qf + chi*[vn b (vn - vm)] - vn^2 b - vn vm g sn
        //           + vn vm b cs - b(2vn - vm) phi_n + vn b phi_m
        {
          std::vector<LinTerm> t{{qf, -1.0}};
          double cchi = vn * br.b * (vn - vm);
          double cconst = -vn * vn * br.b;
          if (!chi.is_const() && cchi != 0.0) t.push_back({chi.var, cchi});
          if (chi.is_const()) cconst += cchi * chi.cval;
          if (vn * vm * br.g != 0.0) t.push_back({sn, -vn * vm * br.g});
          if (vn * vm * br.b != 0.0) t.push_back({cs, vn * vm * br.b});
          double cphn = -br.b * (2.0 * vn - vm);
          double cphm = vn * br.b;
          if (cphn != 0.0) t.push_back({bv.phi[nb], cphn});
          if (cphm != 0.0) t.push_back({bv.phi[mb], cphm});
          std::string tag = pfx + "ohm_q_" + std::to_string(l) + side;
          if (be.is_const()) {
            m.add_lin(tag, std::move(t), Sense::EQ, -cconst);
          } else {
            auto t2 = t;
            t.push_back({be.var, iv.reactive.lo});
            m.add_lin(tag + "_ge", std::move(t), Sense::GE, iv.reactive.lo - cconst);
            t2.push_back({be.var, iv.reactive.hi});
            m.add_lin(tag + "_le", std::move(t2), Sense::LE, iv.reactive.hi - cconst);
          }
        }
      }
    }

    // Flow balance, active and reactive.
    for (int n = 0; n < nbus; ++n) {
      std::vector<LinTerm> tp, tq;
      for (int g : gc.gens_at_bus[n]) {
        tp.push_back({bv.gen_p[g], 1.0});
        tp.push_back({bv.gen_ov[g], -1.0});
        tq.push_back({bv.gen_q[g], 1.0});
      }
      for (int d : gc.loads_at_bus[n]) {
        if (gc.loads[d].p_load != 0.0) tp.push_back({bv.delta[d], -gc.loads[d].p_load});
        if (gc.loads[d].q_load != 0.0) tq.push_back({bv.delta[d], -gc.loads[d].q_load});
      }
      for (int l = 0; l < nbr; ++l) {
        if (gc.bus_index.at(gc.branches[l].from_bus) == n) {
          tp.push_back({bv.flow_p_fwd[l], -1.0});
          tq.push_back({bv.flow_q_fwd[l], -1.0});
        } else if (gc.bus_index.at(gc.branches[l].to_bus) == n) {
          tp.push_back({bv.flow_p_rev[l], -1.0});
          tq.push_back({bv.flow_q_rev[l], -1.0});
        }
      }
      if (!tp.empty())
        m.add_lin(pfx + "kcl_p_" + std::to_string(n), std::move(tp), Sense::EQ, 0.0);
      if (!tq.empty())
        m.add_lin(pfx + "kcl_q_" + std::to_string(n), std::move(tq), Sense::EQ, 0.0);
    }
  }

  // Block objective: weighted unserved active load plus discarded power.
  double total = 0.0;
  for (size_t d = 0; d < gc.loads.size(); ++d) {
    total += gc.loads[d].p_load;
    if (gc.loads[d].p_load != 0.0)
      bv.objective.push_back({bv.delta[d], -cfg.lambda_shed * gc.loads[d].p_load});
  }
  for (size_t g = 0; g < gc.generators.size(); ++g)
    bv.objective.push_back({bv.gen_ov[g], cfg.lambda_over});
  bv.obj_offset = cfg.lambda_shed * total;
  return bv;
}

RecourseBuild build_recourse(PfVariant v, const GridCase& gc, const IndicatorMatrix& xi,
                             const MitigationPlan& x, const bigm::BigMSet& bm, ChiMode chi_mode) {
  RecourseBuild rb;
  XRef xr;
  xr.fixed = &x;
  xr.levels = xi.levels;
  VariantGeometry vg = variant_geometry(v, gc.config);
  rb.vars = emit_block(rb.model, gc, xi, xr, vg, bm, chi_mode, "");
  rb.model.set_objective(rb.vars.objective, rb.vars.obj_offset);
  rb.model.check();
  return rb;
}

RecourseBuild build_dc(const GridCase& gc, const IndicatorMatrix& xi, const MitigationPlan& x,
                       const bigm::BigMSet& bm, ChiMode chi_mode) {
  return build_recourse(PfVariant::DC, gc, xi, x, bm, chi_mode);
}

RecourseBuild build_lpac(const GridCase& gc, const IndicatorMatrix& xi, const MitigationPlan& x,
                         const bigm::BigMSet& bm, PfVariant v, ChiMode chi_mode) {
  if (v == PfVariant::DC) throw InputError("build_lpac: DC is not an LPAC variant");
  return build_recourse(v, gc, xi, x, bm, chi_mode);
}

std::vector<double> trivial_solution_values(const RecourseBuild& rb, const GridCase& gc,
                                            const IndicatorMatrix& xi, const MitigationPlan& x) {
  std::vector<double> v(rb.model.vars.size(), 0.0);
  const BlockVars& bv = rb.vars;
  if (bv.chi >= 0) v[bv.chi] = 1.0;
  for (int cs : bv.cos_fwd)
    if (cs >= 0) v[cs] = 1.0;
  for (int cs : bv.cos_rev)
    if (cs >= 0) v[cs] = 1.0;
  ComponentStatus st = component_status(gc, x, xi);
  for (size_t k = 0; k < bv.alpha.size(); ++k)
    if (bv.alpha[k] >= 0) v[bv.alpha[k]] = st.bus_up[gc.sub_buses[k].front()] ? 1.0 : 0.0;
  for (size_t e = 0; e < bv.beta.size(); ++e)
    if (bv.beta[e] >= 0) v[bv.beta[e]] = st.edge_up[e] ? 1.0 : 0.0;
  return v;
}

RecourseSolution extract_solution(const RecourseBuild& rb, const GridCase& gc,
                                  const std::vector<double>& values) {
  RecourseSolution out;
  out.values = values;
  const BlockVars& bv = rb.vars;
  out.chi = bv.chi_of(values);
  for (size_t d = 0; d < gc.loads.size(); ++d)
    out.shed += gc.loads[d].p_load * (1.0 - values[bv.delta[d]]);
  for (size_t g = 0; g < gc.generators.size(); ++g) out.overgen += values[bv.gen_ov[g]];
  out.objective = rb.model.eval_objective(values);
  return out;
}

RecourseSolution solve_recourse(const RecourseBuild& rb, const GridCase& gc,
                                const engine::EngineConfig& cfg) {
  auto res = engine::solve_model(rb.model, cfg);
  if (res.status != engine::SolveStatus::Optimal)
    throw engine::EngineError("solve_recourse: engine returned non-optimal status");
  return extract_solution(rb, gc, res.values);
}

}  // namespace floodmit::recourse
