#pragma once

#include <vector>

#include "floodmit/grid.hpp"

namespace floodmit {

enum class PfVariant { DC, LPAC_C, LPAC_F, QPAC };

const char* to_string(PfVariant v);
std::optional<PfVariant> pf_variant_from_string(const std::string& s);

namespace bigm {

/// Range [lo, hi] of a conditional Ohm's-law right-hand side when the
/// branch is open. Emitted as lo*(1-beta) <= expr <= hi*(1-beta), which
/// collapses to the Ohm equality at beta = 1.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

/// DC bound: -b*sin_hat over sin_hat in [-2*theta_max, 2*theta_max].
Interval dc_interval(const Branch& branch, const Config& cfg);

struct DirectedIntervals {
  Interval active;
  Interval reactive;
};

/// Bounds of the directed LPAC Ohm right-hand sides with the branch open,
/// optimizing each variable over its own box (the expression is separable,
/// so termwise extrema are exact for the decomposed problem). The cosine
/// box depends on the variant; the infeasibility flag ranges over {0,1}.
DirectedIntervals lpac_intervals(const GridCase& gc, int branch, bool forward, PfVariant v,
                                 const Config& cfg);

struct BigMSet {
  std::vector<Interval> dc;                          // per branch
  std::vector<DirectedIntervals> fwd, rev;           // per branch, both orientations
};

BigMSet calibrate(const GridCase& gc, PfVariant v, const Config& cfg);

/// Point values of the bounded expressions, for audits and sampling tests.
double dc_rhs_value(const Branch& branch, double sin_hat);
double lpac_active_rhs(const GridCase& gc, int branch, bool forward, double chi, double sin_hat,
                       double cos_hat);
double lpac_reactive_rhs(const GridCase& gc, int branch, bool forward, double chi, double sin_hat,
                         double cos_hat, double phi_n, double phi_m);

/// Cosine range with the branch open: {1} for the coarse variant,
/// [cos(theta_delta_max), 1] otherwise.
void open_cos_range(PfVariant v, const Config& cfg, double& lo, double& hi);

struct AuditRow {
  std::string branch_id;
  bool forward = true;
  std::string kind;  // "dc", "active", "reactive"
  Interval range;
  double max_violation = 0.0;  // of sampled points against the range; <= 0 when valid
};

/// Random-sampling audit of every calibrated interval.
std::vector<AuditRow> audit(const GridCase& gc, PfVariant v, const Config& cfg, int samples,
                            unsigned seed);

std::string audit_csv(const std::vector<AuditRow>& rows, PfVariant v);

}  // namespace bigm
}  // namespace floodmit
