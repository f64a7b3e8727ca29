#include <algorithm>
#include <cmath>
#include <limits>

#include "floodmit/engine.hpp"

namespace floodmit::engine::detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDualTol = 1e-9;     // reduced-cost optimality tolerance
constexpr double kPivotZero = 1e-12;  // coefficients below this are treated as zero
constexpr double kRatioRelax = 1e-9;  // per-pivot bound relaxation in the ratio test
constexpr double kRatioTie = 1e-9;
constexpr int kRefactorEvery = 64;

enum class St : std::uint8_t { Basic, AtLo, AtUp, Free };
}  // namespace

SimplexSolver::SimplexSolver(const model::ModelIR& m) {
  m_ = static_cast<int>(m.lin_cons.size());
  n_ = static_cast<int>(m.vars.size());
  cols_.assign(n_, {});
  rhs_.resize(m_);
  sense_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    const auto& c = m.lin_cons[i];
    rhs_[i] = c.rhs;
    sense_[i] = c.sense;
    for (const auto& t : c.terms) cols_[t.var].entries.emplace_back(i, t.coef);
  }
  obj_.assign(n_, 0.0);
  for (const auto& t : m.objective) obj_[t.var] += t.coef;
  obj_offset_ = m.obj_offset;
}

LpOutcome SimplexSolver::solve(const std::vector<double>& lo_in,
                               const std::vector<double>& hi_in, const EngineConfig& cfg) {
  const int m = m_, n = n_;
  const int nslack = m;                 // one slack per row
  const int N = n + nslack;             // structural + slack
  const int total = N + m;              // + artificials

  std::vector<double> lo(total), hi(total);
  for (int j = 0; j < n; ++j) {
    lo[j] = lo_in[j];
    hi[j] = hi_in[j];
  }
  for (int i = 0; i < m; ++i) {
    switch (sense_[i]) {
      case model::Sense::LE: lo[n + i] = 0.0; hi[n + i] = kInf; break;
      case model::Sense::GE: lo[n + i] = -kInf; hi[n + i] = 0.0; break;
      case model::Sense::EQ: lo[n + i] = 0.0; hi[n + i] = 0.0; break;
    }
  }

  std::vector<St> st(total);
  std::vector<double> x(total, 0.0);
  for (int j = 0; j < N; ++j) {
    if (std::isfinite(lo[j])) {
      st[j] = St::AtLo;
      x[j] = lo[j];
    } else if (std::isfinite(hi[j])) {
      st[j] = St::AtUp;
      x[j] = hi[j];
    } else {
      st[j] = St::Free;
      x[j] = 0.0;
    }
  }

  // Artificial columns sigma_i * e_i sized so their start value is >= 0.
  std::vector<double> resid(rhs_);
  for (int j = 0; j < n; ++j) {
    if (x[j] == 0.0) continue;
    for (const auto& [r, a] : cols_[j].entries) resid[r] -= a * x[j];
  }
  for (int i = 0; i < m; ++i) resid[i] -= x[n + i];
  std::vector<double> art_sign(m);
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    art_sign[i] = resid[i] >= 0.0 ? 1.0 : -1.0;
    int a = N + i;
    lo[a] = 0.0;
    hi[a] = kInf;
    st[a] = St::Basic;
    x[a] = std::abs(resid[i]);
    basis[i] = a;
  }
  std::vector<int> bpos(total, -1);
  for (int i = 0; i < m; ++i) bpos[basis[i]] = i;

  // Dense basis inverse; the artificial start basis is diag(sigma).
  std::vector<double> binv(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) binv[static_cast<size_t>(i) * m + i] = art_sign[i];

  std::vector<double> cost(total, 0.0);
  for (int i = 0; i < m; ++i) cost[N + i] = 1.0;  // phase 1

  auto column_into = [&](int j, std::vector<double>& out) {
    // w = Binv * A_j
    std::fill(out.begin(), out.end(), 0.0);
    if (j < n) {
      for (const auto& [r, a] : cols_[j].entries) {
        const double* row_base = binv.data();
        for (int i = 0; i < m; ++i) out[i] += a * row_base[static_cast<size_t>(i) * m + r];
      }
    } else if (j < N) {
      int r = j - n;
      for (int i = 0; i < m; ++i) out[i] = binv[static_cast<size_t>(i) * m + r];
    } else {
      int r = j - N;
      for (int i = 0; i < m; ++i) out[i] = art_sign[r] * binv[static_cast<size_t>(i) * m + r];
    }
  };

  auto col_dot = [&](int j, const std::vector<double>& y) {
    if (j < n) {
      double s = 0.0;
      for (const auto& [r, a] : cols_[j].entries) s += a * y[r];
      return s;
    }
    if (j < N) return y[j - n];
    return art_sign[j - N] * y[j - N];
  };

  std::vector<double> w(m), y(m);
  long pivots = 0;

  auto refactor = [&]() {
    // Rebuild B and invert by Gauss-Jordan with partial pivoting.
    std::vector<double> B(static_cast<size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
      int j = basis[i];
      if (j < n) {
        for (const auto& [r, a] : cols_[j].entries) B[static_cast<size_t>(r) * m + i] = a;
      } else if (j < N) {
        B[static_cast<size_t>(j - n) * m + i] = 1.0;
      } else {
        B[static_cast<size_t>(j - N) * m + i] = art_sign[j - N];
      }
    }
    std::vector<double> inv(static_cast<size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) inv[static_cast<size_t>(i) * m + i] = 1.0;
    for (int colp = 0; colp < m; ++colp) {
      int piv = colp;
      double best = std::abs(B[static_cast<size_t>(colp) * m + colp]);
      for (int r = colp + 1; r < m; ++r) {
        double v = std::abs(B[static_cast<size_t>(r) * m + colp]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-12) throw EngineError("simplex: singular basis during refactorization");
      if (piv != colp) {
        for (int c = 0; c < m; ++c) {
          std::swap(B[static_cast<size_t>(piv) * m + c], B[static_cast<size_t>(colp) * m + c]);
          std::swap(inv[static_cast<size_t>(piv) * m + c], inv[static_cast<size_t>(colp) * m + c]);
        }
      }
      double d = B[static_cast<size_t>(colp) * m + colp];
      for (int c = 0; c < m; ++c) {
        B[static_cast<size_t>(colp) * m + c] /= d;
        inv[static_cast<size_t>(colp) * m + c] /= d;
      }
      for (int r = 0; r < m; ++r) {
        if (r == colp) continue;
        double f = B[static_cast<size_t>(r) * m + colp];
        if (f == 0.0) continue;
        for (int c = 0; c < m; ++c) {
          B[static_cast<size_t>(r) * m + c] -= f * B[static_cast<size_t>(colp) * m + c];
          inv[static_cast<size_t>(r) * m + c] -= f * inv[static_cast<size_t>(colp) * m + c];
        }
      }
    }
    binv.swap(inv);
    // Recompute basic values from scratch to shed accumulated drift.
    std::vector<double> r(rhs_);
    for (int j = 0; j < total; ++j) {
      if (st[j] == St::Basic || x[j] == 0.0) continue;
      if (j < n) {
        for (const auto& [row, a] : cols_[j].entries) r[row] -= a * x[j];
      } else if (j < N) {
        r[j - n] -= x[j];
      } else {
        r[j - N] -= art_sign[j - N] * x[j];
      }
    }
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      const double* row_base = binv.data() + static_cast<size_t>(i) * m;
      for (int k = 0; k < m; ++k) v += row_base[k] * r[k];
      x[basis[i]] = v;
    }
  };

  auto objective_now = [&]() {
    double s = 0.0;
    for (int j = 0; j < total; ++j)
      if (cost[j] != 0.0 && x[j] != 0.0) s += cost[j] * x[j];
    return s;
  };

  // Shared pivot loop for both phases. Returns false on pivot-cap.
  auto run = [&](bool phase1) -> bool {
    bool bland = false;
    long stall = 0;
    double last_obj = objective_now();
    int reverify = 0;
    while (true) {
      if (pivots > cfg.pivot_cap) return false;
      // duals and pricing
      for (int i = 0; i < m; ++i) y[i] = 0.0;
      for (int i = 0; i < m; ++i) {
        double cb = cost[basis[i]];
        if (cb == 0.0) continue;
        const double* row_base = binv.data() + static_cast<size_t>(i) * m;
        for (int k = 0; k < m; ++k) y[k] += cb * row_base[k];
      }
      int enter = -1;
      double enter_dir = 0.0, best_score = kDualTol;
      for (int j = 0; j < total; ++j) {
        if (st[j] == St::Basic) continue;
        if (lo[j] == hi[j]) continue;  // fixed
        if (phase1 == false && j >= N) continue;  // artificials locked out of phase 2
        double d = cost[j] - col_dot(j, y);
        double dir = 0.0;
        if ((st[j] == St::AtLo || st[j] == St::Free) && d < -kDualTol)
          dir = 1.0;
        else if ((st[j] == St::AtUp || st[j] == St::Free) && d > kDualTol)
          dir = -1.0;
        else
          continue;
        if (bland) {  // lowest eligible index
          enter = j;
          enter_dir = dir;
          break;
        }
        if (std::abs(d) > best_score) {
          enter = j;
          enter_dir = dir;
          best_score = std::abs(d);
        }
      }
      if (enter < 0) {
        // Claimed optimal: refactor once and re-verify to guard drift.
        if (reverify < 2) {
          ++reverify;
          refactor();
          bland = false;
          continue;
        }
        return true;
      }

      column_into(enter, w);
      const double sigma = enter_dir;
      // Harris-style two-pass ratio test. Pass one finds the step allowed
      // when every bound is relaxed by a whisker; pass two picks, among
      // rows that block within that step, the numerically safest (largest)
      // pivot. Skipping small-pivot rows outright would let a long step
      // drag them arbitrarily far past their bounds.
      const double flip = hi[enter] - lo[enter];
      double t_relax = flip;
      auto slack_of = [&](int i, double delta, double relax) {
        int bj = basis[i];
        if (delta < 0.0)
          return std::isfinite(lo[bj]) ? (x[bj] - lo[bj] + relax) / (-delta) : kInf;
        return std::isfinite(hi[bj]) ? (hi[bj] - x[bj] + relax) / delta : kInf;
      };
      for (int i = 0; i < m; ++i) {
        if (std::abs(w[i]) <= kPivotZero) continue;
        double limit = slack_of(i, -sigma * w[i], kRatioRelax);
        if (limit < t_relax) t_relax = std::max(limit, 0.0);
      }
      if (!std::isfinite(t_relax)) {
        if (phase1) throw EngineError("simplex: unbounded phase-1 objective");
        return true;  // caller detects unboundedness via flag below
      }
      int leave = -1;
      double leave_pivot = 0.0;
      double t_max = flip;
      for (int i = 0; i < m; ++i) {
        if (std::abs(w[i]) <= kPivotZero) continue;
        double strict = slack_of(i, -sigma * w[i], 0.0);
        if (!std::isfinite(strict)) continue;
        if (strict < 0.0) strict = 0.0;
        if (strict > t_relax) continue;  // not blocking within the relaxed step
        bool better = leave < 0 || (bland ? basis[i] < basis[leave]
                                          : std::abs(w[i]) > leave_pivot);
        if (better) {
          leave = i;
          leave_pivot = std::abs(w[i]);
          t_max = std::min(flip, strict);
        }
      }
      if (leave >= 0 && flip <= t_max) leave = -1;  // the bound flip wins
      if (leave < 0) t_max = flip;

      // apply the step
      if (t_max > 0.0) {
        x[enter] += sigma * t_max;
        for (int i = 0; i < m; ++i)
          if (w[i] != 0.0) x[basis[i]] -= sigma * t_max * w[i];
      }
      if (leave < 0) {
        st[enter] = sigma > 0 ? St::AtUp : St::AtLo;
        x[enter] = sigma > 0 ? hi[enter] : lo[enter];
      } else {
        int out_var = basis[leave];
        double delta = -sigma * w[leave];
        st[out_var] = delta < 0 ? St::AtLo : St::AtUp;
        x[out_var] = delta < 0 ? lo[out_var] : hi[out_var];
        basis[leave] = enter;
        bpos[out_var] = -1;
        bpos[enter] = leave;
        st[enter] = St::Basic;
        // rank-one inverse update
        double piv = w[leave];
        double* prow = binv.data() + static_cast<size_t>(leave) * m;
        for (int k = 0; k < m; ++k) prow[k] /= piv;
        for (int i = 0; i < m; ++i) {
          if (i == leave || w[i] == 0.0) continue;
          double f = w[i];
          double* row = binv.data() + static_cast<size_t>(i) * m;
          for (int k = 0; k < m; ++k) row[k] -= f * prow[k];
        }
        ++pivots;
        // small pivots poison the inverse; rebuild it right away
        if (pivots % kRefactorEvery == 0 || leave_pivot < 1e-7) refactor();
      }

      double obj = objective_now();
      if (obj < last_obj - 1e-13 * (1.0 + std::abs(last_obj))) {
        last_obj = obj;
        stall = 0;
        bland = false;
      } else if (++stall > 2 * (m + total) + 200) {
        bland = true;  // Bland's rule guarantees escape from cycling
      }
      reverify = 0;
    }
  };

  LpOutcome out;
  bool unbounded = false;

  bool done = run(true);
  out.pivots = pivots;
  if (!done) {
    out.status = SolveStatus::CapReached;
    return out;
  }
  double phase1_obj = objective_now();
  if (phase1_obj > cfg.feasibility_tol) {
    out.status = SolveStatus::Infeasible;
    return out;
  }

  // Pivot zero-valued artificials out where a non-artificial column can
  // replace them; redundant rows keep a fixed artificial.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < N) continue;
    const double* row_base = binv.data() + static_cast<size_t>(i) * m;
    int found = -1;
    for (int j = 0; j < N && found < 0; ++j) {
      if (st[j] == St::Basic || lo[j] == hi[j]) continue;
      double alpha;
      if (j < n) {
        alpha = 0.0;
        for (const auto& [r, a] : cols_[j].entries) alpha += a * row_base[r];
      } else {
        alpha = row_base[j - n];
      }
      if (std::abs(alpha) > 1e-7) found = j;
    }
    if (found < 0) continue;
    column_into(found, w);
    int art = basis[i];
    basis[i] = found;
    bpos[art] = -1;
    bpos[found] = i;
    st[art] = St::AtLo;
    x[art] = 0.0;
    st[found] = St::Basic;  // enters at value it already had (zero step)
    double piv = w[i];
    double* prow = binv.data() + static_cast<size_t>(i) * m;
    for (int k = 0; k < m; ++k) prow[k] /= piv;
    for (int r = 0; r < m; ++r) {
      if (r == i || w[r] == 0.0) continue;
      double f = w[r];
      double* row = binv.data() + static_cast<size_t>(r) * m;
      for (int k = 0; k < m; ++k) row[k] -= f * prow[k];
    }
    ++pivots;
  }
  for (int i = 0; i < m; ++i) hi[N + i] = 0.0;  // artificials fixed at zero

  for (int j = 0; j < total; ++j) cost[j] = 0.0;
  for (int j = 0; j < n; ++j) cost[j] = obj_[j];

  // Detect unboundedness in phase 2 via the sentinel return path: run()
  // returns true both at optimality and on an infinite ratio; tell them
  // apart by re-checking the entering condition below.
  done = run(false);
  out.pivots = pivots;
  if (!done) {
    out.status = SolveStatus::CapReached;
    return out;
  }
  // Re-price to distinguish optimal from unbounded exit.
  {
    for (int i = 0; i < m; ++i) y[i] = 0.0;
    for (int i = 0; i < m; ++i) {
      double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      const double* row_base = binv.data() + static_cast<size_t>(i) * m;
      for (int k = 0; k < m; ++k) y[k] += cb * row_base[k];
    }
    for (int j = 0; j < N && !unbounded; ++j) {
      if (st[j] == St::Basic || lo[j] == hi[j]) continue;
      double d = cost[j] - col_dot(j, y);
      bool improving = ((st[j] == St::AtLo || st[j] == St::Free) && d < -1e-7) ||
                       ((st[j] == St::AtUp || st[j] == St::Free) && d > 1e-7);
      if (!improving) continue;
      // improving direction with no finite ratio limit means unbounded
      column_into(j, w);
      double sigma = d < 0 ? 1.0 : -1.0;
      if (std::isfinite(hi[j] - lo[j])) continue;
      bool blocked = false;
      for (int i = 0; i < m && !blocked; ++i) {
        double delta = -sigma * w[i];
        if (std::abs(w[i]) <= kPivotZero) continue;
        int bj = basis[i];
        if (delta < 0.0 && std::isfinite(lo[bj])) blocked = true;
        if (delta > 0.0 && std::isfinite(hi[bj])) blocked = true;
      }
      if (!blocked) unbounded = true;
    }
  }
  if (unbounded) {
    out.status = SolveStatus::Unbounded;
    return out;
  }

  // The claimed optimum must actually be primal feasible; silent
  // corruption here would poison everything downstream.
  refactor();
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    int bj = basis[i];
    if (std::isfinite(lo[bj])) worst = std::max(worst, lo[bj] - x[bj]);
    if (std::isfinite(hi[bj])) worst = std::max(worst, x[bj] - hi[bj]);
  }
  if (worst > cfg.feasibility_tol)
    throw EngineError("simplex: primal feasibility lost (violation " + std::to_string(worst) +
                      ")");
  for (int j = 0; j < n; ++j) {
    if (st[j] != St::Basic) continue;
    // snap basics within tolerance of a bound onto it
    if (std::isfinite(lo[j]) && x[j] < lo[j]) x[j] = lo[j];
    if (std::isfinite(hi[j]) && x[j] > hi[j]) x[j] = hi[j];
  }

  out.status = SolveStatus::Optimal;
  out.x.assign(x.begin(), x.begin() + n);
  out.objective = obj_offset_;
  for (int j = 0; j < n; ++j) out.objective += obj_[j] * x[j];
  return out;
}

}  // namespace floodmit::engine::detail
