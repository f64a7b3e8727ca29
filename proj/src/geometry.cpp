#include "floodmit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace floodmit::geom {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kParallelTol = 1e-14;
constexpr double kMinGap = 1e-6;  // minimum tangent spacing kept by the search

// Deterministic splitmix64-based uniforms; independent of the standard
// library's distribution implementations.
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
};
}  // namespace

double b1(double theta, double theta_hat) {
  return (theta_hat - theta) * std::sin(theta_hat) + std::cos(theta_hat);
}

double b2(double theta, double theta_delta_max) {
  double r = theta / theta_delta_max;
  return 1.0 - (1.0 - std::cos(theta_delta_max)) * r * r;
}

Intersection intersection(double a, double c) {
  double sa = std::sin(a), sc = std::sin(c);
  if (std::abs(sa - sc) < kParallelTol)
    throw InputError("intersection: parallel tangents (equal sines)");
  Intersection out;
  out.theta = (a * sa - c * sc + std::cos(a) - std::cos(c)) / (sa - sc);
  out.value = b1(out.theta, a);
  return out;
}

double max_relax_error(const TangentSet& ts) {
  if (ts.points.empty()) throw InputError("max_relax_error: empty tangent set");
  const double tdm = ts.theta_delta_max;
  double worst = -std::numeric_limits<double>::infinity();
  auto consider = [&](double th) {
    double env = std::numeric_limits<double>::infinity();
    for (double p : ts.points) env = std::min(env, b1(th, p));
    worst = std::max(worst, env - std::cos(th));
  };
  consider(-tdm);
  consider(tdm);
  for (size_t t = 0; t + 1 < ts.points.size(); ++t) {
    double sa = std::sin(ts.points[t]), sc = std::sin(ts.points[t + 1]);
    if (std::abs(sa - sc) < kParallelTol) continue;  // parallel pair: endpoints cover it
    double th = intersection(ts.points[t], ts.points[t + 1]).theta;
    if (th >= -tdm && th <= tdm) consider(th);
  }
  return worst;
}

TangentSet equidistant_tangent_points(int t, double tdm) {
  if (t < 2) throw InputError("equidistant_tangent_points: requires T >= 2");
  TangentSet out;
  out.theta_delta_max = tdm;
  out.points.reserve(t);
  for (int i = 1; i <= t; ++i)
    out.points.push_back((2.0 * i - t - 1.0) / (t - 1.0) * tdm);
  return out;
}

namespace {

// Free parameters of a symmetric tangent set: the strictly positive
// half-points. Odd T implies 0 is included.
TangentSet assemble(const std::vector<double>& half, bool include_zero, double tdm) {
  TangentSet ts;
  ts.theta_delta_max = tdm;
  for (auto it = half.rbegin(); it != half.rend(); ++it) ts.points.push_back(-*it);
  if (include_zero) ts.points.push_back(0.0);
  for (double a : half) ts.points.push_back(a);
  return ts;
}

double half_error(const std::vector<double>& half, bool include_zero, double tdm) {
  return max_relax_error(assemble(half, include_zero, tdm));
}

// Golden-section minimization over [lo, hi].
template <typename F>
double golden_min(F f, double lo, double hi, double tol) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double mid = 0.5 * (a + b);
  double fm = f(mid);
  if (f(lo) < fm) return lo;
  if (f(hi) < fm) return hi;
  return mid;
}

}  // namespace

TangentSet optimal_tangent_points(int t, double tdm, unsigned seed) {
  if (t < 1) throw InputError("optimal_tangent_points: requires T >= 1");
  if (!(tdm > 0.0)) throw InputError("optimal_tangent_points: requires theta_delta_max > 0");
  const bool include_zero = (t % 2) == 1;
  const int p = include_zero ? (t - 1) / 2 : t / 2;
  if (p == 0) {
    TangentSet ts;
    ts.theta_delta_max = tdm;
    ts.points = {0.0};
    return ts;
  }

  auto err_of = [&](const std::vector<double>& half) {
    return half_error(half, include_zero, tdm);
  };

  // Gauss-Seidel equalization of adjacent candidate errors. Plain
  // coordinate descent stalls when the worst candidate is unaffected by
  // the coordinate being searched; balancing each point between its inner
  // and outer candidate errors escapes those states.
  auto equalize = [&](std::vector<double> half) {
    auto inner_err = [&](const std::vector<double>& h, int i) {
      double prev = i > 0 ? h[i - 1] : (include_zero ? 0.0 : -h[0]);
      if (std::abs(std::sin(prev) - std::sin(h[i])) < kParallelTol)
        return std::numeric_limits<double>::infinity();
      auto is = intersection(prev, h[i]);
      return is.value - std::cos(is.theta);
    };
    auto outer_err = [&](const std::vector<double>& h, int i) {
      if (i == p - 1) return b1(tdm, h[i]) - std::cos(tdm);
      if (std::abs(std::sin(h[i]) - std::sin(h[i + 1])) < kParallelTol)
        return std::numeric_limits<double>::infinity();
      auto is = intersection(h[i], h[i + 1]);
      return is.value - std::cos(is.theta);
    };
    for (int pass = 0; pass < 200; ++pass) {
      double moved = 0.0;
      for (int i = 0; i < p; ++i) {
        double lo = (i == 0 ? (include_zero ? 0.0 : kMinGap) : half[i - 1]) + kMinGap;
        double hi = (i == p - 1 ? tdm : half[i + 1]) - kMinGap;
        if (hi <= lo) continue;
        double old = half[i];
        auto diff = [&](double v) {
          half[i] = v;
          return inner_err(half, i) - outer_err(half, i);
        };
        double dlo = diff(lo), dhi = diff(hi);
        if (dlo >= 0.0) {
          half[i] = lo;
        } else if (dhi <= 0.0) {
          half[i] = hi;
        } else {
          double a = lo, b = hi;
          for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (a + b);
            (diff(mid) <= 0.0 ? a : b) = mid;
          }
          half[i] = 0.5 * (a + b);
        }
        moved = std::max(moved, std::abs(half[i] - old));
      }
      if (moved < 1e-13) break;
    }
    return half;
  };

  auto descend = [&](std::vector<double> half, long& iters, long cap) {
    double cur = err_of(half);
    bool improved = true;
    while (improved) {
      improved = false;
      for (int i = 0; i < p; ++i) {
        if (++iters > cap) return std::make_pair(half, cur);
        double lo = (i == 0) ? kMinGap : half[i - 1] + kMinGap;
        double hi = (i == p - 1) ? tdm : half[i + 1] - kMinGap;
        if (hi <= lo) continue;
        double keep = half[i];
        double best = golden_min(
            [&](double a) {
              half[i] = a;
              return err_of(half);
            },
            lo, hi, 1e-10);
        half[i] = best;
        double cand = err_of(half);
        if (cand < cur - 1e-15) {
          cur = cand;
          improved = true;
        } else {
          half[i] = keep;
        }
      }
    }
    return std::make_pair(half, cur);
  };

  const long cap = 2000000;
  long iters = 0;
  std::vector<double> best_half;
  double best_err = std::numeric_limits<double>::infinity();

  const int starts = 64;
  for (int s = 0; s < starts; ++s) {
    std::vector<double> half(p);
    if (s == 0) {
      // interior equidistant start
      for (int i = 0; i < p; ++i) half[i] = tdm * (i + 1.0) / (p + 1.0);
    } else {
      SplitMix rng(0x5eedULL * (seed + 1) + 7919ULL * s);
      for (int i = 0; i < p; ++i) half[i] = kMinGap + (tdm - 2 * kMinGap) * rng.uniform();
      std::sort(half.begin(), half.end());
      for (int i = 1; i < p; ++i) half[i] = std::max(half[i], half[i - 1] + kMinGap);
      if (half.back() > tdm) continue;
    }
    auto [h, e] = descend(std::move(half), iters, cap);
    auto hb = equalize(h);
    double eb = err_of(hb);
    if (eb < e) {
      h = hb;
      e = eb;
    }
    if (e < best_err - 1e-15 ||
        (std::abs(e - best_err) <= 1e-15 && h < best_half)) {
      best_err = e;
      best_half = h;
    }
    if (iters > cap) break;
  }

  // Certify local optimality: a +-1e-4 nudge of any coordinate must not
  // reduce the error; if one does, resume the descent from there.
  for (int round = 0; round < 50; ++round) {
    bool escaped = false;
    for (int i = 0; i < p && !escaped; ++i) {
      for (double d : {-1e-4, 1e-4}) {
        std::vector<double> half = best_half;
        double cand = half[i] + d;
        double lo = (i == 0) ? kMinGap : half[i - 1] + kMinGap;
        double hi = (i == p - 1) ? tdm : half[i + 1] - kMinGap;
        if (cand < lo || cand > hi) continue;
        half[i] = cand;
        if (err_of(half) < best_err - 1e-12) {
          auto [h, e] = descend(std::move(half), iters, cap);
          auto hb = equalize(h);
          double eb = err_of(hb);
          if (eb < e) {
            h = hb;
            e = eb;
          }
          if (e < best_err) {
            best_err = e;
            best_half = h;
          }
          escaped = true;
          break;
        }
      }
    }
    if (!escaped) {
      return assemble(best_half, include_zero, tdm);
    }
    if (iters > cap) break;
  }
  throw ConvergenceError("optimal_tangent_points: iteration cap reached",
                         assemble(best_half, include_zero, tdm), best_err);
}

std::vector<HalfPlane> disc_halfplanes(const std::vector<double>& angles, double s_max) {
  if (angles.empty()) throw InputError("disc_halfplanes: empty angle set");
  std::vector<HalfPlane> out;
  out.reserve(angles.size());
  for (double a : angles) out.push_back({std::cos(a), std::sin(a), s_max});
  return out;
}

std::vector<double> square_disc_angles() {
  return {kPi / 2, kPi, 3 * kPi / 2, 2 * kPi};
}

std::vector<double> dodecagon_disc_angles() {
  std::vector<double> out;
  for (int t = 1; t <= 12; ++t) out.push_back(t * kPi / 6.0);
  return out;
}

const std::vector<double>& fine_cosine_tangents() {
  static const std::vector<double> pts = {-1.211, -0.735, -0.354, 0.0, 0.354, 0.735, 1.211};
  return pts;
}

TangentSet variant_tangent_set(const Config& cfg) {
  if (cfg.t_cos == 7 && std::abs(cfg.theta_delta_max - kPi / 2) < 1e-9) {
    TangentSet ts;
    ts.theta_delta_max = cfg.theta_delta_max;
    ts.points = fine_cosine_tangents();
    return ts;
  }
  return optimal_tangent_points(cfg.t_cos, cfg.theta_delta_max, 0);
}

}  // namespace floodmit::geom
