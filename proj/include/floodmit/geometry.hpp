#pragma once

#include <stdexcept>
#include <vector>

#include "floodmit/grid.hpp"

namespace floodmit::geom {

/// Line tangent to cos at theta_hat, evaluated at theta:
/// (theta_hat - theta) sin(theta_hat) + cos(theta_hat).
double b1(double theta, double theta_hat);

/// Concave quadratic upper bound on cos over [-tdm, tdm]:
/// 1 - (1 - cos(tdm)) (theta/tdm)^2. Touches cos at -tdm, 0, tdm.
double b2(double theta, double theta_delta_max);

struct Intersection {
  double theta = 0.0;
  double value = 0.0;  // common tangent value at theta
};

/// Crossing point of the tangents at two distinct angles. Throws
/// InputError when the tangents are parallel (equal sines), which cannot
/// happen for distinct points inside (-pi/2, pi/2).
Intersection intersection(double theta_hat_t, double theta_hat_next);

/// Sorted tangency angles within [-theta_delta_max, theta_delta_max].
struct TangentSet {
  std::vector<double> points;
  double theta_delta_max = 0.0;
};

/// Worst overestimation of cos by the lower envelope of the tangent
/// lines over [-tdm, tdm]. The maximum can only occur at an interval
/// endpoint or where adjacent tangents cross, so only those candidates
/// are evaluated.
double max_relax_error(const TangentSet& ts);

/// Tangency points equally spaced over [-tdm, tdm]; requires T >= 2.
TangentSet equidistant_tangent_points(int t, double theta_delta_max);

/// Carries the best incumbent when the minimax search hits its
/// iteration cap.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, TangentSet inc, double err)
      : std::runtime_error(msg), incumbent(std::move(inc)), error(err) {}
  TangentSet incumbent;
  double error = 0.0;
};

/// Tangency points minimizing the worst-case relaxation error, symmetric
/// about 0. Solved by multistart coordinate descent with golden-section
/// line searches over the closed-form candidate errors; the result is
/// certified stationary under +-1e-4 coordinate perturbation.
TangentSet optimal_tangent_points(int t, double theta_delta_max, unsigned seed = 0);

/// Halfplane cp*p + cq*q <= rhs_factor * beta bounding apparent flow.
struct HalfPlane {
  double cp = 0.0;
  double cq = 0.0;
  double rhs_factor = 0.0;
};

std::vector<HalfPlane> disc_halfplanes(const std::vector<double>& angles, double s_max);

std::vector<double> square_disc_angles();     // {t*pi/2, t=1..4}
std::vector<double> dodecagon_disc_angles();  // {t*pi/6, t=1..12}

/// Seven-tangent minimax set for theta_delta_max = pi/2, used by the fine
/// linear power-flow variant. Constants cross-checked against
/// optimal_tangent_points in the test suite.
const std::vector<double>& fine_cosine_tangents();

/// Tangent set the fine variant should use for the given config:
/// the precomputed seven-point set when applicable, otherwise a fresh
/// minimax solve.
TangentSet variant_tangent_set(const Config& cfg);

}  // namespace floodmit::geom
