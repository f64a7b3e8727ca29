#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "floodmit/grid.hpp"

namespace floodmit::model {

enum class VarKind { Continuous, Binary };
enum class Sense { LE, GE, EQ };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lo = 0.0;
  double hi = 0.0;
  std::string group;  // tag: x, chi, alpha, beta, delta, pg, qg, ov, pf, qf, th, sn, cs, ph, z
};

struct LinTerm {
  int var = -1;
  double coef = 0.0;
};

struct LinExpr {
  std::vector<LinTerm> terms;
  double constant = 0.0;
  void add(int var, double coef) {
    if (coef != 0.0) terms.push_back({var, coef});
  }
};

struct LinConstraint {
  std::string name;
  std::vector<LinTerm> terms;
  Sense sense = Sense::LE;
  double rhs = 0.0;
};

/// Convex diagonal quadratic row: sum q_i v_i^2 + sum a_j v_j <= rhs,
/// with every q_i > 0.
struct QuadConstraint {
  std::string name;
  std::vector<LinTerm> quad;
  std::vector<LinTerm> lin;
  double rhs = 0.0;
  // Builder-asserted disc shape p^2 + q^2 <= radius^2 * scale, where the
  // scale variable is 0/1 in every integer-feasible point. Lets the
  // cutting loop emit supporting tangents of the circle instead of plain
  // gradient cuts.
  int disc_scale_var = -1;
  double disc_radius = 0.0;
};

struct ModelIR {
  std::vector<Variable> vars;
  std::vector<LinConstraint> lin_cons;
  std::vector<QuadConstraint> quad_cons;
  std::vector<LinTerm> objective;  // minimized
  double obj_offset = 0.0;

  int add_var(std::string name, VarKind kind, double lo, double hi, std::string group = "");
  int add_lin(std::string name, std::vector<LinTerm> terms, Sense sense, double rhs);
  int add_quad(std::string name, std::vector<LinTerm> quad, std::vector<LinTerm> lin, double rhs);
  void set_objective(std::vector<LinTerm> terms, double offset);
  int var_by_name(const std::string& name) const;  // -1 when absent
  int binary_count() const;

  double eval_expr(const std::vector<LinTerm>& terms, const std::vector<double>& v) const;
  double eval_objective(const std::vector<double>& v) const;
  /// Largest violation of bounds, linear rows, and quadratic rows at a point.
  double max_violation(const std::vector<double>& v) const;

  /// Structural checks: referenced variables declared, binaries within
  /// [0,1], quadratic coefficients positive. Throws ValidationError.
  void check() const;

 private:
  std::unordered_map<std::string, int> name_index_;
};

}  // namespace floodmit::model
