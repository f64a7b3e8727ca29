#include "floodmit/model_ir.hpp"

#include <algorithm>
#include <cmath>

namespace floodmit::model {

int ModelIR::add_var(std::string name, VarKind kind, double lo, double hi, std::string group) {
  if (!name_index_.emplace(name, static_cast<int>(vars.size())).second)
    throw ValidationError("model: duplicate variable '" + name + "'");
  vars.push_back({std::move(name), kind, lo, hi, std::move(group)});
  return static_cast<int>(vars.size()) - 1;
}

int ModelIR::add_lin(std::string name, std::vector<LinTerm> terms, Sense sense, double rhs) {
  lin_cons.push_back({std::move(name), std::move(terms), sense, rhs});
  return static_cast<int>(lin_cons.size()) - 1;
}

int ModelIR::add_quad(std::string name, std::vector<LinTerm> quad, std::vector<LinTerm> lin,
                      double rhs) {
  quad_cons.push_back({std::move(name), std::move(quad), std::move(lin), rhs});
  return static_cast<int>(quad_cons.size()) - 1;
}

void ModelIR::set_objective(std::vector<LinTerm> terms, double offset) {
  objective = std::move(terms);
  obj_offset = offset;
}

int ModelIR::var_by_name(const std::string& name) const {
  auto it = name_index_.find(name);
  return it == name_index_.end() ? -1 : it->second;
}

int ModelIR::binary_count() const {
  int n = 0;
  for (const auto& v : vars)
    if (v.kind == VarKind::Binary) ++n;
  return n;
}

double ModelIR::eval_expr(const std::vector<LinTerm>& terms, const std::vector<double>& v) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.coef * v[t.var];
  return s;
}

double ModelIR::eval_objective(const std::vector<double>& v) const {
  return eval_expr(objective, v) + obj_offset;
}

double ModelIR::max_violation(const std::vector<double>& v) const {
  double worst = 0.0;
  for (size_t i = 0; i < vars.size(); ++i) {
    worst = std::max(worst, vars[i].lo - v[i]);
    worst = std::max(worst, v[i] - vars[i].hi);
  }
  for (const auto& c : lin_cons) {
    double lhs = eval_expr(c.terms, v);
    switch (c.sense) {
      case Sense::LE: worst = std::max(worst, lhs - c.rhs); break;
      case Sense::GE: worst = std::max(worst, c.rhs - lhs); break;
      case Sense::EQ: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  for (const auto& q : quad_cons) {
    double lhs = 0.0;
    for (const auto& t : q.quad) lhs += t.coef * v[t.var] * v[t.var];
    lhs += eval_expr(q.lin, v);
    worst = std::max(worst, lhs - q.rhs);
  }
  return worst;
}

void ModelIR::check() const {
  const int n = static_cast<int>(vars.size());
  auto check_terms = [&](const std::vector<LinTerm>& terms, const std::string& where) {
    for (const auto& t : terms)
      if (t.var < 0 || t.var >= n)
        throw ValidationError("model: undeclared variable referenced in " + where);
  };
  for (const auto& v : vars) {
    if (v.kind == VarKind::Binary && (v.lo < 0.0 || v.hi > 1.0))
      throw ValidationError("model: binary '" + v.name + "' with bounds outside [0,1]");
    if (v.lo > v.hi) throw ValidationError("model: empty bound range on '" + v.name + "'");
  }
  check_terms(objective, "objective");
  for (const auto& c : lin_cons) check_terms(c.terms, c.name);
  for (const auto& q : quad_cons) {
    check_terms(q.quad, q.name);
    check_terms(q.lin, q.name);
    for (const auto& t : q.quad)
      if (t.coef <= 0.0)
        throw ValidationError("model: nonconvex quadratic coefficient in " + q.name);
  }
}

}  // namespace floodmit::model
