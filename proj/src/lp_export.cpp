#include "floodmit/lp_export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace floodmit::model {

namespace {

std::string fmt(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

void append_terms(std::ostringstream& os, const ModelIR& m, const std::vector<LinTerm>& terms,
                  bool lead_written) {
  bool first = !lead_written;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    double c = t.coef;
    if (first) {
      if (c < 0) os << "- ";
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    os << fmt(std::abs(c)) << ' ' << m.vars[t.var].name;
  }
  if (first) os << "0 " << m.vars[0].name;  // empty expression placeholder
}

}  // namespace

std::string to_lp_format(const ModelIR& m) {
  std::ostringstream os;
  os << "\\ floodmit model export\n";
  os << "Minimize\n obj: ";
  append_terms(os, m, m.objective, false);
  if (m.obj_offset != 0.0)
    os << (m.obj_offset < 0 ? " - " : " + ") << fmt(std::abs(m.obj_offset));
  os << "\nSubject To\n";
  for (const auto& c : m.lin_cons) {
    os << ' ' << c.name << ": ";
    append_terms(os, m, c.terms, false);
    switch (c.sense) {
      case Sense::LE: os << " <= "; break;
      case Sense::GE: os << " >= "; break;
      case Sense::EQ: os << " = "; break;
    }
    os << fmt(c.rhs) << '\n';
  }
  for (const auto& q : m.quad_cons) {
    os << ' ' << q.name << ": [ ";
    bool first = true;
    for (const auto& t : q.quad) {
      if (!first) os << " + ";
      first = false;
      os << fmt(t.coef) << ' ' << m.vars[t.var].name << " ^ 2";
    }
    os << " ]";
    append_terms(os, m, q.lin, true);
    os << " <= " << fmt(q.rhs) << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : m.vars) {
    if (std::isinf(v.lo) && std::isinf(v.hi)) {
      os << ' ' << v.name << " free\n";
    } else if (v.lo == v.hi) {
      os << ' ' << v.name << " = " << fmt(v.lo) << '\n';
    } else {
      os << ' ';
      if (std::isinf(v.lo))
        os << "-inf";
      else
        os << fmt(v.lo);
      os << " <= " << v.name << " <= ";
      if (std::isinf(v.hi))
        os << "+inf";
      else
        os << fmt(v.hi);
      os << '\n';
    }
  }
  bool any_bin = false;
  for (const auto& v : m.vars) {
    if (v.kind != VarKind::Binary) continue;
    if (!any_bin) {
      os << "Binaries\n";
      any_bin = true;
    }
    os << ' ' << v.name << '\n';
  }
  os << "End\n";
  return os.str();
}

void export_lp(const ModelIR& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << to_lp_format(m);
}

}  // namespace floodmit::model
