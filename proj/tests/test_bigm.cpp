#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "floodmit/bigm.hpp"
#include "support/toys.hpp"

using namespace floodmit;
using namespace floodmit::bigm;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("dc intervals are the endpoint values of the linear objective") {
  Config cfg;  // theta_max = pi
  Branch br{"l", "a", "b", -5.0, 0.0, 1.0};
  auto iv = dc_interval(br, cfg);
  CHECK(iv.lo == doctest::Approx(-10.0 * kPi));
  CHECK(iv.hi == doctest::Approx(10.0 * kPi));

  br.b = 0.0;
  br.g = 1.0;
  iv = dc_interval(br, cfg);
  CHECK(iv.lo == 0.0);
  CHECK(iv.hi == 0.0);

  br.b = 2.0;
  cfg.theta_max = kPi / 2;
  iv = dc_interval(br, cfg);
  CHECK(iv.lo == doctest::Approx(-2.0 * kPi));
  CHECK(iv.hi == doctest::Approx(2.0 * kPi));
}

TEST_CASE("lossless branch with coarse cosine reduces to the dc interval") {
  GridCase gc = toys::two_sub_toy();  // b=-10, g=0, unit targets
  Config cfg = gc.config;
  auto iv = lpac_intervals(gc, 0, true, PfVariant::LPAC_C, cfg);
  auto dc = dc_interval(gc.branches[0], cfg);
  CHECK(iv.active.lo == doctest::Approx(dc.lo));
  CHECK(iv.active.hi == doctest::Approx(dc.hi));
}

TEST_CASE("reactive interval terms for the documented branch") {
  // b = -10, g = 0, unit targets: constant -v^2 b = 10; the cosine term
  // v_n v_m b cos ranges over [-10, -10 cos(tdm)]; phi terms scale by b.
  GridCase gc = toys::two_sub_toy();
  Config cfg = gc.config;
  auto iv = lpac_intervals(gc, 0, true, PfVariant::LPAC_F, cfg);
  double clo = std::cos(cfg.theta_delta_max);
  // phi boxes are [-0.1, 0.1]; coefficients -b(2vn - vm) = 10 and vn*b = -10
  double expect_lo = 10.0 - 10.0 + 10.0 * -0.1 + -10.0 * 0.1;
  double expect_hi = 10.0 - 10.0 * clo + 10.0 * 0.1 + -10.0 * -0.1;
  CHECK(iv.reactive.lo == doctest::Approx(expect_lo));
  CHECK(iv.reactive.hi == doctest::Approx(expect_hi));

  // chi term has zero coefficient when the endpoint targets agree
  double with0 = lpac_reactive_rhs(gc, 0, true, 0.0, 0.1, 0.9, 0.02, -0.03);
  double with1 = lpac_reactive_rhs(gc, 0, true, 1.0, 0.1, 0.9, 0.02, -0.03);
  CHECK(with0 == doctest::Approx(with1));
}

TEST_CASE("sampled expressions never leave the decomposed interval") {
  for (unsigned seed : {0u, 1u, 2u, 3u}) {
    GridCase gc = toys::random_case(seed);
    for (PfVariant v : {PfVariant::DC, PfVariant::LPAC_C, PfVariant::LPAC_F, PfVariant::QPAC}) {
      auto rows = audit(gc, v, gc.config, 20000, seed);
      for (const auto& row : rows) {
        INFO(row.branch_id, " ", row.kind);
        CHECK(row.max_violation <= 0.0);
      }
    }
  }
}

TEST_CASE("decomposed interval contains the true joint range") {
  // fine grid over the joint box; decomposition can only widen
  GridCase gc = toys::random_case(9);
  const Config& cfg = gc.config;
  for (PfVariant v : {PfVariant::LPAC_C, PfVariant::LPAC_F}) {
    double clo, chi_;
    open_cos_range(v, cfg, clo, chi_);
    for (size_t l = 0; l < gc.branches.size(); ++l) {
      auto iv = lpac_intervals(gc, static_cast<int>(l), true, v, cfg);
      double tlo = 1e300, thi = -1e300;
      for (int si = 0; si <= 8; ++si)
        for (int ci = 0; ci <= 8; ++ci)
          for (int chi = 0; chi <= 1; ++chi) {
            double sh = -2 * cfg.theta_max + 4 * cfg.theta_max * si / 8.0;
            double ch = clo + (chi_ - clo) * ci / 8.0;
            double val = lpac_active_rhs(gc, static_cast<int>(l), true, chi, sh, ch);
            tlo = std::min(tlo, val);
            thi = std::max(thi, val);
          }
      CHECK(iv.active.lo <= tlo + 1e-12);
      CHECK(iv.active.hi >= thi - 1e-12);
    }
  }
}

TEST_CASE("audit csv shape") {
  GridCase gc = toys::two_sub_toy();
  auto rows = audit(gc, PfVariant::LPAC_F, gc.config, 100, 0);
  CHECK(rows.size() == 4);  // one branch, two directions, active + reactive
  std::string csv = audit_csv(rows, PfVariant::LPAC_F);
  CHECK(csv.find("branch,direction,variant,kind,lo,hi,max_violation") == 0);
  CHECK(csv.find("lpac-f") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
