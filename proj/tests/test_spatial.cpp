#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "noon/fit.hpp"
#include "noon/spatial.hpp"
#include "support/oracles.hpp"

using namespace noon;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentGeometry reference_geometry(double mfd_um) {
  return ExperimentGeometry{2.2e-3, 1.4e-3, 780e-9, 15e-3, mfd_um * 1e-6, 0.0};
}

}  // namespace

TEST_CASE("focal waist and ideal fringe period for the default geometry") {
  auto g = reference_geometry(0.0);
  // w_f = lambda f / (pi w_in) with w_in = 0.7 mm
  CHECK(g.focal_waist() == Approx(5.3206e-6).epsilon(1e-4));
  // ideal two-arm fringe period lambda f / d = 5.318 um
  CHECK(g.ideal_fringe_period() == Approx(5.3182e-6).epsilon(1e-4));
}

TEST_CASE("arms share one envelope") {
  auto g = reference_geometry(5.6);
  for (double x_um : {-9.0, -2.5, 0.0, 1.0, 7.7}) {
    double x = x_um * 1e-6;
    CHECK(std::abs(focal_field(x, g, Arm::A)) ==
          Approx(std::abs(focal_field(x, g, Arm::B))));
    Complex ratio = fiber_overlap(x, g, Arm::A) / fiber_overlap(x, g, Arm::B);
    CHECK(std::abs(ratio) == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("zero beam spacing means no fringe") {
  auto g = reference_geometry(0.0);
  g.beam_spacing = 1e-30;
  for (double x_um : {-4.0, 1.3, 6.0}) {
    double x = x_um * 1e-6;
    Complex a = focal_field(x, g, Arm::A), b = focal_field(x, g, Arm::B);
    CHECK(std::abs(std::arg(a / b)) < 1e-12);
  }
}

TEST_CASE("fiber overlap closed form matches quadrature to 1e-10") {
  auto g = reference_geometry(5.6);
  for (double x_um = -20.0; x_um <= 20.0; x_um += 2.5) {
    double x = x_um * 1e-6;
    for (Arm arm : {Arm::A, Arm::B}) {
      Complex closed = fiber_overlap(x, g, arm);
      Complex quad = oracles::fiber_overlap_quadrature(x, g, arm);
      CHECK(std::abs(closed - quad) < 1e-10 * std::abs(quad));
    }
  }
}

TEST_CASE("fiber overlap peak coupling is 1 for matched waists") {
  auto g = reference_geometry(0.0);
  g.mfd = 2.0 * g.focal_waist();
  g.beam_spacing = 1e-12;  // remove the carrier attenuation
  CHECK(std::abs(fiber_overlap(0.0, g, Arm::A)) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("point-sampling limit reproduces the focal field shape") {
  auto g0 = reference_geometry(0.0);
  auto g = reference_geometry(0.02);  // 20 nm probe: essentially point sampling
  Complex ref = fiber_overlap(1.5e-6, g, Arm::A) /
                focal_field(1.5e-6, g0, Arm::A);
  for (double x_um : {-6.0, -1.0, 0.5, 3.0}) {
    double x = x_um * 1e-6;
    Complex ratio = fiber_overlap(x, g, Arm::A) / focal_field(x, g0, Arm::A);
    CHECK(std::abs(ratio - ref) < 1e-4 * std::abs(ref));
  }
}

TEST_CASE("carrier attenuation factor is exact against quadrature") {
  // |A(0)| with the carrier versus with d -> 0: the ratio is the closed-form
  // attenuation exp(-beta^2 wf^2 wm^2 / (4 weff^2)). The wide-beam limit of
  // that exponent is beta^2 wm^2 / 4.
  auto g = reference_geometry(5.6);
  auto g_dc = g;
  g_dc.beam_spacing = 1e-30;
  double measured = std::abs(oracles::fiber_overlap_quadrature(0.0, g, Arm::A)) /
                    std::abs(oracles::fiber_overlap_quadrature(0.0, g_dc, Arm::A));
  CHECK(measured == Approx(fringe_attenuation(g)).epsilon(1e-10));

  // wide-beam limit: fatten the input beam so wf >> wm
  auto wide = g;
  wide.beam_diameter = 0.02e-3;  // w_f = 186 um >> w_m = 2.8 um
  double beta = wide.carrier();
  double wm = wide.fiber_waist();
  double limit = std::exp(-beta * beta * wm * wm / 4.0);
  CHECK(fringe_attenuation(wide) == Approx(limit).epsilon(1e-3));
}

TEST_CASE("fiber convolution never raises the fringe frequency") {
  auto g = reference_geometry(5.6);
  CHECK(g.effective_carrier() <= g.carrier());
  CHECK(g.detected_fringe_period(1) >= g.ideal_fringe_period());
  auto g0 = reference_geometry(0.0);
  CHECK(g0.effective_carrier() == Approx(g0.carrier()));
}

TEST_CASE("noon rate: period scaling and dark fringe") {
  auto g = reference_geometry(0.0);

  SECTION("three-photon period is exactly a third") {
    CHECK(g.detected_fringe_period(3) ==
          Approx(g.detected_fringe_period(1) / 3.0).epsilon(1e-15));
    // verify on the rate itself: translate by one three-photon period
    double p3 = g.detected_fringe_period(3);
    for (double x_um : {0.4, 1.1}) {
      double x = x_um * 1e-6;
      double r1 = noon_spatial_rate(x, g, 3);
      double r2 = noon_spatial_rate(x + p3, g, 3);
      double env_ratio = std::pow(
          std::norm(fiber_overlap(x + p3, g, Arm::A) /
                    fiber_overlap(x, g, Arm::A)),
          3);
      CHECK(r2 / r1 == Approx(env_ratio).epsilon(1e-9));
    }
  }

  SECTION("opposite-phase arms give a central dark fringe") {
    auto g_pi = g;
    g_pi.rel_phase = kPi;
    CHECK(noon_spatial_rate(0.0, g_pi, 1) == Approx(0.0).margin(1e-20));
    CHECK(noon_spatial_rate(0.0, g, 1) > 0.0);
  }

  SECTION("rate is non-negative and x-symmetric for symmetric phases") {
    for (double x_um = -10.0; x_um <= 10.0; x_um += 0.37) {
      double x = x_um * 1e-6;
      for (int n : {1, 2, 3}) {
        double r = noon_spatial_rate(x, g, n);
        CHECK(r >= 0.0);
        CHECK(r == Approx(noon_spatial_rate(-x, g, n)).margin(1e-18));
      }
    }
  }

  SECTION("invalid photon number") {
    CHECK_THROWS_AS(noon_spatial_rate(0.0, g, 0), std::invalid_argument);
  }
}

TEST_CASE("fitted fringe period equals the predicted one within 0.5%") {
  for (double mfd_um : {0.0, 5.6}) {
    auto g = reference_geometry(mfd_um);
    for (int n : {1, 3}) {
      double period = g.detected_fringe_period(n);
      // cover >= 5 periods, finely sampled
      int pts = 501;
      std::vector<double> xs(pts), ys(pts);
      double span = 5.5 * period;
      for (int i = 0; i < pts; ++i) {
        xs[i] = -span / 2 + span * i / (pts - 1);
        ys[i] = noon_spatial_rate(xs[i], g, n);
      }
      auto fit = fit_fringe(xs, ys, uniform_sigmas(pts), true, period * 1.07);
      REQUIRE(fit.converged);
      CHECK(fit.period == Approx(period).epsilon(5e-3));
    }
  }
}

TEST_CASE("profile cube law and envelope widths") {
  auto g = reference_geometry(0.0);

  SECTION("three-photon profile is the cube of the single-photon one") {
    double peak1 = profile_rate(0.0, g, 1, Arm::A);
    double peak3 = profile_rate(0.0, g, 3, Arm::A);
    for (double x_um = -8.0; x_um <= 8.0; x_um += 0.25) {
      double x = x_um * 1e-6;
      double p1 = profile_rate(x, g, 1, Arm::A) / peak1;
      double p3 = profile_rate(x, g, 3, Arm::A) / peak3;
      CHECK(p3 == Approx(p1 * p1 * p1).epsilon(1e-9));
    }
  }

  SECTION("1/e half-width ratio of the count profiles is 1/sqrt(3)") {
    // solve profile(x)/profile(0) = 1/e for both photon numbers
    auto half_width = [&](int n) {
      double lo = 0.0, hi = 20e-6;
      double peak = profile_rate(0.0, g, n, Arm::A);
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (profile_rate(mid, g, n, Arm::A) / peak > std::exp(-1.0) ? lo : hi) =
            mid;
      }
      return 0.5 * (lo + hi);
    };
    CHECK(half_width(3) / half_width(1) ==
          Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
  }

  SECTION("peak sits at the origin for the centered-arm model") {
    CHECK(profile_rate(0.0, g, 1, Arm::A) >
          profile_rate(0.5e-6, g, 1, Arm::A));
    CHECK(profile_rate(0.0, g, 1, Arm::B) ==
          Approx(profile_rate(0.0, g, 1, Arm::A)));
  }
}

TEST_CASE("Gaussian fit of the single-photon profile gives the focal spot") {
  // 2 w0 in the 1/e^2 (intensity) convention equals 2 w_f = 10.64 um for
  // the bare focal spot of the default geometry
  auto g = reference_geometry(0.0);
  int pts = 81;
  std::vector<double> xs(pts), ys(pts);
  for (int i = 0; i < pts; ++i) {
    xs[i] = (-10.0 + 20.0 * i / (pts - 1)) * 1e-6;
    ys[i] = profile_rate(xs[i], g, 1, Arm::A);
  }
  auto fit = fit_gaussian_profile(xs, ys, uniform_sigmas(pts));
  REQUIRE(fit.converged);
  double two_w0_um = 2.0 * fit.w0 * 1e6;
  CHECK(two_w0_um > 10.4);
  CHECK(two_w0_um < 11.2);
  CHECK(two_w0_um == Approx(2.0 * g.focal_waist() * 1e6).epsilon(1e-6));
}

TEST_CASE("classical visibility bound") {
  CHECK(std::abs(classical_visibility_bound(3) - 0.1) < 1e-12);
  CHECK(std::abs(classical_visibility_bound(2) - 1.0 / 3.0) < 1e-12);
  CHECK(classical_visibility_bound(1) == Approx(1.0).epsilon(1e-12));
  // independent closed form 2 / C(2N, N)
  for (int n = 1; n <= 8; ++n)
    CHECK(std::abs(classical_visibility_bound(n) -
                   oracles::classical_bound_closed_form(n)) < 1e-12);
  CHECK_THROWS_AS(classical_visibility_bound(0), std::invalid_argument);
}

TEST_CASE("geometry validation rejects nonsense") {
  auto g = reference_geometry(5.6);
  g.wavelength = -1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}
