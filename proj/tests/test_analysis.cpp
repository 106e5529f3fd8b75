#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "noon/fit.hpp"
#include "noon/sampling.hpp"

using namespace noon;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * i / (n - 1);
  return xs;
}
}  // namespace

TEST_CASE("exact Gaussian samples recover parameters to 1e-9") {
  auto xs = grid(-8.0, 8.0, 41);
  std::vector<double> ys;
  for (double x : xs)
    ys.push_back(37.0 * std::exp(-2.0 * (x - 0.4) * (x - 0.4) / (2.3 * 2.3)) +
                 1.5);
  auto fit = fit_gaussian_profile(xs, ys, uniform_sigmas(xs.size()));
  REQUIRE(fit.converged);
  CHECK(fit.amplitude == Approx(37.0).epsilon(1e-9));
  CHECK(fit.center == Approx(0.4).epsilon(1e-9));
  CHECK(fit.w0 == Approx(2.3).epsilon(1e-9));
  CHECK(fit.offset == Approx(1.5).margin(1e-8));
  CHECK(fit.chi2_reduced < 1e-16);
}

TEST_CASE("profile fit needs points spanning the peak") {
  CHECK_THROWS_AS(fit_gaussian_profile({0, 1, 2}, {1, 2, 1}, {1, 1, 1}),
                  std::invalid_argument);
}

TEST_CASE("noiseless fringe fit is exact") {
  auto xs = grid(-10.0, 10.0, 121);
  double period = 3.1, v0 = 0.49;
  std::vector<double> ys;
  for (double x : xs) {
    double env = 50.0 * std::exp(-2.0 * x * x / (6.0 * 6.0));
    ys.push_back(env * (1.0 + v0 * std::cos(2.0 * kPi * x / period + 0.3)));
  }
  auto fit = fit_fringe(xs, ys, uniform_sigmas(xs.size()), true);
  REQUIRE(fit.converged);
  CHECK(fit.visibility == Approx(v0).margin(1e-6));
  CHECK(fit.period == Approx(period).epsilon(1e-8));
  CHECK(fit.phase == Approx(0.3).margin(1e-6));
  CHECK(fit.envelope_width == Approx(6.0).epsilon(1e-6));
  // residuals on model-generated data vanish
  CHECK(fit.raw.chi2 / (50.0 * 50.0) < 1e-16);
}

TEST_CASE("flat-envelope fringe fit on a temporal curve") {
  auto xs = grid(0.0, 4.0 * kPi, 97);
  std::vector<double> ys;
  for (double x : xs) ys.push_back(12.0 * (1.0 - std::cos(3.0 * x)));
  auto fit = fit_fringe(xs, ys, uniform_sigmas(xs.size()), false);
  REQUIRE(fit.converged);
  CHECK(fit.period == Approx(2.0 * kPi / 3.0).epsilon(1e-9));
  CHECK(fit.visibility == Approx(1.0).margin(1e-8));
}

TEST_CASE("visibility estimator invariances") {
  auto xs = grid(-9.0, 9.0, 101);
  auto make = [&](double shift, double scale) {
    std::vector<double> ys;
    for (double x : xs) {
      double t = x + shift;
      double env = 40.0 * std::exp(-2.0 * t * t / (5.0 * 5.0));
      ys.push_back(scale *
                   (env * (1.0 + 0.6 * std::cos(2.0 * kPi * t / 2.7)) + 2.0));
    }
    return ys;
  };
  auto base = fit_fringe(xs, make(0.0, 1.0), uniform_sigmas(xs.size()), true);
  auto scaled =
      fit_fringe(xs, make(0.0, 7.3), uniform_sigmas(xs.size()), true);
  auto shifted =
      fit_fringe(xs, make(1.9, 1.0), uniform_sigmas(xs.size()), true);
  REQUIRE(base.converged);
  CHECK(scaled.visibility == Approx(base.visibility).epsilon(1e-7));
  CHECK(shifted.visibility == Approx(base.visibility).epsilon(1e-7));
  CHECK(shifted.period == Approx(base.period).epsilon(1e-7));
}

TEST_CASE("degenerate flat data is flagged, not silently fit") {
  auto xs = grid(-5.0, 5.0, 41);
  std::vector<double> ys(xs.size(), 25.0);
  auto fit = fit_fringe(xs, ys, poisson_sigmas(ys), false);
  CHECK(fit.degenerate);
}

TEST_CASE("Poisson-sampled fringe: coverage of the 1-sigma interval") {
  // With correct Poisson weighting the 68% interval must cover the truth in
  // roughly two thirds of repeated experiments.
  auto xs = grid(-10.0, 10.0, 61);
  const double v_true = 0.49, period = 2.0, width = 5.0, peak = 55.0;
  int covered = 0, total = 0;
  for (int seedling = 0; seedling < 200; ++seedling) {
    std::vector<double> ys;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double x = xs[i];
      double env = peak * std::exp(-2.0 * x * x / (width * width));
      double mean = env * (1.0 + v_true * std::cos(2.0 * kPi * x / period));
      auto rng = substream(777, "coverage", seedling * 1000 + i);
      ys.push_back(static_cast<double>(sample_poisson(rng, mean)));
    }
    auto fit = fit_fringe_counts(xs, ys, true, period);
    if (!fit.converged || fit.degenerate) continue;
    ++total;
    if (std::abs(fit.visibility - v_true) <= fit.sigma_visibility) ++covered;
  }
  REQUIRE(total >= 190);
  double coverage = static_cast<double>(covered) / total;
  CHECK(coverage > 0.58);
  CHECK(coverage < 0.78);
}

TEST_CASE("Poisson-sampled profile: w0 recovered within 2 sigma") {
  auto xs = grid(-10.0, 10.0, 61);
  const double w_true = 5.3, peak = 60.0;
  int covered = 0, total = 0;
  for (int seedling = 0; seedling < 200; ++seedling) {
    std::vector<double> ys;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double mean =
          peak * std::exp(-2.0 * xs[i] * xs[i] / (w_true * w_true));
      auto rng = substream(31337, "w0cov", seedling * 1000 + i);
      ys.push_back(static_cast<double>(sample_poisson(rng, mean)));
    }
    auto fit = fit_gaussian_profile_counts(xs, ys);
    if (!fit.converged) continue;
    ++total;
    if (std::abs(fit.w0 - w_true) <= 2.0 * fit.sigma_w0) ++covered;
  }
  REQUIRE(total >= 195);
  CHECK(static_cast<double>(covered) / total >= 0.95);
}

TEST_CASE("classical-bound comparison verdicts") {
  auto above = compare_bound(0.49, 0.09, 3);
  CHECK(above.bound == Approx(0.1).margin(1e-12));
  CHECK(above.z == Approx((0.49 - 0.1) / 0.09).epsilon(1e-12));
  CHECK(above.verdict_name() == "above");

  auto boundary = compare_bound(0.10, 0.05, 3);
  CHECK(boundary.verdict_name() == "consistent");

  auto temporal = compare_bound(0.86, 0.08, 3);
  CHECK(temporal.verdict_name() == "above");
  CHECK(temporal.z > 9.0);

  auto below = compare_bound(0.05, 0.01, 3);
  CHECK(below.verdict_name() == "below");
}

TEST_CASE("period seeding by Fourier decomposition") {
  auto xs = grid(0.0, 20.0, 200);
  std::vector<double> ys;
  for (double x : xs) ys.push_back(5.0 + 2.0 * std::cos(2.0 * kPi * x / 2.5));
  double seed = dominant_period(xs, ys);
  CHECK(seed == Approx(2.5).epsilon(0.15));
}
