#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "noon/elements.hpp"
#include "noon/fock_state.hpp"
#include "noon/mode_transform.hpp"
#include "support/oracles.hpp"

using namespace noon;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

ModeSetPtr train_modes() {
  auto set = std::make_shared<ModeSet>();
  for (const char* p : {"src", "1", "2", "a", "b"}) set->declare_path(p);
  set->declare_loss("loss0");
  return set;
}

FockState single_photon(const ModeSetPtr& modes, const std::string& path,
                        Pol pol) {
  return state_from_monomials(modes, {{{{modes->index(path, pol), 1}}, 1.0}});
}

}  // namespace

TEST_CASE("half-wave plate conventions") {
  auto modes = train_modes();

  SECTION("fast axis at 0: |1>_V picks up a sign") {
    FockState out = apply_transform(elements::hwp(modes, "2", 0.0),
                                    single_photon(modes, "2", Pol::V));
    Occupation v(modes->size());
    v.set(modes->index("2", Pol::V), 1);
    CHECK(out.amplitude(v).real() == Approx(-1.0));
    CHECK(std::norm(out.amplitude(v)) == Approx(1.0));
  }

  SECTION("22.5 degrees maps H to the diagonal state") {
    FockState out = apply_transform(elements::hwp(modes, "2", deg_to_rad(22.5)),
                                    single_photon(modes, "2", Pol::H));
    Occupation h(modes->size()), v(modes->size());
    h.set(modes->index("2", Pol::H), 1);
    v.set(modes->index("2", Pol::V), 1);
    CHECK(out.amplitude(h).real() == Approx(1.0 / std::numbers::sqrt2));
    CHECK(out.amplitude(v).real() == Approx(1.0 / std::numbers::sqrt2));
  }

  SECTION("rotating by chi/4 phases the circular components by chi") {
    // |L> = (|H> + i|V>)/sqrt2 must map to e^{i chi/2} |R>
    double chi = 0.7321;
    const Complex i(0.0, 1.0);
    int h = modes->index("2", Pol::H), v = modes->index("2", Pol::V);
    CreationPolynomial left{{{{h, 1}}, 1.0 / std::numbers::sqrt2},
                            {{{v, 1}}, i / std::numbers::sqrt2}};
    FockState out = apply_transform(elements::hwp(modes, "2", 0.25 * chi),
                                    state_from_monomials(modes, left));
    CreationPolynomial right{{{{h, 1}}, 1.0 / std::numbers::sqrt2},
                             {{{v, 1}}, -i / std::numbers::sqrt2}};
    FockState expect = state_from_monomials(modes, right);
    Complex overlap = inner_product(expect, out);
    CHECK(std::abs(overlap) == Approx(1.0));
    CHECK(std::arg(overlap) == Approx(0.5 * chi));
  }
}

TEST_CASE("quarter-wave plate conventions") {
  auto modes = train_modes();

  SECTION("fast axis at 0: H is an eigenmode") {
    FockState out = apply_transform(elements::qwp(modes, "2", 0.0),
                                    single_photon(modes, "2", Pol::H));
    Occupation h(modes->size());
    h.set(modes->index("2", Pol::H), 1);
    CHECK(std::norm(out.amplitude(h)) == Approx(1.0));
  }

  SECTION("two quarter waves make a half wave") {
    ModeTransform q = elements::qwp(modes, "2", deg_to_rad(30.0));
    ModeTransform qq = compose(q, q);
    ModeTransform h = elements::hwp(modes, "2", deg_to_rad(30.0));
    std::mt19937_64 rng(3);
    int ih = modes->index("2", Pol::H), iv = modes->index("2", Pol::V);
    FockState s = oracles::random_state(modes, {ih, iv}, 3, 4, rng);
    CHECK(phase_aligned_distance(apply_transform(qq, s),
                                 apply_transform(h, s)) < 1e-12);
  }
}

TEST_CASE("PPBS limit cases") {
  auto modes = train_modes();

  SECTION("r_V = 0 transmits V unchanged") {
    FockState out = apply_transform(elements::ppbs(modes, "src", "1", "2", 0.0),
                                    single_photon(modes, "src", Pol::V));
    Occupation v2(modes->size());
    v2.set(modes->index("2", Pol::V), 1);
    CHECK(std::norm(out.amplitude(v2)) == Approx(1.0));
  }

  SECTION("r_V = 1 reflects V fully, H still transmitted") {
    ModeTransform t = elements::ppbs(modes, "src", "1", "2", 1.0);
    FockState out_v = apply_transform(t, single_photon(modes, "src", Pol::V));
    Occupation v1(modes->size());
    v1.set(modes->index("1", Pol::V), 1);
    CHECK(std::norm(out_v.amplitude(v1)) == Approx(1.0));

    FockState out_h = apply_transform(t, single_photon(modes, "src", Pol::H));
    Occupation h2(modes->size());
    h2.set(modes->index("2", Pol::H), 1);
    CHECK(std::norm(out_h.amplitude(h2)) == Approx(1.0));
  }

  SECTION("out-of-range reflectivity is rejected") {
    CHECK_THROWS_AS(elements::ppbs(modes, "src", "1", "2", 1.5),
                    std::invalid_argument);
  }
}

TEST_CASE("polarizer routes V into the loss mode") {
  auto modes = train_modes();
  ModeTransform pol = elements::polarizer(modes, "2", "loss0");

  FockState h_out = apply_transform(pol, single_photon(modes, "2", Pol::H));
  Occupation h(modes->size());
  h.set(modes->index("2", Pol::H), 1);
  CHECK(std::norm(h_out.amplitude(h)) == Approx(1.0));

  FockState v_out = apply_transform(pol, single_photon(modes, "2", Pol::V));
  auto survive = total_number_distribution(
      v_out, {modes->index("2", Pol::H), modes->index("2", Pol::V)});
  CHECK(survive.at(0) == Approx(1.0));  // photon lives in the loss mode only
  CHECK(v_out.norm() == Approx(1.0));   // trace carried, not discarded
}

TEST_CASE("polarizer survival probability stays within [0, 1]") {
  auto modes = train_modes();
  ModeTransform pol = elements::polarizer(modes, "2", "loss0");
  int h = modes->index("2", Pol::H), v = modes->index("2", Pol::V);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    FockState s = oracles::random_state(modes, {h, v}, 4, 5, rng);
    FockState out = apply_transform(pol, s);
    auto loss_dist =
        total_number_distribution(out, {modes->index("loss0", Pol::H)});
    double survival = loss_dist.count(0) ? loss_dist.at(0) : 0.0;
    CHECK(survival >= -1e-12);
    CHECK(survival <= 1.0 + 1e-12);
  }
}

TEST_CASE("mode converter maps polarization to path") {
  auto modes = train_modes();
  ModeTransform mc = elements::mode_converter(modes, "2", "a", "b");

  SECTION("single diagonal photon becomes a path superposition") {
    int h = modes->index("2", Pol::H), v = modes->index("2", Pol::V);
    CreationPolynomial diag{{{{h, 1}}, 1.0 / std::numbers::sqrt2},
                            {{{v, 1}}, 1.0 / std::numbers::sqrt2}};
    FockState out = apply_transform(mc, state_from_monomials(modes, diag));
    Occupation a(modes->size()), b(modes->size());
    a.set(modes->index("a", Pol::H), 1);
    b.set(modes->index("b", Pol::H), 1);
    CHECK(out.amplitude(a).real() == Approx(1.0 / std::numbers::sqrt2));
    CHECK(out.amplitude(b).real() == Approx(1.0 / std::numbers::sqrt2));
  }

  SECTION("vacuum passes through") {
    FockState out = apply_transform(mc, FockState::vacuum(modes));
    CHECK(out.norm() == Approx(1.0));
    CHECK(out.term_count() == 1);
  }
}

TEST_CASE("element transforms satisfy their orthonormality invariant") {
  auto modes = train_modes();
  std::vector<ModeTransform> all{
      elements::hwp(modes, "2", 0.37),
      elements::qwp(modes, "2", 1.21),
      elements::rotator(modes, "2", 0.5),
      elements::ppbs(modes, "src", "1", "2", std::sqrt(2.0 / 3.0)),
      elements::beamsplitter(modes, "1", "2"),
      elements::pbs(modes, "src", "2", "1"),
      elements::phase(modes, "b", 0.4),
      elements::polarizer(modes, "2", "loss0"),
      elements::mode_converter(modes, "2", "a", "b"),
  };
  for (const auto& t : all) {
    Eigen::MatrixXcd gram = t.matrix().adjoint() * t.matrix();
    gram -= Eigen::MatrixXcd::Identity(gram.rows(), gram.cols());
    CHECK(gram.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("composing rectangular maps matches sequential application") {
  auto modes = train_modes();
  ModeTransform hwp1 = elements::hwp(modes, "src", deg_to_rad(22.5));
  ModeTransform splitter =
      elements::ppbs(modes, "src", "1", "2", std::sqrt(2.0 / 3.0));
  ModeTransform pol = elements::polarizer(modes, "2", "loss0");
  ModeTransform fused = compose(pol, compose(splitter, hwp1));
  CHECK(fused.kind() == ModeTransform::Kind::IsometryWithLoss);

  std::mt19937_64 rng(21);
  int sh = modes->index("src", Pol::H), sv = modes->index("src", Pol::V);
  for (int trial = 0; trial < 10; ++trial) {
    FockState s = oracles::random_state(modes, {sh, sv}, 4, 4, rng);
    FockState seq = apply_transform(
        pol, apply_transform(splitter, apply_transform(hwp1, s)));
    FockState one = apply_transform(fused, s);
    CHECK((seq - one).norm() < 1e-12);
  }
}

TEST_CASE("undeclared paths are hard errors") {
  auto modes = train_modes();
  CHECK_THROWS_AS(elements::hwp(modes, "nope", 0.1), std::invalid_argument);
  CHECK_THROWS_AS(elements::polarizer(modes, "2", "missing_loss"),
                  std::invalid_argument);
}

TEST_CASE("beam spacing from the prism geometry") {
  CHECK(geometry_spacing(1e-3, 0.0) == Approx(0.0).margin(1e-18));
  CHECK(geometry_spacing(1e-3, deg_to_rad(30.0)) == Approx(1e-3));
  // the experimental spacing of 2.2 mm needs sin(theta) = d / (2L)
  double L = 2.0e-3;
  double theta = std::asin(2.2e-3 / (2.0 * L));
  CHECK(geometry_spacing(L, theta) == Approx(2.2e-3));
  CHECK_THROWS_AS(geometry_spacing(-1.0, 0.3), std::invalid_argument);
}

// The one test that pins every phase convention at once: the full
// preparation chain must reproduce the known splitter-output coefficients
// and the heralded circular-basis state, and the quarter-wave plate then
// turns it into the equal-weight H^3/V^3 superposition.
TEST_CASE("convention lock: preparation chain reproduces the known state") {
  auto modes = train_modes();
  int src_h = modes->index("src", Pol::H), src_v = modes->index("src", Pol::V);
  int h1v = modes->index("1", Pol::V);
  int h2 = modes->index("2", Pol::H), v2 = modes->index("2", Pol::V);

  CreationMonomial source{{{src_h, 2}, {src_v, 2}}, 0.5};
  FockState prepared = apply_transform(
      elements::ppbs(modes, "src", "1", "2", std::sqrt(2.0 / 3.0)),
      apply_transform(elements::hwp(modes, "src", deg_to_rad(22.5)),
                      state_from_monomials(modes, {source})));

  CHECK(prepared.is_normalized());

  auto occ = [&](std::vector<std::pair<int, int>> counts) {
    Occupation o(modes->size());
    for (auto [m, n] : counts) o.set(m, n);
    return o;
  };

  const double s2 = std::numbers::sqrt2;
  struct Expected {
    Occupation occ;
    double coeff;
  };
  std::vector<Expected> expected{
      {occ({{h1v, 1}, {v2, 3}}), s2 / 18.0},
      {occ({{h1v, 1}, {h2, 2}, {v2, 1}}), -s2 / 6.0},
      {occ({{h2, 4}}), 1.0 / 8.0},
      {occ({{h2, 2}, {v2, 2}}), -1.0 / 12.0},
      {occ({{v2, 4}}), 1.0 / 72.0},
  };
  for (const auto& e : expected) {
    Complex c = prepared.monomial_coefficient(e.occ);
    CAPTURE(e.coeff);
    CHECK(std::abs(c - Complex(e.coeff, 0.0)) < 1e-12);
  }

  // heralding on exactly one trigger photon
  auto herald = project_total(
      prepared, {modes->index("1", Pol::H), h1v}, 1);
  REQUIRE(herald.defined);
  CHECK(herald.probability == Approx(4.0 / 27.0).epsilon(1e-12));

  // the heralded polarization state after the 45-degree quarter-wave plate
  FockState noon_state = apply_transform(
      elements::qwp(modes, "2", deg_to_rad(45.0)), herald.conditional);
  Complex amp_h = noon_state.amplitude(occ({{h1v, 1}, {h2, 3}}));
  Complex amp_v = noon_state.amplitude(occ({{h1v, 1}, {v2, 3}}));
  CHECK(std::abs(amp_h) == Approx(1.0 / s2).epsilon(1e-12));
  CHECK(std::abs(amp_v) == Approx(1.0 / s2).epsilon(1e-12));
  CHECK(std::abs(std::abs(std::arg(amp_v / amp_h)) - kPi / 2.0) < 1e-9);

  // |<3,0|psi>| = 1/sqrt2 via the inner product route as well
  FockState three_h(modes);
  three_h.add_term(occ({{h1v, 1}, {h2, 3}}), 1.0);
  CHECK(std::abs(inner_product(three_h, noon_state)) ==
        Approx(1.0 / s2).epsilon(1e-12));

  // number distribution of the H mode: three photons or none, half-half
  auto h_dist = total_number_distribution(noon_state, {h2});
  CHECK(h_dist.at(3) == Approx(0.5).epsilon(1e-12));
  CHECK(h_dist.at(0) == Approx(0.5).epsilon(1e-12));
  CHECK(h_dist.size() == 2);

  // and the converter turns it into the path N00N state
  FockState path_state = apply_transform(
      elements::mode_converter(modes, "2", "a", "b"), noon_state);
  Complex amp_a =
      path_state.amplitude(occ({{h1v, 1}, {modes->index("a", Pol::H), 3}}));
  Complex amp_b =
      path_state.amplitude(occ({{h1v, 1}, {modes->index("b", Pol::H), 3}}));
  CHECK(std::abs(amp_a) == Approx(1.0 / s2).epsilon(1e-12));
  CHECK(std::abs(amp_b) == Approx(1.0 / s2).epsilon(1e-12));
}

TEST_CASE("heralded fringe through HWP + polarizer follows sin^2(3chi/2)") {
  // the three-photon component passing the analyzer carries the
  // triple-frequency fringe
  auto modes = train_modes();
  int h1v = modes->index("1", Pol::V);
  int h2 = modes->index("2", Pol::H);

  CreationMonomial source{{{modes->index("src", Pol::H), 2},
                           {modes->index("src", Pol::V), 2}},
                          0.5};
  FockState prepared = apply_transform(
      elements::ppbs(modes, "src", "1", "2", std::sqrt(2.0 / 3.0)),
      apply_transform(elements::hwp(modes, "src", deg_to_rad(22.5)),
                      state_from_monomials(modes, {source})));
  auto herald =
      project_total(prepared, {modes->index("1", Pol::H), h1v}, 1);
  REQUIRE(herald.defined);

  for (double chi : {0.0, 0.31, 1.2, 2.0 * kPi / 3.0, 2.8}) {
    FockState analyzed = apply_transform(
        elements::polarizer(modes, "2", "loss0"),
        apply_transform(elements::hwp(modes, "2", 0.25 * chi),
                        herald.conditional));
    auto proj = project_occupation(analyzed, {{h2, 3}});
    double expect = 0.25 * std::pow(std::sin(1.5 * chi), 2);
    CHECK(proj.probability == Approx(expect).margin(1e-12));
  }
}
