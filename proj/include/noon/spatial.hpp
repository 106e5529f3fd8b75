#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "noon/fock_state.hpp"

namespace noon {

/// Geometry of the double-slit arrangement: two parallel collimated Gaussian
/// beams focused by one lens, sampled by a scanning single-mode fiber tip at
/// the focal plane. All lengths in meters.
struct ExperimentGeometry {
  double beam_spacing;    // d, center-to-center spacing of the two arms
  double beam_diameter;   // 1/e^2 intensity diameter of each collimated arm
  double wavelength;      // lambda
  double focal_length;    // f
  double mfd;             // fiber mode-field diameter (0 = point sampling)
  double rel_phase = 0.0; // phase between arms after group-delay compensation

  void validate() const {
    if (beam_spacing <= 0 || beam_diameter <= 0 || wavelength <= 0 ||
        focal_length <= 0 || mfd < 0)
      throw std::invalid_argument("geometry lengths must be positive");
  }

  /// 1/e^2 intensity radius of one collimated arm.
  double input_waist() const { return 0.5 * beam_diameter; }

  /// 1/e^2 intensity radius of the focal spot of one arm (field
  /// exp(-x^2/w_f^2)), from the Fourier relation w_f = lambda f / (pi w_in).
  double focal_waist() const {
    return wavelength * focal_length / (std::numbers::pi * input_waist());
  }

  /// 1/e^2 field radius of the fiber mode.
  double fiber_waist() const { return 0.5 * mfd; }

  /// Carrier wavevector of one arm at the focus: beta = pi d / (lambda f).
  double carrier() const {
    return std::numbers::pi * beam_spacing / (wavelength * focal_length);
  }

  /// Ideal two-arm fringe period lambda f / d (point detector).
  double ideal_fringe_period() const {
    return wavelength * focal_length / beam_spacing;
  }

  /// Combined (beam convolved with fiber) 1/e^2 envelope radius.
  double effective_waist() const {
    double wf = focal_waist(), wm = fiber_waist();
    return std::sqrt(wf * wf + wm * wm);
  }

  /// Fringe carrier after fiber convolution: beta * w_f^2 / (w_f^2 + w_m^2).
  /// A finite fiber mode dilutes the phase gradient and stretches the
  /// apparent period; the point-sampling limit recovers beta.
  double effective_carrier() const {
    if (mfd <= 0.0) return carrier();
    double wf2 = focal_waist() * focal_waist();
    double wm2 = fiber_waist() * fiber_waist();
    return carrier() * wf2 / (wf2 + wm2);
  }

  /// Fringe period actually seen by the scanning fiber for an N-photon
  /// N00N state.
  double detected_fringe_period(int n_photons) const {
    return std::numbers::pi / (n_photons * effective_carrier());
  }
};

enum class Arm { A, B };

inline double arm_sign(Arm arm) { return arm == Arm::A ? 1.0 : -1.0; }

/// Focal-plane field of one arm: shared Gaussian envelope times the
/// displacement phase, u(x) = exp(-x^2/w_f^2) exp(+-i pi d x/(lambda f)).
inline Complex focal_field(double x, const ExperimentGeometry& g, Arm arm) {
  double wf = g.focal_waist();
  double env = std::exp(-x * x / (wf * wf));
  return std::polar(env, arm_sign(arm) * g.carrier() * x);
}

/// Amplitude attenuation of the carrier oscillation caused by the
/// fiber-mode overlap (exact closed form; field units).
inline double fringe_attenuation(const ExperimentGeometry& g) {
  if (g.mfd <= 0.0) return 1.0;
  double wf2 = g.focal_waist() * g.focal_waist();
  double wm2 = g.fiber_waist() * g.fiber_waist();
  double b = g.carrier();
  return std::exp(-b * b * wf2 * wm2 / (4.0 * (wf2 + wm2)));
}

/// Normalized coupling amplitude of one arm into the fiber mode at tip
/// position x: the Gaussian-Gaussian overlap integral
///   A(x) = <m(.-x)|u> / (||u|| ||m||),
/// in closed form. |A| <= 1, with equality of peak coupling only for
/// matched waists. mfd = 0 degenerates to point sampling of the field with
/// unit peak normalization.
inline Complex fiber_overlap(double x, const ExperimentGeometry& g, Arm arm) {
  if (g.mfd <= 0.0) return focal_field(x, g, arm);
  double wf = g.focal_waist(), wm = g.fiber_waist();
  double wf2 = wf * wf, wm2 = wm * wm;
  double weff2 = wf2 + wm2;
  double peak = std::sqrt(2.0 * wf * wm / weff2);
  double env = peak * std::exp(-x * x / weff2) * fringe_attenuation(g);
  double phase = arm_sign(arm) * g.carrier() * (wf2 / weff2) * x;
  return std::polar(env, phase);
}

/// Detection rate of the N-photon path N00N state
/// (|N,0> + e^{i phi0} |0,N>)/sqrt(2) at fiber position x:
///   rate = |A_a(x)^N + e^{i phi0} A_b(x)^N|^2 / 2.
/// For N photons the fringe period is 1/N of the single-photon one, under
/// the envelope |A|^{2N}.
inline double noon_spatial_rate(double x, const ExperimentGeometry& g,
                                int n_photons) {
  if (n_photons < 1) throw std::invalid_argument("photon number must be >= 1");
  Complex a = fiber_overlap(x, g, Arm::A);
  Complex b = fiber_overlap(x, g, Arm::B);
  Complex amp = std::pow(a, n_photons) +
                std::polar(1.0, g.rel_phase) * std::pow(b, n_photons);
  return 0.5 * std::norm(amp);
}

/// Single-arm profile (other arm blocked): rate = |A_open(x)|^{2N} / 2.
/// The N-photon profile is the N-th power of the single-photon one.
inline double profile_rate(double x, const ExperimentGeometry& g,
                           int n_photons, Arm open_arm) {
  if (n_photons < 1) throw std::invalid_argument("photon number must be >= 1");
  double p = std::norm(fiber_overlap(x, g, open_arm));
  return 0.5 * std::pow(p, n_photons);
}

/// Classical ceiling on the visibility of the N-th harmonic for
/// intensity^N detection of a classical double-slit pattern: the ratio of
/// the cos(N phi) Fourier coefficient of (1 + cos phi)^N to its DC term.
/// Computed by discrete Fourier decomposition (exact for trigonometric
/// polynomials on a fine enough uniform grid).
inline double classical_visibility_bound(int n_photons) {
  if (n_photons < 1) throw std::invalid_argument("photon number must be >= 1");
  const int samples = std::max(64, 4 * n_photons + 4);
  double dc = 0.0, cos_n = 0.0, sin_n = 0.0;
  for (int k = 0; k < samples; ++k) {
    double phi = 2.0 * std::numbers::pi * k / samples;
    double v = std::pow(1.0 + std::cos(phi), n_photons);
    dc += v;
    cos_n += v * std::cos(n_photons * phi);
    sin_n += v * std::sin(n_photons * phi);
  }
  dc /= samples;
  cos_n *= 2.0 / samples;
  sin_n *= 2.0 / samples;
  return std::hypot(cos_n, sin_n) / dc;
}

}  // namespace noon
