#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "noon/mode_transform.hpp"
#include "noon/modes.hpp"

namespace noon {

/// Builders for the transforms of the optical train: wave plates, (partially
/// polarizing) beam splitters, polarizer, phase plates, and the
/// polarization-to-path converter. All act on declared modes only.
///
/// Conventions (fixed here, locked by the validation suite):
///   hwp(theta):  aH† -> cos2t aH† + sin2t aV†,  aV† -> sin2t aH† - cos2t aV†
///   qwp(theta):  R(theta) diag(1, i) R(-theta) applied the same way
///   splitters:   real reflection/transmission amplitudes, minus sign on the
///                second-input reflection
namespace elements {

/// Half-wave plate at fast-axis angle theta on one path.
inline ModeTransform hwp(const ModeSetPtr& modes, const std::string& path,
                         double theta) {
  int h = modes->index(path, Pol::H);
  int v = modes->index(path, Pol::V);
  double c = std::cos(2.0 * theta), s = std::sin(2.0 * theta);
  Eigen::MatrixXcd m(2, 2);
  m << c, s,  //
      s, -c;
  return ModeTransform(modes, {h, v}, {h, v}, m,
                       ModeTransform::Kind::Unitary);
}

/// Quarter-wave plate at fast-axis angle theta on one path.
inline ModeTransform qwp(const ModeSetPtr& modes, const std::string& path,
                         double theta) {
  int h = modes->index(path, Pol::H);
  int v = modes->index(path, Pol::V);
  double c = std::cos(theta), s = std::sin(theta);
  const Complex i(0.0, 1.0);
  Eigen::MatrixXcd m(2, 2);
  m << c * c + i * s * s, (1.0 - i) * c * s,  //
      (1.0 - i) * c * s, s * s + i * c * c;
  return ModeTransform(modes, {h, v}, {h, v}, m,
                       ModeTransform::Kind::Unitary);
}

/// Polarization rotator by angle theta (a pair of half-wave plates acts as
/// one; used by the dephasing model).
inline ModeTransform rotator(const ModeSetPtr& modes, const std::string& path,
                             double theta) {
  int h = modes->index(path, Pol::H);
  int v = modes->index(path, Pol::V);
  double c = std::cos(theta), s = std::sin(theta);
  Eigen::MatrixXcd m(2, 2);
  m << c, -s,  //
      s, c;
  return ModeTransform(modes, {h, v}, {h, v}, m,
                       ModeTransform::Kind::Unitary);
}

/// Partially polarizing beam splitter: H fully transmitted into the
/// transmitted path, V split with amplitude reflectivity r_v into the
/// reflected path. One-input form (the second port sees vacuum).
inline ModeTransform ppbs(const ModeSetPtr& modes, const std::string& path_in,
                          const std::string& path_refl,
                          const std::string& path_trans, double r_v) {
  if (r_v < 0.0 || r_v > 1.0)
    throw std::invalid_argument("PPBS reflectivity must be in [0, 1]");
  double t_v = std::sqrt(1.0 - r_v * r_v);
  int in_h = modes->index(path_in, Pol::H);
  int in_v = modes->index(path_in, Pol::V);
  int tr_h = modes->index(path_trans, Pol::H);
  int re_v = modes->index(path_refl, Pol::V);
  int tr_v = modes->index(path_trans, Pol::V);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 2);
  // rows: {tr_h, re_v, tr_v}; cols: {in_h, in_v}
  m(0, 0) = 1.0;
  m(1, 1) = r_v;
  m(2, 1) = t_v;
  return ModeTransform(modes, {in_h, in_v}, {tr_h, re_v, tr_v}, m,
                       ModeTransform::Kind::Unitary);
}

/// Plain 50/50 (or general) beam splitter between two paths, acting on both
/// polarizations with the same real amplitudes.
inline ModeTransform beamsplitter(const ModeSetPtr& modes,
                                  const std::string& path1,
                                  const std::string& path2,
                                  double r = std::numbers::sqrt2 / 2.0) {
  double t = std::sqrt(1.0 - r * r);
  std::vector<int> io;
  for (Pol p : {Pol::H, Pol::V}) {
    io.push_back(modes->index(path1, p));
    io.push_back(modes->index(path2, p));
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  for (int p = 0; p < 2; ++p) {
    m(2 * p + 0, 2 * p + 0) = r;
    m(2 * p + 1, 2 * p + 0) = t;
    m(2 * p + 0, 2 * p + 1) = t;
    m(2 * p + 1, 2 * p + 1) = -r;
  }
  return ModeTransform(modes, io, io, m, ModeTransform::Kind::Unitary);
}

/// Polarizing beam splitter: H transmitted, V reflected into another path.
inline ModeTransform pbs(const ModeSetPtr& modes, const std::string& path_in,
                         const std::string& path_trans,
                         const std::string& path_refl) {
  int in_h = modes->index(path_in, Pol::H);
  int in_v = modes->index(path_in, Pol::V);
  int out_h = modes->index(path_trans, Pol::H);
  int out_v = modes->index(path_refl, Pol::V);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
  return ModeTransform(modes, {in_h, in_v}, {out_h, out_v}, m,
                       ModeTransform::Kind::Unitary);
}

/// Per-path phase shift: a_{p,*}† -> e^{i phi} a_{p,*}†.
inline ModeTransform phase(const ModeSetPtr& modes, const std::string& path,
                           double phi) {
  int h = modes->index(path, Pol::H);
  int v = modes->index(path, Pol::V);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 0) = std::polar(1.0, phi);
  m(1, 1) = std::polar(1.0, phi);
  return ModeTransform(modes, {h, v}, {h, v}, m,
                       ModeTransform::Kind::Unitary);
}

/// Linear polarizer with horizontal pass axis: the pass-axis operator is
/// unchanged, the orthogonal axis is routed entirely into a dedicated loss
/// mode that downstream code marginalizes.
inline ModeTransform polarizer(const ModeSetPtr& modes, const std::string& path,
                               const std::string& loss_path) {
  int h = modes->index(path, Pol::H);
  int v = modes->index(path, Pol::V);
  int loss = modes->index(loss_path, Pol::H);
  if (loss == h || loss == v)
    throw std::invalid_argument("polarizer loss mode collides with its path");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
  return ModeTransform(modes, {h, v}, {h, loss}, m,
                       ModeTransform::Kind::IsometryWithLoss);
}

/// Polarization-to-path converter: (p,H) -> (a,H) and (p,V) -> (b,H), so
/// both output arms carry a single shared polarization.
inline ModeTransform mode_converter(const ModeSetPtr& modes,
                                    const std::string& path_in,
                                    const std::string& path_a,
                                    const std::string& path_b) {
  int in_h = modes->index(path_in, Pol::H);
  int in_v = modes->index(path_in, Pol::V);
  int out_a = modes->index(path_a, Pol::H);
  int out_b = modes->index(path_b, Pol::H);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
  return ModeTransform(modes, {in_h, in_v}, {out_a, out_b}, m,
                       ModeTransform::Kind::Unitary);
}

}  // namespace elements

/// Beam spacing produced by a birefringent-prism pair: d = 2 L sin(theta)
/// for walk-off length L and prism-axis angle theta.
inline double geometry_spacing(double walk_off_length, double prism_angle) {
  if (walk_off_length <= 0.0)
    throw std::invalid_argument("walk-off length must be positive");
  return 2.0 * walk_off_length * std::sin(prism_angle);
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace noon
