#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "noon/fock_state.hpp"
#include "noon/modes.hpp"
#include "noon/occupation.hpp"

namespace noon {

/// Linear map on creation operators over a declared mode set:
///   a_m† -> sum_j M[j, m] a_j†   for every input mode m.
/// Columns must be orthonormal (checked at construction), so the map is an
/// isometry; square maps whose output set equals the input set are unitary.
/// `IsometryWithLoss` marks maps that route amplitude into modes that are
/// discarded downstream (polarizer loss channels).
class ModeTransform {
 public:
  enum class Kind { Unitary, IsometryWithLoss };

  ModeTransform(ModeSetPtr modes, std::vector<int> inputs,
                std::vector<int> outputs, Eigen::MatrixXcd matrix, Kind kind)
      : modes_(std::move(modes)),
        inputs_(std::move(inputs)),
        outputs_(std::move(outputs)),
        matrix_(std::move(matrix)),
        kind_(kind) {
    if (matrix_.rows() != static_cast<Eigen::Index>(outputs_.size()) ||
        matrix_.cols() != static_cast<Eigen::Index>(inputs_.size()))
      throw std::invalid_argument("transform matrix shape mismatch");
    for (int m : inputs_) check_mode(m);
    for (int m : outputs_) check_mode(m);
    if (matrix_.size() > 0) {
      // M†M = I for both kinds; the kind records whether any output modes
      // are loss channels to be marginalized downstream.
      Eigen::MatrixXcd gram = matrix_.adjoint() * matrix_;
      gram -= Eigen::MatrixXcd::Identity(gram.rows(), gram.cols());
      if (gram.cwiseAbs().maxCoeff() > kOrthoTol)
        throw std::invalid_argument(
            "transform columns are not orthonormal (non-isometric map)");
    }
  }

  static constexpr double kOrthoTol = 1e-12;

  static ModeTransform identity(const ModeSetPtr& modes) {
    return ModeTransform(modes, {}, {}, Eigen::MatrixXcd(0, 0), Kind::Unitary);
  }

  const ModeSetPtr& modes() const { return modes_; }
  const std::vector<int>& inputs() const { return inputs_; }
  const std::vector<int>& outputs() const { return outputs_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Kind kind() const { return kind_; }
  bool is_unitary() const { return kind_ == Kind::Unitary; }

  /// Image of one input creation operator as (output mode, coefficient)
  /// pairs.
  std::vector<std::pair<int, Complex>> column(int input_mode) const {
    auto it = std::find(inputs_.begin(), inputs_.end(), input_mode);
    if (it == inputs_.end())
      throw std::invalid_argument("mode is not an input of this transform");
    Eigen::Index c = it - inputs_.begin();
    std::vector<std::pair<int, Complex>> img;
    for (Eigen::Index r = 0; r < matrix_.rows(); ++r)
      if (std::abs(matrix_(r, c)) > 0.0)
        img.emplace_back(outputs_[r], matrix_(r, c));
    return img;
  }

  bool consumes(int mode) const {
    return std::find(inputs_.begin(), inputs_.end(), mode) != inputs_.end();
  }
  bool produces(int mode) const {
    return std::find(outputs_.begin(), outputs_.end(), mode) != outputs_.end();
  }

 private:
  void check_mode(int m) const {
    if (m < 0 || m >= modes_->size())
      throw std::invalid_argument("transform references undeclared mode");
  }

  ModeSetPtr modes_;
  std::vector<int> inputs_;
  std::vector<int> outputs_;
  Eigen::MatrixXcd matrix_;  // rows follow outputs_, cols follow inputs_
  Kind kind_;
};

namespace detail {

// Polynomial in creation operators, keyed by exponent vector.
using ExpPoly = std::map<Occupation, Complex>;

// poly *= (sum_j c_j a_j†)^n
inline void multiply_power_of_linear_form(
    ExpPoly& poly, const std::vector<std::pair<int, Complex>>& form, int n) {
  for (int k = 0; k < n; ++k) {
    ExpPoly next;
    for (const auto& [exps, coeff] : poly) {
      for (const auto& [mode, c] : form) {
        Occupation e = exps;
        e.add(mode, 1);
        next[e] += coeff * c;
      }
    }
    poly = std::move(next);
  }
}

}  // namespace detail

/// Substitutes every creation operator by its image under T in each
/// monomial-factored term and re-expands. Modes the transform does not
/// consume pass through unchanged; a passthrough mode that collides with a
/// transform output is an error.
inline FockState apply_transform(const ModeTransform& t,
                                 const FockState& state) {
  if (!same_universe(t.modes(), state.modes()))
    throw std::invalid_argument("transform and state use different universes");
  FockState out(state.modes(), state.prune_tol());
  const int n_modes = state.modes()->size();
  for (const auto& [occ, amp] : state.terms()) {
    detail::ExpPoly poly;
    Occupation passthrough(n_modes);
    for (int m = 0; m < n_modes; ++m) {
      int n = occ.count(m);
      if (n == 0 || t.consumes(m)) continue;
      if (t.produces(m))
        throw std::invalid_argument(
            "occupied mode '" + state.modes()->label(m) +
            "' is an output of the transform but not an input");
      passthrough.add(m, n);
    }
    poly.emplace(passthrough, amp / std::sqrt(occupation_factorial(occ)));
    for (int m = 0; m < n_modes; ++m) {
      int n = occ.count(m);
      if (n == 0 || !t.consumes(m)) continue;
      detail::multiply_power_of_linear_form(poly, t.column(m), n);
    }
    for (const auto& [exps, coeff] : poly)
      out.add_term(exps, coeff * std::sqrt(occupation_factorial(exps)));
  }
  out.prune();
  return out;
}

/// T2 after T1 as a single transform (matrix composition with identity
/// extension on modes only one of them touches).
inline ModeTransform compose(const ModeTransform& t2, const ModeTransform& t1) {
  if (!same_universe(t1.modes(), t2.modes()))
    throw std::invalid_argument("composing transforms over different universes");
  const ModeSetPtr& modes = t1.modes();

  std::vector<int> in_modes = t1.inputs();
  for (int m : t2.inputs()) {
    if (!t1.consumes(m) && !t1.produces(m)) {
      if (std::find(in_modes.begin(), in_modes.end(), m) == in_modes.end())
        in_modes.push_back(m);
    }
  }
  std::sort(in_modes.begin(), in_modes.end());

  std::map<int, std::map<int, Complex>> images;  // input -> (output -> coeff)
  for (int m : in_modes) {
    std::vector<std::pair<int, Complex>> first =
        t1.consumes(m) ? t1.column(m)
                       : std::vector<std::pair<int, Complex>>{{m, 1.0}};
    std::map<int, Complex> img;
    for (const auto& [j, c] : first) {
      if (t2.consumes(j)) {
        for (const auto& [k, c2] : t2.column(j)) img[k] += c * c2;
      } else {
        if (t2.produces(j))
          throw std::invalid_argument(
              "composition collides on mode '" + modes->label(j) + "'");
        img[j] += c;
      }
    }
    images.emplace(m, std::move(img));
  }

  std::vector<int> out_modes;
  for (const auto& [m, img] : images)
    for (const auto& [j, c] : img)
      if (std::abs(c) > 0.0 &&
          std::find(out_modes.begin(), out_modes.end(), j) == out_modes.end())
        out_modes.push_back(j);
  std::sort(out_modes.begin(), out_modes.end());

  Eigen::MatrixXcd mat =
      Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(out_modes.size()),
                             static_cast<Eigen::Index>(in_modes.size()));
  for (std::size_t c = 0; c < in_modes.size(); ++c)
    for (const auto& [j, v] : images.at(in_modes[c])) {
      auto r = std::find(out_modes.begin(), out_modes.end(), j) -
               out_modes.begin();
      mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }

  ModeTransform::Kind kind = (t1.is_unitary() && t2.is_unitary())
                                 ? ModeTransform::Kind::Unitary
                                 : ModeTransform::Kind::IsometryWithLoss;
  if (kind == ModeTransform::Kind::Unitary && in_modes.size() != out_modes.size())
    kind = ModeTransform::Kind::IsometryWithLoss;
  return ModeTransform(modes, std::move(in_modes), std::move(out_modes),
                       std::move(mat), kind);
}

/// Applies an ordered chain of transforms (first element acts first).
inline FockState apply_chain(const std::vector<ModeTransform>& chain,
                             const FockState& state) {
  FockState s = state;
  for (const auto& t : chain) s = apply_transform(t, s);
  return s;
}

}  // namespace noon
