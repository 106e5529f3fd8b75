#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noon/modes.hpp"
#include "noon/occupation.hpp"

namespace noon {

using Complex = std::complex<double>;

/// Default threshold below which amplitudes are dropped after each
/// operation, to bound term growth.
inline constexpr double kDefaultPruneTol = 1e-14;

/// One product of creation operators with a scalar coefficient,
/// e.g. (1/2) aH^†2 aV^†2. Applied to vacuum, a†^n |0> = sqrt(n!) |n>.
struct CreationMonomial {
  std::vector<std::pair<int, int>> powers;  // (mode index, exponent)
  Complex coefficient{1.0, 0.0};
};

/// A sum of creation monomials, used both for state preparation and as the
/// expansion currency inside mode transforms.
using CreationPolynomial = std::vector<CreationMonomial>;

/// Finite superposition of occupation-number states with complex amplitudes.
/// Immutable in normal use: operations return new states.
class FockState {
 public:
  using TermMap = std::map<Occupation, Complex>;

  FockState(ModeSetPtr modes, double prune_tol = kDefaultPruneTol)
      : modes_(std::move(modes)), prune_tol_(prune_tol) {
    if (!modes_ || modes_->size() == 0)
      throw std::invalid_argument("FockState requires a non-empty mode set");
  }

  /// |0>: single term, empty occupation, amplitude 1.
  static FockState vacuum(ModeSetPtr modes,
                          double prune_tol = kDefaultPruneTol) {
    FockState s(std::move(modes), prune_tol);
    s.terms_.emplace(Occupation(s.modes_->size()), Complex(1.0, 0.0));
    return s;
  }

  const ModeSetPtr& modes() const { return modes_; }
  const TermMap& terms() const { return terms_; }
  double prune_tol() const { return prune_tol_; }
  int term_count() const { return static_cast<int>(terms_.size()); }

  Complex amplitude(const Occupation& occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? Complex(0.0, 0.0) : it->second;
  }

  /// Amplitude of the basis state reached from vacuum by the given creation
  /// monomial, divided by its ladder normalization: the coefficient the
  /// state would carry when written as a polynomial in creation operators.
  Complex monomial_coefficient(const Occupation& occ) const {
    return amplitude(occ) / std::sqrt(occupation_factorial(occ));
  }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [occ, amp] : terms_) s += std::norm(amp);
    return s;
  }

  double norm() const { return std::sqrt(norm_squared()); }

  bool is_normalized(double tol = 1e-10) const {
    return std::abs(norm() - 1.0) < tol;
  }

  void scale(Complex c) {
    for (auto& [occ, amp] : terms_) amp *= c;
  }

  FockState scaled(Complex c) const {
    FockState out = *this;
    out.scale(c);
    return out;
  }

  FockState normalized() const {
    double n = norm();
    if (n < prune_tol_)
      throw std::domain_error("cannot normalize a (near-)zero state");
    return scaled(Complex(1.0 / n, 0.0));
  }

  void add_term(const Occupation& occ, Complex amp) {
    if (occ.n_modes() != modes_->size())
      throw std::invalid_argument("occupation size does not match mode set");
    terms_[occ] += amp;
  }

  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) <= prune_tol_)
        it = terms_.erase(it);
      else
        ++it;
    }
  }

  friend FockState operator+(const FockState& x, const FockState& y) {
    if (!same_universe(x.modes_, y.modes_))
      throw std::invalid_argument("mode set mismatch in state addition");
    FockState out = x;
    for (const auto& [occ, amp] : y.terms_) out.terms_[occ] += amp;
    out.prune();
    return out;
  }

  friend FockState operator-(const FockState& x, const FockState& y) {
    return x + y.scaled(Complex(-1.0, 0.0));
  }

 private:
  ModeSetPtr modes_;
  TermMap terms_;
  double prune_tol_;
};

/// <x|y>, conjugate-linear in x. Requires matching universes.
inline Complex inner_product(const FockState& x, const FockState& y) {
  if (!same_universe(x.modes(), y.modes()))
    throw std::invalid_argument("mode set mismatch in inner product");
  Complex s(0.0, 0.0);
  const auto& xt = x.terms();
  const auto& yt = y.terms();
  // walk the smaller map
  if (xt.size() <= yt.size()) {
    for (const auto& [occ, amp] : xt) {
      auto it = yt.find(occ);
      if (it != yt.end()) s += std::conj(amp) * it->second;
    }
  } else {
    for (const auto& [occ, amp] : yt) {
      auto it = xt.find(occ);
      if (it != xt.end()) s += std::conj(it->second) * amp;
    }
  }
  return s;
}

/// Applies a sum of creation monomials to a state:
/// |out> = sum_k c_k prod_m (a_m†)^{e_km} |in>, with exact sqrt(n+1)
/// ladder factors.
inline FockState apply_monomial(const CreationPolynomial& poly,
                                const FockState& state) {
  FockState out(state.modes(), state.prune_tol());
  const int n_modes = state.modes()->size();
  for (const auto& mono : poly) {
    for (const auto& [mode, exponent] : mono.powers) {
      if (mode < 0 || mode >= n_modes)
        throw std::invalid_argument("monomial references undeclared mode");
      if (exponent < 0)
        throw std::invalid_argument("negative exponent in monomial");
    }
    for (const auto& [occ, amp] : state.terms()) {
      Occupation raised = occ;
      double ladder = 1.0;  // prod over modes of (n+1)(n+2)...(n+e)
      for (const auto& [mode, exponent] : mono.powers) {
        int n = raised.count(mode);
        for (int k = 1; k <= exponent; ++k) ladder *= n + k;
        raised.add(mode, exponent);
      }
      out.add_term(raised, amp * mono.coefficient * std::sqrt(ladder));
    }
  }
  out.prune();
  return out;
}

/// Convenience: monomial applied to the vacuum of the given universe.
inline FockState state_from_monomials(const ModeSetPtr& modes,
                                      const CreationPolynomial& poly,
                                      double prune_tol = kDefaultPruneTol) {
  return apply_monomial(poly, FockState::vacuum(modes, prune_tol));
}

/// Result of projecting onto fixed photon numbers: the outcome probability
/// and the renormalized conditional state. `defined` is false when the
/// probability is numerically zero (conditional state is then meaningless).
struct ProjectionResult {
  double probability = 0.0;
  FockState conditional;
  bool defined = false;
};

/// Projects onto exact per-mode photon counts over a subset of modes.
/// Zero-probability outcomes return a flagged result, not an error.
inline ProjectionResult project_occupation(
    const FockState& state, const std::vector<std::pair<int, int>>& counts) {
  FockState matched(state.modes(), state.prune_tol());
  double prob = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    bool match = true;
    for (const auto& [mode, n] : counts) {
      if (occ.count(mode) != n) {
        match = false;
        break;
      }
    }
    if (match) {
      prob += std::norm(amp);
      matched.add_term(occ, amp);
    }
  }
  ProjectionResult res{prob, std::move(matched), prob >= 1e-14};
  if (res.defined) res.conditional = res.conditional.normalized();
  return res;
}

/// Projects onto an exact total photon number summed over a subset of modes
/// (e.g. "exactly one photon anywhere in the trigger path").
inline ProjectionResult project_total(const FockState& state,
                                      const std::vector<int>& modes, int n) {
  FockState matched(state.modes(), state.prune_tol());
  double prob = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    int total = 0;
    for (int m : modes) total += occ.count(m);
    if (total == n) {
      prob += std::norm(amp);
      matched.add_term(occ, amp);
    }
  }
  ProjectionResult res{prob, std::move(matched), prob >= 1e-14};
  if (res.defined) res.conditional = res.conditional.normalized();
  return res;
}

/// Joint photon-number distribution over a subset of modes: the diagonal of
/// the reduced state in the number basis. Keys are count vectors aligned
/// with `modes`; only patterns with nonzero probability appear.
inline std::map<std::vector<int>, double> number_distribution(
    const FockState& state, const std::vector<int>& modes) {
  std::map<std::vector<int>, double> dist;
  for (const auto& [occ, amp] : state.terms()) {
    std::vector<int> key(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) key[i] = occ.count(modes[i]);
    dist[key] += std::norm(amp);
  }
  return dist;
}

/// Marginal distribution of the total photon number over a subset of modes.
inline std::map<int, double> total_number_distribution(
    const FockState& state, const std::vector<int>& modes) {
  std::map<int, double> dist;
  for (const auto& [occ, amp] : state.terms()) {
    int total = 0;
    for (int m : modes) total += occ.count(m);
    dist[total] += std::norm(amp);
  }
  return dist;
}

/// min over a global phase of || x - e^{i phi} y ||. States compared this
/// way are physically identical when the distance vanishes.
inline double phase_aligned_distance(const FockState& x, const FockState& y) {
  Complex ov = inner_product(x, y);
  double d2 = x.norm_squared() + y.norm_squared() - 2.0 * std::abs(ov);
  return std::sqrt(std::max(0.0, d2));
}

/// Debug serialization: a JSON array of {occupation, re, im} objects with
/// deterministic ordering, for golden tests and dump inspection.
inline std::string to_debug_json(const FockState& state) {
  std::string out = "[";
  bool first = true;
  for (const auto& [occ, amp] : state.terms()) {
    if (!first) out += ",";
    first = false;
    out += "{\"occupation\":{";
    bool first_mode = true;
    for (int m = 0; m < occ.n_modes(); ++m) {
      if (occ.count(m) == 0) continue;
      if (!first_mode) out += ",";
      first_mode = false;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "\"%s\":%d",
                    state.modes()->label(m).c_str(), occ.count(m));
      out += buf;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "},\"re\":%.17g,\"im\":%.17g}",
                  amp.real(), amp.imag());
    out += buf;
  }
  out += "]";
  return out;
}

}  // namespace noon
