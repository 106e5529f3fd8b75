#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "noon/fock_state.hpp"
#include "noon/mode_transform.hpp"

namespace noon {

/// One threshold single-photon counter: clicks on >= 1 detected photon,
/// with per-photon efficiency eta.
struct Detector {
  std::string id;
  double eta = 1.0;
};

/// Binary tree of 3 dB fiber couplers used to multiplex one fiber onto
/// several detectors. A leaf is a detector id; each node splits 50/50, so
/// the derived routing probabilities are dyadic.
struct SplitterTree {
  // Leaves in order, with the number of couplers above each leaf.
  std::vector<std::pair<std::string, int>> leaves;

  /// Parses expressions like "(SPC2,(SPC3,SPC4))". A bare name is a tree
  /// with a single detector.
  static SplitterTree parse(const std::string& expr) {
    SplitterTree tree;
    std::size_t pos = 0;
    parse_node(expr, pos, 0, tree);
    skip_spaces(expr, pos);
    if (pos != expr.size())
      throw std::invalid_argument("trailing characters in splitter tree: " +
                                  expr);
    return tree;
  }

  /// Routing probability per leaf: (1/2)^depth. Dyadic, sums to 1 exactly.
  std::vector<double> routing() const {
    std::vector<double> q;
    q.reserve(leaves.size());
    for (const auto& [id, depth] : leaves) q.push_back(std::ldexp(1.0, -depth));
    return q;
  }

 private:
  static void skip_spaces(const std::string& s, std::size_t& pos) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
  }

  static void parse_node(const std::string& s, std::size_t& pos, int depth,
                         SplitterTree& tree) {
    skip_spaces(s, pos);
    if (pos >= s.size())
      throw std::invalid_argument("unexpected end of splitter tree");
    if (s[pos] == '(') {
      ++pos;
      parse_node(s, pos, depth + 1, tree);
      skip_spaces(s, pos);
      if (pos >= s.size() || s[pos] != ',')
        throw std::invalid_argument("splitter tree node needs two branches");
      ++pos;
      parse_node(s, pos, depth + 1, tree);
      skip_spaces(s, pos);
      if (pos >= s.size() || s[pos] != ')')
        throw std::invalid_argument("unbalanced parenthesis in splitter tree");
      ++pos;
    } else {
      std::size_t start = pos;
      while (pos < s.size() && s[pos] != ',' && s[pos] != ')' && s[pos] != '(')
        ++pos;
      std::string id = s.substr(start, pos - start);
      while (!id.empty() && id.back() == ' ') id.pop_back();
      if (id.empty())
        throw std::invalid_argument("empty detector name in splitter tree");
      tree.leaves.emplace_back(id, depth);
    }
  }
};

/// Detector array behind a splitter tree: per-detector efficiencies plus the
/// routing distribution q (probability that a photon in the fiber reaches a
/// given detector).
struct DetectorSpec {
  std::vector<Detector> detectors;
  std::vector<double> routing;  // aligned with detectors, sums to 1

  /// Cascade of two couplers: q = (1/2, 1/4, 1/4) for three detectors
  /// (the minimal tree), generally (1/2, 1/4, ..., 2^-(n-1), 2^-(n-1)).
  static DetectorSpec cascade(const std::vector<std::string>& ids,
                              double eta) {
    if (ids.empty()) throw std::invalid_argument("no detectors");
    std::string expr = ids.back();
    for (auto it = ids.rbegin() + 1; it != ids.rend(); ++it)
      expr = "(" + *it + "," + expr + ")";
    return from_tree(SplitterTree::parse(expr), eta);
  }

  /// Idealized symmetric router: q = (1/n, ..., 1/n). Not a physical 50/50
  /// tree for n != 2^k, but useful for comparison.
  static DetectorSpec symmetric(const std::vector<std::string>& ids,
                                double eta) {
    if (ids.empty()) throw std::invalid_argument("no detectors");
    DetectorSpec spec;
    double q = 1.0 / static_cast<double>(ids.size());
    for (const auto& id : ids) {
      spec.detectors.push_back({id, eta});
      spec.routing.push_back(q);
    }
    return spec;
  }

  static DetectorSpec from_tree(const SplitterTree& tree, double eta) {
    DetectorSpec spec;
    spec.routing = tree.routing();
    for (const auto& [id, depth] : tree.leaves)
      spec.detectors.push_back({id, eta});
    return spec;
  }

  int index_of(const std::string& id) const {
    for (std::size_t i = 0; i < detectors.size(); ++i)
      if (detectors[i].id == id) return static_cast<int>(i);
    throw std::invalid_argument("unknown detector: " + id);
  }

  int size() const { return static_cast<int>(detectors.size()); }
};

/// Set of detectors required to click simultaneously.
struct ClickPattern {
  std::vector<int> indices;

  static ClickPattern all_of(const DetectorSpec& spec) {
    ClickPattern p;
    for (int i = 0; i < spec.size(); ++i) p.indices.push_back(i);
    return p;
  }

  static ClickPattern of(const DetectorSpec& spec,
                         const std::vector<std::string>& ids) {
    ClickPattern p;
    for (const auto& id : ids) p.indices.push_back(spec.index_of(id));
    return p;
  }
};

/// Probability that every detector in `pattern` clicks when n photons enter
/// the splitter tree, by inclusion-exclusion over per-photon miss
/// probabilities:
///   P = sum_{S subset pattern} (-1)^|S| (1 - sum_{i in S} eta_i q_i)^n.
inline double click_probability_given_n(int n, const DetectorSpec& spec,
                                        const ClickPattern& pattern) {
  if (n < 0) throw std::invalid_argument("negative photon number");
  for (int i : pattern.indices)
    if (i < 0 || i >= spec.size())
      throw std::invalid_argument("pattern references unknown detector");
  const int k = static_cast<int>(pattern.indices.size());
  double p = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    double reach = 0.0;
    int bits = 0;
    for (int b = 0; b < k; ++b) {
      if (mask & (1u << b)) {
        int i = pattern.indices[b];
        reach += spec.detectors[i].eta * spec.routing[i];
        ++bits;
      }
    }
    p += ((bits % 2) ? -1.0 : 1.0) * std::pow(1.0 - reach, n);
  }
  // clamp tiny negative round-off
  return p < 0.0 && p > -1e-15 ? 0.0 : p;
}

/// Threshold click probability of a single detector with efficiency eta
/// seeing n photons.
inline double threshold_click_probability(int n, double eta) {
  return 1.0 - std::pow(1.0 - eta, n);
}

/// Weighted ensemble of pure states; weights sum to <= 1 (the remainder is
/// probability already routed into discarded branches). Stands in for
/// mixed states wherever detection depends only on number distributions.
struct StateEnsemble {
  struct Member {
    double weight;
    FockState state;
  };
  std::vector<Member> members;

  static StateEnsemble pure(FockState state) {
    return StateEnsemble{{{1.0, std::move(state)}}};
  }

  double total_weight() const {
    double w = 0.0;
    for (const auto& m : members) w += m.weight;
    return w;
  }
};

/// Phase noise between the two branches of a N00N-type superposition:
/// keeps the coherent state with weight V0 and mixes in the branch-diagonal
/// remainder, realized as an equal mixture of the state and its
/// branch-phase-flipped copy. The fitted fringe visibility of an ideal
/// detector then equals V0.
///
/// `branch_flip` must be the unitary that advances the relative phase of
/// the two branches by pi (e.g. a pi/N phase on one arm for an N-photon
/// path N00N state, or a pi/(2N) polarization rotation for the circular
/// basis one).
inline StateEnsemble dephasing_noise(const FockState& state, double v0,
                                     const ModeTransform& branch_flip) {
  if (v0 < 0.0 || v0 > 1.0)
    throw std::invalid_argument("visibility parameter must be in [0, 1]");
  StateEnsemble ens;
  ens.members.push_back({0.5 * (1.0 + v0), state});
  if (v0 < 1.0)
    ens.members.push_back(
        {0.5 * (1.0 - v0), apply_transform(branch_flip, state)});
  return ens;
}

/// Rate (relative probability per pulse) that `pattern` clicks, for photons
/// of the detected mode routed through the splitter tree.
inline double pattern_rate(const StateEnsemble& ensemble, int detected_mode,
                           const DetectorSpec& spec,
                           const ClickPattern& pattern) {
  double rate = 0.0;
  for (const auto& member : ensemble.members) {
    auto dist = total_number_distribution(member.state, {detected_mode});
    double r = 0.0;
    for (const auto& [n, p] : dist)
      r += p * click_probability_given_n(n, spec, pattern);
    rate += member.weight * r;
  }
  return rate;
}

/// Coincidence of a threshold trigger on the herald modes (efficiency
/// eta_trigger) with `pattern` on the detected mode: the heralded rate.
/// Computed from the joint number distribution, so background terms without
/// herald photons contribute zero automatically.
inline double heralded_rate(const StateEnsemble& ensemble,
                            const std::vector<int>& herald_modes,
                            double eta_trigger, int detected_mode,
                            const DetectorSpec& spec,
                            const ClickPattern& pattern) {
  double rate = 0.0;
  for (const auto& member : ensemble.members) {
    std::vector<int> modes = herald_modes;
    modes.push_back(detected_mode);
    auto dist = number_distribution(member.state, modes);
    double r = 0.0;
    for (const auto& [counts, p] : dist) {
      int n_herald = 0;
      for (std::size_t i = 0; i + 1 < counts.size(); ++i)
        n_herald += counts[i];
      int n_detected = counts.back();
      r += p * threshold_click_probability(n_herald, eta_trigger) *
           click_probability_given_n(n_detected, spec, pattern);
    }
    rate += member.weight * r;
  }
  return rate;
}

/// Accidental coincidences: an uncorrelated trigger click (probability
/// p_false per pulse) coinciding with an unheralded detection.
struct AccidentalModel {
  /// total observed rate = genuine heralded rate + false-trigger background.
  static double combine(double rate_noon, double rate_background,
                        double p_false_trigger) {
    check(rate_noon, rate_background, p_false_trigger);
    return rate_noon + p_false_trigger * rate_background;
  }

  /// Inverse of combine: recovers the genuine rate from the observed total.
  static double subtract(double total, double rate_background,
                         double p_false_trigger) {
    check(total, rate_background, p_false_trigger);
    return total - p_false_trigger * rate_background;
  }

 private:
  static void check(double a, double b, double p) {
    if (a < 0.0 || b < 0.0)
      throw std::invalid_argument("rates must be non-negative");
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("false-trigger probability must be in [0,1]");
  }
};

}  // namespace noon
