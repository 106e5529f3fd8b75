#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <vector>

#include "noon/modes.hpp"

namespace noon {

/// Photon counts per declared mode (dense over the mode universe).
/// Absent modes mean zero by construction.
class Occupation {
 public:
  Occupation() = default;
  explicit Occupation(int n_modes) : counts_(n_modes, 0) {}

  int count(int mode) const { return counts_[mode]; }
  void set(int mode, int n) { counts_[mode] = static_cast<std::uint8_t>(n); }
  void add(int mode, int n) {
    counts_[mode] = static_cast<std::uint8_t>(counts_[mode] + n);
  }

  int total() const {
    return std::accumulate(counts_.begin(), counts_.end(), 0);
  }

  int n_modes() const { return static_cast<int>(counts_.size()); }

  friend bool operator==(const Occupation&, const Occupation&) = default;
  friend auto operator<=>(const Occupation& a, const Occupation& b) {
    return a.counts_ <=> b.counts_;
  }

 private:
  std::vector<std::uint8_t> counts_;
};

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// Product of n! over all modes of an occupation.
inline double occupation_factorial(const Occupation& occ) {
  double f = 1.0;
  for (int m = 0; m < occ.n_modes(); ++m) f *= factorial(occ.count(m));
  return f;
}

}  // namespace noon
