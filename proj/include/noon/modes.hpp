#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace noon {

/// Polarization label of an optical mode.
enum class Pol : unsigned char { H, V };

inline char pol_char(Pol p) { return p == Pol::H ? 'H' : 'V'; }

/// Identifies one bosonic mode: a spatial path plus a polarization.
struct ModeId {
  std::string path;
  Pol pol;

  friend bool operator==(const ModeId&, const ModeId&) = default;
  friend auto operator<=>(const ModeId& a, const ModeId& b) {
    if (auto c = a.path <=> b.path; c != 0) return c;
    return a.pol <=> b.pol;
  }
};

/// The declared mode universe of one experiment. Fixed after construction;
/// every state and transform refers to modes by index into this set.
/// Using a mode that was never declared is a hard error, not a silent
/// identity.
class ModeSet {
 public:
  ModeSet() = default;

  explicit ModeSet(const std::vector<ModeId>& modes) {
    for (const auto& m : modes) declare(m);
  }

  /// Declares a (path, polarization) mode. Re-declaring is an error.
  int declare(const ModeId& id) {
    if (index_.contains(id))
      throw std::invalid_argument("mode declared twice: " + label_of(id));
    int idx = static_cast<int>(modes_.size());
    modes_.push_back(id);
    index_.emplace(id, idx);
    return idx;
  }

  /// Declares both polarizations of a spatial path.
  void declare_path(const std::string& path) {
    declare({path, Pol::H});
    declare({path, Pol::V});
  }

  /// Declares a single-mode loss channel (polarization label is nominal).
  int declare_loss(const std::string& path) { return declare({path, Pol::H}); }

  int index(const ModeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end())
      throw std::invalid_argument("undeclared mode: " + label_of(id));
    return it->second;
  }

  int index(const std::string& path, Pol pol) const {
    return index({path, pol});
  }

  bool has(const ModeId& id) const { return index_.contains(id); }
  bool has_path(const std::string& path) const {
    return has({path, Pol::H}) || has({path, Pol::V});
  }

  int size() const { return static_cast<int>(modes_.size()); }

  const ModeId& id(int idx) const { return modes_.at(idx); }

  std::string label(int idx) const { return label_of(modes_.at(idx)); }

  static std::string label_of(const ModeId& id) {
    return id.path + pol_char(id.pol);
  }

  /// Universes are interchangeable when they declare the same modes in the
  /// same order.
  friend bool operator==(const ModeSet& a, const ModeSet& b) {
    return a.modes_ == b.modes_;
  }

 private:
  std::vector<ModeId> modes_;
  std::map<ModeId, int> index_;
};

using ModeSetPtr = std::shared_ptr<const ModeSet>;

inline ModeSetPtr make_modeset(const std::vector<ModeId>& modes) {
  return std::make_shared<const ModeSet>(modes);
}

inline bool same_universe(const ModeSetPtr& a, const ModeSetPtr& b) {
  return a == b || (a && b && *a == *b);
}

}  // namespace noon
