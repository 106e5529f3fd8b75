#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "noon/config.hpp"
#include "noon/detection.hpp"
#include "noon/elements.hpp"
#include "noon/fock_state.hpp"
#include "noon/mode_transform.hpp"
#include "noon/sampling.hpp"
#include "noon/scan_record.hpp"
#include "noon/spatial.hpp"

namespace noon {

/// An experiment bound from configuration: the declared mode universe, the
/// preparation chain, and the detector array. Provides the per-event
/// detection probabilities the scan runners turn into rates.
class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    modes_ = build_universe(cfg_);
    for (const auto& e : cfg_.elements)
      prep_chain_.push_back(build_element(modes_, e));
    prepared_two_pair_ = apply_chain(prep_chain_, two_pair_source());
    prepared_single_pair_ = apply_chain(prep_chain_, single_pair_source());
  }

  static constexpr const char* kTemporalLossPath = "_pol_loss";
  static constexpr const char* kArmA = "a";
  static constexpr const char* kArmB = "b";

  const ExperimentConfig& config() const { return cfg_; }
  const ModeSetPtr& modes() const { return modes_; }

  /// Two photon pairs in one spatial mode: (1/2) aH^†2 aV^†2 |0>.
  FockState two_pair_source() const {
    CreationMonomial mono;
    mono.coefficient = 0.5;
    mono.powers = {{modes_->index(cfg_.prep_path, Pol::H), 2},
                   {modes_->index(cfg_.prep_path, Pol::V), 2}};
    return state_from_monomials(modes_, {mono});
  }

  /// One photon pair: aH^† aV^† |0> (the heralded single-photon reference).
  FockState single_pair_source() const {
    CreationMonomial mono;
    mono.powers = {{modes_->index(cfg_.prep_path, Pol::H), 1},
                   {modes_->index(cfg_.prep_path, Pol::V), 1}};
    return state_from_monomials(modes_, {mono});
  }

  FockState prepare(const FockState& source) const {
    return apply_chain(prep_chain_, source);
  }

  const FockState& prepared_two_pair() const { return prepared_two_pair_; }
  const FockState& prepared_single_pair() const {
    return prepared_single_pair_;
  }

  std::vector<int> herald_modes() const {
    return {modes_->index(cfg_.herald_path, Pol::H),
            modes_->index(cfg_.herald_path, Pol::V)};
  }

  /// The fiber-coupled mode after the temporal analysis stage.
  int detected_mode() const {
    return modes_->index(cfg_.signal_path, Pol::H);
  }

  DetectorSpec detector_spec() const { return detector_spec(cfg_.eta); }

  DetectorSpec detector_spec(double eta) const {
    const std::string& r = cfg_.routing;
    if (r == "cascade") return DetectorSpec::cascade(cfg_.detector_names, eta);
    if (r == "symmetric")
      return DetectorSpec::symmetric(cfg_.detector_names, eta);
    if (r.rfind("tree:", 0) == 0) {
      auto spec =
          DetectorSpec::from_tree(SplitterTree::parse(r.substr(5)), eta);
      std::vector<std::string> leaf_names;
      for (const auto& d : spec.detectors) leaf_names.push_back(d.id);
      std::vector<std::string> want = cfg_.detector_names;
      std::sort(leaf_names.begin(), leaf_names.end());
      std::sort(want.begin(), want.end());
      if (leaf_names != want)
        throw ConfigError("splitter tree leaves do not match detector names");
      return spec;
    }
    throw ConfigError("unknown routing '" + r + "'");
  }

  /// Temporal analysis stage: a relative phase chi between the circular
  /// polarization components, introduced by a half-wave plate rotated by
  /// chi/4, followed by a horizontal polarizer into the fiber.
  FockState temporal_stage(const FockState& state, double chi) const {
    FockState s = apply_transform(
        elements::hwp(modes_, cfg_.signal_path, 0.25 * chi), state);
    return apply_transform(
        elements::polarizer(modes_, cfg_.signal_path, kTemporalLossPath), s);
  }

  StateEnsemble temporal_stage(const StateEnsemble& ens, double chi) const {
    StateEnsemble out;
    for (const auto& m : ens.members)
      out.members.push_back({m.weight, temporal_stage(m.state, chi)});
    return out;
  }

  /// Branch phase flips used by the dephasing model. An N-photon circular
  /// N00N state acquires a relative branch phase of pi under a polarization
  /// rotation by pi/(2N).
  ModeTransform noon_branch_flip() const {
    return elements::rotator(modes_, cfg_.signal_path,
                             std::numbers::pi / 6.0);
  }
  ModeTransform single_branch_flip() const {
    return elements::rotator(modes_, cfg_.signal_path,
                             std::numbers::pi / 2.0);
  }

  /// P(SPC2 & SPC3 & SPC4 | two-pair event) at phase chi, trigger ignored.
  double unheralded_threefold(double chi) const {
    return unheralded_threefold(chi, detector_spec());
  }
  double unheralded_threefold(double chi, const DetectorSpec& spec) const {
    FockState s = temporal_stage(prepared_two_pair_, chi);
    return pattern_rate(StateEnsemble::pure(s), detected_mode(), spec,
                        ClickPattern::all_of(spec));
  }

  /// P(trigger & SPC2 & SPC3 & SPC4 | two-pair event): the genuine
  /// (accidental-free) N00N coincidence with dephasing applied.
  double noon_fourfold(double chi) const {
    StateEnsemble ens =
        dephasing_noise(prepared_two_pair_, cfg_.noise.v0, noon_branch_flip());
    DetectorSpec spec = detector_spec();
    return heralded_rate(temporal_stage(ens, chi), herald_modes(),
                         cfg_.eta_trigger, detected_mode(), spec,
                         ClickPattern::all_of(spec));
  }

  /// P(trigger & SPC2 | single-pair event): the heralded single-photon
  /// fringe; SPC2 is the first configured detector.
  double single_twofold(double chi) const {
    StateEnsemble ens = dephasing_noise(
        prepared_single_pair_, cfg_.noise.v0_single, single_branch_flip());
    DetectorSpec spec = detector_spec();
    return heralded_rate(temporal_stage(ens, chi), herald_modes(),
                         cfg_.eta_trigger, detected_mode(), spec,
                         ClickPattern::of(spec, {cfg_.detector_names[0]}));
  }

  /// Spatial fringe shape at fiber position x (meters) for the N-photon
  /// heralded state, with the configured dephasing mixed in.
  double spatial_fringe_shape(double x, int n_photons) const {
    double v = n_photons == 1 ? cfg_.noise.v0_single : cfg_.noise.v0;
    const auto& g = cfg_.geometry;
    return v * noon_spatial_rate(x, g, n_photons) +
           (1.0 - v) * (profile_rate(x, g, n_photons, Arm::A) +
                        profile_rate(x, g, n_photons, Arm::B));
  }

  /// Single-arm spatial profile shape (arm b blocked).
  double spatial_profile_shape(double x, int n_photons) const {
    return profile_rate(x, cfg_.geometry, n_photons, Arm::A);
  }

 private:
  static ModeSetPtr build_universe(const ExperimentConfig& cfg) {
    std::vector<std::string> paths;
    std::vector<std::string> loss_paths;
    auto add = [&](const std::string& p, bool loss) {
      for (const auto& q : paths)
        if (q == p) return;
      for (const auto& q : loss_paths)
        if (q == p) return;
      (loss ? loss_paths : paths).push_back(p);
    };
    add(cfg.prep_path, false);
    add(cfg.herald_path, false);
    add(cfg.signal_path, false);
    add(kArmA, false);
    add(kArmB, false);
    for (const auto& e : cfg.elements) {
      if (e.kind == ElementSpec::Kind::Polarizer) {
        add(e.paths[0], false);
        add(e.paths[1], true);
      } else {
        for (const auto& p : e.paths) add(p, false);
      }
    }
    auto set = std::make_shared<ModeSet>();
    for (const auto& p : paths) set->declare_path(p);
    for (const auto& p : loss_paths) set->declare_loss(p);
    set->declare_loss(kTemporalLossPath);
    return set;
  }

  ExperimentConfig cfg_;
  ModeSetPtr modes_;
  std::vector<ModeTransform> prep_chain_;
  FockState prepared_two_pair_{nullptr_state()};
  FockState prepared_single_pair_{nullptr_state()};

  // FockState has no default constructor; delay-init with a 1-mode dummy.
  static FockState nullptr_state() {
    static ModeSetPtr dummy = make_modeset({{"_", Pol::H}});
    return FockState::vacuum(dummy);
  }
};

/// Evenly spaced scan grid, endpoints included.
inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i)
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return xs;
}

namespace scandetail {

inline void echo_config(ScanRecord& rec, const ExperimentConfig& cfg,
                        std::uint64_t seed) {
  rec.add_meta("seed", std::to_string(seed));
  rec.add_meta("prep_path", cfg.prep_path);
  rec.add_meta("herald_path", cfg.herald_path);
  rec.add_meta("signal_path", cfg.signal_path);
  std::string names;
  for (const auto& n : cfg.detector_names)
    names += (names.empty() ? "" : ",") + n;
  rec.add_meta("detectors", names);
  rec.add_meta("eta", cfg.eta);
  rec.add_meta("eta_trigger", cfg.eta_trigger);
  rec.add_meta("routing", cfg.routing);
  rec.add_meta("beam_spacing_mm", cfg.geometry.beam_spacing * 1e3);
  rec.add_meta("beam_diameter_mm", cfg.geometry.beam_diameter * 1e3);
  rec.add_meta("wavelength_nm", cfg.geometry.wavelength * 1e9);
  rec.add_meta("focal_length_mm", cfg.geometry.focal_length * 1e3);
  rec.add_meta("mfd_um", cfg.geometry.mfd * 1e6);
  rec.add_meta("rel_phase_rad", cfg.geometry.rel_phase);
  rec.add_meta("v0", cfg.noise.v0);
  rec.add_meta("v0_single", cfg.noise.v0_single);
  rec.add_meta("false_trigger", cfg.noise.false_trigger);
}

/// Scales a shape so its grid maximum equals the configured peak rate.
inline double peak_scale(const std::vector<double>& shape, double peak_rate) {
  double mx = 0.0;
  for (double v : shape) mx = std::max(mx, v);
  return mx > 0.0 ? peak_rate / mx : 0.0;
}

inline ScanRecord make_record(const std::string& name,
                              const std::string& setting_label,
                              const ExperimentConfig& cfg, std::uint64_t seed,
                              const std::vector<double>& settings,
                              const std::vector<double>& rates,
                              double integration_time) {
  ScanRecord rec;
  rec.name = name;
  rec.setting_label = setting_label;
  echo_config(rec, cfg, seed);
  rec.add_meta("integration_time_s", integration_time);
  for (std::size_t i = 0; i < settings.size(); ++i) {
    ScanRecord::Row row;
    row.setting = settings[i];
    row.expected_rate = rates[i];
    row.integration_time = integration_time;
    auto rng = substream(seed, name, i);
    row.sampled_counts = sample_poisson(rng, rates[i] * integration_time);
    rec.rows.push_back(row);
  }
  return rec;
}

}  // namespace scandetail

/// The four temporal fringe records: heralded single-photon 2-fold,
/// unheralded 3-fold, raw heralded 4-fold (with accidentals), and the
/// accidental-free 4-fold.
struct TemporalScanResult {
  ScanRecord twofold;
  ScanRecord threefold;
  ScanRecord fourfold_raw;
  ScanRecord fourfold_subtracted;
};

inline TemporalScanResult run_temporal_scan(const ExperimentConfig& cfg,
                                            std::uint64_t seed) {
  Experiment exp(cfg);
  const auto& sc = cfg.scan;
  std::vector<double> chis = linspace(sc.chi_min_rad, sc.chi_max_rad,
                                      sc.chi_points);

  std::vector<double> two(chis.size()), three(chis.size()), noon(chis.size());
  for (std::size_t i = 0; i < chis.size(); ++i) {
    two[i] = exp.single_twofold(chis[i]);
    three[i] = exp.unheralded_threefold(chis[i]);
    noon[i] = exp.noon_fourfold(chis[i]);
  }

  double s2 = scandetail::peak_scale(two, sc.peak_2fold_per_s);
  double s3 = scandetail::peak_scale(three, sc.peak_3fold_per_s);
  double s4 = scandetail::peak_scale(noon, sc.peak_4fold_per_s);
  std::vector<double> raw(chis.size()), sub(chis.size());
  for (std::size_t i = 0; i < chis.size(); ++i) {
    two[i] *= s2;
    three[i] *= s3;
    sub[i] = noon[i] * s4;
    raw[i] = AccidentalModel::combine(sub[i], three[i],
                                      cfg.noise.false_trigger);
  }

  TemporalScanResult out;
  out.twofold = scandetail::make_record("temporal_twofold", "chi_rad", cfg,
                                        seed, chis, two, sc.temporal_time_s);
  out.threefold = scandetail::make_record("temporal_threefold", "chi_rad", cfg,
                                          seed, chis, three,
                                          sc.temporal_time_s);
  out.fourfold_raw =
      scandetail::make_record("temporal_fourfold_raw", "chi_rad", cfg, seed,
                              chis, raw, sc.temporal_time_s);
  // The subtracted panel is sampled as the accidental-free measurement a
  // trigger-operated shutter would give; subtraction on rates is exact.
  out.fourfold_subtracted =
      scandetail::make_record("temporal_fourfold_subtracted", "chi_rad", cfg,
                              seed, chis, sub, sc.temporal_time_s);
  return out;
}

/// Spatial fringes for the heralded single-photon and three-photon states,
/// plus a plot-ready noiseless rate table over the same grid.
struct SpatialScanResult {
  ScanRecord single;
  ScanRecord noon;
  struct RateRow {
    double x_um;
    double rate_n1;
    double rate_n3;
    double profile_n1;
    double profile_n3;
  };
  std::vector<RateRow> rates;
};

inline SpatialScanResult run_spatial_scan(const ExperimentConfig& cfg,
                                          std::uint64_t seed) {
  Experiment exp(cfg);
  const auto& sc = cfg.scan;
  std::vector<double> xs_um = linspace(sc.x_min_um, sc.x_max_um, sc.x_points);

  std::vector<double> n1(xs_um.size()), n3(xs_um.size());
  std::vector<double> p1(xs_um.size()), p3(xs_um.size());
  for (std::size_t i = 0; i < xs_um.size(); ++i) {
    double x = xs_um[i] * 1e-6;
    n1[i] = exp.spatial_fringe_shape(x, 1);
    n3[i] = exp.spatial_fringe_shape(x, 3);
    p1[i] = exp.spatial_profile_shape(x, 1);
    p3[i] = exp.spatial_profile_shape(x, 3);
  }
  double s1 = scandetail::peak_scale(n1, sc.peak_2fold_per_s);
  double s3 = scandetail::peak_scale(n3, sc.peak_4fold_per_s);
  double q1 = scandetail::peak_scale(p1, sc.peak_2fold_per_s);
  double q3 = scandetail::peak_scale(p3, sc.peak_4fold_per_s);

  SpatialScanResult out;
  for (std::size_t i = 0; i < xs_um.size(); ++i) {
    n1[i] *= s1;
    n3[i] *= s3;
    out.rates.push_back(
        {xs_um[i], n1[i], n3[i], p1[i] * q1, p3[i] * q3});
  }
  out.single = scandetail::make_record("spatial_single", "x_um", cfg, seed,
                                       xs_um, n1, sc.spatial_time_s);
  out.noon = scandetail::make_record("spatial_noon", "x_um", cfg, seed, xs_um,
                                     n3, sc.spatial_time_s);
  return out;
}

inline void write_rates_csv(const SpatialScanResult& res, std::ostream& out) {
  out << "x_um,rate_N1,rate_N3,profile_N1,profile_N3\n";
  for (const auto& r : res.rates)
    out << format_sig12(r.x_um) << "," << format_sig12(r.rate_n1) << ","
        << format_sig12(r.rate_n3) << "," << format_sig12(r.profile_n1) << ","
        << format_sig12(r.profile_n3) << "\n";
}

/// Single-arm beam profiles at the focus (mode b blocked), N = 1 and N = 3.
struct ProfileScanResult {
  ScanRecord single;
  ScanRecord noon;
};

inline ProfileScanResult run_profile_scan(const ExperimentConfig& cfg,
                                          std::uint64_t seed) {
  Experiment exp(cfg);
  const auto& sc = cfg.scan;
  std::vector<double> xs_um = linspace(sc.x_min_um, sc.x_max_um, sc.x_points);

  std::vector<double> p1(xs_um.size()), p3(xs_um.size());
  for (std::size_t i = 0; i < xs_um.size(); ++i) {
    double x = xs_um[i] * 1e-6;
    p1[i] = exp.spatial_profile_shape(x, 1);
    p3[i] = exp.spatial_profile_shape(x, 3);
  }
  double s1 = scandetail::peak_scale(p1, sc.peak_2fold_per_s);
  double s3 = scandetail::peak_scale(p3, sc.peak_4fold_per_s);
  for (std::size_t i = 0; i < xs_um.size(); ++i) {
    p1[i] *= s1;
    p3[i] *= s3;
  }

  ProfileScanResult out;
  out.single = scandetail::make_record("profile_single", "x_um", cfg, seed,
                                       xs_um, p1, sc.profile_time_s);
  out.noon = scandetail::make_record("profile_noon", "x_um", cfg, seed, xs_um,
                                     p3, sc.profile_time_s);
  return out;
}

}  // namespace noon
