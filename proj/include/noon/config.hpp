#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "noon/elements.hpp"
#include "noon/spatial.hpp"

namespace noon {

/// Configuration problem with enough context for a line/field diagnostic.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg
                                    : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Minimal INI document: [section] headers, key = value entries, '#' or ';'
/// comments. Repeated keys are kept in order (used for element chains).
class IniDoc {
 public:
  struct Entry {
    std::string key;
    std::string value;
    int line;
  };

  static IniDoc parse(std::istream& in) {
    IniDoc doc;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string s = strip_comment(line);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw ConfigError("unterminated section header", line_no);
        section = trim(s.substr(1, s.size() - 2));
        if (section.empty()) throw ConfigError("empty section name", line_no);
        doc.sections_[section];  // remember even if empty
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected key = value", line_no);
      std::string key = trim(s.substr(0, eq));
      std::string value = trim(s.substr(eq + 1));
      if (key.empty()) throw ConfigError("empty key", line_no);
      if (section.empty())
        throw ConfigError("entry before any [section]", line_no);
      doc.sections_[section].push_back({key, value, line_no});
    }
    return doc;
  }

  static IniDoc parse_string(const std::string& text) {
    std::istringstream ss(text);
    return parse(ss);
  }

  static IniDoc parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
  }

  bool has_section(const std::string& section) const {
    return sections_.contains(section);
  }

  std::vector<std::string> section_names() const {
    std::vector<std::string> names;
    for (const auto& [k, v] : sections_) names.push_back(k);
    return names;
  }

  const std::vector<Entry>& entries(const std::string& section) const {
    static const std::vector<Entry> empty;
    auto it = sections_.find(section);
    return it == sections_.end() ? empty : it->second;
  }

  std::optional<Entry> find(const std::string& section,
                            const std::string& key) const {
    std::optional<Entry> found;
    for (const auto& e : entries(section))
      if (e.key == key) found = e;  // last one wins
    return found;
  }

 private:
  static std::string strip_comment(const std::string& s) {
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] == '#' || s[i] == ';') return s.substr(0, i);
    return s;
  }

  static std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::vector<Entry>> sections_;
};

/// One entry of the ordered preparation chain.
struct ElementSpec {
  enum class Kind {
    Hwp,
    Qwp,
    Pbs,
    Ppbs,
    Beamsplitter,
    Polarizer,
    Phase,
    ModeConverter,
  };

  Kind kind;
  std::vector<std::string> paths;  // meaning depends on kind
  double angle_rad = 0.0;          // wave plates
  double value = 0.0;              // ppbs r_V, beamsplitter r, phase phi
  int line = 0;

  /// Parses one chain entry, e.g.
  ///   "hwp src 22.5"          (angle in degrees)
  ///   "qwp 2 45"
  ///   "ppbs src 1 2 0.81649658092772603"
  ///   "bs 1 2 0.70710678118654752"
  ///   "pbs src t r"
  ///   "polarizer 2 loss0"
  ///   "phase b 0.5"           (radians)
  ///   "mode_converter 2 a b"
  static ElementSpec parse(const std::string& text, int line) {
    std::istringstream ss(text);
    std::string word;
    std::vector<std::string> tokens;
    while (ss >> word) tokens.push_back(word);
    if (tokens.empty()) throw ConfigError("empty element entry", line);

    auto need = [&](std::size_t n, const char* usage) {
      if (tokens.size() != n)
        throw ConfigError("element '" + tokens[0] + "' expects: " + usage,
                          line);
    };
    auto num = [&](const std::string& t) {
      char* end = nullptr;
      double v = std::strtod(t.c_str(), &end);
      if (end == t.c_str() || *end != '\0')
        throw ConfigError("not a number: '" + t + "'", line);
      return v;
    };

    ElementSpec e;
    e.line = line;
    const std::string& k = tokens[0];
    if (k == "hwp" || k == "qwp") {
      need(3, "<kind> <path> <angle_deg>");
      e.kind = (k == "hwp") ? Kind::Hwp : Kind::Qwp;
      e.paths = {tokens[1]};
      e.angle_rad = deg_to_rad(num(tokens[2]));
    } else if (k == "ppbs") {
      need(5, "ppbs <in> <reflected> <transmitted> <r_v>");
      e.kind = Kind::Ppbs;
      e.paths = {tokens[1], tokens[2], tokens[3]};
      e.value = num(tokens[4]);
      if (e.value < 0.0 || e.value > 1.0)
        throw ConfigError("ppbs r_v must be in [0, 1]", line);
    } else if (k == "bs") {
      need(4, "bs <path1> <path2> <r>");
      e.kind = Kind::Beamsplitter;
      e.paths = {tokens[1], tokens[2]};
      e.value = num(tokens[3]);
    } else if (k == "pbs") {
      need(4, "pbs <in> <transmitted> <reflected>");
      e.kind = Kind::Pbs;
      e.paths = {tokens[1], tokens[2], tokens[3]};
    } else if (k == "polarizer") {
      need(3, "polarizer <path> <loss_path>");
      e.kind = Kind::Polarizer;
      e.paths = {tokens[1], tokens[2]};
    } else if (k == "phase") {
      need(3, "phase <path> <phi_rad>");
      e.kind = Kind::Phase;
      e.paths = {tokens[1]};
      e.value = num(tokens[2]);
    } else if (k == "mode_converter") {
      need(4, "mode_converter <in> <arm_a> <arm_b>");
      e.kind = Kind::ModeConverter;
      e.paths = {tokens[1], tokens[2], tokens[3]};
    } else {
      throw ConfigError("unknown element kind '" + k + "'", line);
    }
    return e;
  }
};

/// Builds the transform for one chain entry over a declared universe.
inline ModeTransform build_element(const ModeSetPtr& modes,
                                   const ElementSpec& e) {
  using Kind = ElementSpec::Kind;
  switch (e.kind) {
    case Kind::Hwp:
      return elements::hwp(modes, e.paths[0], e.angle_rad);
    case Kind::Qwp:
      return elements::qwp(modes, e.paths[0], e.angle_rad);
    case Kind::Ppbs:
      return elements::ppbs(modes, e.paths[0], e.paths[1], e.paths[2],
                            e.value);
    case Kind::Beamsplitter:
      return elements::beamsplitter(modes, e.paths[0], e.paths[1], e.value);
    case Kind::Pbs:
      return elements::pbs(modes, e.paths[0], e.paths[1], e.paths[2]);
    case Kind::Polarizer:
      return elements::polarizer(modes, e.paths[0], e.paths[1]);
    case Kind::Phase:
      return elements::phase(modes, e.paths[0], e.value);
    case Kind::ModeConverter:
      return elements::mode_converter(modes, e.paths[0], e.paths[1],
                                      e.paths[2]);
  }
  throw ConfigError("unreachable element kind");
}

/// Scan grids, integration times and per-panel peak rates. Absolute count
/// rates are not derivable from first principles here (pump power to pair
/// rate is a property of the source), so each panel's expected peak rate is
/// a configuration input.
struct ScanConfig {
  double chi_min_rad = 0.0;
  double chi_max_rad = 4.0 * std::numbers::pi;
  int chi_points = 97;
  double temporal_time_s = 1200.0;

  double x_min_um = -12.0;
  double x_max_um = 12.0;
  int x_points = 121;
  double spatial_time_s = 1700.0;
  double profile_time_s = 3400.0;

  double peak_2fold_per_s = 2.0;
  double peak_3fold_per_s = 0.2;
  double peak_4fold_per_s = 0.035;

  std::uint64_t seed = 42;
};

/// Noise model knobs: N00N-branch dephasing (fitted visibility of an ideal
/// detector equals v0), single-photon-fringe dephasing, and the per-pulse
/// probability of an uncorrelated trigger click.
struct NoiseConfig {
  double v0 = 1.0;
  double v0_single = 1.0;
  double false_trigger = 0.0;
};

struct OutputConfig {
  std::string prefix = "noon3";
};

/// Full experiment configuration: source paths, preparation chain, detector
/// array, double-slit geometry, scan grids and noise parameters.
struct ExperimentConfig {
  // [source]
  std::string prep_path = "src";
  std::string herald_path = "1";
  std::string signal_path = "2";

  // [elements]
  std::vector<ElementSpec> elements;

  // [detectors]
  std::vector<std::string> detector_names{"SPC2", "SPC3", "SPC4"};
  double eta = 0.6;
  double eta_trigger = 0.6;
  std::string routing = "cascade";  // cascade | symmetric | tree:<expr>

  ExperimentGeometry geometry{2.2e-3, 1.4e-3, 780e-9, 15e-3, 0.0, 0.0};
  ScanConfig scan;
  NoiseConfig noise;
  OutputConfig output;

  /// The standard preparation chain when [elements] is omitted:
  /// HWP at 22.5 degrees followed by the PPBS with r_V = sqrt(2/3).
  static std::vector<ElementSpec> default_elements() {
    ElementSpec hwp1;
    hwp1.kind = ElementSpec::Kind::Hwp;
    hwp1.paths = {"src"};
    hwp1.angle_rad = deg_to_rad(22.5);
    ElementSpec splitter;
    splitter.kind = ElementSpec::Kind::Ppbs;
    splitter.paths = {"src", "1", "2"};
    splitter.value = std::sqrt(2.0 / 3.0);
    return {hwp1, splitter};
  }

  static ExperimentConfig defaults() {
    ExperimentConfig cfg;
    cfg.elements = default_elements();
    return cfg;
  }

  static ExperimentConfig from_ini(const IniDoc& doc);
  static ExperimentConfig from_file(const std::string& path) {
    return from_ini(IniDoc::parse_file(path));
  }
  static ExperimentConfig from_string(const std::string& text) {
    return from_ini(IniDoc::parse_string(text));
  }

  void validate() const {
    geometry.validate();
    if (eta < 0.0 || eta > 1.0 || eta_trigger < 0.0 || eta_trigger > 1.0)
      throw ConfigError("detector efficiencies must be in [0, 1]");
    if (detector_names.empty()) throw ConfigError("no detectors configured");
    if (noise.v0 < 0.0 || noise.v0 > 1.0 || noise.v0_single < 0.0 ||
        noise.v0_single > 1.0)
      throw ConfigError("visibility parameters must be in [0, 1]");
    if (noise.false_trigger < 0.0 || noise.false_trigger > 1.0)
      throw ConfigError("false_trigger must be in [0, 1]");
    if (scan.chi_points < 2 || scan.x_points < 2)
      throw ConfigError("scan grids need at least 2 points");
    if (!(scan.chi_max_rad > scan.chi_min_rad) ||
        !(scan.x_max_um > scan.x_min_um))
      throw ConfigError("scan grid bounds must be strictly increasing");
    if (scan.temporal_time_s < 0.0 || scan.spatial_time_s < 0.0 ||
        scan.profile_time_s < 0.0)
      throw ConfigError("integration times must be non-negative");
    if (scan.peak_2fold_per_s < 0.0 || scan.peak_3fold_per_s < 0.0 ||
        scan.peak_4fold_per_s < 0.0)
      throw ConfigError("peak rates must be non-negative");
  }
};

namespace configdetail {

class SectionReader {
 public:
  SectionReader(const IniDoc& doc, const std::string& section)
      : doc_(doc), section_(section) {}

  std::optional<std::string> raw(const std::string& key) {
    seen_.push_back(key);
    auto e = doc_.find(section_, key);
    return e ? std::optional<std::string>(e->value) : std::nullopt;
  }

  void get(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  void get(const std::string& key, double& out) {
    if (auto v = raw(key)) out = parse_double(key, *v);
  }

  void get(const std::string& key, int& out) {
    if (auto v = raw(key)) {
      double d = parse_double(key, *v);
      out = static_cast<int>(d);
      if (out != d) fail(key, "expected an integer");
    }
  }

  void get(const std::string& key, std::uint64_t& out) {
    if (auto v = raw(key)) {
      char* end = nullptr;
      out = std::strtoull(v->c_str(), &end, 10);
      if (end == v->c_str() || *end != '\0')
        fail(key, "expected an unsigned integer");
    }
  }

  /// Scaled read for unit-suffixed keys (e.g. millimeters to meters).
  void get_scaled(const std::string& key, double scale, double& out) {
    if (auto v = raw(key)) out = scale * parse_double(key, *v);
  }

  /// Errors on any key in the section that no reader asked about.
  void reject_unknown() const {
    for (const auto& e : doc_.entries(section_)) {
      bool known = false;
      for (const auto& k : seen_)
        if (k == e.key) known = true;
      if (!known)
        throw ConfigError("unknown key '" + e.key + "' in [" + section_ + "]",
                          e.line);
    }
  }

 private:
  double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') fail(key, "expected a number");
    return d;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) {
    auto e = doc_.find(section_, key);
    throw ConfigError("[" + section_ + "] " + key + ": " + what,
                      e ? e->line : 0);
  }

  const IniDoc& doc_;
  std::string section_;
  mutable std::vector<std::string> seen_;
};

inline std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace configdetail

inline ExperimentConfig ExperimentConfig::from_ini(const IniDoc& doc) {
  static const std::vector<std::string> known_sections{
      "source", "elements", "detectors", "geometry",
      "scan",   "noise",    "output"};
  for (const auto& name : doc.section_names()) {
    bool known = false;
    for (const auto& k : known_sections)
      if (k == name) known = true;
    if (!known) throw ConfigError("unknown section [" + name + "]");
  }

  ExperimentConfig cfg;
  using configdetail::SectionReader;

  {
    SectionReader r(doc, "source");
    r.get("prep_path", cfg.prep_path);
    r.get("herald_path", cfg.herald_path);
    r.get("signal_path", cfg.signal_path);
    r.reject_unknown();
  }
  {
    for (const auto& e : doc.entries("elements")) {
      if (e.key != "element")
        throw ConfigError("unknown key '" + e.key + "' in [elements]", e.line);
      cfg.elements.push_back(ElementSpec::parse(e.value, e.line));
    }
    if (cfg.elements.empty()) cfg.elements = default_elements();
  }
  {
    SectionReader r(doc, "detectors");
    std::string names;
    r.get("names", names);
    if (!names.empty()) cfg.detector_names = configdetail::split_csv(names);
    r.get("eta", cfg.eta);
    r.get("eta_trigger", cfg.eta_trigger);
    r.get("routing", cfg.routing);
    r.reject_unknown();
  }
  {
    SectionReader r(doc, "geometry");
    r.get_scaled("beam_spacing_mm", 1e-3, cfg.geometry.beam_spacing);
    r.get_scaled("beam_diameter_mm", 1e-3, cfg.geometry.beam_diameter);
    r.get_scaled("wavelength_nm", 1e-9, cfg.geometry.wavelength);
    r.get_scaled("focal_length_mm", 1e-3, cfg.geometry.focal_length);
    r.get_scaled("mfd_um", 1e-6, cfg.geometry.mfd);
    r.get("rel_phase_rad", cfg.geometry.rel_phase);
    r.reject_unknown();
  }
  {
    SectionReader r(doc, "scan");
    r.get("chi_min_rad", cfg.scan.chi_min_rad);
    r.get("chi_max_rad", cfg.scan.chi_max_rad);
    r.get("chi_points", cfg.scan.chi_points);
    r.get("temporal_time_s", cfg.scan.temporal_time_s);
    r.get("x_min_um", cfg.scan.x_min_um);
    r.get("x_max_um", cfg.scan.x_max_um);
    r.get("x_points", cfg.scan.x_points);
    r.get("spatial_time_s", cfg.scan.spatial_time_s);
    r.get("profile_time_s", cfg.scan.profile_time_s);
    r.get("peak_2fold_per_s", cfg.scan.peak_2fold_per_s);
    r.get("peak_3fold_per_s", cfg.scan.peak_3fold_per_s);
    r.get("peak_4fold_per_s", cfg.scan.peak_4fold_per_s);
    r.get("seed", cfg.scan.seed);
    r.reject_unknown();
  }
  {
    SectionReader r(doc, "noise");
    r.get("v0", cfg.noise.v0);
    r.get("v0_single", cfg.noise.v0_single);
    r.get("false_trigger", cfg.noise.false_trigger);
    r.reject_unknown();
  }
  {
    SectionReader r(doc, "output");
    r.get("prefix", cfg.output.prefix);
    r.reject_unknown();
  }

  cfg.validate();
  return cfg;
}

}  // namespace noon
