// noonsim: heralded three-photon N00N-state double-slit simulator.
//
// Subcommands: validate, scan-temporal, scan-spatial, profile, sample,
// fit, bound. Exit codes: 0 success, 1 validation/check failure, 2 config
// or usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "noon/config.hpp"
#include "noon/fit.hpp"
#include "noon/scan_record.hpp"
#include "noon/scenario.hpp"
#include "noon/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

noon::ExperimentConfig load_config(const CommonOpts& opts) {
  noon::ExperimentConfig cfg = noon::ExperimentConfig::from_file(
      opts.config_path);
  return cfg;
}

std::uint64_t effective_seed(const CommonOpts& opts,
                             const noon::ExperimentConfig& cfg) {
  return opts.seed ? *opts.seed : cfg.scan.seed;
}

fs::path ensure_out_dir(const CommonOpts& opts) {
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void say(const CommonOpts& opts, const std::string& line) {
  if (!opts.quiet) std::cout << line << "\n";
}

std::vector<double> settings_of(const noon::ScanRecord& rec) {
  std::vector<double> xs;
  for (const auto& r : rec.rows) xs.push_back(r.setting);
  return xs;
}

std::vector<double> counts_of(const noon::ScanRecord& rec) {
  std::vector<double> ys;
  for (const auto& r : rec.rows) ys.push_back(static_cast<double>(r.sampled_counts));
  return ys;
}

json fringe_fit_json(const noon::FringeFit& fit) {
  json j;
  j["converged"] = fit.converged;
  j["degenerate"] = fit.degenerate;
  j["amplitude"] = fit.amplitude;
  j["offset"] = fit.offset;
  j["visibility"] = fit.visibility;
  j["sigma_visibility"] = fit.sigma_visibility;
  j["period"] = fit.period;
  j["sigma_period"] = fit.sigma_period;
  j["phase"] = fit.phase;
  if (fit.envelope_width > 0.0) {
    j["envelope_width"] = fit.envelope_width;
    j["envelope_center"] = fit.envelope_center;
  }
  j["chi2_reduced"] = fit.chi2_reduced;
  return j;
}

json width_fit_json(const noon::GaussianWidthFit& fit) {
  json j;
  j["converged"] = fit.converged;
  j["amplitude"] = fit.amplitude;
  j["center"] = fit.center;
  j["w0"] = fit.w0;
  j["sigma_w0"] = fit.sigma_w0;
  j["offset"] = fit.offset;
  j["chi2_reduced"] = fit.chi2_reduced;
  return j;
}

json bound_json(const noon::BoundComparison& cmp, int n) {
  json j;
  j["n"] = n;
  j["bound"] = cmp.bound;
  j["z"] = cmp.z;
  j["verdict"] = cmp.verdict_name();
  return j;
}

noon::FringeFit fit_record_fringe(const noon::ScanRecord& rec,
                                  bool gaussian_envelope) {
  return noon::fit_fringe_counts(settings_of(rec), counts_of(rec),
                                 gaussian_envelope);
}

int cmd_validate(const CommonOpts& opts) {
  auto cfg = load_config(opts);
  auto report = noon::run_validation(cfg);
  json j;
  j["all_pass"] = report.all_pass();
  json checks = json::array();
  for (const auto& c : report.checks) {
    json cj;
    cj["name"] = c.name;
    cj["residual"] = c.residual;
    cj["tolerance"] = c.tolerance;
    cj["pass"] = c.pass;
    if (!c.note.empty()) cj["note"] = c.note;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  fs::path dir = ensure_out_dir(opts);
  write_text(dir / (cfg.output.prefix + "_validation.json"), j.dump(2) + "\n");
  for (const auto& c : report.checks) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-32s residual %.3e (tol %.0e) %s",
                  c.name.c_str(), c.residual, c.tolerance,
                  c.pass ? "PASS" : "FAIL");
    say(opts, line);
  }
  say(opts, report.all_pass() ? "validation: all checks pass"
                              : "validation: FAILED");
  return report.all_pass() ? 0 : 1;
}

int cmd_scan_temporal(const CommonOpts& opts) {
  auto cfg = load_config(opts);
  std::uint64_t seed = effective_seed(opts, cfg);
  auto res = noon::run_temporal_scan(cfg, seed);
  fs::path dir = ensure_out_dir(opts);
  const std::string& p = cfg.output.prefix;
  noon::write_csv_file(res.twofold, (dir / (p + "_temporal_twofold.csv")).string());
  noon::write_csv_file(res.threefold,
                       (dir / (p + "_temporal_threefold.csv")).string());
  noon::write_csv_file(res.fourfold_raw,
                       (dir / (p + "_temporal_fourfold_raw.csv")).string());
  noon::write_csv_file(
      res.fourfold_subtracted,
      (dir / (p + "_temporal_fourfold_subtracted.csv")).string());

  auto fit2 = fit_record_fringe(res.twofold, false);
  auto fit4 = fit_record_fringe(res.fourfold_subtracted, false);
  json j;
  j["scenario"] = "temporal";
  j["seed"] = seed;
  j["twofold_fit"] = fringe_fit_json(fit2);
  j["fourfold_subtracted_fit"] = fringe_fit_json(fit4);
  if (fit2.converged && fit4.converged && fit4.period > 0.0)
    j["period_ratio"] = fit2.period / fit4.period;
  j["fourfold_bound"] =
      bound_json(noon::compare_bound(fit4.visibility, fit4.sigma_visibility, 3), 3);
  write_text(dir / (p + "_temporal_summary.json"), j.dump(2) + "\n");

  char line[200];
  std::snprintf(line, sizeof(line),
                "temporal scan: %d points, twofold period %.4g rad, "
                "subtracted fourfold period %.4g rad, V = %.3f +- %.3f",
                cfg.scan.chi_points, fit2.period, fit4.period,
                fit4.visibility, fit4.sigma_visibility);
  say(opts, line);
  return 0;
}

int cmd_scan_spatial(const CommonOpts& opts) {
  auto cfg = load_config(opts);
  std::uint64_t seed = effective_seed(opts, cfg);
  auto res = noon::run_spatial_scan(cfg, seed);
  fs::path dir = ensure_out_dir(opts);
  const std::string& p = cfg.output.prefix;
  noon::write_csv_file(res.single, (dir / (p + "_spatial_single.csv")).string());
  noon::write_csv_file(res.noon, (dir / (p + "_spatial_noon.csv")).string());
  {
    std::ofstream out(dir / (p + "_spatial_rates.csv"), std::ios::binary);
    noon::write_rates_csv(res, out);
  }

  auto fit1 = fit_record_fringe(res.single, true);
  auto fit3 = fit_record_fringe(res.noon, true);
  auto cmp = noon::compare_bound(fit3.visibility, fit3.sigma_visibility, 3);
  json j;
  j["scenario"] = "spatial";
  j["seed"] = seed;
  j["single_fit"] = fringe_fit_json(fit1);
  j["noon_fit"] = fringe_fit_json(fit3);
  if (fit1.converged && fit3.converged && fit3.period > 0.0)
    j["period_ratio"] = fit1.period / fit3.period;
  j["noon_bound"] = bound_json(cmp, 3);
  j["ideal_period_n1_um"] = cfg.geometry.ideal_fringe_period() * 1e6;
  j["detected_period_n1_um"] = cfg.geometry.detected_fringe_period(1) * 1e6;
  write_text(dir / (p + "_spatial_summary.json"), j.dump(2) + "\n");

  char line[220];
  std::snprintf(line, sizeof(line),
                "spatial scan: %d points, periods %.3f / %.3f um, "
                "noon V = %.3f +- %.3f (%s classical bound %.2f)",
                cfg.scan.x_points, fit1.period, fit3.period, fit3.visibility,
                fit3.sigma_visibility, cmp.verdict_name().c_str(), cmp.bound);
  say(opts, line);
  return 0;
}

int cmd_profile(const CommonOpts& opts) {
  auto cfg = load_config(opts);
  std::uint64_t seed = effective_seed(opts, cfg);
  auto res = noon::run_profile_scan(cfg, seed);
  fs::path dir = ensure_out_dir(opts);
  const std::string& p = cfg.output.prefix;
  noon::write_csv_file(res.single, (dir / (p + "_profile_single.csv")).string());
  noon::write_csv_file(res.noon, (dir / (p + "_profile_noon.csv")).string());

  auto xs = settings_of(res.single);
  auto y1 = counts_of(res.single);
  auto y3 = counts_of(res.noon);
  auto fit1 = noon::fit_gaussian_profile_counts(xs, y1);
  auto fit3 = noon::fit_gaussian_profile_counts(xs, y3);
  json j;
  j["scenario"] = "profile";
  j["seed"] = seed;
  j["single_fit"] = width_fit_json(fit1);
  j["noon_fit"] = width_fit_json(fit3);
  if (fit1.converged && fit3.converged && fit3.w0 > 0.0)
    j["width_ratio"] = fit1.w0 / fit3.w0;
  write_text(dir / (p + "_profile_summary.json"), j.dump(2) + "\n");

  char line[200];
  std::snprintf(line, sizeof(line),
                "profile scan: 2w0 = %.3f um (N=1), %.3f um (N=3)",
                2.0 * fit1.w0, 2.0 * fit3.w0);
  say(opts, line);
  return 0;
}

int cmd_sample(const CommonOpts& opts, const std::string& in_csv,
               std::uint64_t seed) {
  auto rec = noon::read_csv_file(in_csv);
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    auto& row = rec.rows[i];
    auto rng = noon::substream(seed, rec.name, i);
    row.sampled_counts =
        noon::sample_poisson(rng, row.expected_rate * row.integration_time);
  }
  // refresh the seed echo so the file documents what produced its counts
  bool replaced = false;
  for (auto& [k, v] : rec.metadata)
    if (k == "seed") {
      v = std::to_string(seed);
      replaced = true;
    }
  if (!replaced) rec.add_meta("seed", std::to_string(seed));
  fs::path dir = ensure_out_dir(opts);
  fs::path out = dir / (fs::path(in_csv).stem().string() + "_resampled.csv");
  noon::write_csv_file(rec, out.string());
  say(opts, "resampled " + std::to_string(rec.rows.size()) + " points -> " +
                out.string());
  return 0;
}

int cmd_fit(const CommonOpts& opts, const std::string& in_csv,
            const std::string& model, int n_photons) {
  auto rec = noon::read_csv_file(in_csv);
  auto xs = settings_of(rec);
  auto ys = counts_of(rec);
  json j;
  j["file"] = in_csv;
  j["record"] = rec.name;
  j["model"] = model;
  bool converged = false;
  if (model == "profile") {
    auto fit = noon::fit_gaussian_profile_counts(xs, ys);
    j["fit"] = width_fit_json(fit);
    converged = fit.converged;
  } else if (model == "fringe" || model == "fringe-flat") {
    auto fit = noon::fit_fringe_counts(xs, ys, model == "fringe");
    j["fit"] = fringe_fit_json(fit);
    j["bound"] = bound_json(
        noon::compare_bound(fit.visibility, fit.sigma_visibility, n_photons),
        n_photons);
    converged = fit.converged;
  } else {
    std::cerr << "unknown model '" << model
              << "' (expected profile, fringe, fringe-flat)\n";
    return 2;
  }
  std::string text = j.dump(2) + "\n";
  if (opts.out_dir != ".") {
    fs::path dir = ensure_out_dir(opts);
    write_text(dir / (fs::path(in_csv).stem().string() + "_fit.json"), text);
  }
  std::cout << text;
  return converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator of heralded three-photon N00N-state double-slit "
               "interference"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string in_csv;
  std::string fit_model = "fringe";
  int bound_n = 3;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", opts.config_path, "experiment config file")
          ->required()
          ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", [&opts](const std::vector<std::string>& v) {
      opts.seed = std::stoull(v[0]);
      return true;
    }, "override the config RNG seed");
    cmd->add_flag("--quiet", opts.quiet, "suppress the one-line summaries");
  };

  CLI::App* validate = app.add_subcommand(
      "validate", "run the convention-locking consistency checks");
  add_common(validate, true);

  CLI::App* temporal = app.add_subcommand(
      "scan-temporal", "simulate the four temporal fringe records");
  add_common(temporal, true);

  CLI::App* spatial = app.add_subcommand(
      "scan-spatial", "simulate the spatial fringe records");
  add_common(spatial, true);

  CLI::App* profile = app.add_subcommand(
      "profile", "simulate single-arm beam profiles");
  add_common(profile, true);

  CLI::App* sample = app.add_subcommand(
      "sample", "re-sample counts of an existing scan record CSV");
  add_common(sample, false);
  sample->add_option("--in", in_csv, "scan record CSV")->required()
      ->check(CLI::ExistingFile);

  CLI::App* fit = app.add_subcommand(
      "fit", "fit a scan record CSV and emit a JSON report");
  add_common(fit, false);
  fit->add_option("--in", in_csv, "scan record CSV")->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--model", fit_model,
                  "profile | fringe (Gaussian envelope) | fringe-flat");
  fit->add_option("--n", bound_n, "photon number for the classical bound");

  CLI::App* bound = app.add_subcommand(
      "bound", "print the classical visibility bound for N photons");
  bound->add_option("--n", bound_n, "photon number")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage problems are config errors
  }

  try {
    if (validate->parsed()) return cmd_validate(opts);
    if (temporal->parsed()) return cmd_scan_temporal(opts);
    if (spatial->parsed()) return cmd_scan_spatial(opts);
    if (profile->parsed()) return cmd_profile(opts);
    if (sample->parsed()) return cmd_sample(opts, in_csv, opts.seed.value_or(42));
    if (fit->parsed()) return cmd_fit(opts, in_csv, fit_model, bound_n);
    if (bound->parsed()) {
      std::cout << noon::format_sig12(noon::classical_visibility_bound(bound_n))
                << "\n";
      return 0;
    }
  } catch (const noon::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
