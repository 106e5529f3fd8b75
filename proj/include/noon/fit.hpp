#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "noon/spatial.hpp"

namespace noon {

/// Damped least-squares (Levenberg-Marquardt) result. Covariance is the
/// inverse weighted normal matrix at the optimum; 1-sigma uncertainties are
/// its diagonal square roots.
struct FitResult {
  Eigen::VectorXd params;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
  int n_points = 0;
  int n_params = 0;
  int iterations = 0;
  bool converged = false;

  double chi2_reduced() const {
    int dof = n_points - n_params;
    return dof > 0 ? chi2 / dof : 0.0;
  }
};

namespace fitdetail {

template <typename Model>
double chi_squared(const Model& model, const std::vector<double>& xs,
                   const std::vector<double>& ys,
                   const std::vector<double>& sigmas,
                   const Eigen::VectorXd& p) {
  double c = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = (ys[i] - model.eval(xs[i], p)) / sigmas[i];
    c += r * r;
  }
  return c;
}

}  // namespace fitdetail

/// Minimizes sum_i ((y_i - f(x_i; p)) / sigma_i)^2 over p. The model
/// provides eval(x, p) and gradient(x, p, out). Non-convergence is reported
/// through the flag, never silently.
template <typename Model>
FitResult levenberg_marquardt(const Model& model,
                              const std::vector<double>& xs,
                              const std::vector<double>& ys,
                              const std::vector<double>& sigmas,
                              Eigen::VectorXd p, int max_iterations = 400) {
  const int n = static_cast<int>(xs.size());
  const int np = static_cast<int>(p.size());
  if (ys.size() != xs.size() || sigmas.size() != xs.size())
    throw std::invalid_argument("fit arrays must have equal length");

  FitResult res;
  res.n_points = n;
  res.n_params = np;

  double lambda = 1e-3;
  double chi2 = fitdetail::chi_squared(model, xs, ys, sigmas, p);
  Eigen::VectorXd grad(np);
  Eigen::MatrixXd jtj(np, np);

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    jtj.setZero();
    Eigen::VectorXd jtr = Eigen::VectorXd::Zero(np);
    for (int i = 0; i < n; ++i) {
      model.gradient(xs[i], p, grad);
      double inv_s = 1.0 / sigmas[i];
      double r = (ys[i] - model.eval(xs[i], p)) * inv_s;
      grad *= inv_s;
      jtj.noalias() += grad * grad.transpose();
      jtr.noalias() += grad * r;
    }

    bool stepped = false;
    for (int tries = 0; tries < 16; ++tries) {
      Eigen::MatrixXd damped = jtj;
      for (int d = 0; d < np; ++d)
        damped(d, d) += lambda * std::max(jtj(d, d), 1e-30);
      Eigen::VectorXd delta = damped.ldlt().solve(jtr);
      Eigen::VectorXd p_new = p + delta;
      double chi2_new = fitdetail::chi_squared(model, xs, ys, sigmas, p_new);
      if (std::isfinite(chi2_new) && chi2_new <= chi2) {
        double improvement = chi2 - chi2_new;
        p = p_new;
        chi2 = chi2_new;
        lambda = std::max(lambda / 3.0, 1e-14);
        stepped = true;
        if (improvement < 1e-12 * (chi2 + 1e-12) ||
            delta.cwiseAbs().maxCoeff() <
                1e-13 * (1.0 + p.cwiseAbs().maxCoeff()))
          res.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    // No acceptable step even under heavy damping means the gradient has
    // vanished to rounding: treat as converged at the optimum.
    if (!stepped) res.converged = true;
    if (res.converged) break;
  }

  // covariance at the optimum
  jtj.setZero();
  for (int i = 0; i < n; ++i) {
    model.gradient(xs[i], p, grad);
    grad /= sigmas[i];
    jtj.noalias() += grad * grad.transpose();
  }
  Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();

  res.params = p;
  res.covariance = cov;
  res.sigma = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  res.chi2 = chi2;
  res.iterations = iter;
  return res;
}

/// y = A exp(-2 (x - x0)^2 / w0^2) + B. The width parameter w0 is the
/// 1/e^2 radius of the fitted count profile (the 1/e radius of its field
/// envelope), matching the usual beam-width convention.
struct GaussianProfileModel {
  static constexpr int kA = 0, kX0 = 1, kW0 = 2, kB = 3;
  static int n_params() { return 4; }

  double eval(double x, const Eigen::VectorXd& p) const {
    double u = (x - p[kX0]) / p[kW0];
    return p[kA] * std::exp(-2.0 * u * u) + p[kB];
  }

  void gradient(double x, const Eigen::VectorXd& p, Eigen::VectorXd& g) const {
    double dx = x - p[kX0];
    double w = p[kW0];
    double e = std::exp(-2.0 * dx * dx / (w * w));
    g[kA] = e;
    g[kX0] = p[kA] * e * 4.0 * dx / (w * w);
    g[kW0] = p[kA] * e * 4.0 * dx * dx / (w * w * w);
    g[kB] = 1.0;
  }
};

/// y = env(x) (1 + V cos(2 pi x / L + phi)) + B with env either a constant
/// A or a Gaussian A exp(-2 (x-x0)^2 / w^2). With a constant envelope the
/// offset B is degenerate with (A, V) -- only A + B and A V would be
/// determined -- so the flat variant pins B = 0 and the fitted A is the
/// fringe mean.
struct FringeModel {
  bool gaussian_envelope = false;
  // flat:     p = [A, V, L, phi]
  // gaussian: p = [A, x0, w, V, L, phi, B]
  static constexpr int kA = 0;
  int n_params() const { return gaussian_envelope ? 7 : 4; }
  int ix0() const { return 1; }
  int iw() const { return 2; }
  int iv() const { return gaussian_envelope ? 3 : 1; }
  int il() const { return gaussian_envelope ? 4 : 2; }
  int iphi() const { return gaussian_envelope ? 5 : 3; }
  int ib() const { return 6; }  // gaussian variant only

  double eval(double x, const Eigen::VectorXd& p) const {
    double env = p[kA];
    double offset = 0.0;
    if (gaussian_envelope) {
      double u = (x - p[ix0()]) / p[iw()];
      env *= std::exp(-2.0 * u * u);
      offset = p[ib()];
    }
    double theta = 2.0 * std::numbers::pi * x / p[il()] + p[iphi()];
    return env * (1.0 + p[iv()] * std::cos(theta)) + offset;
  }

  void gradient(double x, const Eigen::VectorXd& p, Eigen::VectorXd& g) const {
    double e = 1.0;
    double dx = 0.0, w = 1.0;
    if (gaussian_envelope) {
      dx = x - p[ix0()];
      w = p[iw()];
      e = std::exp(-2.0 * dx * dx / (w * w));
    }
    double L = p[il()];
    double theta = 2.0 * std::numbers::pi * x / L + p[iphi()];
    double c = std::cos(theta), s = std::sin(theta);
    double v = p[iv()];
    double mod = 1.0 + v * c;
    g[kA] = e * mod;
    if (gaussian_envelope) {
      g[ix0()] = p[kA] * e * mod * 4.0 * dx / (w * w);
      g[iw()] = p[kA] * e * mod * 4.0 * dx * dx / (w * w * w);
      g[ib()] = 1.0;
    }
    g[iv()] = p[kA] * e * c;
    g[il()] = p[kA] * e * v * s * 2.0 * std::numbers::pi * x / (L * L);
    g[iphi()] = -p[kA] * e * v * s;
  }
};

/// Fringe-fit summary: visibility is the fitted cosine contrast of the
/// oscillatory component, not a raw max/min ratio.
struct FringeFit {
  double amplitude = 0.0;   // envelope amplitude A
  double offset = 0.0;      // additive offset B
  double visibility = 0.0;  // V >= 0 (phase absorbs the sign)
  double sigma_visibility = 0.0;
  double period = 0.0;
  double sigma_period = 0.0;
  double phase = 0.0;
  double envelope_width = 0.0;  // 0 for flat envelope
  double envelope_center = 0.0;
  double chi2_reduced = 0.0;
  bool converged = false;
  bool degenerate = false;  // flat data: visibility poorly constrained
  FitResult raw;
};

struct GaussianWidthFit {
  double amplitude = 0.0;
  double center = 0.0;
  double w0 = 0.0;
  double sigma_w0 = 0.0;
  double offset = 0.0;
  double chi2_reduced = 0.0;
  bool converged = false;
  FitResult raw;
};

namespace fitdetail {

inline FringeFit package_fringe(const FringeModel& model,
                                const FitResult& best) {
  FringeFit out;
  out.raw = best;
  out.converged = best.converged;
  out.amplitude = best.params[FringeModel::kA];
  out.visibility = best.params[model.iv()];
  out.sigma_visibility = best.sigma[model.iv()];
  out.period = std::abs(best.params[model.il()]);
  out.sigma_period = best.sigma[model.il()];
  out.phase = best.params[model.iphi()];
  if (model.gaussian_envelope) {
    out.offset = best.params[model.ib()];
    out.envelope_width = std::abs(best.params[model.iw()]);
    out.envelope_center = best.params[model.ix0()];
  }
  if (out.visibility < 0.0) {  // fold the sign into the phase
    out.visibility = -out.visibility;
    out.phase += std::numbers::pi;
  }
  while (out.phase > std::numbers::pi) out.phase -= 2.0 * std::numbers::pi;
  while (out.phase < -std::numbers::pi) out.phase += 2.0 * std::numbers::pi;
  out.chi2_reduced = best.chi2_reduced();
  // Flat data leaves the oscillation unidentified: either the visibility
  // uncertainty blows up or the visibility is consistent with zero.
  out.degenerate = out.sigma_visibility > 0.5 ||
                   out.visibility <= 2.0 * out.sigma_visibility;
  return out;
}

}  // namespace fitdetail

/// Poisson weights with a variance floor of one count.
inline std::vector<double> poisson_sigmas(const std::vector<double>& counts) {
  std::vector<double> s(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    s[i] = std::sqrt(std::max(counts[i], 1.0));
  return s;
}

inline std::vector<double> uniform_sigmas(std::size_t n, double s = 1.0) {
  return std::vector<double>(n, s);
}

/// Candidate fringe periods of a uniformly sampled record, by discrete
/// Fourier decomposition: the local maxima of the power spectrum ranked by
/// power. A broad envelope dominates the lowest bins, so the carrier of an
/// enveloped fringe is typically the second local maximum; the fit
/// multi-starts over all returned candidates.
inline std::vector<double> period_candidates(const std::vector<double>& xs,
                                             const std::vector<double>& ys,
                                             int max_candidates = 4) {
  const int n = static_cast<int>(xs.size());
  if (n < 4) throw std::invalid_argument("too few points for period seed");
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= n;
  const int kmax = n / 2;
  std::vector<double> power(kmax + 1, 0.0);
  for (int k = 1; k <= kmax; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      double ang = -2.0 * std::numbers::pi * k * j / n;
      acc += (ys[j] - mean) * std::polar(1.0, ang);
    }
    power[k] = std::norm(acc);
  }
  std::vector<int> peaks;
  for (int k = 1; k <= kmax; ++k) {
    double left = k > 1 ? power[k - 1] : 0.0;
    double right = k < kmax ? power[k + 1] : 0.0;
    if (power[k] >= left && power[k] >= right && power[k] > 0.0)
      peaks.push_back(k);
  }
  std::sort(peaks.begin(), peaks.end(),
            [&](int a, int b) { return power[a] > power[b]; });
  if (peaks.empty()) peaks.push_back(1);
  double dx = (xs.back() - xs.front()) / (n - 1);
  std::vector<double> periods;
  for (int k : peaks) {
    periods.push_back(dx * n / k);
    if (static_cast<int>(periods.size()) >= max_candidates) break;
  }
  return periods;
}

/// Strongest single period candidate.
inline double dominant_period(const std::vector<double>& xs,
                              const std::vector<double>& ys) {
  return period_candidates(xs, ys, 1).front();
}

/// Weighted Gaussian fit of a profile record. Needs enough points to span
/// the peak; non-convergence is flagged.
inline GaussianWidthFit fit_gaussian_profile(const std::vector<double>& xs,
                                             const std::vector<double>& ys,
                                             const std::vector<double>& sigmas) {
  if (xs.size() < 6)
    throw std::invalid_argument("profile fit needs at least 6 points");
  double ymax = *std::max_element(ys.begin(), ys.end());
  double ymin = *std::min_element(ys.begin(), ys.end());
  // moment-based seeds
  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double w = std::max(ys[i] - ymin, 0.0);
    wsum += w;
    mean += w * xs[i];
  }
  mean = wsum > 0 ? mean / wsum : 0.5 * (xs.front() + xs.back());
  double var = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double w = std::max(ys[i] - ymin, 0.0);
    var += w * (xs[i] - mean) * (xs[i] - mean);
  }
  var = wsum > 0 ? var / wsum : 1.0;
  // count profile exp(-2 x^2/w^2) has variance w^2/4
  double w_seed = 2.0 * std::sqrt(std::max(var, 1e-30));

  Eigen::VectorXd p(4);
  p << ymax - ymin, mean, w_seed, ymin;
  GaussianProfileModel model;
  FitResult r = levenberg_marquardt(model, xs, ys, sigmas, p);

  GaussianWidthFit out;
  out.raw = r;
  out.converged = r.converged;
  out.amplitude = r.params[GaussianProfileModel::kA];
  out.center = r.params[GaussianProfileModel::kX0];
  out.w0 = std::abs(r.params[GaussianProfileModel::kW0]);
  out.sigma_w0 = r.sigma[GaussianProfileModel::kW0];
  out.offset = r.params[GaussianProfileModel::kB];
  out.chi2_reduced = r.chi2_reduced();
  return out;
}

/// Two-pass Poisson profile fit (see fit_fringe_counts).
inline GaussianWidthFit fit_gaussian_profile_counts(
    const std::vector<double>& xs, const std::vector<double>& counts);

/// Weighted fringe fit with multi-start initialization: the period is
/// seeded by the DFT peak (and its neighbors), the phase over a coarse
/// grid; the best converged chi^2 wins.
inline FringeFit fit_fringe(const std::vector<double>& xs,
                            const std::vector<double>& ys,
                            const std::vector<double>& sigmas,
                            bool gaussian_envelope,
                            double period_hint = 0.0) {
  if (xs.size() < 8)
    throw std::invalid_argument("fringe fit needs at least 8 points");
  FringeModel model{gaussian_envelope};

  double ymax = *std::max_element(ys.begin(), ys.end());
  double ymin = *std::min_element(ys.begin(), ys.end());

  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    wsum += ys[i];
    mean += ys[i] * xs[i];
  }
  mean = wsum > 0 ? mean / wsum : 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    var += ys[i] * (xs[i] - mean) * (xs[i] - mean);
  var = wsum > 0 ? var / wsum : 1.0;

  std::vector<double> period_seeds;
  if (period_hint > 0.0)
    period_seeds.push_back(period_hint);
  else
    period_seeds = period_candidates(xs, ys, 4);

  FitResult best;
  bool have_best = false;
  for (double L0 : period_seeds) {
    for (double phi0 : {0.0, 0.5 * std::numbers::pi, std::numbers::pi,
                        1.5 * std::numbers::pi}) {
      Eigen::VectorXd p(model.n_params());
      if (gaussian_envelope) {
        p << std::max(ymax - ymin, 1e-12), mean,
            2.0 * std::sqrt(std::max(var, 1e-30)), 0.5, L0, phi0,
            std::max(ymin, 0.0);
      } else {
        p << std::max(0.5 * (ymax + ymin), 1e-12), 0.5, L0, phi0;
      }
      FitResult r = levenberg_marquardt(model, xs, ys, sigmas, p);
      if (!have_best || (r.converged && r.chi2 < best.chi2) ||
          (!best.converged && r.converged)) {
        best = r;
        have_best = true;
      }
    }
  }

  return fitdetail::package_fringe(model, best);
}

/// Two-pass Poisson fit of sampled counts: the first pass weights by the
/// observed counts, the second by the fitted model (observed-count weights
/// systematically under-cover; model weights restore calibration).
inline FringeFit fit_fringe_counts(const std::vector<double>& xs,
                                   const std::vector<double>& counts,
                                   bool gaussian_envelope,
                                   double period_hint = 0.0) {
  FringeFit pass1 = fit_fringe(xs, counts, poisson_sigmas(counts),
                               gaussian_envelope, period_hint);
  if (!pass1.converged) return pass1;
  FringeModel model{gaussian_envelope};
  std::vector<double> sigmas(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    sigmas[i] =
        std::sqrt(std::max(model.eval(xs[i], pass1.raw.params), 1.0));
  FitResult r =
      levenberg_marquardt(model, xs, counts, sigmas, pass1.raw.params);
  return r.converged ? fitdetail::package_fringe(model, r) : pass1;
}

inline GaussianWidthFit fit_gaussian_profile_counts(
    const std::vector<double>& xs, const std::vector<double>& counts) {
  GaussianWidthFit pass1 =
      fit_gaussian_profile(xs, counts, poisson_sigmas(counts));
  if (!pass1.converged) return pass1;
  GaussianProfileModel model;
  std::vector<double> sigmas(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    sigmas[i] =
        std::sqrt(std::max(model.eval(xs[i], pass1.raw.params), 1.0));
  FitResult r =
      levenberg_marquardt(model, xs, counts, sigmas, pass1.raw.params);
  if (!r.converged) return pass1;
  GaussianWidthFit out;
  out.raw = r;
  out.converged = true;
  out.amplitude = r.params[GaussianProfileModel::kA];
  out.center = r.params[GaussianProfileModel::kX0];
  out.w0 = std::abs(r.params[GaussianProfileModel::kW0]);
  out.sigma_w0 = r.sigma[GaussianProfileModel::kW0];
  out.offset = r.params[GaussianProfileModel::kB];
  out.chi2_reduced = r.chi2_reduced();
  return out;
}

/// Verdict of a visibility measurement against the classical bound for
/// N-photon detection, as a one-sided z-score.
struct BoundComparison {
  enum class Verdict { Above, Consistent, Below };
  double bound = 0.0;
  double z = 0.0;
  Verdict verdict = Verdict::Consistent;

  std::string verdict_name() const {
    switch (verdict) {
      case Verdict::Above: return "above";
      case Verdict::Below: return "below";
      default: return "consistent";
    }
  }
};

inline BoundComparison compare_bound(double visibility, double sigma_v,
                                     int n_photons) {
  BoundComparison cmp;
  cmp.bound = classical_visibility_bound(n_photons);
  if (sigma_v <= 0.0) {
    cmp.z = visibility > cmp.bound ? std::numeric_limits<double>::infinity()
            : visibility < cmp.bound
                ? -std::numeric_limits<double>::infinity()
                : 0.0;
  } else {
    cmp.z = (visibility - cmp.bound) / sigma_v;
  }
  cmp.verdict = cmp.z > 2.0   ? BoundComparison::Verdict::Above
                : cmp.z < -2.0 ? BoundComparison::Verdict::Below
                               : BoundComparison::Verdict::Consistent;
  return cmp;
}

}  // namespace noon
