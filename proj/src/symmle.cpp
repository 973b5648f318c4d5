#include "lcsym/symmle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#include "lcsym/errors.hpp"
#include "lcsym/numeric.hpp"

namespace lcsym {

namespace {

void require_nondegenerate(std::span<const double> sample) {
  if (sample.empty()) throw DegenerateSampleError("empty sample");
  const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
  if (!(*hi > *lo))
    throw DegenerateSampleError("sample has fewer than two distinct values");
}

}  // namespace

WeightedSample symmetrize(std::span<const double> sample, double theta) {
  require_nondegenerate(sample);
  const double n = static_cast<double>(sample.size());
  std::vector<double> pts, wts;
  pts.reserve(2 * sample.size());
  wts.reserve(2 * sample.size());
  for (double x : sample) {
    const double a = std::abs(x - theta);
    if (a == 0.0) {
      pts.push_back(0.0);
      wts.push_back(1.0 / n);
    } else {
      pts.push_back(a);
      pts.push_back(-a);
      wts.push_back(0.5 / n);
      wts.push_back(0.5 / n);
    }
  }
  WeightedSample ws(pts, wts);
  if (ws.size() < 2)
    throw DegenerateSampleError("symmetrized sample is a single atom at the center");
  return ws;
}

SymFit fit_fixed_theta(std::span<const double> sample, double theta,
                       const FitConfig& cfg) {
  const FitReport rep = fit_even(symmetrize(sample, theta), cfg);
  PLConcave psi = rep.density.log_density();

  double total = 0.0;
  for (double x : sample) total += psi.eval(x - theta);
  const double profile = total / static_cast<double>(sample.size()) - 1.0;
  return SymFit{theta, std::move(psi), profile, rep.certificate};
}

double profile_criterion(std::span<const double> sample, double theta,
                         const FitConfig& cfg) {
  return fit_fixed_theta(sample, theta, cfg).profile;
}

MLEResult fit_mle(std::span<const double> sample, const MLEOptions& opt) {
  require_nondegenerate(sample);
  if (opt.grid_size < 3) throw std::invalid_argument("fit_mle: grid needs at least 3 points");
  if (!(opt.refine_tolerance > 0.0)) throw std::invalid_argument("fit_mle: refine tolerance must be positive");
  const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
  const double lo = *lo_it, hi = *hi_it;
  const int m = opt.grid_size;
  std::vector<double> thetas(m), values(m);
  for (int k = 0; k < m; ++k) thetas[k] = lo + (hi - lo) * k / (m - 1);
  thetas.back() = hi;

  std::vector<std::exception_ptr> errors(m);
  auto evaluate = [&](int k) {
    try {
      values[k] = profile_criterion(sample, thetas[k], opt.fit);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (opt.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < m; ++k) evaluate(k);
  } else {
    for (int k = 0; k < m; ++k) evaluate(k);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  int best = 0;
  for (int k = 1; k < m; ++k)
    if (values[k] > values[best]) best = k;

  MLEResult out{.theta_hat = thetas[best],
                .psi_hat = PLConcave({-1.0, 1.0}, {0.0, 0.0}),
                .g_hat = ExpLinearDensity(PLConcave({-1.0, 1.0}, {0.0, 0.0})),
                .criterion = values[best],
                .grid = {},
                .grid_ties = {}};
  out.grid.reserve(m);
  for (int k = 0; k < m; ++k) {
    out.grid.emplace_back(thetas[k], values[k]);
    if (values[k] >= values[best] - 1e-12) out.grid_ties.push_back(thetas[k]);
  }

  const double a = thetas[std::max(best - 1, 0)];
  const double b = thetas[std::min(best + 1, m - 1)];
  const auto golden = numeric::golden_section_maximize(
      [&](double t) { return profile_criterion(sample, t, opt.fit); }, a, b, opt.refine_tolerance);
  // Refinement only replaces the grid point on strict improvement, so exact
  // grid maximizers (and the smallest of tied ones) are kept.
  if (golden.value > out.criterion) {
    out.theta_hat = golden.argmax;
    out.criterion = golden.value;
  }
  SymFit final_fit = fit_fixed_theta(sample, out.theta_hat, opt.fit);
  out.criterion = final_fit.profile;
  out.g_hat = ExpLinearDensity(final_fit.psi);
  out.psi_hat = std::move(final_fit.psi);
  return out;
}

double characterization_h(const MLEResult& result, std::span<const double> sample,
                          double t) {
  double amax = 0.0;
  for (double x : sample) amax = std::max(amax, std::abs(x - result.theta_hat));
  if (!(t >= 0.0 && t <= amax * (1.0 + 1e-12)))
    throw std::invalid_argument("characterization_h: t outside [0, max |x - theta|]");
  if (t >= amax) return 0.0;
  double empirical = 0.0;
  for (double x : sample) empirical += std::max(std::abs(x - result.theta_hat) - t, 0.0);
  empirical /= static_cast<double>(sample.size());
  return empirical - 2.0 * result.g_hat.upper_excess(t);
}

DiagnosticReport diagnostics(const MLEResult& result, std::span<const double> sample,
                             int h_grid_points) {
  DiagnosticReport rep;
  const double n = static_cast<double>(sample.size());
  std::vector<double> dist;
  dist.reserve(sample.size());
  for (double x : sample) dist.push_back(std::abs(x - result.theta_hat));
  std::sort(dist.begin(), dist.end());
  const double amax = dist.back();
  const PLConcave& psi = result.psi_hat;

  auto fail = [&](bool& flag, std::string msg) {
    if (flag) rep.failures.push_back(std::move(msg));
    flag = false;
  };

  // Empirical CDF of the distances just below and at each knot. Atoms
  // closer than kTieRadius to the knot count as tied with it: which of them
  // carries the kink changes the criterion by less than rounding.
  constexpr double kTieRadius = 1e-7;
  for (double k : psi.knots()) {
    if (k <= 0.0) continue;
    const double r = kTieRadius * std::max(1.0, k);
    const auto first = std::lower_bound(dist.begin(), dist.end(), k - r);
    const auto last = std::upper_bound(dist.begin(), dist.end(), k + r);
    const double lower = static_cast<double>(first - dist.begin()) / n;
    const double upper = static_cast<double>(last - dist.begin()) / n;
    const double model = 2.0 * result.g_hat.cdf(k) - 1.0;
    if (model < lower - 1e-6 || model > upper + 1e-6)
      fail(rep.cdf_sandwich, "CDF sandwich violated at knot " + std::to_string(k));
  }

  double msd = 0.0;
  for (double a : dist) msd += a * a;
  msd /= n;
  if (result.g_hat.moments().variance > msd + 1e-8)
    fail(rep.variance_bound, "variance of the fit exceeds the mean squared deviation");

  for (double k : psi.knots()) {
    const double ak = std::abs(k);
    if (ak == 0.0) continue;
    auto it = std::lower_bound(dist.begin(), dist.end(), ak - 1e-9 * std::max(1.0, ak));
    if (it == dist.end() || std::abs(*it - ak) > 1e-9 * std::max(1.0, ak))
      fail(rep.knot_structure, "knot " + std::to_string(k) + " is not a reflected data point");
  }

  if (dist.front() > 0.0) {
    const double slope = psi.right_derivative(0.0);
    if (std::abs(slope) > 1e-7) fail(rep.zero_slope_at_origin, "psi'(0+) is not zero");
  }

  auto check_log_bound = [&](double x) {
    if (x == 0.0) return;
    if (psi.eval(x) > -std::log(2.0 * std::abs(x)) + 1e-12)
      fail(rep.log_bound, "psi(x) > -log|2x| at x = " + std::to_string(x));
  };
  for (double k : psi.knots()) check_log_bound(k);

  rep.min_h = std::numeric_limits<double>::infinity();
  for (int i = 0; i < h_grid_points; ++i) {
    const double t = h_grid_points == 1 ? 0.0 : amax * i / (h_grid_points - 1);
    check_log_bound(t);
    rep.min_h = std::min(rep.min_h, characterization_h(result, sample, t));
  }
  if (rep.min_h < -1e-7) fail(rep.h_nonnegative, "h is negative somewhere on the grid");
  for (double k : psi.knots()) {
    if (k <= 0.0 || k >= amax) continue;
    rep.max_abs_h_at_knots =
        std::max(rep.max_abs_h_at_knots, std::abs(characterization_h(result, sample, k)));
  }
  if (rep.max_abs_h_at_knots > 1e-6) fail(rep.h_zero_at_knots, "h is not zero at a knot");
  return rep;
}

}  // namespace lcsym
