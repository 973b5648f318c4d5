// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lcsym/experiment.hpp"
#include "lcsym/lcmle.hpp"
#include "lcsym/numeric.hpp"
#include "lcsym/onestep.hpp"
#include "lcsym/plcurve.hpp"
#include "lcsym/refdist.hpp"
#include "lcsym/rng.hpp"
#include "lcsym/symmle.hpp"

using namespace lcsym;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> draw(const RefDensity& ref, std::size_t n, std::uint64_t rep) {
  return sample(ref, n, derive_seed(kSeed, ref.tag(), n, rep));
}

// Criteria 1 and 2 share the fits.
struct CharacterizationRun {
  Outcome h_check, structure;
};

CharacterizationRun characterization() {
  CharacterizationRun out;
  const RefDensity refs[] = {RefDensity::normal(), RefDensity::laplace(), RefDensity::logistic()};
  double worst_min_h = 0.0, worst_knot_h = 0.0;
  int h_fail = 0, s_fail = 0, fits = 0;
  for (const auto& ref : refs) {
    for (int rep = 0; rep < 50; ++rep) {
      const auto x = draw(ref, 100, static_cast<std::uint64_t>(rep));
      const MLEResult fit = fit_mle(x);
      const DiagnosticReport d = diagnostics(fit, x, 1000);
      ++fits;
      worst_min_h = std::min(worst_min_h, d.min_h);
      worst_knot_h = std::max(worst_knot_h, d.max_abs_h_at_knots);
      if (!(d.h_nonnegative && d.h_zero_at_knots)) ++h_fail;
      if (!(d.knot_structure && d.cdf_sandwich && d.variance_bound && d.log_bound &&
            d.zero_slope_at_origin))
        ++s_fail;
    }
  }
  out.h_check.check(h_fail == 0, std::to_string(fits) + " fits, " + std::to_string(h_fail) +
                                     " with h < -1e-7 or |h(knot)| > 1e-6");
  out.h_check.check(worst_min_h >= -1e-7, fmt("min h over all fits = %.3e", worst_min_h));
  out.h_check.check(worst_knot_h <= 1e-6, fmt("max |h| at knots = %.3e", worst_knot_h));
  out.structure.check(s_fail == 0, std::to_string(fits) + " fits, " + std::to_string(s_fail) +
                                       " with a knot, sandwich, variance or log-bound failure");
  return out;
}

Outcome information_ratios() {
  Outcome o;
  const RefDensity sb = RefDensity::symbeta(2.1);
  const double i_sb = fisher_info(sb);
  const double r1 = truncated_info(sb, 0.01) / i_sb, r2 = truncated_info(sb, 1e-6) / i_sb;
  o.check(std::abs(r1 - 0.05) <= 0.005, fmt("symbeta:2.1 I(0.01)/I = %.5f (target 0.05 +- 0.005)", r1));
  o.check(std::abs(r2 - 0.233) <= 0.005, fmt("symbeta:2.1 I(1e-6)/I = %.5f (target 0.233 +- 0.005)", r2));
  for (const auto& ref : {RefDensity::normal(), RefDensity::logistic(), RefDensity::laplace()}) {
    const double r = truncated_info(ref, 0.001) / fisher_info(ref);
    o.check(r > 0.98, ref.tag() + fmt(" I(0.001)/I = %.5f (target > 0.98)", r));
  }
  return o;
}

// int_0^sqrt(r) phi'^2 f, substituting 1 - x/sqrt(r) = t^4 so the endpoint
// singularity (1 - x^2/r)^(r/2 - 2) becomes bounded.
double symbeta_info_oracle(double r) {
  const double s = std::sqrt(r);
  const double logc = std::lgamma((3.0 + r) / 2.0) - 0.5 * std::log(std::numbers::pi * r) -
                      std::lgamma(1.0 + r / 2.0);
  const auto integrand = [&](double t) {
    const double t4 = t * t * t * t;
    const double y = 1.0 - t4;
    const double x = s * y;
    const double one_minus = t4 * (1.0 + y);  // 1 - y^2
    const double score2 = x * x / (one_minus * one_minus);
    const double dens = std::exp(logc + 0.5 * r * std::log(one_minus));
    return score2 * dens * s * 4.0 * t * t * t;
  };
  const auto q = numeric::integrate(integrand, 0.0, 1.0, {.abs_tol = 1e-14, .rel_tol = 1e-12});
  return 2.0 * q.value;
}

Outcome closed_form_constants() {
  Outcome o;
  o.check(fisher_info(RefDensity::normal()) == 1.0, "normal I == 1");
  o.check(fisher_info(RefDensity::logistic()) == 1.0 / 3.0, "logistic I == 1/3");
  o.check(fisher_info(RefDensity::laplace()) == 1.0, "laplace I == 1");
  for (double r : {2.5, 3.5, 4.5}) {
    const double formula = fisher_info(RefDensity::symbeta(r));
    const double quad = symbeta_info_oracle(r);
    o.check(std::abs(formula - quad) <= 1e-6 * quad,
            fmt("symbeta:%g formula %.10f vs quadrature %.10f", r, formula, quad));
  }
  return o;
}

Outcome projections() {
  Outcome o;
  const double zg = project(RefDensity::gauss_mixture()).z();
  const double zl = project(RefDensity::laplace_mixture()).z();
  o.check(std::abs(zg - 2.83) <= 0.01, fmt("gaussmix flat-top z = %.5f (target 2.83 +- 0.01)", zg));
  o.check(std::abs(zl - 2.61) <= 0.01, fmt("laplacemix flat-top z = %.5f (target 2.61 +- 0.01)", zl));
  const ProjectionResult t2 = project(RefDensity::t2());
  double worst = 0.0;
  for (int i = -400; i <= 400; ++i) {
    const double x = i * 0.05;
    worst = std::max(worst, std::abs(t2.log_pdf(x) - (-std::abs(x) - std::numbers::ln2)));
  }
  o.check(t2.kind() == ProjectionKind::Laplace && worst <= 1e-14,
          fmt("t2 projection log-density vs -|x| - log 2: max deviation %.2e", worst));
  return o;
}

Outcome rates() {
  Outcome o;
  const RefDensity normal = RefDensity::normal();
  std::vector<double> med_h2, med_theta;
  for (std::size_t n : {50u, 200u, 800u}) {
    std::vector<double> h2(100), th(100);
    for (int rep = 0; rep < 100; ++rep) {
      const auto x = draw(normal, n, static_cast<std::uint64_t>(rep));
      const MLEResult fit = fit_mle(x);
      HellingerWindow w{.lower = -9.0, .upper = 9.0, .breakpoints = {}};
      for (double k : fit.psi_hat.knots()) w.breakpoints.push_back(k);
      const double h = hellinger([&](double z) { return fit.g_hat.pdf(z); },
                                 [&](double z) { return normal.pdf(z); }, w);
      h2[rep] = h * h;
      th[rep] = std::abs(fit.theta_hat);
    }
    med_h2.push_back(median(h2));
    med_theta.push_back(median(th));
    o.notes.push_back(fmt("     n=%g median H^2 = %.5f, median |theta| = %.5f", double(n), med_h2.back(),
                          med_theta.back()));
  }
  o.check(med_h2[0] > med_h2[1] && med_h2[1] > med_h2[2], "median H^2 strictly decreasing");
  o.check(med_theta[0] > med_theta[1] && med_theta[1] > med_theta[2],
          "median |theta_hat| strictly decreasing");
  const double shrink = med_h2[0] / med_h2[2];
  o.check(shrink >= 2.2, fmt("H^2 shrink factor 50 -> 800 = %.3f (target >= 2.2)", shrink));
  return o;
}

Outcome one_step_root_n() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.densities = {"normal"};
  cfg.sizes = {200, 500};
  cfg.reps = 300;
  cfg.estimators = {"os:mean:pmle:trunc"};
  cfg.seed = kSeed;
  const double target = 1.0 / truncated_info(RefDensity::normal(), 0.002);
  for (const auto& row : run_efficiency(cfg).rows) {
    const double nv = static_cast<double>(row.n) * row.mc_variance;
    o.check(nv >= 0.75 * target && nv <= 1.35 * target && row.failures == 0,
            fmt("n=%g n*var = %.4f, band [%.4f, ", double(row.n), nv, 0.75 * target) +
                fmt("%.4f], failures %g", 1.35 * target, double(row.failures)));
  }
  return o;
}

Outcome efficiency_orderings() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.densities = {"normal", "laplace", "symbeta:2.1"};
  cfg.sizes = {500};
  cfg.reps = 300;
  cfg.seed = kSeed;
  const EfficiencyTable t = run_efficiency(cfg);
  auto eff = [&](const std::string& d, const std::string& e) {
    for (const auto& r : t.rows)
      if (r.density == d && r.estimator == e) return r.efficiency;
    return std::nan("");
  };
  for (const auto& r : t.rows)
    o.notes.push_back("     " + r.density + " " + r.estimator + fmt(" efficiency %.4f", r.efficiency));
  const double mean_n = eff("normal", "mean");
  for (const auto& e : cfg.estimators) {
    if (!e.starts_with("os:")) continue;
    o.check(mean_n > eff("normal", e), "normal: mean " + fmt("%.4f", mean_n) + " > " + e + " " +
                                           fmt("%.4f", eff("normal", e)));
  }
  o.check(eff("laplace", "median") > eff("laplace", "mean"),
          fmt("laplace: median %.4f > mean %.4f", eff("laplace", "median"), eff("laplace", "mean")));
  for (const auto& e : cfg.estimators)
    o.check(eff("symbeta:2.1", e) < 0.4, "symbeta:2.1 " + e + fmt(" %.4f < 0.4", eff("symbeta:2.1", e)));
  return o;
}

Outcome misspecification() {
  Outcome o;
  const RefDensity mix = RefDensity::gauss_mixture();
  OneStepConfig os;
  os.preliminary = PreliminaryKind::mean();
  os.density = DensityEstimatorKind::PartialMLE;
  std::vector<double> th_os, th_mle;
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = draw(mix, 800, static_cast<std::uint64_t>(rep));
    th_os.push_back(std::abs(one_step(x, os).theta_tilde));
    th_mle.push_back(std::abs(fit_mle(x).theta_hat));
  }
  const double mo = median(th_os), mm = median(th_mle);
  o.check(mo < 0.15, fmt("median |one-step| = %.4f (target < 0.15)", mo));
  o.check(mm < 0.15, fmt("median |mle| = %.4f (target < 0.15)", mm));

  const auto x = draw(mix, 2000, 0);
  const MLEResult fit = fit_mle(x);
  const ProjectionResult proj = project(mix);
  std::vector<double> br;
  for (double k : fit.psi_hat.knots()) br.push_back(k);
  br.push_back(-proj.z());
  br.push_back(proj.z());
  std::sort(br.begin(), br.end());
  const double lo = fit.g_hat.lower(), hi = fit.g_hat.upper();
  std::vector<double> inside;
  for (double b : br)
    if (b > lo && b < hi) inside.push_back(b);
  const auto q = numeric::integrate([&](double z) { return std::abs(fit.g_hat.pdf(z) - proj.pdf(z)); },
                                    lo, hi, {.abs_tol = 1e-10, .rel_tol = 1e-8}, inside);
  const double l1 = q.value + proj.cdf(lo) + (1.0 - proj.cdf(hi));
  o.check(l1 < 0.12, fmt("n=2000 L1(g_hat, flat-top projection) = %.4f (target < 0.12)", l1));
  return o;
}

// Uniform density on [a, b] found by zooming grid search over the two
// endpoint log-density values of a linear log-density.
std::pair<double, double> brute_force_two_point(double a, double b) {
  const auto obj = [&](double p, double q) {
    const double mass = (b - a) * segment::j00(p, q);
    return 0.5 * p + 0.5 * q - mass;
  };
  double cp = 0.0, cq = 0.0, half = 20.0;
  while (half > 1e-11) {
    double bp = cp, bq = cq, best = obj(cp, cq);
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j) {
        const double p = cp + half * i / 10.0, q = cq + half * j / 10.0;
        const double v = obj(p, q);
        if (v > best) best = v, bp = p, bq = q;
      }
    cp = bp, cq = bq;
    half *= 0.3;
  }
  return {cp, cq};
}

Outcome two_point_oracle() {
  Outcome o;
  const double lefts[] = {-3.0, -0.5, 0.0, 1.25, 40.0};
  const double widths[] = {1e-3, 0.2, 1.0, 7.5};
  double worst = 0.0;
  int cases = 0;
  for (double a : lefts)
    for (double w : widths) {
      const double b = a + w;
      const std::vector<double> pts{a, b};
      const FitReport rep = fit(WeightedSample::uniform(pts));
      const auto [p, q] = brute_force_two_point(a, b);
      const PLConcave& phi = rep.density.log_density();
      double dev = 0.0;
      for (int k = 0; k <= 20; ++k) {
        const double x = a + (b - a) * k / 20.0;
        const double bf = p + (q - p) * (x - a) / (b - a);
        dev = std::max(dev, std::abs(phi.eval(std::clamp(x, phi.lower(), phi.upper())) - bf));
      }
      dev = std::max(dev, std::abs(phi.lower() - a) + std::abs(phi.upper() - b));
      worst = std::max(worst, dev);
      ++cases;
    }
  o.check(cases == 20 && worst <= 1e-6,
          fmt("%g two-point cases, max sup-norm log-density gap %.2e", double(cases), worst));
  return o;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o, double seconds) {
    std::printf("criterion %2d %-32s %s  (%.1f s)\n", id, name, o.pass ? "PASS" : "FAIL", seconds);
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  auto timed = [&](auto&& fn) {
    const auto t0 = clock::now();
    auto result = fn();
    return std::make_pair(std::move(result), std::chrono::duration<double>(clock::now() - t0).count());
  };

  {
    auto [run, s] = timed(characterization);
    run.h_check.check(s <= 120.0, fmt("runtime %.1f s (limit 120 s)", s));
    report(1, "characterization oracle", run.h_check, s);
    report(2, "structure suite", run.structure, s);
  }
  {
    auto [o, s] = timed(information_ratios);
    report(3, "information ratios", o, s);
  }
  {
    auto [o, s] = timed(closed_form_constants);
    report(4, "closed-form constants", o, s);
  }
  {
    auto [o, s] = timed(projections);
    report(5, "projection values", o, s);
  }
  {
    auto [o, s] = timed(rates);
    o.check(s <= 600.0, fmt("runtime %.1f s (limit 600 s)", s));
    report(6, "rate property", o, s);
  }
  {
    auto [o, s] = timed(one_step_root_n);
    o.check(s <= 600.0, fmt("runtime %.1f s (limit 600 s)", s));
    report(7, "one-step root-n consistency", o, s);
  }
  {
    auto [o, s] = timed(efficiency_orderings);
    report(8, "efficiency orderings", o, s);
  }
  {
    auto [o, s] = timed(misspecification);
    o.check(s <= 600.0, fmt("runtime %.1f s (limit 600 s)", s));
    report(9, "misspecification robustness", o, s);
  }
  {
    auto [o, s] = timed(two_point_oracle);
    report(10, "two-point oracle", o, s);
  }
  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
