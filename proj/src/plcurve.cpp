#include "lcsym/plcurve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lcsym/errors.hpp"
#include "lcsym/numeric.hpp"

namespace lcsym {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// K_n(d) = int_0^1 t^n e^{t d} dt for d <= 0.
double k0(double d) {
  if (std::abs(d) < 1e-8) return 1.0 + 0.5 * d;
  return std::expm1(d) / d;
}

double series_k(double d, int n) {
  double term = 1.0;  // d^k / k!
  double sum = 0.0;
  for (int k = 0; k < 40; ++k) {
    sum += term / (k + n + 1);
    term *= d / (k + 1);
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

double k1(double d) {
  if (std::abs(d) < 2.0) return series_k(d, 1);
  return (std::exp(d) * (d - 1.0) + 1.0) / (d * d);
}

double k2(double d) {
  if (std::abs(d) < 2.0) return series_k(d, 2);
  return (std::exp(d) * (d * d - 2.0 * d + 2.0) - 2.0) / (d * d * d);
}

// Offset u in [0, len] with int_0^u exp(a + c t) dt = q.
double invert_segment(double a, double c, double len, double q) {
  const double scaled = q * std::exp(-a);
  const double y = c * scaled;
  double u;
  if (std::abs(y) < 1e-8)
    u = scaled * (1.0 - 0.5 * y);
  else
    u = std::log1p(y) / c;
  if (!(u >= 0.0)) u = 0.0;
  return std::min(u, len);
}

}  // namespace

namespace segment {

Integrals integrals(double a, double b) {
  Integrals out{};
  if (a >= b) {
    const double d = b - a;
    const double em = std::exp(a);
    const double q0 = k0(d), q1 = k1(d), q2 = k2(d);
    out.j00 = em * q0;
    out.j01 = em * q1;
    out.j02 = em * q2;
    out.j10 = em * (q0 - q1);
    out.j11 = em * (q1 - q2);
    out.j20 = em * (q0 - 2.0 * q1 + q2);
  } else {
    const double d = a - b;
    const double em = std::exp(b);
    const double q0 = k0(d), q1 = k1(d), q2 = k2(d);
    out.j00 = em * q0;
    out.j10 = em * q1;
    out.j20 = em * q2;
    out.j01 = em * (q0 - q1);
    out.j11 = em * (q1 - q2);
    out.j02 = em * (q0 - 2.0 * q1 + q2);
  }
  return out;
}

double j00(double a, double b) {
  return a >= b ? std::exp(a) * k0(b - a) : std::exp(b) * k0(a - b);
}

double j01(double a, double b) {
  if (a >= b) return std::exp(a) * k1(b - a);
  const double d = a - b;
  return std::exp(b) * (k0(d) - k1(d));
}

std::pair<double, double> j00_j01(double a, double b) {
  if (a >= b) {
    const double em = std::exp(a), d = b - a;
    return {em * k0(d), em * k1(d)};
  }
  const double em = std::exp(b), d = a - b;
  const double q0 = k0(d);
  return {em * q0, em * (q0 - k1(d))};
}

}  // namespace segment

// ---------------------------------------------------------------------------
// WeightedSample / StepCDF

WeightedSample::WeightedSample(std::span<const double> points,
                               std::span<const double> weights) {
  if (points.size() != weights.size())
    throw std::invalid_argument("WeightedSample: points and weights differ in length");
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i]))
      throw std::invalid_argument("WeightedSample: non-finite point");
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("WeightedSample: weights must be finite and nonnegative");
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return points[i] < points[j]; });
  for (std::size_t i : order) {
    if (weights[i] == 0.0) continue;
    if (!points_.empty() && points_.back() == points[i])
      weights_.back() += weights[i];
    else {
      points_.push_back(points[i]);
      weights_.push_back(weights[i]);
    }
  }
  if (points_.empty()) throw std::invalid_argument("WeightedSample: no positive weight");
  const double total = numeric::pairwise_sum(weights_);
  for (double& w : weights_) w /= total;
}

WeightedSample WeightedSample::uniform(std::span<const double> points) {
  std::vector<double> w(points.size(), 1.0);
  return WeightedSample(points, w);
}

double WeightedSample::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) s += weights_[i] * points_[i];
  return s;
}

StepCDF::StepCDF(const WeightedSample& ws)
    : jumps_(ws.points().begin(), ws.points().end()) {
  cumulative_.reserve(jumps_.size());
  double acc = 0.0;
  for (double w : ws.weights()) {
    acc += w;
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
}

StepCDF StepCDF::empirical(std::span<const double> sample) {
  return StepCDF(WeightedSample::uniform(sample));
}

double StepCDF::operator()(double x) const {
  auto it = std::upper_bound(jumps_.begin(), jumps_.end(), x);
  if (it == jumps_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

// ---------------------------------------------------------------------------
// PLConcave

PLConcave::PLConcave(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() < 2 || knots_.size() != values_.size())
    throw std::invalid_argument("PLConcave: need at least two knots with matching values");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]) || !std::isfinite(values_[i]))
      throw std::invalid_argument("PLConcave: knots and values must be finite");
    if (i > 0 && !(knots_[i] > knots_[i - 1]))
      throw std::invalid_argument("PLConcave: knots must be strictly increasing");
  }
  if (max_concavity_violation() > 1e-8)
    throw std::invalid_argument("PLConcave: slopes are not non-increasing");
}

PLConcave PLConcave::even_from_half(std::span<const double> half_knots,
                                    std::span<const double> half_values) {
  if (half_knots.empty() || half_knots.size() != half_values.size())
    throw std::invalid_argument("even_from_half: empty or mismatched input");
  if (half_knots.front() < 0.0)
    throw std::invalid_argument("even_from_half: knots must be nonnegative");
  const bool has_zero = half_knots.front() == 0.0;
  if (has_zero && half_knots.size() < 2)
    throw std::invalid_argument("even_from_half: degenerate curve");
  std::vector<double> k, v;
  const std::size_t m = half_knots.size();
  for (std::size_t i = m; i-- > (has_zero ? 1u : 0u);) {
    k.push_back(-half_knots[i]);
    v.push_back(half_values[i]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    k.push_back(half_knots[i]);
    v.push_back(half_values[i]);
  }
  return PLConcave(std::move(k), std::move(v));
}

double PLConcave::slope(std::size_t s) const {
  return (values_[s + 1] - values_[s]) / (knots_[s + 1] - knots_[s]);
}

std::size_t PLConcave::segment_of(double x) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  std::size_t s = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(s, knots_.size() - 2);
}

double PLConcave::eval(double x) const {
  if (!(x >= knots_.front() && x <= knots_.back())) return kNegInf;
  const std::size_t s = segment_of(x);
  if (x == knots_[s]) return values_[s];
  if (x == knots_[s + 1]) return values_[s + 1];
  const double t = (x - knots_[s]) / (knots_[s + 1] - knots_[s]);
  return values_[s] + t * (values_[s + 1] - values_[s]);
}

double PLConcave::right_derivative(double x) const {
  if (!(x >= knots_.front() && x <= knots_.back()))
    throw std::domain_error("right_derivative: x outside the domain");
  return slope(segment_of(x));
}

double PLConcave::left_derivative(double x) const {
  if (!(x >= knots_.front() && x <= knots_.back()))
    throw std::domain_error("left_derivative: x outside the domain");
  if (x == knots_.front()) return slope(0);
  auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
  return slope(static_cast<std::size_t>(it - knots_.begin()) - 1);
}

double PLConcave::max_concavity_violation() const {
  double worst = 0.0;
  for (std::size_t s = 0; s + 2 < knots_.size(); ++s) {
    const double a = slope(s), b = slope(s + 1);
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    worst = std::max(worst, (b - a) / scale);
  }
  return worst;
}

PLConcave PLConcave::reflected() const {
  std::vector<double> k(knots_.rbegin(), knots_.rend());
  for (double& x : k) x = -x;
  return PLConcave(std::move(k), std::vector<double>(values_.rbegin(), values_.rend()));
}

PLConcave PLConcave::shifted(double offset) const {
  std::vector<double> k = knots_;
  for (double& x : k) x += offset;
  return PLConcave(std::move(k), values_);
}

PLConcave PLConcave::plus_constant(double c) const {
  std::vector<double> v = values_;
  for (double& y : v) y += c;
  return PLConcave(knots_, std::move(v));
}

PLConcave least_concave_majorant(std::span<const double> x,
                                 std::span<const double> y) {
  if (x.size() < 2 || x.size() != y.size())
    throw std::invalid_argument("least_concave_majorant: need two or more points");
  // Upper hull, monotone chain.
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      const double cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  std::vector<double> k, v;
  for (std::size_t i : hull) {
    k.push_back(x[i]);
    v.push_back(y[i]);
  }
  return PLConcave(std::move(k), std::move(v));
}

// ---------------------------------------------------------------------------
// ExpLinearDensity

ExpLinearDensity::ExpLinearDensity(PLConcave logf) : logf_(std::move(logf)) {
  const auto k = logf_.knots();
  const auto v = logf_.values();
  std::vector<double> masses(k.size() - 1);
  for (std::size_t s = 0; s + 1 < k.size(); ++s)
    masses[s] = (k[s + 1] - k[s]) * segment::j00(v[s], v[s + 1]);
  normalizer_ = numeric::pairwise_sum(masses);
  if (!(normalizer_ > 0.0) || !std::isfinite(normalizer_))
    throw std::invalid_argument("ExpLinearDensity: mass is not positive and finite");
  logf_ = logf_.plus_constant(-std::log(normalizer_));
  cumulative_.assign(k.size(), 0.0);
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < k.size(); ++s) {
    acc += masses[s] / normalizer_;
    cumulative_[s + 1] = acc;
  }
  // Renormalize the running sum so the last knot sits at exactly one.
  for (double& c : cumulative_) c /= acc;
}

double ExpLinearDensity::pdf(double x) const {
  const double l = logf_.eval(x);
  return std::isinf(l) ? 0.0 : std::exp(l);
}

double ExpLinearDensity::cdf(double x) const {
  if (x <= lower()) return 0.0;
  if (x >= upper()) return 1.0;
  const auto k = logf_.knots();
  const auto v = logf_.values();
  const std::size_t s = logf_.segment_of(x);
  const double partial = (x - k[s]) * segment::j00(v[s], logf_.eval(x));
  return std::clamp(cumulative_[s] + partial, 0.0, 1.0);
}

double ExpLinearDensity::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("quantile: p must lie in (0,1)");
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), p);
  std::size_t s = static_cast<std::size_t>(it - cumulative_.begin());
  s = std::clamp<std::size_t>(s, 1, cumulative_.size() - 1) - 1;
  const auto k = logf_.knots();
  const auto v = logf_.values();
  const double len = k[s + 1] - k[s];
  const double u = invert_segment(v[s], logf_.slope(s), len, p - cumulative_[s]);
  return k[s] + u;
}

Moments ExpLinearDensity::moments() const {
  const auto k = logf_.knots();
  const auto v = logf_.values();
  const std::size_t n = k.size() - 1;
  std::vector<double> first(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double len = k[s + 1] - k[s];
    const auto j = segment::integrals(v[s], v[s + 1]);
    first[s] = k[s] * len * j.j00 + len * len * j.j01;
  }
  Moments m;
  m.mean = numeric::pairwise_sum(first);
  std::vector<double> second(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double len = k[s + 1] - k[s];
    const auto j = segment::integrals(v[s], v[s + 1]);
    const double off = k[s] - m.mean;
    second[s] = off * off * len * j.j00 + 2.0 * off * len * len * j.j01 +
                len * len * len * j.j02;
  }
  m.variance = std::max(0.0, numeric::pairwise_sum(second));
  return m;
}

double ExpLinearDensity::upper_excess(double t) const {
  const auto k = logf_.knots();
  const auto v = logf_.values();
  if (t >= upper()) return 0.0;
  if (t <= lower()) return moments().mean - t;
  const std::size_t s0 = logf_.segment_of(t);
  double total = 0.0;
  {
    const double len = k[s0 + 1] - t;
    total += len * len * segment::j01(logf_.eval(t), v[s0 + 1]);
  }
  for (std::size_t s = s0 + 1; s + 1 < k.size(); ++s) {
    const double len = k[s + 1] - k[s];
    const auto j = segment::integrals(v[s], v[s + 1]);
    total += (k[s] - t) * len * j.j00 + len * len * j.j01;
  }
  return total;
}

double ExpLinearDensity::mass_between(double a, double b) const {
  if (b <= a) return 0.0;
  return cdf(b) - cdf(a);
}

ExpLinearDensity ExpLinearDensity::reflected() const {
  return ExpLinearDensity(logf_.reflected());
}

ExpLinearDensity ExpLinearDensity::shifted(double offset) const {
  return ExpLinearDensity(logf_.shifted(offset));
}

// ---------------------------------------------------------------------------
// Gaussian convolution

GaussianConvolution convolve_gaussian(const ExpLinearDensity& d, double sigma,
                                      double x) {
  if (!(sigma > 0.0)) throw std::invalid_argument("convolve_gaussian: sigma must be positive");
  const auto k = d.log_density().knots();
  const auto v = d.log_density().values();
  const std::size_t n = k.size() - 1;
  const double log_norm = -numeric::kLogSqrt2Pi - std::log(sigma);

  // Terms as (log magnitude, sign); the density terms are all positive.
  std::vector<double> dens_log(n);
  std::vector<std::pair<double, double>> deriv;
  deriv.reserve(n + 2);
  for (std::size_t s = 0; s < n; ++s) {
    const double c = d.log_density().slope(s);
    const double e = v[s] + c * (x - k[s]) + 0.5 * c * c * sigma * sigma;
    const double u1 = (k[s] - x - c * sigma * sigma) / sigma;
    const double u2 = (k[s + 1] - x - c * sigma * sigma) / sigma;
    dens_log[s] = e + numeric::log_normal_diff(u1, u2);
    if (c != 0.0) deriv.emplace_back(dens_log[s] + std::log(std::abs(c)), c > 0 ? 1.0 : -1.0);
  }
  // Boundary terms of the derivative; interior knots telescope because f is
  // continuous inside its domain.
  const double zl = (x - k.front()) / sigma;
  const double zr = (x - k.back()) / sigma;
  deriv.emplace_back(v.front() - 0.5 * zl * zl + log_norm, 1.0);
  deriv.emplace_back(v.back() - 0.5 * zr * zr + log_norm, -1.0);

  double top = -std::numeric_limits<double>::infinity();
  for (double l : dens_log) top = std::max(top, l);
  GaussianConvolution out;
  if (std::isinf(top)) {
    out.density = 0.0;
    out.log_density = top;
    out.log_derivative = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double dens = 0.0;
  for (double l : dens_log) dens += std::exp(l - top);
  double der = 0.0;
  for (const auto& [l, sgn] : deriv) der += sgn * std::exp(l - top);
  out.log_density = top + std::log(dens);
  out.density = std::exp(out.log_density);
  out.log_derivative = der / dens;
  return out;
}

double convolve_gaussian_cdf(const ExpLinearDensity& d, double sigma, double x) {
  if (!(sigma > 0.0)) throw std::invalid_argument("convolve_gaussian_cdf: sigma must be positive");
  if (x < d.lower() - 40.0 * sigma) return 0.0;
  if (x > d.upper() + 40.0 * sigma) return 1.0;
  const auto k = d.log_density().knots();
  const auto v = d.log_density().values();
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < k.size(); ++s) {
    const double l = k[s], r = k[s + 1];
    const double c = d.log_density().slope(s);
    if (std::abs(c) * (r - l) >= 0.5) {
      // By parts: (1/c)[f Phi((x-y)/sigma)]_l^r + (1/c) int f phi_sigma(x-y) dy.
      const double e = v[s] + c * (x - l) + 0.5 * c * c * sigma * sigma;
      const double u1 = (l - x - c * sigma * sigma) / sigma;
      const double u2 = (r - x - c * sigma * sigma) / sigma;
      const double piece = std::exp(e + numeric::log_normal_diff(u1, u2));
      const double boundary = std::exp(v[s + 1]) * numeric::normal_cdf((x - r) / sigma) -
                              std::exp(v[s]) * numeric::normal_cdf((x - l) / sigma);
      total += (boundary + piece) / c;
    } else {
      auto integrand = [&](double y) {
        return std::exp(v[s] + c * (y - l)) * numeric::normal_cdf((x - y) / sigma);
      };
      numeric::QuadOptions opt;
      opt.abs_tol = 1e-15;
      opt.rel_tol = 1e-13;
      const double bp[] = {x};
      total += numeric::integrate(integrand, l, r, opt, bp).value;
    }
  }
  return std::clamp(total, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Distances

namespace {

struct CdfView {
  std::function<double(double)> cdf;
  std::vector<double> breaks;
  bool step = false;
};

CdfView view(const StepCDF& f) {
  return {[&f](double x) { return f(x); },
          std::vector<double>(f.jumps().begin(), f.jumps().end()), true};
}

CdfView view(const ExpLinearDensity& f) {
  return {[&f](double x) { return f.cdf(x); },
          std::vector<double>(f.log_density().knots().begin(), f.log_density().knots().end()),
          false};
}

double abs_integral_smooth(const std::function<double(double)>& diff, double a,
                           double b) {
  // Split at sign changes found on a probe grid, then integrate each piece.
  constexpr int kProbes = 16;
  std::vector<double> cuts{a};
  double prev_x = a, prev = diff(a);
  for (int i = 1; i <= kProbes; ++i) {
    const double x = a + (b - a) * i / kProbes;
    const double cur = diff(x);
    if ((prev < 0.0 && cur > 0.0) || (prev > 0.0 && cur < 0.0))
      cuts.push_back(numeric::find_root(diff, prev_x, x, 1e-15 * std::max(1.0, std::abs(x))));
    prev_x = x;
    prev = cur;
  }
  cuts.push_back(b);
  numeric::QuadOptions opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-12;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += std::abs(numeric::integrate(diff, cuts[i], cuts[i + 1], opt).value);
  return total;
}

double wasserstein_views(const CdfView& f, const CdfView& g,
                         std::vector<double> extra = {}) {
  std::vector<double> cuts = f.breaks;
  cuts.insert(cuts.end(), g.breaks.begin(), g.breaks.end());
  cuts.insert(cuts.end(), extra.begin(), extra.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto diff = [&](double x) { return f.cdf(x) - g.cdf(x); };
  std::vector<double> parts;
  parts.reserve(cuts.size());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (f.step && g.step)
      parts.push_back(std::abs(diff(a)) * (b - a));
    else
      parts.push_back(abs_integral_smooth(diff, a, b));
  }
  return numeric::pairwise_sum(parts);
}

}  // namespace

double wasserstein(const StepCDF& f, const StepCDF& g) {
  return wasserstein_views(view(f), view(g));
}
double wasserstein(const ExpLinearDensity& f, const ExpLinearDensity& g) {
  return wasserstein_views(view(f), view(g));
}
double wasserstein(const StepCDF& f, const ExpLinearDensity& g) {
  return wasserstein_views(view(f), view(g));
}
double wasserstein(const ExpLinearDensity& f, const StepCDF& g) {
  return wasserstein(g, f);
}

double wasserstein(const ExpLinearDensity& f,
                   const std::function<double(double)>& cdf, double lo,
                   double hi) {
  CdfView g{cdf, {lo, hi}, false};
  // Extra cuts keep the probe grid fine over long windows.
  std::vector<double> extra;
  const int pieces = 64;
  const double a = std::min(lo, f.lower()), b = std::max(hi, f.upper());
  for (int i = 1; i < pieces; ++i) extra.push_back(a + (b - a) * i / pieces);
  return wasserstein_views(view(f), g, std::move(extra));
}

double hellinger(const DensityFn& f, const DensityFn& g,
                 const HellingerWindow& window) {
  if (!(window.upper > window.lower))
    throw std::invalid_argument("hellinger: empty window");
  numeric::QuadOptions opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-12;
  opt.max_subdivisions = 20000;
  const double mass_f = numeric::integrate(f, window.lower, window.upper, opt, window.breakpoints).value;
  const double mass_g = numeric::integrate(g, window.lower, window.upper, opt, window.breakpoints).value;
  if (mass_f < 1.0 - 1e-8 || mass_g < 1.0 - 1e-8)
    throw CoverageError("hellinger: window covers " + std::to_string(std::min(mass_f, mass_g)) +
                        " of the mass, need at least 1 - 1e-8");
  auto integrand = [&](double x) {
    const double a = std::sqrt(std::max(0.0, f(x)));
    const double b = std::sqrt(std::max(0.0, g(x)));
    return (a - b) * (a - b);
  };
  const double h2 = 0.5 * numeric::integrate(integrand, window.lower, window.upper, opt,
                                             window.breakpoints).value;
  return std::sqrt(std::clamp(h2, 0.0, 1.0));
}

}  // namespace lcsym
