#include "lcsym/onestep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lcsym/errors.hpp"
#include "lcsym/numeric.hpp"
#include "lcsym/symmle.hpp"

namespace lcsym {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInfoFloor = 1e-12;

// f(x) times the right (or left) derivative of log f, 0 off the support.
double density_derivative(const ExpLinearDensity& f, double x, bool right) {
  if (x < f.lower() || x > f.upper()) return 0.0;
  const PLConcave& phi = f.log_density();
  return f.pdf(x) * (right ? phi.right_derivative(x) : phi.left_derivative(x));
}

double sample_variance(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / (n - 1.0);
}

}  // namespace

double preliminary(std::span<const double> sample, const PreliminaryKind& kind) {
  if (sample.empty()) throw std::invalid_argument("preliminary: empty sample");
  const std::size_t n = sample.size();
  switch (kind.kind) {
    case PreliminaryKind::Kind::Mean:
      return std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(n);
    case PreliminaryKind::Kind::Median: {
      std::vector<double> xs(sample.begin(), sample.end());
      std::sort(xs.begin(), xs.end());
      return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
    }
    case PreliminaryKind::Kind::TrimmedMean: {
      if (!(kind.alpha >= 0.0 && kind.alpha < 0.5))
        throw std::invalid_argument("preliminary: trimming fraction must lie in [0, 0.5)");
      const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * kind.alpha));
      if (2 * k >= n) throw std::invalid_argument("preliminary: trimming leaves no data");
      std::vector<double> xs(sample.begin(), sample.end());
      std::sort(xs.begin(), xs.end());
      const double sum = std::accumulate(xs.begin() + k, xs.end() - k, 0.0);
      return sum / static_cast<double>(n - 2 * k);
    }
    case PreliminaryKind::Kind::LogisticMLE: {
      const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
      if (*lo == *hi) return *lo;
      // Logistic location score; strictly decreasing in theta.
      const auto eq = [&](double t) {
        double s = 0.0;
        for (double x : sample) s += std::tanh(0.5 * (x - t));
        return s;
      };
      return numeric::find_root(eq, *lo, *hi, 1e-12);
    }
  }
  return 0.0;
}

SymmetricDensityModel SymmetricDensityModel::reference(const RefDensity& ref, double theta_bar) {
  SymmetricDensityModel m(Kind::Reference, theta_bar);
  m.ref_ = ref;
  m.half_width_ = ref.support_bound();
  return m;
}

SymmetricDensityModel estimate_density(std::span<const double> sample, double theta_bar,
                                       DensityEstimatorKind kind, const FitConfig& cfg) {
  using Kind = SymmetricDensityModel::Kind;
  if (sample.size() < 2) throw DegenerateSampleError("need at least two observations");
  const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw DegenerateSampleError("sample has fewer than two distinct values");

  switch (kind) {
    case DensityEstimatorKind::PartialMLE: {
      SymmetricDensityModel m(Kind::PartialMLE, theta_bar);
      m.g_ = fit_fixed_theta(sample, theta_bar, cfg).density();
      m.half_width_ = m.g_->upper();
      return m;
    }
    case DensityEstimatorKind::Sym:
    case DensityEstimatorKind::SmoothedSym: {
      SymmetricDensityModel m(kind == DensityEstimatorKind::Sym ? Kind::Sym : Kind::SmoothedSym,
                              theta_bar);
      m.fhat_ = fit(WeightedSample::uniform(sample), cfg).density;
      m.half_width_ = std::max(hi - theta_bar, theta_bar - lo);
      if (kind == DensityEstimatorKind::SmoothedSym) {
        const double b2 = sample_variance(sample) - m.fhat_->moments().variance;
        if (b2 > 0.0) {
          m.bandwidth_ = std::sqrt(b2);
          m.half_width_ = kInf;
        } else {
          m.bandwidth_clamped_ = true;
        }
      }
      return m;
    }
    case DensityEstimatorKind::GeoSym: {
      if (!(theta_bar > lo && theta_bar < hi))
        throw EmptySupportError("geometric symmetrization needs theta_bar inside the data range");
      const ExpLinearDensity fhat = fit(WeightedSample::uniform(sample), cfg).density;
      const PLConcave& phi = fhat.log_density();
      const double m_half = std::min(hi - theta_bar, theta_bar - lo);
      std::vector<double> half{0.0, m_half};
      for (double k : phi.knots()) {
        const double a = std::abs(k - theta_bar);
        if (a > 0.0 && a < m_half) half.push_back(a);
      }
      std::sort(half.begin(), half.end());
      half.erase(std::unique(half.begin(), half.end()), half.end());
      std::vector<double> values;
      values.reserve(half.size());
      for (double h : half) values.push_back(0.5 * (phi.eval(theta_bar + h) + phi.eval(theta_bar - h)));
      SymmetricDensityModel m(Kind::GeoSym, theta_bar);
      m.g_ = ExpLinearDensity(PLConcave::even_from_half(half, values));
      m.geo_normalizer_ = 1.0 / m.g_->normalizer();
      m.half_width_ = m_half;
      return m;
    }
  }
  throw std::invalid_argument("estimate_density: unknown kind");
}

double SymmetricDensityModel::support_bound() const { return half_width_; }

std::pair<double, double> SymmetricDensityModel::reflected_terms(double z, bool right) const {
  const double xp = theta_bar_ + z, xm = theta_bar_ - z;
  if (kind_ == Kind::SmoothedSym && !bandwidth_clamped_) {
    const GaussianConvolution a = convolve_gaussian(*fhat_, bandwidth_, xp);
    const GaussianConvolution b = convolve_gaussian(*fhat_, bandwidth_, xm);
    return {a.density + b.density,
            a.density * a.log_derivative - b.density * b.log_derivative};
  }
  // d/dz f(theta - z) from the right is minus the left derivative of f.
  return {fhat_->pdf(xp) + fhat_->pdf(xm),
          density_derivative(*fhat_, xp, right) - density_derivative(*fhat_, xm, !right)};
}

double SymmetricDensityModel::pdf(double z) const {
  switch (kind_) {
    case Kind::Sym:
    case Kind::SmoothedSym: return 0.5 * reflected_terms(z, true).first;
    case Kind::PartialMLE:
    case Kind::GeoSym: return g_->pdf(z);
    case Kind::Reference: return ref_->pdf(z);
  }
  return 0.0;
}

double SymmetricDensityModel::symmetrized_cdf(double x) const {
  if (kind_ == Kind::SmoothedSym && !bandwidth_clamped_)
    return convolve_gaussian_cdf(*fhat_, bandwidth_, x);
  return fhat_->cdf(x);
}

double SymmetricDensityModel::cdf(double z) const {
  switch (kind_) {
    case Kind::Sym:
    case Kind::SmoothedSym:
      return 0.5 * (symmetrized_cdf(theta_bar_ + z) + 1.0 - symmetrized_cdf(theta_bar_ - z));
    case Kind::PartialMLE:
    case Kind::GeoSym: return g_->cdf(z);
    case Kind::Reference: return ref_->cdf(z);
  }
  return 0.0;
}

double SymmetricDensityModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile: p must lie in (0, 1)");
  switch (kind_) {
    case Kind::PartialMLE:
    case Kind::GeoSym: return g_->quantile(p);
    case Kind::Reference: return ref_->quantile(p);
    default: break;
  }
  if (p == 0.5) return 0.0;
  const double q = std::max(p, 1.0 - p);
  double hi = std::isfinite(half_width_) ? half_width_ : 1.0;
  if (!std::isfinite(half_width_))
    while (cdf(hi) < q) hi *= 2.0;
  const double z = numeric::find_root([&](double t) { return cdf(t) - q; }, 0.0, hi, 1e-13);
  return p < 0.5 ? -z : z;
}

double SymmetricDensityModel::score(double z) const {
  if (z > half_width_) return -kInf;
  if (z < -half_width_) return kInf;
  switch (kind_) {
    case Kind::Sym:
    case Kind::SmoothedSym: {
      const auto [value, deriv] = reflected_terms(z, z != half_width_);
      if (!(value > 0.0)) return z > 0.0 ? -kInf : kInf;
      return deriv / value;
    }
    case Kind::PartialMLE:
    case Kind::GeoSym: return g_->log_density().right_derivative(z);
    case Kind::Reference: return ref_->score(z);
  }
  return 0.0;
}

double SymmetricDensityModel::model_info(double xi) const {
  xi = std::min(xi, half_width_);
  if (g_) {
    const PLConcave& psi = g_->log_density();
    const auto k = psi.knots();
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < k.size(); ++s) {
      const double a = std::max(k[s], -xi), b = std::min(k[s + 1], xi);
      if (b <= a) continue;
      const double slope = psi.slope(s);
      total += slope * slope * g_->mass_between(a, b);
    }
    return total;
  }
  std::vector<double> breaks;
  if (fhat_ && bandwidth_ == 0.0)
    for (double k : fhat_->log_density().knots()) {
      const double a = std::abs(k - theta_bar_);
      if (a > 0.0 && a < xi) breaks.push_back(a);
    }
  std::sort(breaks.begin(), breaks.end());
  const auto f = [&](double z) {
    const double s = score(z);
    return s * s * pdf(z);
  };
  const auto q = numeric::integrate(f, 0.0, xi, {.abs_tol = 1e-12, .rel_tol = 1e-9}, breaks);
  if (!q.converged) throw QuadratureError("model_info: quadrature did not converge");
  return 2.0 * q.value;
}

FisherEstimate fisher_estimate(std::span<const double> sample, const SymmetricDensityModel& model,
                               double eta, FisherVariant variant) {
  if (sample.empty()) throw std::invalid_argument("fisher_estimate: empty sample");
  if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("fisher_estimate: eta must lie in (0, 0.5)");
  const double n = static_cast<double>(sample.size());
  const double t = model.theta_bar();
  FisherEstimate out;
  out.xi = variant == FisherVariant::Untruncated ? kInf : model.quantile(1.0 - eta);

  std::vector<double> terms;
  terms.reserve(sample.size());
  for (double x : sample) {
    const bool inside = x >= t - out.xi && x <= t + out.xi;
    const double s = model.score(x - t);
    if (!std::isfinite(s)) {
      ++out.dropped;
      continue;
    }
    if (!inside) continue;
    ++out.in_window;
    terms.push_back(s * s);
  }
  if (variant == FisherVariant::ModelWeighted)
    out.value = model.model_info(out.xi);
  else
    out.value = numeric::pairwise_sum(terms) / n;
  if (!(out.value > kInfoFloor))
    throw DegenerateInformationError("estimated Fisher information is zero");
  return out;
}

double fisher_hat(std::span<const double> sample, const SymmetricDensityModel& model, double eta,
                  FisherVariant variant) {
  return fisher_estimate(sample, model, eta, variant).value;
}

OneStepReport one_step(std::span<const double> sample, const SymmetricDensityModel& model,
                       const OneStepConfig& cfg) {
  const FisherEstimate info = fisher_estimate(sample, model, cfg.eta, cfg.fisher);
  const double t = model.theta_bar();
  const double xi = cfg.truncated ? model.quantile(1.0 - cfg.eta) : kInf;
  OneStepReport rep{.theta_tilde = t,
                    .theta_bar = t,
                    .xi = xi,
                    .info = info.value,
                    .in_window = 0,
                    .dropped = info.dropped,
                    .bandwidth_clamped = model.bandwidth_clamped()};
  std::vector<double> terms;
  terms.reserve(sample.size());
  for (double x : sample) {
    if (!(x >= t - xi && x <= t + xi)) continue;
    const double s = model.score(x - t);
    if (!std::isfinite(s)) continue;
    ++rep.in_window;
    terms.push_back(s);
  }
  const double correction = numeric::pairwise_sum(terms) / static_cast<double>(sample.size());
  rep.theta_tilde = t - correction / info.value;
  return rep;
}

OneStepReport one_step(std::span<const double> sample, const OneStepConfig& cfg) {
  const double t = preliminary(sample, cfg.preliminary);
  return one_step(sample, estimate_density(sample, t, cfg.density, cfg.fit), cfg);
}

}  // namespace lcsym
