#ifndef LCSYM_PLCURVE_HPP_
#define LCSYM_PLCURVE_HPP_

// Piecewise-linear concave log-densities and the exp-linear densities they
// define. All integrals over a linear piece are done in closed form.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace lcsym {

// Atoms with nonnegative weights summing to one. Construction sorts the
// points, merges duplicates (summing their weights), drops zero-weight
// atoms and renormalizes.
class WeightedSample {
 public:
  WeightedSample(std::span<const double> points, std::span<const double> weights);
  static WeightedSample uniform(std::span<const double> points);

  std::span<const double> points() const { return points_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return points_.size(); }
  double mean() const;

 private:
  WeightedSample() = default;
  std::vector<double> points_;
  std::vector<double> weights_;
};

// Right-continuous step distribution function.
class StepCDF {
 public:
  explicit StepCDF(const WeightedSample& ws);
  static StepCDF empirical(std::span<const double> sample);

  double operator()(double x) const;
  std::span<const double> jumps() const { return jumps_; }
  std::span<const double> cumulative() const { return cumulative_; }

 private:
  std::vector<double> jumps_;
  std::vector<double> cumulative_;
};

// Concave function, linear between knots and -inf outside [first, last].
class PLConcave {
 public:
  PLConcave(std::vector<double> knots, std::vector<double> values);

  // Even curve built from its restriction to [0, last]: knots must be
  // nonnegative and increasing. A first knot above zero means the curve is
  // flat across the origin.
  static PLConcave even_from_half(std::span<const double> half_knots,
                                  std::span<const double> half_values);

  std::span<const double> knots() const { return knots_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return knots_.size(); }
  double lower() const { return knots_.front(); }
  double upper() const { return knots_.back(); }
  double slope(std::size_t segment) const;

  // Linear interpolation inside the domain, -inf outside.
  double eval(double x) const;
  // Right derivative; at the upper endpoint the left derivative. Throws
  // std::domain_error outside the domain.
  double right_derivative(double x) const;
  // Left derivative; at the lower endpoint the right derivative.
  double left_derivative(double x) const;

  // Largest positive increase of consecutive slopes, relative to their size.
  double max_concavity_violation() const;

  PLConcave reflected() const;
  PLConcave shifted(double offset) const;
  PLConcave plus_constant(double c) const;

  // Index s with knots[s] <= x < knots[s+1]; the last segment is closed.
  std::size_t segment_of(double x) const;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

inline double eval_log(const PLConcave& pl, double x) { return pl.eval(x); }
inline double right_derivative(const PLConcave& pl, double x) {
  return pl.right_derivative(x);
}

// Least concave majorant of the points (x_i, y_i), x strictly increasing.
PLConcave least_concave_majorant(std::span<const double> x,
                                 std::span<const double> y);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// exp(logf) normalized to integrate to one.
class ExpLinearDensity {
 public:
  explicit ExpLinearDensity(PLConcave logf);

  const PLConcave& log_density() const { return logf_; }
  // Mass of exp(logf) for the curve passed to the constructor.
  double normalizer() const { return normalizer_; }
  double lower() const { return logf_.lower(); }
  double upper() const { return logf_.upper(); }

  double pdf(double x) const;
  double log_pdf(double x) const { return logf_.eval(x); }
  double cdf(double x) const;
  double quantile(double p) const;
  Moments moments() const;
  // Integral of (x - t)_+ f(x) dx.
  double upper_excess(double t) const;
  // Integral of f over [a, b] intersected with the domain.
  double mass_between(double a, double b) const;

  ExpLinearDensity reflected() const;
  ExpLinearDensity shifted(double offset) const;

 private:
  PLConcave logf_;
  double normalizer_ = 1.0;
  std::vector<double> cumulative_;  // F at each knot
};

inline double segment_cdf(const ExpLinearDensity& d, double x) { return d.cdf(x); }
inline double quantile(const ExpLinearDensity& d, double p) { return d.quantile(p); }
inline Moments moments(const ExpLinearDensity& d) { return d.moments(); }

struct GaussianConvolution {
  double density = 0.0;
  double log_density = 0.0;
  double log_derivative = 0.0;
};

// (f * N(0, sigma^2))(x) and d/dx of its logarithm, from the exact
// per-segment formula exp(a + bx + b^2 sigma^2 / 2) [Phi(u2) - Phi(u1)].
GaussianConvolution convolve_gaussian(const ExpLinearDensity& d, double sigma,
                                      double x);
// Distribution function of Y + sigma Z, Y ~ d, Z ~ N(0,1).
double convolve_gaussian_cdf(const ExpLinearDensity& d, double sigma, double x);

double wasserstein(const StepCDF& f, const StepCDF& g);
double wasserstein(const ExpLinearDensity& f, const ExpLinearDensity& g);
double wasserstein(const StepCDF& f, const ExpLinearDensity& g);
double wasserstein(const ExpLinearDensity& f, const StepCDF& g);
// Against an arbitrary distribution function; the integral runs over
// [lo, hi] joined with the domain of f.
double wasserstein(const ExpLinearDensity& f,
                   const std::function<double(double)>& cdf, double lo,
                   double hi);

using DensityFn = std::function<double(double)>;

struct HellingerWindow {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> breakpoints;  // discontinuities or kinks of f, g
};

// H(f, g) with H^2 = (1/2) int (sqrt f - sqrt g)^2 over the window. Throws
// CoverageError when the window holds less than 1 - 1e-8 of either mass.
double hellinger(const DensityFn& f, const DensityFn& g,
                 const HellingerWindow& window);

namespace segment {

// j_pq = int_0^1 (1-t)^p t^q exp((1-t) a + t b) dt for p + q <= 2.
struct Integrals {
  double j00, j10, j01, j20, j11, j02;
};
Integrals integrals(double a, double b);
// int_0^1 exp((1-t) a + t b) dt
double j00(double a, double b);
// int_0^1 t exp((1-t) a + t b) dt
double j01(double a, double b);
// Both of the above with a single exponential.
std::pair<double, double> j00_j01(double a, double b);

}  // namespace segment

}  // namespace lcsym

#endif  // LCSYM_PLCURVE_HPP_
