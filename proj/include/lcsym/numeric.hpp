#ifndef LCSYM_NUMERIC_HPP_
#define LCSYM_NUMERIC_HPP_

#include <functional>
#include <span>
#include <vector>

namespace lcsym::numeric {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double x);
// Phi(x) through erfc; absolute error at the level of the libm erfc.
double normal_cdf(double x);
// 1 - Phi(x), accurate in the upper tail.
double normal_sf(double x);
// log(1 - Phi(x)); switches to the asymptotic Mills-ratio series for x > 30.
double log_normal_sf(double x);
// log(Phi(hi) - Phi(lo)) for lo < hi, stable in both tails.
double log_normal_diff(double lo, double hi);
double normal_quantile(double p);

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
};

using Integrand = std::function<double(double)>;

// Globally adaptive Gauss-Kronrod (7/15) on [a, b]. Breakpoints inside
// (a, b) are used as initial subdivision points.
QuadResult integrate(const Integrand& f, double a, double b,
                     const QuadOptions& opt = {},
                     std::span<const double> breakpoints = {});

// Integral over [a, +inf) via x = a + t / (1 - t).
QuadResult integrate_upper(const Integrand& f, double a,
                           const QuadOptions& opt = {});
// Integral over (-inf, b].
QuadResult integrate_lower(const Integrand& f, double b,
                           const QuadOptions& opt = {});
// Integral over the real line, split at the given finite breakpoints.
QuadResult integrate_real_line(const Integrand& f, const QuadOptions& opt = {},
                               std::span<const double> breakpoints = {});

// Root of a function that changes sign on [lo, hi] (TOMS 748).
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol = 1e-13, int max_iter = 200);

// Smallest x in [lo, hi] with F(x) >= p for a nondecreasing F.
double invert_monotone(const std::function<double(double)>& cdf, double p,
                       double lo, double hi, double x_tol = 1e-13);

struct GoldenResult {
  double argmax = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

// Golden-section search for a maximum on [lo, hi], stopping when the
// bracket is narrower than tol.
GoldenResult golden_section_maximize(const std::function<double(double)>& f,
                                     double lo, double hi, double tol);

// Pairwise summation; result does not depend on evaluation order of the
// caller, only on the order of the input.
double pairwise_sum(std::span<const double> xs);

}  // namespace lcsym::numeric

#endif  // LCSYM_NUMERIC_HPP_
