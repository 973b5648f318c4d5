#include "lcsym/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

namespace lcsym::numeric {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Kronrod 15-point nodes (nonnegative half) and weights; Gauss 7-point
// weights live on the odd-indexed Kronrod nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gk15(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  Panel p{a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
  if (!std::isfinite(p.value)) p.error = std::numeric_limits<double>::infinity();
  return p;
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double log_normal_sf(double x) {
  if (x < 30.0) return std::log(normal_sf(x));
  // Q(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - kLogSqrt2Pi - std::log(x) + std::log(series);
}

double log_normal_diff(double lo, double hi) {
  if (!(lo < hi)) return -std::numeric_limits<double>::infinity();
  if (lo >= 0.0) {
    // Q(lo) - Q(hi) = Q(lo) (1 - Q(hi)/Q(lo))
    const double la = log_normal_sf(lo);
    if (std::isinf(hi)) return la;
    const double lb = log_normal_sf(hi);
    return la + std::log1p(-std::exp(lb - la));
  }
  if (hi <= 0.0) return log_normal_diff(-hi, -lo);
  // Straddles zero: the difference is at least min(Phi(hi)-1/2, 1/2-Phi(lo)).
  const double upper = std::isinf(hi) ? 1.0 : normal_cdf(hi);
  const double lower = std::isinf(lo) ? 0.0 : normal_cdf(lo);
  return std::log(upper - lower);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

QuadResult integrate(const Integrand& f, double a, double b,
                     const QuadOptions& opt,
                     std::span<const double> breakpoints) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> cuts{a};
  for (double x : breakpoints)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Panel> heap;
  double total = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p = gk15(f, cuts[i], cuts[i + 1]);
    total += p.value;
    error += p.error;
    heap.push(p);
    out.evaluations += 15;
  }
  int subdivisions = 0;
  while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) &&
         subdivisions < opt.max_subdivisions) {
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval at machine resolution
    heap.pop();
    Panel left = gk15(f, worst.a, mid);
    Panel right = gk15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
    // Re-sum periodically so the running totals do not drift.
    if (subdivisions % 64 == 0) {
      auto copy = heap;
      total = error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  total = error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = sign * total;
  out.abs_error = error;
  out.converged = std::isfinite(total) &&
                  error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  return out;
}

QuadResult integrate_upper(const Integrand& f, double a,
                           const QuadOptions& opt) {
  auto g = [&](double t) {
    const double s = 1.0 - t;
    if (s <= 0.0) return 0.0;
    const double x = a + t / s;
    const double v = f(x) / (s * s);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, opt);
}

QuadResult integrate_lower(const Integrand& f, double b,
                           const QuadOptions& opt) {
  return integrate_upper([&](double x) { return f(2.0 * b - x); }, b, opt);
}

QuadResult integrate_real_line(const Integrand& f, const QuadOptions& opt,
                               std::span<const double> breakpoints) {
  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  if (cuts.empty()) cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  QuadResult lo = integrate_lower(f, cuts.front(), opt);
  QuadResult hi = integrate_upper(f, cuts.back(), opt);
  QuadResult mid;
  mid.converged = true;
  if (cuts.size() > 1) mid = integrate(f, cuts.front(), cuts.back(), opt, cuts);
  QuadResult out;
  out.value = lo.value + mid.value + hi.value;
  out.abs_error = lo.abs_error + mid.abs_error + hi.abs_error;
  out.evaluations = lo.evaluations + mid.evaluations + hi.evaluations;
  out.converged = lo.converged && mid.converged && hi.converged;
  return out;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol, int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("find_root: no sign change on bracket");
  auto tol = [x_tol](double a, double b) { return std::abs(b - a) <= x_tol; };
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (a + b);
}

double invert_monotone(const std::function<double(double)>& cdf, double p,
                       double lo, double hi, double x_tol) {
  for (int i = 0; i < 2000 && hi - lo > x_tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) >= p)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

GoldenResult golden_section_maximize(const std::function<double(double)>& f,
                                     double lo, double hi, double tol) {
  const double inv_phi = 0.61803398874989484820;
  GoldenResult out;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c), fd = f(d);
  out.evaluations = 2;
  while (hi - lo > tol) {
    // Ties move toward the lower end so the smaller maximizer is kept.
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
    ++out.evaluations;
  }
  if (fc >= fd) {
    out.argmax = c;
    out.value = fc;
  } else {
    out.argmax = d;
    out.value = fd;
  }
  return out;
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace lcsym::numeric
