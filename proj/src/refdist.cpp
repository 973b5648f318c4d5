#include "lcsym/refdist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "lcsym/errors.hpp"
#include "lcsym/numeric.hpp"
#include "lcsym/rng.hpp"

namespace lcsym {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile: p must lie in (0, 1)");
}

void require_eta(double eta) {
  if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("eta must lie in (0, 0.5)");
}

double checked(const numeric::QuadResult& q, const char* what) {
  if (!q.converged || !std::isfinite(q.value))
    throw QuadratureError(std::string(what) + ": quadrature did not converge");
  return q.value;
}

double laplace_cdf(double x) {
  return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
}

double laplace_quantile(double p) {
  return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
}

double symbeta_log_constant(double r) {
  return std::lgamma(0.5 * (3.0 + r)) - 0.5 * std::log(std::numbers::pi * r) -
         std::lgamma(1.0 + 0.5 * r);
}

// Quantile of a continuous symmetric cdf by root finding on a bracket that
// doubles until it contains p.
double symmetric_quantile(const RefDensity& ref, double p) {
  if (p == 0.5) return 0.0;
  const double q = std::max(p, 1.0 - p);
  double hi = 1.0;
  while (ref.cdf(hi) < q) hi *= 2.0;
  const double x = numeric::find_root([&](double t) { return ref.cdf(t) - q; }, 0.0, hi, 1e-14);
  return p < 0.5 ? -x : x;
}

// Breakpoints accumulating at the right end of [0, b], for integrands with a
// steep but finite rise there.
std::vector<double> endpoint_breaks(double b) {
  std::vector<double> br;
  for (int k = 1; k <= 40; ++k) br.push_back(b * (1.0 - std::ldexp(1.0, -k)));
  return br;
}

// 2 * int_0^b f over [0, b] with the kinks of the reference densities as
// breakpoints.
double symmetric_integral(const numeric::Integrand& f, double b, std::vector<double> breaks,
                          const char* what) {
  std::vector<double> inside;
  for (double x : breaks)
    if (x > 0.0 && x < b) inside.push_back(x);
  std::sort(inside.begin(), inside.end());
  const numeric::QuadOptions opt{.abs_tol = 1e-13, .rel_tol = 1e-11, .max_subdivisions = 8000};
  return 2.0 * checked(numeric::integrate(f, 0.0, b, opt, inside), what);
}

std::vector<double> kinks(const RefDensity& ref) {
  if (ref.kind() == RefKind::LaplaceMixture) return {2.0};
  if (ref.kind() == RefKind::SymBeta && std::isfinite(ref.support_bound()))
    return endpoint_breaks(ref.support_bound());
  return {};
}

}  // namespace

RefDensity RefDensity::symbeta(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("symbeta: r must be positive");
  return RefDensity(RefKind::SymBeta, r);
}

RefDensity RefDensity::parse(std::string_view tag) {
  if (tag == "normal") return normal();
  if (tag == "logistic") return logistic();
  if (tag == "laplace") return laplace();
  if (tag == "t2") return t2();
  if (tag == "gaussmix") return gauss_mixture();
  if (tag == "laplacemix") return laplace_mixture();
  constexpr std::string_view prefix = "symbeta:";
  if (tag.starts_with(prefix)) {
    const std::string_view num = tag.substr(prefix.size());
    double r = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), r);
    if (ec == std::errc() && ptr == num.data() + num.size() && r > 0.0 && std::isfinite(r))
      return symbeta(r);
  }
  throw ConfigError("unknown density tag '" + std::string(tag) + "'");
}

std::string RefDensity::tag() const {
  switch (kind_) {
    case RefKind::Normal: return "normal";
    case RefKind::Logistic: return "logistic";
    case RefKind::Laplace: return "laplace";
    case RefKind::StudentT2Rescaled: return "t2";
    case RefKind::GaussMixture: return "gaussmix";
    case RefKind::LaplaceMixture: return "laplacemix";
    case RefKind::SymBeta: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, r_);
      return "symbeta:" + std::string(buf, res.ptr);
    }
  }
  return {};
}

bool RefDensity::log_concave() const {
  switch (kind_) {
    case RefKind::Normal:
    case RefKind::Logistic:
    case RefKind::Laplace:
    case RefKind::SymBeta:
      return true;
    default:
      return false;
  }
}

bool RefDensity::in_p0() const { return log_concave() && std::isfinite(fisher_info(*this)); }

double RefDensity::support_bound() const {
  return kind_ == RefKind::SymBeta ? std::sqrt(r_) : kInf;
}

double RefDensity::pdf(double x) const {
  switch (kind_) {
    case RefKind::Normal: return numeric::normal_pdf(x);
    case RefKind::Logistic: {
      const double e = std::exp(-std::abs(x));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case RefKind::Laplace: return 0.5 * std::exp(-std::abs(x));
    case RefKind::SymBeta: {
      const double u = 1.0 - x * x / r_;
      if (u <= 0.0) return 0.0;
      return std::exp(symbeta_log_constant(r_) + 0.5 * r_ * std::log(u));
    }
    case RefKind::StudentT2Rescaled: return 0.5 * std::pow(1.0 + x * x, -1.5);
    case RefKind::GaussMixture:
      return 0.5 * (numeric::normal_pdf(x - 2.0) + numeric::normal_pdf(x + 2.0));
    case RefKind::LaplaceMixture:
      return 0.25 * (std::exp(-std::abs(x - 2.0)) + std::exp(-std::abs(x + 2.0)));
  }
  return 0.0;
}

double RefDensity::log_pdf(double x) const {
  switch (kind_) {
    case RefKind::Normal: return -0.5 * x * x - numeric::kLogSqrt2Pi;
    case RefKind::Logistic: {
      const double a = std::abs(x);
      return -a - 2.0 * std::log1p(std::exp(-a));
    }
    case RefKind::Laplace: return -std::abs(x) - std::numbers::ln2;
    case RefKind::SymBeta: {
      const double u = 1.0 - x * x / r_;
      if (u <= 0.0) return -kInf;
      return symbeta_log_constant(r_) + 0.5 * r_ * std::log(u);
    }
    case RefKind::StudentT2Rescaled: return -std::numbers::ln2 - 1.5 * std::log1p(x * x);
    default: return std::log(pdf(x));
  }
}

double RefDensity::cdf(double x) const {
  switch (kind_) {
    case RefKind::Normal: return numeric::normal_cdf(x);
    case RefKind::Logistic: return 1.0 / (1.0 + std::exp(-x));
    case RefKind::Laplace: return laplace_cdf(x);
    case RefKind::SymBeta: {
      const double s = std::sqrt(r_);
      if (x <= -s) return 0.0;
      if (x >= s) return 1.0;
      const double a = 0.5 * r_ + 1.0;
      const double u = 0.5 * (x / s + 1.0);
      return x < 0.0 ? boost::math::ibeta(a, a, u) : boost::math::ibetac(a, a, 1.0 - u);
    }
    case RefKind::StudentT2Rescaled: {
      const double t = x / std::sqrt(1.0 + x * x);
      // 1 + t loses everything in the far left tail; use 1/(1 - t) form.
      if (x < 0.0) return 0.5 / ((1.0 + x * x) * (1.0 - t));
      return 0.5 * (1.0 + t);
    }
    case RefKind::GaussMixture:
      return 0.5 * (numeric::normal_cdf(x - 2.0) + numeric::normal_cdf(x + 2.0));
    case RefKind::LaplaceMixture:
      return 0.5 * (laplace_cdf(x - 2.0) + laplace_cdf(x + 2.0));
  }
  return 0.0;
}

double RefDensity::quantile(double p) const {
  require_probability(p);
  switch (kind_) {
    case RefKind::Normal: return numeric::normal_quantile(p);
    case RefKind::Logistic: return std::log(p) - std::log1p(-p);
    case RefKind::Laplace: return laplace_quantile(p);
    case RefKind::SymBeta: {
      const double a = 0.5 * r_ + 1.0;
      const double u = p < 0.5 ? boost::math::ibeta_inv(a, a, p) : boost::math::ibetac_inv(a, a, 1.0 - p);
      return std::sqrt(r_) * (2.0 * u - 1.0);
    }
    case RefKind::StudentT2Rescaled: {
      const double y = 2.0 * p - 1.0;
      return y / std::sqrt(4.0 * p * (1.0 - p));
    }
    default: return symmetric_quantile(*this, p);
  }
}

double RefDensity::score(double x) const {
  switch (kind_) {
    case RefKind::Normal: return -x;
    case RefKind::Logistic: return -std::tanh(0.5 * x);
    case RefKind::Laplace: return x >= 0.0 ? -1.0 : 1.0;
    case RefKind::SymBeta: {
      const double s = std::sqrt(r_);
      if (x >= s) return -kInf;
      if (x <= -s) return kInf;
      return -x / (1.0 - x * x / r_);
    }
    case RefKind::StudentT2Rescaled: return -3.0 * x / (1.0 + x * x);
    case RefKind::GaussMixture: return -x + 2.0 * std::tanh(2.0 * x);
    case RefKind::LaplaceMixture:
      if (x >= 2.0) return -1.0;
      if (x < -2.0) return 1.0;
      return std::tanh(x);
  }
  return 0.0;
}

double fisher_info(const RefDensity& ref) {
  switch (ref.kind()) {
    case RefKind::Normal: return 1.0;
    case RefKind::Logistic: return 1.0 / 3.0;
    case RefKind::Laplace: return 1.0;
    case RefKind::StudentT2Rescaled: return 6.0 / 5.0;
    case RefKind::SymBeta: {
      const double r = ref.r();
      if (r <= 2.0) return kInf;
      return std::exp(std::log(r) + std::lgamma(0.5 * r - 1.0) + std::lgamma(0.5 * (3.0 + r)) -
                      std::numbers::ln2 - std::lgamma(0.5 * r + 1.0) -
                      std::lgamma(0.5 * (1.0 + r)));
    }
    default: {
      const auto f = [&](double x) {
        const double s = ref.score(x);
        return s * s * ref.pdf(x);
      };
      return 2.0 * checked(numeric::integrate_upper(f, 0.0, {.abs_tol = 1e-14, .rel_tol = 1e-12}),
                           "fisher_info");
    }
  }
}

double second_moment(const RefDensity& ref) {
  switch (ref.kind()) {
    case RefKind::Normal: return 1.0;
    case RefKind::Logistic: return std::numbers::pi * std::numbers::pi / 3.0;
    case RefKind::Laplace: return 2.0;
    case RefKind::SymBeta: return ref.r() / (ref.r() + 3.0);
    case RefKind::StudentT2Rescaled: return kInf;
    case RefKind::GaussMixture: return 5.0;
    case RefKind::LaplaceMixture: return 6.0;
  }
  return kInf;
}

double truncated_info(const RefDensity& ref, double eta) {
  require_eta(eta);
  const double xi = ref.quantile(1.0 - eta);
  const auto f = [&](double x) {
    const double s = ref.score(x);
    return s * s * ref.pdf(x);
  };
  std::vector<double> br = kinks(ref);
  if (ref.kind() == RefKind::SymBeta) br = endpoint_breaks(xi);
  return symmetric_integral(f, xi, br, "truncated_info");
}

ProjectionResult::ProjectionResult(const RefDensity& source, ProjectionKind kind, double z)
    : source_(source), kind_(kind), z_(z) {}

double ProjectionResult::pdf(double x) const {
  switch (kind_) {
    case ProjectionKind::Identity: return source_.pdf(x);
    case ProjectionKind::Laplace: return 0.5 * std::exp(-std::abs(x));
    case ProjectionKind::FlatTop: return source_.pdf(std::abs(x) <= z_ ? z_ : x);
  }
  return 0.0;
}

double ProjectionResult::log_pdf(double x) const {
  switch (kind_) {
    case ProjectionKind::Identity: return source_.log_pdf(x);
    case ProjectionKind::Laplace: return -std::abs(x) - std::numbers::ln2;
    case ProjectionKind::FlatTop: return source_.log_pdf(std::abs(x) <= z_ ? z_ : x);
  }
  return 0.0;
}

double ProjectionResult::cdf(double x) const {
  switch (kind_) {
    case ProjectionKind::Identity: return source_.cdf(x);
    case ProjectionKind::Laplace: return laplace_cdf(x);
    case ProjectionKind::FlatTop:
      if (std::abs(x) >= z_) return source_.cdf(x);
      return source_.cdf(-z_) + source_.pdf(z_) * (x + z_);
  }
  return 0.0;
}

double ProjectionResult::quantile(double p) const {
  require_probability(p);
  switch (kind_) {
    case ProjectionKind::Identity: return source_.quantile(p);
    case ProjectionKind::Laplace: return laplace_quantile(p);
    case ProjectionKind::FlatTop: {
      const double tail = source_.cdf(-z_);
      if (p <= tail || p >= 1.0 - tail) return source_.quantile(p);
      return -z_ + (p - tail) / source_.pdf(z_);
    }
  }
  return 0.0;
}

double ProjectionResult::score(double x) const {
  switch (kind_) {
    case ProjectionKind::Identity: return source_.score(x);
    case ProjectionKind::Laplace: return x >= 0.0 ? -1.0 : 1.0;
    case ProjectionKind::FlatTop:
      return (x >= z_ || x < -z_) ? source_.score(x) : 0.0;
  }
  return 0.0;
}

double ProjectionResult::second_moment() const {
  switch (kind_) {
    case ProjectionKind::Identity: return lcsym::second_moment(source_);
    case ProjectionKind::Laplace: return 2.0;
    case ProjectionKind::FlatTop: {
      const auto f = [&](double x) { return x * x * source_.pdf(x); };
      const double tail = checked(numeric::integrate_upper(f, z_, {.abs_tol = 1e-14, .rel_tol = 1e-12}),
                                  "second_moment");
      return 2.0 * (source_.pdf(z_) * z_ * z_ * z_ / 3.0 + tail);
    }
  }
  return kInf;
}

ProjectionResult project(const RefDensity& ref) {
  switch (ref.kind()) {
    case RefKind::StudentT2Rescaled: return ProjectionResult(ref, ProjectionKind::Laplace);
    case RefKind::GaussMixture:
    case RefKind::LaplaceMixture: {
      // Mass balance for a density flat on [-z, z] and equal to f outside.
      const auto balance = [&](double z) {
        return 2.0 * z * ref.pdf(z) + 2.0 * (1.0 - ref.cdf(z)) - 1.0;
      };
      const double z = numeric::find_root(balance, 2.0, 10.0, 1e-12);
      return ProjectionResult(ref, ProjectionKind::FlatTop, z);
    }
    default: return ProjectionResult(ref, ProjectionKind::Identity);
  }
}

namespace {

struct ScoreFunctionals {
  double info;
  double gamma;
};

// info = int_{-xi}^{xi} s^2 g0 and gamma = 1 - int s (s - s0) g0 / info.
ScoreFunctionals score_functionals(const RefDensity& ref, const numeric::Integrand& s, double xi,
                                   std::vector<double> breaks, const char* what) {
  const auto sq = [&](double x) {
    const double v = s(x);
    if (!std::isfinite(v)) throw QuadratureError(std::string(what) + ": score unbounded on window");
    return v * v * ref.pdf(x);
  };
  const auto cross = [&](double x) {
    const double v = s(x);
    return v * (v - ref.score(x)) * ref.pdf(x);
  };
  const double info = symmetric_integral(sq, xi, breaks, what);
  const double num = symmetric_integral(cross, xi, breaks, what);
  return {info, 1.0 - num / info};
}

// Projection density convolved with N(0, b^2): value, derivative and cdf
// by quadrature over y within 10 b of x.
class SmoothedProjection {
 public:
  SmoothedProjection(const ProjectionResult& p, double b) : p_(p), b_(b) {}

  double score(double x) const {
    const auto dens = [&](double y) { return p_.pdf(y) * kernel(x - y); };
    const auto deriv = [&](double y) { return p_.pdf(y) * p_.score(y) * kernel(x - y); };
    return window_integral(deriv, x) / window_integral(dens, x);
  }

  double cdf(double x) const {
    return window_integral([&](double y) { return p_.cdf(y) * kernel(x - y); }, x);
  }

 private:
  double kernel(double u) const { return numeric::normal_pdf(u / b_) / b_; }

  double window_integral(const numeric::Integrand& f, double x) const {
    const double lo = x - 10.0 * b_, hi = x + 10.0 * b_;
    std::vector<double> br;
    for (double k : {-p_.z(), p_.z(), x})
      if (k > lo && k < hi) br.push_back(k);
    std::sort(br.begin(), br.end());
    return checked(numeric::integrate(f, lo, hi, {.abs_tol = 1e-15, .rel_tol = 1e-11}, br),
                   "smoothed projection");
  }

  const ProjectionResult& p_;
  double b_;
};

}  // namespace

MisspecInfo misspec_info(const RefDensity& ref, double eta) {
  require_eta(eta);
  const ProjectionResult proj = project(ref);
  if (proj.kind() == ProjectionKind::Identity) return {truncated_info(ref, eta), 1.0};
  const double xi = proj.quantile(1.0 - eta);
  std::vector<double> br = kinks(ref);
  br.push_back(proj.z());
  const auto f = score_functionals(ref, [&](double x) { return proj.score(x); }, xi, br,
                                   "misspec_info");
  return {f.info, f.gamma};
}

SmoothedMisspecInfo smoothed_misspec_info(const RefDensity& ref, double eta) {
  require_eta(eta);
  if (!std::isfinite(second_moment(ref)))
    throw InfiniteMomentError("smoothed_misspec_info: " + ref.tag() + " has no finite variance");
  const ProjectionResult proj = project(ref);
  if (proj.kind() == ProjectionKind::Identity) return {truncated_info(ref, eta), 1.0, 0.0};

  const double b2 = std::max(second_moment(ref) - proj.second_moment(), 0.0);
  const double b = std::sqrt(b2);
  if (b == 0.0) {
    const MisspecInfo m = misspec_info(ref, eta);
    return {m.info, m.gamma, 0.0};
  }
  const SmoothedProjection sm(proj, b);
  double hi = proj.quantile(1.0 - 0.25 * eta) + 10.0 * b;
  const double xi = numeric::find_root([&](double x) { return sm.cdf(x) - (1.0 - eta); }, 0.0, hi,
                                       1e-12);
  std::vector<double> br = kinks(ref);
  const auto f = score_functionals(ref, [&](double x) { return sm.score(x); }, xi, br,
                                   "smoothed_misspec_info");
  return {f.info, f.gamma, b};
}

std::vector<double> sample(const RefDensity& ref, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) {
    switch (ref.kind()) {
      case RefKind::Normal: x = rng.normal(); break;
      case RefKind::Logistic: {
        const double u = rng.uniform();
        x = std::log(u) - std::log1p(-u);
        break;
      }
      case RefKind::Laplace: x = laplace_quantile(rng.uniform()); break;
      case RefKind::SymBeta: {
        const double a = 0.5 * ref.r() + 1.0;
        x = std::sqrt(ref.r()) * (2.0 * rng.beta(a, a) - 1.0);
        break;
      }
      case RefKind::StudentT2Rescaled: x = ref.quantile(rng.uniform()); break;
      case RefKind::GaussMixture: {
        const double c = rng.coin() ? 2.0 : -2.0;
        x = c + rng.normal();
        break;
      }
      case RefKind::LaplaceMixture: {
        const double c = rng.coin() ? 2.0 : -2.0;
        x = c + laplace_quantile(rng.uniform());
        break;
      }
    }
  }
  return out;
}

}  // namespace lcsym
