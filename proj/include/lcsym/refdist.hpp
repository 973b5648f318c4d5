#ifndef LCSYM_REFDIST_HPP_
#define LCSYM_REFDIST_HPP_

// Reference densities centered at zero, their scores and information
// functionals, and the log-concave projections of the non-log-concave ones.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lcsym {

enum class RefKind {
  Normal,
  Logistic,
  Laplace,
  SymBeta,
  StudentT2Rescaled,
  GaussMixture,
  LaplaceMixture
};

class RefDensity {
 public:
  static RefDensity normal() { return RefDensity(RefKind::Normal); }
  static RefDensity logistic() { return RefDensity(RefKind::Logistic); }
  static RefDensity laplace() { return RefDensity(RefKind::Laplace); }
  // f(x) proportional to (1 - x^2/r)^(r/2) on [-sqrt(r), sqrt(r)].
  static RefDensity symbeta(double r);
  // (1/2)(1 + x^2)^(-3/2), a t_2 density scaled by 1/sqrt(2).
  static RefDensity t2() { return RefDensity(RefKind::StudentT2Rescaled); }
  // Equal mixture of N(-2, 1) and N(2, 1).
  static RefDensity gauss_mixture() { return RefDensity(RefKind::GaussMixture); }
  // Equal mixture of unit Laplace densities at -2 and 2.
  static RefDensity laplace_mixture() { return RefDensity(RefKind::LaplaceMixture); }

  // Tags: normal, logistic, laplace, symbeta:<r>, t2, gaussmix, laplacemix.
  static RefDensity parse(std::string_view tag);
  std::string tag() const;

  RefKind kind() const { return kind_; }
  double r() const { return r_; }
  bool log_concave() const;
  // Log-concave with finite Fisher information.
  bool in_p0() const;
  // Half-width of the support; +inf for full-line densities.
  double support_bound() const;

  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  // Throws std::invalid_argument for p outside (0, 1).
  double quantile(double p) const;
  // Derivative of the log-density, right derivative at kinks. Outside the
  // support of SymBeta it is -inf to the right and +inf to the left.
  double score(double x) const;

 private:
  explicit RefDensity(RefKind kind, double r = 0.0) : kind_(kind), r_(r) {}
  RefKind kind_;
  double r_;
};

// +inf for SymBeta with r <= 2.
double fisher_info(const RefDensity& ref);
// +inf for the t_2 density.
double second_moment(const RefDensity& ref);
// Fisher information restricted to the central 1 - 2 eta of the mass.
double truncated_info(const RefDensity& ref, double eta);

enum class ProjectionKind { Identity, Laplace, FlatTop };

// Log-concave projection of a reference density. FlatTop keeps the source
// density outside [-z, z] and is constant, equal to f(z), inside.
class ProjectionResult {
 public:
  ProjectionResult(const RefDensity& source, ProjectionKind kind, double z = 0.0);

  ProjectionKind kind() const { return kind_; }
  double z() const { return z_; }
  const RefDensity& source() const { return source_; }

  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  double score(double x) const;
  double second_moment() const;

 private:
  RefDensity source_;
  ProjectionKind kind_;
  double z_;
};

ProjectionResult project(const RefDensity& ref);

struct MisspecInfo {
  double info = 0.0;
  double gamma = 1.0;
};

// Truncated information of the projection score under the true density and
// the coefficient on the preliminary estimator in the one-step expansion.
MisspecInfo misspec_info(const RefDensity& ref, double eta);

struct SmoothedMisspecInfo {
  double info = 0.0;
  double gamma = 1.0;
  double b_tilde = 0.0;
};

// Same functionals for the projection convolved with N(0, b^2), where b^2 is
// the second-moment gap between the source and its projection. Throws
// InfiniteMomentError when the source has no finite variance.
SmoothedMisspecInfo smoothed_misspec_info(const RefDensity& ref, double eta);

std::vector<double> sample(const RefDensity& ref, std::size_t n, std::uint64_t seed);

}  // namespace lcsym

#endif  // LCSYM_REFDIST_HPP_
