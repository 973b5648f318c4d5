#ifndef LCSYM_ONESTEP_HPP_
#define LCSYM_ONESTEP_HPP_

// Preliminary location estimators, symmetric density estimates centered at
// the preliminary value, and the one-step Newton correction built on them.

#include <optional>
#include <span>

#include "lcsym/lcmle.hpp"
#include "lcsym/plcurve.hpp"
#include "lcsym/refdist.hpp"

namespace lcsym {

struct PreliminaryKind {
  enum class Kind { Mean, Median, TrimmedMean, LogisticMLE };
  Kind kind = Kind::Mean;
  double alpha = 0.125;  // fraction trimmed from each tail

  static PreliminaryKind mean() { return {Kind::Mean}; }
  static PreliminaryKind median() { return {Kind::Median}; }
  static PreliminaryKind trimmed(double alpha = 0.125) { return {Kind::TrimmedMean, alpha}; }
  static PreliminaryKind logistic() { return {Kind::LogisticMLE}; }
};

// Throws std::invalid_argument for an empty sample or a trimming level that
// leaves nothing.
double preliminary(std::span<const double> sample, const PreliminaryKind& kind);

enum class DensityEstimatorKind { Sym, SmoothedSym, PartialMLE, GeoSym };

// Estimate of the centered density g, even in z. Scores use the right
// derivative, the left one at the upper end of the support, and are -inf
// (+inf) beyond the right (left) end.
class SymmetricDensityModel {
 public:
  enum class Kind { Sym, SmoothedSym, PartialMLE, GeoSym, Reference };

  // Wraps a known reference density; used for plug-in checks.
  static SymmetricDensityModel reference(const RefDensity& ref, double theta_bar);

  Kind kind() const { return kind_; }
  double theta_bar() const { return theta_bar_; }
  // Gaussian bandwidth of SmoothedSym, 0 otherwise.
  double bandwidth() const { return bandwidth_; }
  // SmoothedSym whose bandwidth estimate was not positive; it then
  // coincides with Sym.
  bool bandwidth_clamped() const { return bandwidth_clamped_; }
  // C in g = C sqrt(f(theta + z) f(theta - z)); 1 for other kinds.
  double geo_normalizer() const { return geo_normalizer_; }
  // Half-width of the support, +inf for SmoothedSym.
  double support_bound() const;

  double pdf(double z) const;
  double cdf(double z) const;
  double quantile(double p) const;
  double score(double z) const;
  // Integral of score^2 dG over [-xi, xi].
  double model_info(double xi) const;

 private:
  friend SymmetricDensityModel estimate_density(std::span<const double>, double,
                                                DensityEstimatorKind, const FitConfig&);
  SymmetricDensityModel(Kind kind, double theta_bar) : kind_(kind), theta_bar_(theta_bar) {}

  // Sum of the two reflected terms and its one-sided derivative in z.
  std::pair<double, double> reflected_terms(double z, bool right) const;
  double symmetrized_cdf(double x) const;

  Kind kind_;
  double theta_bar_;
  double bandwidth_ = 0.0;
  bool bandwidth_clamped_ = false;
  double geo_normalizer_ = 1.0;
  double half_width_ = 0.0;
  std::optional<ExpLinearDensity> fhat_;  // unconstrained fit (Sym kinds)
  std::optional<ExpLinearDensity> g_;     // centered log-concave estimate
  std::optional<RefDensity> ref_;
};

// Throws DegenerateSampleError for fewer than two distinct points and
// EmptySupportError for GeoSym with theta_bar outside the open data range.
SymmetricDensityModel estimate_density(std::span<const double> sample, double theta_bar,
                                       DensityEstimatorKind kind, const FitConfig& cfg = {});

enum class FisherVariant { Empirical, ModelWeighted, Untruncated };

struct FisherEstimate {
  double value = 0.0;
  double xi = 0.0;             // window half-width, +inf when untruncated
  std::size_t in_window = 0;   // data points inside the closed window
  std::size_t dropped = 0;     // data points with an infinite score
};

// Throws DegenerateInformationError when the estimate is <= 1e-12.
FisherEstimate fisher_estimate(std::span<const double> sample, const SymmetricDensityModel& model,
                               double eta, FisherVariant variant);

double fisher_hat(std::span<const double> sample, const SymmetricDensityModel& model, double eta,
                  FisherVariant variant);

struct OneStepConfig {
  PreliminaryKind preliminary = PreliminaryKind::mean();
  DensityEstimatorKind density = DensityEstimatorKind::PartialMLE;
  double eta = 0.002;
  bool truncated = true;
  FisherVariant fisher = FisherVariant::Empirical;
  FitConfig fit;
};

struct OneStepReport {
  double theta_tilde = 0.0;
  double theta_bar = 0.0;
  double xi = 0.0;
  double info = 0.0;
  std::size_t in_window = 0;
  std::size_t dropped = 0;
  bool bandwidth_clamped = false;
};

OneStepReport one_step(std::span<const double> sample, const OneStepConfig& cfg);

// The correction step alone, for a given model.
OneStepReport one_step(std::span<const double> sample, const SymmetricDensityModel& model,
                       const OneStepConfig& cfg);

}  // namespace lcsym

#endif  // LCSYM_ONESTEP_HPP_
