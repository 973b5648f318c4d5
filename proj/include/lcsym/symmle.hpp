#ifndef LCSYM_SYMMLE_HPP_
#define LCSYM_SYMMLE_HPP_

// Symmetric log-concave MLE: fixed-center fits through the symmetrized
// empirical distribution, profile maximization over the center, and the
// characterization checks satisfied by the joint maximizer.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcsym/lcmle.hpp"
#include "lcsym/plcurve.hpp"

namespace lcsym {

enum class Execution { Parallel, Serial };

// Atoms at +-|x_i - theta| with weight 1/(2n) each; a zero distance
// becomes a single atom of weight 1/n.
WeightedSample symmetrize(std::span<const double> sample, double theta);

struct SymFit {
  double theta = 0.0;
  PLConcave psi;  // even, normalized log-density of x - theta
  double profile = 0.0;
  // Largest tent-direction derivative of the underlying fit.
  double certificate = 0.0;

  ExpLinearDensity density() const { return ExpLinearDensity(psi); }
};

SymFit fit_fixed_theta(std::span<const double> sample, double theta,
                       const FitConfig& cfg = {});
double profile_criterion(std::span<const double> sample, double theta,
                         const FitConfig& cfg = {});

struct MLEOptions {
  int grid_size = 201;
  double refine_tolerance = 1e-7;
  FitConfig fit;
  Execution execution = Execution::Parallel;
};

struct MLEResult {
  double theta_hat = 0.0;
  PLConcave psi_hat;
  ExpLinearDensity g_hat;  // density of x - theta_hat
  double criterion = 0.0;
  std::vector<std::pair<double, double>> grid;  // (theta, profile)
  // Grid points whose profile is within 1e-12 of the best grid value.
  std::vector<double> grid_ties;
};

MLEResult fit_mle(std::span<const double> sample, const MLEOptions& opt = {});

// h(t) = (1/n) sum (a_i - t)_+ - 2 int_t^inf (x - t) g(x) dx with
// a_i = |x_i - theta_hat|; nonnegative at the MLE, zero at its knots.
// Throws std::invalid_argument for t outside [0, max a_i].
double characterization_h(const MLEResult& result, std::span<const double> sample,
                          double t);

struct DiagnosticReport {
  bool cdf_sandwich = true;
  bool variance_bound = true;
  bool knot_structure = true;
  bool zero_slope_at_origin = true;  // vacuous when 0 is a data atom
  bool log_bound = true;
  bool h_nonnegative = true;
  bool h_zero_at_knots = true;
  double min_h = 0.0;
  double max_abs_h_at_knots = 0.0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

DiagnosticReport diagnostics(const MLEResult& result, std::span<const double> sample,
                             int h_grid_points = 1000);

}  // namespace lcsym

#endif  // LCSYM_SYMMLE_HPP_
