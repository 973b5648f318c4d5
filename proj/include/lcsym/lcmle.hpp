#ifndef LCSYM_LCMLE_HPP_
#define LCSYM_LCMLE_HPP_

// Log-concave maximum likelihood for a weighted empirical distribution:
// maximize  sum_i w_i phi(x_i) - int exp(phi)  over concave phi.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcsym/plcurve.hpp"

namespace lcsym {

// Tolerances refer to the sample standardized to unit variance.
struct FitConfig {
  // Inner Newton stops once sqrt(g' H^-1 g) < 1e-4 * objective_tolerance.
  double objective_tolerance = 1e-9;
  // Cap on active-set updates (one knot or the origin kink released each).
  int max_iterations = 500;
  // A data point becomes a knot when the tent derivative there exceeds this.
  // Kept near the rounding floor so that nearly coincident atoms end up
  // with the knot on the right one.
  double knot_activation = 1e-13;
};

struct FitReport {
  ExpLinearDensity density;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  // Largest tent-direction derivative over non-knot data points at exit.
  double certificate = 0.0;
  // Objective after every accepted step; non-decreasing.
  std::vector<double> trace;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, PLConcave best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const PLConcave& best() const { return best_; }

 private:
  PLConcave best_;
};

// Throws DegenerateSampleError for fewer than two distinct points and
// ConvergenceError when max_iterations is exhausted.
FitReport fit(const WeightedSample& ws, const FitConfig& cfg = {});

// sum_i w_i phi(x_i) - int exp(phi); -inf if a weighted point is outside
// the domain of phi.
double objective(const WeightedSample& ws, const PLConcave& phi);

// The same objective maximized over even concave phi, i.e. the MLE for the
// distribution of +-X with X ~ ws. Knots lie at 0 or at +-|x_i|; when no
// atom sits at 0 the curve is flat across the origin. The certificate
// reports the largest derivative along the concave even hinges
// -(|x| - |x_j|)_+.
FitReport fit_even(const WeightedSample& ws, const FitConfig& cfg = {});

// Directional derivative of the objective along the tent that vanishes at
// both ends of the domain and peaks at each data point. Entry j belongs to
// ws.points()[j].
std::vector<double> tent_derivatives(const WeightedSample& ws,
                                     const PLConcave& phi);

}  // namespace lcsym

#endif  // LCSYM_LCMLE_HPP_
