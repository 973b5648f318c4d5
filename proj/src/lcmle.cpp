#include "lcsym/lcmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "lcsym/errors.hpp"
#include "lcsym/numeric.hpp"

namespace lcsym {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kRidge = 1e-12;
constexpr int kMaxNewton = 100;

// Hinge pieces on a grid z with phi linear between grid points and weight
// mass[j] on z[j]:
//   data[j]  = sum_i mass_i (z_i - z_j)_+      model[j] = int (x - z_j)_+ e^phi
// and the mirrored left-hinge versions; mass_r[j] = int_{z_j}^{end} e^phi.
struct Hinges {
  std::vector<double> data_r, model_r, mass_r;
  std::vector<double> data_l, model_l;
};

Hinges hinges(std::span<const double> z, std::span<const double> phi,
              std::span<const double> mass, bool with_left) {
  const std::size_t m = z.size();
  Hinges h;
  h.data_r.assign(m, 0.0);
  h.model_r.assign(m, 0.0);
  h.mass_r.assign(m, 0.0);
  double above = 0.0;
  for (std::size_t j = m - 1; j-- > 0;) {
    const double delta = z[j + 1] - z[j];
    const auto [i0, i1] = segment::j00_j01(phi[j], phi[j + 1]);
    above += mass[j + 1];
    h.data_r[j] = h.data_r[j + 1] + delta * above;
    h.model_r[j] = h.model_r[j + 1] + delta * h.mass_r[j + 1] + delta * delta * i1;
    h.mass_r[j] = h.mass_r[j + 1] + delta * i0;
  }
  if (with_left) {
    h.data_l.assign(m, 0.0);
    h.model_l.assign(m, 0.0);
    double below = 0.0, left_mass = 0.0;
    for (std::size_t j = 1; j < m; ++j) {
      const double delta = z[j] - z[j - 1];
      const auto [i0, i1] = segment::j00_j01(phi[j], phi[j - 1]);
      below += mass[j - 1];
      h.data_l[j] = h.data_l[j - 1] + delta * below;
      h.model_l[j] = h.model_l[j - 1] + delta * left_mass + delta * delta * i1;
      left_mass += delta * i0;
    }
  }
  return h;
}

// Tent derivatives; endpoint entries are left at zero. The tent is written
// as a linear function minus a hinge, using the hinge that opens toward the
// nearer end: the other form divides a rounding-level linear term by a tiny
// distance when a data point sits next to an end.
std::vector<double> tent_core(std::span<const double> z,
                              std::span<const double> phi,
                              std::span<const double> mass) {
  const std::size_t m = z.size();
  const Hinges h = hinges(z, phi, mass, true);
  double total_w = 0.0, first_w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    total_w += mass[j];
    first_w += mass[j] * z[j];
  }
  const double lo = z[0], hi = z[m - 1];
  const double g_const = total_w - h.mass_r[0];
  const double g_lin = first_w - (lo * h.mass_r[0] + h.model_r[0]);
  std::vector<double> out(m, 0.0);
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const double a = z[j] - lo;
    const double b = hi - z[j];
    const double c = 1.0 / a + 1.0 / b;
    if (a >= b)
      out[j] = (g_lin - lo * g_const) / a + c * (h.model_r[j] - h.data_r[j]);
    else
      out[j] = (hi * g_const - g_lin) / b + c * (h.model_l[j] - h.data_l[j]);
  }
  return out;
}

// Active-set Newton on the values at the active knots. In even mode the grid
// is the half line starting at u[0] = 0, the mass term is that of the half
// curve, and the extra constraint is a nonpositive slope at the origin. When
// that constraint binds, the first segment is held flat ("flat start").
class Solver {
 public:
  Solver(std::span<const double> u, std::span<const double> w, bool even,
         const FitConfig& cfg)
      : u_(u), w_(w), cfg_(cfg), even_(even) {
    newton_floor_ = std::pow(1e-4 * cfg.objective_tolerance, 2);
    const std::size_t m = u.size();
    active_ = {0, m - 1};
    // Without mass at the origin an even MLE is flat there, so the
    // origin kink is never released.
    pinned_flat_ = even && w[0] == 0.0;
    flat_ = pinned_flat_;
    if (flat_) {
      eta_.assign(2, -std::log(u[m - 1]));
    } else {
      // Standard normal log-density at the two end knots.
      eta_ = {-0.5 * u[0] * u[0] - numeric::kLogSqrt2Pi,
              -0.5 * u[m - 1] * u[m - 1] - numeric::kLogSqrt2Pi};
    }
    refresh_data_term();
    obj_ = value(eta_);
    trace_.push_back(obj_);
  }

  void run() {
    for (iterations_ = 0; iterations_ < cfg_.max_iterations; ++iterations_) {
      inner_solve();
      const std::vector<double> phi = phi_at_points();
      std::vector<double> d;
      if (even_) {
        const Hinges h = hinges(u_, phi, w_, false);
        d.resize(u_.size());
        for (std::size_t j = 0; j < u_.size(); ++j) d[j] = h.model_r[j] - h.data_r[j];
      } else {
        d = tent_core(u_, phi, w_);
      }
      std::size_t best = 0;
      double best_d = -std::numeric_limits<double>::infinity();
      std::size_t k = 0;
      for (std::size_t j = 0; j < u_.size(); ++j) {
        const bool is_active = k < active_.size() && active_[k] == j;
        if (is_active) ++k;
        const bool candidate =
            even_ ? (j == 0 ? flat_ && !pinned_flat_ : !is_active) : !is_active;
        if (candidate && d[j] > best_d) {
          best_d = d[j];
          best = j;
        }
      }
      certificate_ = std::max(best_d, 0.0);
      if (!(best_d > cfg_.knot_activation)) {
        converged_ = true;
        return;
      }
      std::vector<double> dir;
      if (even_ && best == 0) {
        flat_ = false;
        for (std::size_t a : active_) dir.push_back(-u_[a]);
      } else {
        add_knot(best, phi[best]);
        const double lo = u_[0], hi = u_[u_.size() - 1], peak = u_[best];
        for (std::size_t a : active_) {
          const double x = u_[a];
          if (even_)
            dir.push_back(-std::max(x - peak, 0.0));
          else
            dir.push_back(x <= peak ? (x - lo) / (peak - lo) : (hi - x) / (hi - peak));
        }
      }
      line_search(dir);
    }
  }

  const std::vector<std::size_t>& active() const { return active_; }
  const std::vector<double>& eta() const { return eta_; }
  bool flat_start() const { return flat_; }
  double objective() const { return obj_; }
  int iterations() const { return iterations_; }
  bool converged() const { return converged_; }
  double certificate() const { return certificate_; }
  const std::vector<double>& trace() const { return trace_; }

 private:
  double len(std::size_t s) const { return u_[active_[s + 1]] - u_[active_[s]]; }

  // a_k = sum_i w_i hat_k(u_i) for the current knot set.
  void refresh_data_term() {
    a_.assign(active_.size(), 0.0);
    for (std::size_t s = 0; s + 1 < active_.size(); ++s) {
      const std::size_t lo = active_[s], hi = active_[s + 1];
      const double l = len(s);
      for (std::size_t i = lo; i < hi; ++i) {
        const double t = (u_[i] - u_[lo]) / l;
        a_[s] += w_[i] * (1.0 - t);
        a_[s + 1] += w_[i] * t;
      }
    }
    a_.back() += w_[active_.back()];
  }

  double value(const std::vector<double>& eta) const {
    double data = 0.0, mass = 0.0;
    for (std::size_t k = 0; k < eta.size(); ++k) data += a_[k] * eta[k];
    for (std::size_t s = 0; s + 1 < eta.size(); ++s)
      mass += len(s) * segment::j00(eta[s], eta[s + 1]);
    return data - mass;
  }

  // Gradient g and the tridiagonal negative Hessian (diag, off).
  void derivatives(const std::vector<double>& eta, std::vector<double>& g,
                   std::vector<double>& diag, std::vector<double>& off) const {
    const std::size_t n = eta.size();
    g = a_;
    diag.assign(n, kRidge);
    off.assign(n - 1, 0.0);
    for (std::size_t s = 0; s + 1 < n; ++s) {
      const double l = len(s);
      const auto j = segment::integrals(eta[s], eta[s + 1]);
      g[s] -= l * j.j10;
      g[s + 1] -= l * j.j01;
      diag[s] += l * j.j20;
      diag[s + 1] += l * j.j02;
      off[s] = l * j.j11;
    }
  }

  static std::vector<double> solve_tridiagonal(std::vector<double> diag,
                                               const std::vector<double>& off,
                                               std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
      const double f = off[i - 1] / diag[i - 1];
      diag[i] -= f * off[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
    return rhs;
  }

  // Newton direction; with a flat start the first two values move together.
  std::vector<double> newton_direction(const std::vector<double>& g,
                                       const std::vector<double>& diag,
                                       const std::vector<double>& off) const {
    if (!flat_) return solve_tridiagonal(diag, off, g);
    const std::size_t n = g.size();
    std::vector<double> rg(g.begin() + 1, g.end()), rd(diag.begin() + 1, diag.end());
    std::vector<double> ro(off.begin() + 1, off.end());
    rg[0] += g[0];
    rd[0] += diag[0] + 2.0 * off[0];
    const std::vector<double> step = solve_tridiagonal(rd, ro, rg);
    std::vector<double> out(n);
    out[0] = step[0];
    std::copy(step.begin(), step.end(), out.begin() + 1);
    return out;
  }

  double slope(const std::vector<double>& eta, std::size_t s) const {
    return (eta[s + 1] - eta[s]) / len(s);
  }

  // Constraint c(eta) <= 0 number k: the kink at interior knot k, or for
  // k = 0 in even mode without a flat start, the slope at the origin.
  bool constrained(std::size_t k) const {
    if (k == 0) return even_ && !flat_;
    return k + 1 < active_.size();
  }
  double constraint(const std::vector<double>& eta, std::size_t k) const {
    if (k == 0) return slope(eta, 0);
    return slope(eta, k) - slope(eta, k - 1);
  }
  double constraint_scale(const std::vector<double>& eta, std::size_t k) const {
    if (k == 0) return 1.0 + std::abs(slope(eta, 0));
    return 1.0 + std::abs(slope(eta, k)) + std::abs(slope(eta, k - 1));
  }

  void record(double obj) {
    obj_ = obj;
    trace_.push_back(obj);
  }

  void inner_solve() {
    std::vector<double> g, diag, off, trial(eta_.size());
    for (int it = 0; it < kMaxNewton; ++it) {
      derivatives(eta_, g, diag, off);
      const std::vector<double> dir = newton_direction(g, diag, off);
      double decrement = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) decrement += g[k] * dir[k];
      if (!(decrement > newton_floor_)) return;

      trial.resize(eta_.size());
      double step = 1.0, trial_obj = 0.0;
      for (;;) {
        for (std::size_t k = 0; k < eta_.size(); ++k) trial[k] = eta_[k] + step * dir[k];
        trial_obj = value(trial);
        // Below ~1e-14 the decrement is at rounding level of the objective;
        // Newton is then in its quadratic regime and takes the full step.
        if (decrement < 1e-14 || trial_obj >= obj_ + kArmijo * step * decrement) break;
        step *= 0.5;
        if (step < 1e-12) return;
      }
      if (trial_obj < obj_ - 1e-13) return;

      // Largest fraction of the step that keeps every constraint <= 0.
      double frac = 1.0;
      std::size_t binding = 0;
      for (std::size_t k = 0; k + 1 < eta_.size(); ++k) {
        if (!constrained(k)) continue;
        const double before = std::min(constraint(eta_, k), 0.0);
        const double after = constraint(trial, k);
        if (after > 0.0) {
          const double tk = before / (before - after);
          if (tk < frac) {
            frac = tk;
            binding = k;
          }
        }
      }
      if (frac >= 1.0) {
        eta_ = trial;
        record(trial_obj);
        continue;
      }
      for (std::size_t k = 0; k < eta_.size(); ++k) eta_[k] += frac * (trial[k] - eta_[k]);
      release_constraints(binding);
      record(std::max(value(eta_), obj_ - 1e-14));
    }
  }

  // Drop the binding constraint's knot (or flatten the start) together with
  // any other constraint that has reached rounding level.
  void release_constraints(std::size_t binding) {
    auto slack = [&](std::size_t k) {
      return constrained(k) &&
             (k == binding || constraint(eta_, k) >= -1e-12 * constraint_scale(eta_, k));
    };
    if (slack(0)) {
      flat_ = true;
      eta_[0] = eta_[1];
    }
    std::vector<std::size_t> keep_idx;
    std::vector<double> keep_eta;
    for (std::size_t k = 0; k < eta_.size(); ++k) {
      if (k > 0 && slack(k)) continue;
      keep_idx.push_back(active_[k]);
      keep_eta.push_back(eta_[k]);
    }
    active_ = std::move(keep_idx);
    eta_ = std::move(keep_eta);
    if (flat_) eta_[0] = eta_[1];
    refresh_data_term();
  }

  void add_knot(std::size_t j, double phi_j) {
    auto pos = std::lower_bound(active_.begin(), active_.end(), j);
    const auto offset = pos - active_.begin();
    active_.insert(pos, j);
    eta_.insert(eta_.begin() + offset, phi_j);
    refresh_data_term();
  }

  // Maximize along a direction that keeps every constraint satisfied for
  // all t >= 0; used right after a knot or the origin kink is released.
  void line_search(const std::vector<double>& v) {
    std::vector<double> g, diag, off, cur(eta_.size()), trial(eta_.size());
    double t = 0.0;
    for (int it = 0; it < 30; ++it) {
      for (std::size_t k = 0; k < eta_.size(); ++k) cur[k] = eta_[k] + t * v[k];
      derivatives(cur, g, diag, off);
      double slope_t = 0.0, curv = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) {
        slope_t += g[k] * v[k];
        curv += diag[k] * v[k] * v[k];
        if (k + 1 < v.size()) curv += 2.0 * off[k] * v[k] * v[k + 1];
      }
      if (std::abs(slope_t) < 1e-14) break;
      double step = slope_t / curv;
      const double base = value(cur);
      bool moved = false;
      while (std::abs(step) >= 1e-14) {
        const double tn = std::max(0.0, t + step);
        for (std::size_t k = 0; k < eta_.size(); ++k) trial[k] = eta_[k] + tn * v[k];
        if (value(trial) >= base) {
          t = tn;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    for (std::size_t k = 0; k < eta_.size(); ++k) trial[k] = eta_[k] + t * v[k];
    const double obj = value(trial);
    if (obj >= obj_) {
      eta_ = trial;
      record(obj);
    }
  }

  std::vector<double> phi_at_points() const {
    std::vector<double> phi(u_.size());
    for (std::size_t s = 0; s + 1 < active_.size(); ++s) {
      const std::size_t lo = active_[s], hi = active_[s + 1];
      const double l = len(s);
      for (std::size_t i = lo; i < hi; ++i) {
        const double t = (u_[i] - u_[lo]) / l;
        phi[i] = i == lo ? eta_[s] : eta_[s] + t * (eta_[s + 1] - eta_[s]);
      }
    }
    phi.back() = eta_.back();
    return phi;
  }

  std::span<const double> u_, w_;
  FitConfig cfg_;
  bool even_ = false;
  bool flat_ = false;
  bool pinned_flat_ = false;
  std::vector<std::size_t> active_;
  std::vector<double> eta_, a_, trace_;
  double newton_floor_ = 0.0;
  double obj_ = 0.0;
  double certificate_ = 0.0;
  int iterations_ = 0;
  bool converged_ = false;
};

void check_config(const FitConfig& cfg) {
  if (!(cfg.objective_tolerance > 0.0) || cfg.max_iterations <= 0 || !(cfg.knot_activation > 0.0))
    throw std::invalid_argument("FitConfig: all settings must be positive");
}

FitReport finish(const Solver& solver, PLConcave curve, double shift, const FitConfig& cfg) {
  if (!solver.converged())
    throw ConvergenceError("log-concave MLE did not converge within " +
                               std::to_string(cfg.max_iterations) + " iterations",
                           std::move(curve));
  std::vector<double> trace = solver.trace();
  for (double& t : trace) t += shift;
  return FitReport{ExpLinearDensity(std::move(curve)), solver.objective() + shift,
                   solver.iterations(), true, solver.certificate(), std::move(trace)};
}

}  // namespace

FitReport fit(const WeightedSample& ws, const FitConfig& cfg) {
  if (ws.size() < 2)
    throw DegenerateSampleError("log-concave MLE needs at least two distinct points");
  check_config(cfg);
  const auto x = ws.points();
  const auto w = ws.weights();
  const double mu = ws.mean();
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) var += w[i] * (x[i] - mu) * (x[i] - mu);
  const double scale = std::sqrt(var);
  if (!(scale > 0.0)) throw DegenerateSampleError("log-concave MLE: sample has zero spread");
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - mu) / scale;

  Solver solver(u, w, false, cfg);
  solver.run();

  // phi(x) = phi_u((x - mu) / s) - log s
  const double shift = -std::log(scale);
  std::vector<double> knots, values;
  for (std::size_t k = 0; k < solver.active().size(); ++k) {
    knots.push_back(x[solver.active()[k]]);
    values.push_back(solver.eta()[k] + shift);
  }
  return finish(solver, PLConcave(std::move(knots), std::move(values)), shift, cfg);
}

FitReport fit_even(const WeightedSample& ws, const FitConfig& cfg) {
  check_config(cfg);
  // Fold onto the half line; the origin is always a grid point.
  std::vector<double> a{0.0}, w{0.0};
  {
    std::vector<std::pair<double, double>> folded;
    for (std::size_t i = 0; i < ws.size(); ++i)
      folded.emplace_back(std::abs(ws.points()[i]), ws.weights()[i]);
    std::sort(folded.begin(), folded.end());
    for (const auto& [p, wt] : folded) {
      if (p == a.back())
        w.back() += wt;
      else {
        a.push_back(p);
        w.push_back(wt);
      }
    }
  }
  if (a.size() < 2)
    throw DegenerateSampleError("even log-concave MLE: all mass sits at the origin");
  double second = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) second += w[i] * a[i] * a[i];
  const double scale = std::sqrt(second);
  std::vector<double> u(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) u[i] = a[i] / scale;

  Solver solver(u, w, true, cfg);
  solver.run();

  // The half problem carries the full mass on [0, d]: phi = phi_u - log s - log 2.
  const double shift = -std::log(scale) - std::log(2.0);
  std::vector<double> half, values;
  for (std::size_t k = 0; k < solver.active().size(); ++k) {
    if (k == 0 && solver.flat_start()) continue;
    half.push_back(a[solver.active()[k]]);
    values.push_back(solver.eta()[k] + shift);
  }
  PLConcave curve = half.size() == 1
                        ? PLConcave({-half[0], half[0]}, {values[0], values[0]})
                        : PLConcave::even_from_half(half, values);
  return finish(solver, std::move(curve), shift, cfg);
}

double objective(const WeightedSample& ws, const PLConcave& phi) {
  double data = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const double v = phi.eval(ws.points()[i]);
    if (std::isinf(v)) return -std::numeric_limits<double>::infinity();
    data += ws.weights()[i] * v;
  }
  const auto k = phi.knots();
  const auto v = phi.values();
  double mass = 0.0;
  for (std::size_t s = 0; s + 1 < k.size(); ++s)
    mass += (k[s + 1] - k[s]) * segment::j00(v[s], v[s + 1]);
  return data - mass;
}

std::vector<double> tent_derivatives(const WeightedSample& ws, const PLConcave& phi) {
  const auto x = ws.points();
  if (x.front() < phi.lower() || x.back() > phi.upper())
    throw std::invalid_argument("tent_derivatives: data outside the domain of phi");
  std::vector<double> z(phi.knots().begin(), phi.knots().end());
  z.insert(z.end(), x.begin(), x.end());
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  std::vector<double> vals(z.size()), mass(z.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) vals[i] = phi.eval(z[i]);
  std::vector<std::size_t> where(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    where[i] = static_cast<std::size_t>(std::lower_bound(z.begin(), z.end(), x[i]) - z.begin());
    mass[where[i]] += ws.weights()[i];
  }
  const std::vector<double> all = tent_core(z, vals, mass);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = all[where[i]];
  return out;
}

}  // namespace lcsym
