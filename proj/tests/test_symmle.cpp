#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lcsym/errors.hpp"
#include "lcsym/refdist.hpp"
#include "lcsym/symmle.hpp"

using namespace lcsym;
using doctest::Approx;

TEST_CASE("symmetrize") {
  const std::vector<double> a{0.0, 2.0};
  const WeightedSample s = symmetrize(a, 1.0);
  REQUIRE(s.size() == 2);
  CHECK(s.points()[0] == -1.0);
  CHECK(s.points()[1] == 1.0);
  CHECK(s.weights()[0] == Approx(0.5));

  CHECK_THROWS_AS(symmetrize(std::vector<double>{1.0}, 1.0), DegenerateSampleError);

  const std::vector<double> b{0.0, 1.0, 3.0};
  const WeightedSample t = symmetrize(b, 1.0);
  REQUIRE(t.size() == 5);
  const double pts[] = {-2.0, -1.0, 0.0, 1.0, 2.0};
  const double w[] = {1.0 / 6, 1.0 / 6, 1.0 / 3, 1.0 / 6, 1.0 / 6};
  for (int i = 0; i < 5; ++i) {
    CHECK(t.points()[i] == pts[i]);
    CHECK(t.weights()[i] == Approx(w[i]).epsilon(1e-14));
  }
}

TEST_CASE("fixed-center fits") {
  const std::vector<double> a{0.0, 2.0};
  const SymFit f = fit_fixed_theta(a, 1.0);
  CHECK(f.psi.lower() == -1.0);
  CHECK(f.psi.upper() == 1.0);
  CHECK(f.psi.eval(0.3) == Approx(-std::log(2.0)).epsilon(1e-9));
  CHECK(f.profile == Approx(-std::log(2.0) - 1.0).epsilon(1e-9));

  const std::vector<double> sym{-2.0, -0.7, -0.1, 0.1, 0.7, 2.0};
  const SymFit g = fit_fixed_theta(sym, 0.0);
  const FitReport raw = fit(WeightedSample::uniform(sym));
  for (double t = -2.0; t <= 2.0; t += 0.05)
    CHECK(g.psi.eval(t) == Approx(raw.density.log_pdf(t)).epsilon(1e-8));

  const auto x = sample(RefDensity::logistic(), 80, 3);
  const double theta = 0.17;
  const SymFit h = fit_fixed_theta(x, theta);
  double d = 0.0;
  for (double v : x) d = std::max(d, std::abs(v - theta));
  CHECK(h.psi.upper() == Approx(d).epsilon(1e-14));
  CHECK(h.psi.lower() == -h.psi.upper());
  for (double k : h.psi.knots()) {
    const bool ok = std::abs(k) <= 1e-12 || std::any_of(x.begin(), x.end(), [&](double v) {
      return std::abs(std::abs(v - theta) - std::abs(k)) <= 1e-9;
    });
    CHECK(ok);
  }
  double lik = 0.0;
  for (double v : x) lik += h.psi.eval(v - theta);
  CHECK(h.profile == Approx(lik / x.size() - 1.0).epsilon(1e-12));
}

TEST_CASE("profile criterion") {
  const std::vector<double> a{-1.0, 1.0};
  CHECK(profile_criterion(a, 0.0) == Approx(-std::log(2.0) - 1.0).epsilon(1e-9));
  const std::vector<double> b{-1.0, 0.0, 1.0};
  CHECK(profile_criterion(b, 0.0) >= profile_criterion(b, 0.5));
  CHECK(profile_criterion(b, 0.0) >= profile_criterion(b, -0.5));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = sample(RefDensity::normal(), 50, seed);
    for (double theta : {-0.3, 0.0, 0.21})
      CHECK(std::abs(profile_criterion(x, theta + 1e-6) - profile_criterion(x, theta)) < 1e-3);
  }
}

TEST_CASE("fit_mle small symmetric samples") {
  CHECK(std::abs(fit_mle(std::vector<double>{-1.0, 0.0, 1.0}).theta_hat) < 1e-7);
  CHECK(fit_mle(std::vector<double>{0.0, 1.0}).theta_hat == Approx(0.5).epsilon(1e-7));
  CHECK_THROWS_AS(fit_mle(std::vector<double>{3.0, 3.0}), DegenerateSampleError);
}

TEST_CASE("fit_mle on a normal sample") {
  const auto x = sample(RefDensity::normal(), 200, 2024);
  const MLEResult r = fit_mle(x);
  CHECK(std::abs(r.theta_hat) < 0.25);
  CHECK(r.theta_hat >= *std::min_element(x.begin(), x.end()));
  CHECK(r.theta_hat <= *std::max_element(x.begin(), x.end()));
  CHECK(r.grid.size() == 201);
  for (const auto& [theta, value] : r.grid) CHECK(value <= r.criterion + 1e-12);
  for (double theta : {-0.5, -0.1, 0.0, 0.3}) CHECK(profile_criterion(x, theta) <= r.criterion + 1e-12);
  for (double t = 0.01; t < r.psi_hat.upper(); t += 0.01)
    CHECK(r.psi_hat.eval(t) <= -std::log(2.0 * t) + 1e-12);
  CHECK(r.g_hat.normalizer() == Approx(1.0).epsilon(1e-10));
  CHECK(diagnostics(r, x).passed());
}

TEST_CASE("fit_mle parallel and serial agree") {
  const auto x = sample(RefDensity::laplace(), 120, 77);
  MLEOptions par, ser;
  ser.execution = Execution::Serial;
  const MLEResult a = fit_mle(x, par);
  const MLEResult b = fit_mle(x, ser);
  CHECK(a.theta_hat == b.theta_hat);
  CHECK(a.criterion == b.criterion);
  REQUIRE(a.grid.size() == b.grid.size());
  for (std::size_t i = 0; i < a.grid.size(); ++i) CHECK(a.grid[i] == b.grid[i]);
}

TEST_CASE("fit_mle equivariance") {
  const auto x = sample(RefDensity::logistic(), 60, 5);
  const MLEResult r = fit_mle(x);

  std::vector<double> shifted(x), scaled(x);
  for (double& v : shifted) v += 3.25;
  for (double& v : scaled) v *= 2.0;
  const MLEResult s = fit_mle(shifted);
  CHECK(s.theta_hat == Approx(r.theta_hat + 3.25).epsilon(1e-6));
  CHECK(s.criterion == Approx(r.criterion).epsilon(1e-8));
  for (double k : r.psi_hat.knots()) CHECK(s.psi_hat.eval(k) == Approx(r.psi_hat.eval(k)).epsilon(1e-6));

  const MLEResult c = fit_mle(scaled);
  CHECK(c.theta_hat == Approx(2.0 * r.theta_hat).epsilon(1e-6));
  for (double t = 0.0; t < r.psi_hat.upper(); t += 0.1)
    CHECK(c.psi_hat.eval(2.0 * t) == Approx(r.psi_hat.eval(t) - std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("characterization function") {
  const auto x = sample(RefDensity::normal(), 100, 8);
  const MLEResult r = fit_mle(x);
  double amax = 0.0;
  for (double v : x) amax = std::max(amax, std::abs(v - r.theta_hat));
  CHECK(characterization_h(r, x, amax) == Approx(0.0));
  CHECK_THROWS_AS(characterization_h(r, x, amax * 1.01), std::invalid_argument);
  CHECK_THROWS_AS(characterization_h(r, x, -0.1), std::invalid_argument);
  for (int i = 0; i <= 1000; ++i) CHECK(characterization_h(r, x, amax * i / 1000.0) >= -1e-7);
  for (double k : r.psi_hat.knots())
    if (k > 0.0 && k < amax) CHECK(std::abs(characterization_h(r, x, k)) <= 1e-6);
}

TEST_CASE("diagnostics") {
  const std::vector<double> two{0.0, 2.0};
  const MLEResult a = fit_mle(two);
  CHECK(a.g_hat.moments().variance == Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(diagnostics(a, two).passed());

  const std::vector<double> three{-1.0, 0.0, 1.0};
  const DiagnosticReport b = diagnostics(fit_mle(three), three);
  CHECK(b.passed());
  CHECK(b.cdf_sandwich);
  CHECK(b.variance_bound);
  CHECK(b.knot_structure);
  CHECK(b.zero_slope_at_origin);

  const auto x = sample(RefDensity::normal(), 100, 123);
  const DiagnosticReport c = diagnostics(fit_mle(x), x);
  CHECK(c.passed());
  CHECK(c.min_h >= -1e-7);
  CHECK(c.max_abs_h_at_knots <= 1e-6);
}
