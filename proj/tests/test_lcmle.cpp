#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "lcsym/errors.hpp"
#include "lcsym/lcmle.hpp"
#include "lcsym/numeric.hpp"
#include "lcsym/refdist.hpp"

using namespace lcsym;
using doctest::Approx;

namespace {

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
  return sample(RefDensity::normal(), n, seed);
}

}  // namespace

TEST_CASE("two points give the uniform density") {
  const std::vector<double> x{0.0, 1.0};
  const FitReport r = fit(WeightedSample::uniform(x));
  const auto& phi = r.density.log_density();
  CHECK(r.converged);
  CHECK(r.density.lower() == 0.0);
  CHECK(r.density.upper() == 1.0);
  CHECK(r.density.pdf(0.0) == Approx(1.0).epsilon(1e-9));
  CHECK(r.density.pdf(1.0) == Approx(1.0).epsilon(1e-9));
  CHECK(phi.max_concavity_violation() <= 1e-12);
  CHECK(r.objective == Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("degenerate sample") {
  const std::vector<double> x{2.0, 2.0, 2.0};
  CHECK_THROWS_AS(fit(WeightedSample::uniform(x)), DegenerateSampleError);
  CHECK_THROWS_AS(fit_even(WeightedSample::uniform(std::vector<double>{0.0})),
                  DegenerateSampleError);
}

TEST_CASE("objective closed forms") {
  const std::vector<double> pts{-1.0, 1.0}, w{0.5, 0.5};
  const WeightedSample ws(pts, w);
  const double l2 = std::log(2.0);
  const PLConcave laplace({-30.0, 0.0, 30.0}, {-30.0 - l2, -l2, -30.0 - l2});
  CHECK(objective(ws, laplace) == Approx(-2.0 - l2).epsilon(1e-12));
  const PLConcave unif({-2.0, 3.0}, {-std::log(5.0), -std::log(5.0)});
  CHECK(objective(ws, unif) == Approx(-std::log(5.0) - 1.0).epsilon(1e-14));
  const std::vector<double> p01{0.0, 1.0};
  CHECK(objective(WeightedSample(p01, w), PLConcave({0.0, 1.0}, {0.0, 0.0})) ==
        Approx(-1.0).epsilon(1e-14));
  CHECK(objective(ws, PLConcave({0.0, 1.0}, {0.0, 0.0})) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("Laplace sample is recovered in L1") {
  const auto x = sample(RefDensity::laplace(), 500, 42);
  const FitReport r = fit(WeightedSample::uniform(x));
  const auto& d = r.density;
  const auto inside = numeric::integrate(
      [&](double t) { return std::abs(d.pdf(t) - 0.5 * std::exp(-std::abs(t))); }, d.lower(),
      d.upper(), {1e-10, 1e-9}, d.log_density().knots());
  const double outside = 0.5 * std::exp(d.lower()) + 0.5 * std::exp(-d.upper());
  CHECK(inside.value + outside < 0.15);
}

TEST_CASE("fit properties on normal samples") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto x = normal_draws(40 + 30 * seed, seed);
    const WeightedSample ws = WeightedSample::uniform(x);
    const FitReport r = fit(ws);
    const auto& phi = r.density.log_density();
    CAPTURE(seed);
    REQUIRE(r.converged);

    // Ascent, optimality, support and knots.
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1] - 1e-12);
    const auto td = tent_derivatives(ws, phi);
    CHECK(*std::max_element(td.begin(), td.end()) <= 1e-7);
    CHECK(phi.lower() == *std::min_element(x.begin(), x.end()));
    CHECK(phi.upper() == *std::max_element(x.begin(), x.end()));
    for (double k : phi.knots()) CHECK(std::find(x.begin(), x.end(), k) != x.end());
    CHECK(phi.max_concavity_violation() <= 1e-12);

    // Normalized fit: objective = int phi dF - 1; mass and mean matching.
    CHECK(r.objective == Approx(objective(ws, phi)).epsilon(1e-12));
    double lik = 0.0;
    for (std::size_t i = 0; i < ws.size(); ++i) lik += ws.weights()[i] * phi.eval(ws.points()[i]);
    CHECK(r.objective == Approx(lik - 1.0).epsilon(1e-8));
    CHECK(r.density.normalizer() == Approx(1.0).epsilon(1e-10));
    CHECK(r.density.moments().mean == Approx(ws.mean()).epsilon(1e-8));

    // Refit from the same input reproduces the objective.
    CHECK(fit(ws).objective == Approx(r.objective).epsilon(1e-9));

    // Reflection.
    std::vector<double> neg(x.size());
    std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
    const FitReport rr = fit(WeightedSample::uniform(neg));
    CHECK(rr.objective == Approx(r.objective).epsilon(1e-10));
    for (double t = phi.lower(); t <= phi.upper(); t += 0.05)
      CHECK(rr.density.log_pdf(-t) == Approx(r.density.log_pdf(t)).epsilon(1e-7));
  }
}

TEST_CASE("weighted input matches replicated points") {
  const std::vector<double> pts{-1.0, 0.2, 0.5, 2.0};
  const std::vector<double> w{1.0, 2.0, 1.0, 1.0};
  const std::vector<double> rep{-1.0, 0.2, 0.2, 0.5, 2.0};
  const FitReport a = fit(WeightedSample(pts, w));
  const FitReport b = fit(WeightedSample::uniform(rep));
  CHECK(a.objective == Approx(b.objective).epsilon(1e-12));
}

TEST_CASE("even fit") {
  const auto x = normal_draws(60, 9);
  const WeightedSample ws = WeightedSample::uniform(x);
  const FitReport e = fit_even(ws);
  const auto& psi = e.density.log_density();
  CHECK(e.converged);
  CHECK(e.certificate <= 1e-7);
  CHECK(psi.lower() == -psi.upper());
  for (double t = 0.0; t <= psi.upper(); t += 0.1) CHECK(psi.eval(t) == Approx(psi.eval(-t)).epsilon(1e-14));
  for (double k : psi.knots()) {
    const bool ok = k == 0.0 || std::any_of(x.begin(), x.end(), [&](double v) {
      return std::abs(std::abs(v) - std::abs(k)) <= 1e-12;
    });
    CHECK(ok);
  }
  // The even fit of ws is the unconstrained fit of its symmetrization.
  std::vector<double> pm;
  for (double v : x) {
    pm.push_back(v);
    pm.push_back(-v);
  }
  const FitReport f = fit(WeightedSample::uniform(pm));
  CHECK(e.objective == Approx(f.objective).epsilon(1e-9));
}
