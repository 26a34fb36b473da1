#include <catch2/catch_amalgamated.hpp>

#include "fermivar/schwinger.hpp"

using namespace fermivar;

TEST_CASE("field never switched on leaves the vacuum intact") {
  // ramp far in the future relative to the evolved window: window weight ~ 0
  RampProfile ramp;
  ramp.shape = RampProfile::Shape::Sudden;
  ramp.t_on = -5.0;
  ramp.t_off = 5.0;
  const double T = 10.0;
  ModeResult r = evolve_mode(0.0, 0.0, 1.0, 1e-30, ramp, T, 2000);
  CHECK(r.ok);
  CHECK(r.beta_sq_numeric < 1e-12);
}

TEST_CASE("tunneling probability matches exp(-pi xi) at xi = 1 and 2") {
  const double eE = 1.0, T = 40.0;
  const RampProfile ramp = make_schwinger_ramp(eE, T);

  ModeResult r1 = evolve_mode(0.0, 0.0, 1.0, eE, ramp, T, 200000);
  REQUIRE(r1.ok);
  CHECK(r1.xi == Catch::Approx(1.0));
  CHECK(r1.unitarity_defect < 1e-9);
  CHECK(r1.rel_err < 0.02);
  CHECK(r1.drift < 0.005);

  ModeResult r2 = evolve_mode(1.0, 0.0, 1.0, eE, ramp, T, 200000);  // xi = 2
  REQUIRE(r2.ok);
  CHECK(r2.xi == Catch::Approx(2.0));
  CHECK(r2.beta_sq_numeric == Catch::Approx(std::exp(-2 * M_PI)).epsilon(0.02));

  // |alpha|^2 + |beta|^2 = 1 for the two-level reduction is implied by
  // unitarity of the propagator; the defect bound above covers it.
}

TEST_CASE("longitudinal momentum does not change the yield") {
  const double eE = 1.0, T = 40.0;
  const RampProfile ramp = make_schwinger_ramp(eE, T);
  const ModeResult a = evolve_mode(0.0, 0.0, 1.0, eE, ramp, T, 200000, -0.5);
  const ModeResult b = evolve_mode(0.0, 0.0, 1.0, eE, ramp, T, 200000, 0.5);
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  CHECK(std::abs(a.beta_sq_numeric - b.beta_sq_numeric) / a.beta_sq_numeric < 0.01);
}

TEST_CASE("two-component and four-component routes agree") {
  const double eE = 1.0, T = 40.0;
  const RampProfile ramp = make_schwinger_ramp(eE, T);
  const ModeResult r2 = evolve_mode(0.6, -0.3, 1.0, eE, ramp, T, 100000);
  const double b4 = evolve_mode_4d_beta_sq(0.6, -0.3, 1.0, eE, ramp, T, 100000);
  REQUIRE(r2.ok);
  CHECK(std::abs(r2.beta_sq_numeric - b4) < 1e-6);
}

TEST_CASE("ramp window inconsistent with T is rejected") {
  const RampProfile ramp = make_schwinger_ramp(1.0, 40.0);
  const ModeResult r = evolve_mode(0.0, 0.0, 1.0, 1.0, ramp, 35.0, 1000);
  CHECK_FALSE(r.ok);
  CHECK(r.error == "ramp window inconsistent with T");
}

TEST_CASE("sweep: empty grid rejected, results ordered, convergence in steps") {
  SchwingerJob job;
  job.m = 1.0;
  job.eE = 1.0;
  job.p_z_samples = {0.0};
  job.steps = 50000;
  CHECK_THROWS_AS(sweep(job), std::invalid_argument);  // empty grid

  job.p_perp_grid = {{0.0, 0.0}, {1.0, 0.0}};  // xi = 1, 2
  job.max_workers = 2;
  const SweepResult res = sweep(job);
  REQUIRE(res.modes.size() == 2);
  CHECK(res.summary.failures == 0);
  CHECK(res.modes[0].xi < res.modes[1].xi);
  CHECK(res.summary.monotone_in_xi);

  SchwingerJob fine = job;
  fine.steps = 200000;
  const SweepResult res2 = sweep(fine);
  CHECK(res2.summary.max_rel_err < res.summary.max_rel_err * 1.2);
}

TEST_CASE("persistence probability: quadrature matches the closed form at lambda = 2") {
  const PersistenceResult res = persistence_probability(1.0, 1.0, 1.0, 2.0);
  REQUIRE(res.has_closed_form);
  CHECK(std::abs(res.exponent - res.exponent_closed_form) <
        1e-6 * std::abs(res.exponent_closed_form));

  // first term by hand: -(2 (eE)^2 VT/(2 pi)^3) e^{-pi}
  const double want1 = -(2.0 / std::pow(2 * M_PI, 3)) * std::exp(-M_PI);
  CHECK(res.terms.at(0) == Catch::Approx(want1).epsilon(1e-9));

  // exponential suppression: eE -> 0 with m > 0 gives probability -> 1
  const PersistenceResult weak = persistence_probability(1.0, 0.05, 1.0, 2.0);
  CHECK(std::abs(weak.exponent) < 1e-20);
  CHECK(weak.probability == Catch::Approx(1.0));

  // kappa != 1: exponent differs from the kappa = 1 value
  const PersistenceResult k2 = persistence_probability(1.0, 1.0, 1.0, 1.0);
  CHECK_FALSE(k2.has_closed_form);
  CHECK(std::abs(k2.exponent - res.exponent) > 1e-6);

  // terms decay geometrically
  for (size_t n = 1; n < res.terms.size(); ++n)
    CHECK(std::abs(res.terms[n]) < std::abs(res.terms[n - 1]));
}
