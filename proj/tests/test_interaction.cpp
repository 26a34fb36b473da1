#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fermivar/interaction.hpp"

using namespace fermivar;

namespace {

std::mt19937_64 rng(0x1a7e5eedULL);

double rand_real(double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::MatrixXcd hermitian2() {
  Eigen::MatrixXcd m(2, 2);
  m << 1.1, cplx(0.3, 0.2), cplx(0.3, -0.2), -1.1;
  return m;
}

GrassmannElement gaussian_psi(int n, const Eigen::MatrixXcd& omega) {
  return exp_even(QuadraticForm(n, omega));
}

}  // namespace

TEST_CASE("theta: constants, one-mode hand value, bilinearity") {
  Eigen::MatrixXcd h1 = Eigen::MatrixXcd::Identity(1, 1);
  const InteractionSpec spec = make_interaction_spec(h1, 0.49, 2.0);  // scalar g = 0.7

  CHECK(theta(GrassmannElement::scalar(1, 3.0), spec).is_zero());

  // S = c ud u: Theta = -c^2 g ud u
  const double c = 0.8, g = 0.7;
  const auto u = GrassmannElement::generator(1, field_gen(0));
  const auto ud = GrassmannElement::generator(1, conj_gen(0));
  const GrassmannElement s = c * (ud * u);
  const GrassmannElement want = -c * c * g * (ud * u);
  CHECK((theta(s, spec) - want).norm() < 1e-14);

  CHECK((theta(cplx(2.0) * s, spec) - cplx(4.0) * theta(s, spec)).norm() < 1e-14);

  CHECK_THROWS_AS(theta(u, spec), std::invalid_argument);
}

TEST_CASE("lambda functional: vanishing coupling, linear G scaling, reality") {
  const Eigen::MatrixXcd h = hermitian2();

  GrassmannElement rho(2), s(2);
  rho.add_term(0, 1.4);
  rho.add_term(0b0101, 0.3);
  rho.add_term(0b1010, -0.4);
  rho.add_term(0b1111, 0.2);
  s.add_term(0b0101, 0.6);
  s.add_term(0b0110, 0.25);
  s.add_term(0b1001, 0.25);
  s.add_term(0b1010, -0.15);

  const InteractionSpec zero = make_interaction_spec(h, 0.0, 2.0);
  CHECK(lambda_functional(rho, s, zero).is_zero());

  const InteractionSpec g1 = make_interaction_spec(h, 0.37, 2.0);
  const InteractionSpec g2 = make_interaction_spec(h, 0.74, 2.0);
  const GrassmannElement l1 = lambda_functional(rho, s, g1);
  const GrassmannElement l2 = lambda_functional(rho, s, g2);
  CHECK((l2 - cplx(2.0) * l1).norm() < 1e-12 * l1.norm());

  // real rho, S, g give a real Lambda
  for (const auto& [mask, coeff] : l1.terms()) CHECK(std::abs(coeff.imag()) < 1e-13);

  GrassmannElement bad(2);
  bad.add_term(0b0101, 1.0);
  CHECK_THROWS_AS(lambda_functional(bad, s, g1), std::invalid_argument);
}

TEST_CASE("free coupling limit: both right-hand sides reduce to H0 Psi") {
  const Eigen::MatrixXcd h = hermitian2();
  const InteractionSpec spec = make_interaction_spec(h, 0.0, 2.0);
  Eigen::MatrixXcd omega(2, 2);
  omega << cplx(0.4, 0.1), cplx(-0.2, 0.3), cplx(0.1, -0.5), cplx(0.7, 0.2);
  const GrassmannElement psi = gaussian_psi(2, omega);

  const GrassmannElement h0psi = free_rhs(psi, spec);
  CHECK((nonlinear_rhs(psi, spec) - h0psi).norm() < 1e-13);
  CHECK((linear_quartic_rhs(psi, spec) - h0psi).norm() < 1e-13);
}

TEST_CASE("golden instance: the two quantization routes disagree at G > 0") {
  const Eigen::MatrixXcd h = hermitian2();
  const InteractionSpec spec = make_interaction_spec(h, 0.1, 2.0);
  Eigen::MatrixXcd omega(2, 2);
  omega << cplx(0.5, -0.2), cplx(0.3, 0.1), cplx(-0.4, 0.2), cplx(0.8, 0.3);
  const GrassmannElement psi = gaussian_psi(2, omega);

  const RhsComparison cmp = compare_rhs(psi, spec);
  CHECK(cmp.difference_norm > 1e-6);

  // linear ratio test: halving G halves the difference at leading order
  const InteractionSpec half = make_interaction_spec(h, 0.05, 2.0);
  const double ratio = cmp.difference_norm / compare_rhs(psi, half).difference_norm;
  CHECK(ratio == Catch::Approx(2.0).margin(0.1));
}

TEST_CASE("additivity: linear route is additive, nonlinear route is not") {
  const Eigen::MatrixXcd h = hermitian2();
  const InteractionSpec spec = make_interaction_spec(h, 0.2, 2.0);
  Eigen::MatrixXcd om1(2, 2), om2(2, 2);
  om1 << 0.6, 0.1, -0.2, 0.9;
  om2 << cplx(0.2, 0.4), cplx(0.0, -0.3), cplx(0.5, 0.1), cplx(-0.7, 0.2);
  const GrassmannElement psi1 = gaussian_psi(2, om1);
  const GrassmannElement psi2 = gaussian_psi(2, om2);
  const GrassmannElement sum = psi1 + psi2;

  const GrassmannElement lin_sum = linear_quartic_rhs(sum, spec);
  const GrassmannElement lin_parts = linear_quartic_rhs(psi1, spec) + linear_quartic_rhs(psi2, spec);
  CHECK((lin_sum - lin_parts).norm() < 1e-12 * lin_parts.norm());

  const GrassmannElement non_sum = nonlinear_rhs(sum, spec);
  const GrassmannElement non_parts = nonlinear_rhs(psi1, spec) + nonlinear_rhs(psi2, spec);
  CHECK((non_sum - non_parts).norm() > 1e-6);
}

TEST_CASE("rho and S extraction inverts the polar decomposition") {
  // Psi = sqrt(rho) exp(i S) for commuting even elements
  Eigen::MatrixXcd omega(2, 2);
  omega << cplx(0.4, 0.2), cplx(0.1, -0.3), cplx(-0.2, 0.1), cplx(0.6, -0.4);
  const GrassmannElement psi = gaussian_psi(2, omega);
  const RhoS rs = extract_rho_s(psi);
  CHECK(rs.rho.is_even());
  CHECK(rs.s.is_even());
  const cplx I(0, 1);
  const GrassmannElement rebuilt =
      exp_even(cplx(0.5) * ln_even(rs.rho)) * exp_even(I * rs.s);
  CHECK((rebuilt - psi).norm() < 1e-12);

  CHECK_THROWS_AS(extract_rho_s(GrassmannElement(2)), std::invalid_argument);
}
