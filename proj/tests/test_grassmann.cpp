#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fermivar/grassmann.hpp"

using namespace fermivar;

namespace {

std::mt19937_64 rng(0x5eed5eedULL);

cplx rand_cplx() {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  return {d(rng), d(rng)};
}

GrassmannElement rand_element(int n_modes, int max_terms = 6) {
  std::uniform_int_distribution<std::uint64_t> mask(0, (std::uint64_t{1} << (2 * n_modes)) - 1);
  GrassmannElement e(n_modes);
  for (int t = 0; t < max_terms; ++t) e.add_term(mask(rng), rand_cplx());
  return e;
}

GrassmannElement rand_even(int n_modes, int max_terms = 6) {
  std::uniform_int_distribution<std::uint64_t> mask(0, (std::uint64_t{1} << (2 * n_modes)) - 1);
  GrassmannElement e(n_modes);
  for (int t = 0; t < max_terms;) {
    const std::uint64_t m = mask(rng);
    if (std::popcount(m) % 2) continue;
    e.add_term(m, rand_cplx());
    ++t;
  }
  return e;
}

Eigen::MatrixXcd rand_matrix(int n) {
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rand_cplx();
  return m;
}

double dist(const GrassmannElement& a, const GrassmannElement& b) { return (a - b).norm(); }

// Substitution oracle for taylor_shift: expand each monomial as a product of
// (g + v_g) factors directly in the enlarged algebra.
GrassmannElement substitute(const GrassmannElement& f,
                            const std::vector<std::pair<GeneratorIndex, GrassmannElement>>& shifts,
                            int target_modes) {
  const int n = f.n_modes();
  GrassmannElement out(target_modes);
  for (const auto& [m, c] : f.terms()) {
    GrassmannElement prod = GrassmannElement::scalar(target_modes, c);
    for (std::uint64_t w = m; w != 0; w &= w - 1) {
      const int id = std::countr_zero(w);
      const GeneratorIndex g = id < n ? field_gen(id) : conj_gen(id - n);
      GrassmannElement factor =
          embed(GrassmannElement::generator(n, g), target_modes);
      for (const auto& [sg, sval] : shifts)
        if (sg == g) factor += sval;
      prod = prod * factor;
    }
    out += prod;
  }
  return out;
}

}  // namespace

TEST_CASE("generator nilpotency and anticommutation") {
  const auto u0 = GrassmannElement::generator(2, field_gen(0));
  const auto ud0 = GrassmannElement::generator(2, conj_gen(0));
  CHECK((u0 * u0).is_zero());
  CHECK(dist(u0 * ud0, -(ud0 * u0)) == 0.0);

  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const GeneratorIndex ga = a < 2 ? field_gen(a) : conj_gen(a - 2);
      const GeneratorIndex gb = b < 2 ? field_gen(b) : conj_gen(b - 2);
      const auto ea = GrassmannElement::generator(2, ga);
      const auto eb = GrassmannElement::generator(2, gb);
      CHECK(dist(ea * eb, -(eb * ea)) == 0.0);
    }
  }
}

TEST_CASE("multiply: hand-expanded even product") {
  // (1 + ud0 u0)(1 + ud1 u1) = 1 + ud0 u0 + ud1 u1 + ud0 u0 ud1 u1
  const int n = 2;
  const auto one = GrassmannElement::scalar(n, 1.0);
  const auto u0 = GrassmannElement::generator(n, field_gen(0));
  const auto u1 = GrassmannElement::generator(n, field_gen(1));
  const auto ud0 = GrassmannElement::generator(n, conj_gen(0));
  const auto ud1 = GrassmannElement::generator(n, conj_gen(1));
  const auto a = one + ud0 * u0;
  const auto b = one + ud1 * u1;
  const auto want = one + ud0 * u0 + ud1 * u1 + ud0 * u0 * ud1 * u1;
  CHECK(dist(a * b, want) == 0.0);
  // even elements commute
  CHECK(dist(a * b, b * a) == 0.0);
}

TEST_CASE("multiply: associativity and distributivity on random triples") {
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = rand_element(3);
    const auto b = rand_element(3);
    const auto c = rand_element(3);
    CHECK(dist((a * b) * c, a * (b * c)) < 1e-14);
    CHECK(dist(a * (b + c), a * b + a * c) < 1e-14);
  }
}

TEST_CASE("derive: left derivative convention") {
  const int n = 1;
  const auto u0 = GrassmannElement::generator(n, field_gen(0));
  const auto ud0 = GrassmannElement::generator(n, conj_gen(0));
  const auto x = ud0 * u0;
  CHECK(dist(derive(x, conj_gen(0)), u0) == 0.0);
  CHECK(dist(derive(x, field_gen(0)), -ud0) == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rand_element(3);
    for (int m = 0; m < 3; ++m) {
      CHECK(derive(derive(f, field_gen(m)), field_gen(m)).is_zero());
      CHECK(derive(derive(f, conj_gen(m)), conj_gen(m)).is_zero());
    }
  }
}

TEST_CASE("berezin: scalar integrates to zero") {
  CHECK(berezin_integrate(GrassmannElement::scalar(1, 1.0)) == cplx(0.0));
  CHECK(berezin_integrate(GrassmannElement::scalar(3, 2.5)) == cplx(0.0));
}

TEST_CASE("berezin: one-mode gaussian by hand") {
  // exp(a ud u) = 1 + a ud u ; integral = det(-A) = -a
  const cplx a(0.8, -0.4);
  Eigen::MatrixXcd m(1, 1);
  m << a;
  const QuadraticForm qf(1, m);
  const cplx hand = berezin_integrate(exp_even(qf));
  CHECK(std::abs(hand - (-a)) < 1e-15);
  CHECK(std::abs(gaussian_integral(qf) - hand) == 0.0);
}

TEST_CASE("berezin: two-mode diagonal gaussian") {
  // A = diag(a,b): integral = det(-A) = a*b
  const cplx a(1.5, 0.25), b(-0.5, 1.0);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  CHECK(std::abs(gaussian_integral(QuadraticForm(2, m)) - a * b) < 1e-15);
}

TEST_CASE("gaussian_integral: zero form and det identity up to 4x4") {
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(1, 1);
  CHECK(gaussian_integral(QuadraticForm(1, z)) == cplx(0.0));

  for (int n = 1; n <= 4; ++n) {
    for (int trial = 0; trial < 25; ++trial) {
      const Eigen::MatrixXcd A = rand_matrix(n);
      const cplx got = gaussian_integral(QuadraticForm(n, A));
      const cplx want = Eigen::MatrixXcd(-A).determinant();
      CHECK(std::abs(got - want) < 1e-12);
    }
  }
}

TEST_CASE("norm identity <Psi|Psi> = det(Om^dag Om + 1)") {
  // Om = [[2]]: norm = 5
  Eigen::MatrixXcd om1(1, 1);
  om1 << 2.0;
  const auto psi1 = exp_even(QuadraticForm(1, om1));
  CHECK(std::abs(inner_product(psi1, psi1) - cplx(5.0)) < 1e-14);

  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::MatrixXcd om = rand_matrix(n);
      const auto psi = exp_even(QuadraticForm(n, om));
      const cplx got = inner_product(psi, psi);
      const cplx want =
          (om.adjoint() * om + Eigen::MatrixXcd::Identity(n, n)).determinant();
      CHECK(std::abs(got - want) < 1e-12);
      CHECK(std::abs(got.imag()) < 1e-12);
    }
  }
  convention_self_test();
}

TEST_CASE("exp/ln/inverse of even elements") {
  const int n = 2;
  CHECK(dist(exp_even(GrassmannElement::scalar(n, 0.0)), GrassmannElement::scalar(n, 1.0)) == 0.0);

  const auto one = GrassmannElement::scalar(n, 1.0);
  const auto nu = GrassmannElement::generator(n, conj_gen(0)) * GrassmannElement::generator(n, field_gen(0));
  CHECK(dist(inverse_even(one + nu), one - nu) < 1e-15);

  const cplx c(0.3, 0.7);
  CHECK(dist(ln_even(exp_even(c * nu)), c * nu) < 1e-15);

  for (int trial = 0; trial < 10; ++trial) {
    auto x = rand_even(3);
    x.add_term(0, cplx(2.0, 0.0) - x.body());  // keep the body away from zero
    CHECK(dist(exp_even(ln_even(x)), x) < 1e-12);
    CHECK(dist(inverse_even(x) * x, GrassmannElement::scalar(3, 1.0)) < 1e-12);
  }

  CHECK_THROWS_AS(exp_even(GrassmannElement::generator(n, field_gen(0))), std::invalid_argument);
  CHECK_THROWS_AS(ln_even(nu), std::invalid_argument);
  CHECK_THROWS_AS(inverse_even(nu), std::invalid_argument);
}

TEST_CASE("hermitian conjugate") {
  const int n = 1;
  const auto u0 = GrassmannElement::generator(n, field_gen(0));
  const auto ud0 = GrassmannElement::generator(n, conj_gen(0));
  const auto x = cplx(0, 1) * (ud0 * u0);
  CHECK(dist(hermitian_conjugate(x), cplx(0, -1) * (ud0 * u0)) == 0.0);

  const auto c = GrassmannElement::scalar(n, cplx(1.5, -2.5));
  CHECK(dist(hermitian_conjugate(c), GrassmannElement::scalar(n, cplx(1.5, 2.5))) == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    const auto f = rand_element(3);
    CHECK(dist(hermitian_conjugate(hermitian_conjugate(f)), f) == 0.0);
  }
  // (AB)^dag = B^dag A^dag
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = rand_element(3);
    const auto b = rand_element(3);
    CHECK(dist(hermitian_conjugate(a * b), hermitian_conjugate(b) * hermitian_conjugate(a)) < 1e-14);
  }
}

TEST_CASE("dual functional of a one-mode gaussian") {
  // Psi = exp(w ud u) -> det(-Om^dag) exp(ud (Om^dag)^{-1} u) = -conj(w) exp(ud u / conj(w))
  const cplx w(1.2, -0.7);
  Eigen::MatrixXcd om(1, 1);
  om << w;
  const auto psi = exp_even(QuadraticForm(1, om));
  Eigen::MatrixXcd inv(1, 1);
  inv << 1.0 / std::conj(w);
  const auto want = -std::conj(w) * exp_even(QuadraticForm(1, inv));
  CHECK(dist(dual_functional(psi), want) < 1e-13);
}

TEST_CASE("dual functional of the unit functional is the top element") {
  const auto one = GrassmannElement::scalar(1, 1.0);
  const auto dual = dual_functional(one);
  // u0 ud0 with coefficient +1 under the fixed convention
  CHECK(dual.terms().size() == 1);
  CHECK(std::abs(dual.coefficient(0b11) - cplx(1.0)) == 0.0);
}

TEST_CASE("dual of the dual is the parity flip") {
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = rand_element(2);
    CHECK(dist(dual_functional(dual_functional(f)), parity_flip(f)) < 1e-13);
  }
}

TEST_CASE("expectation: normalization and fluctuation moment") {
  // Psi = sqrt(p) = exp(dt ud h u), h = 1, dt = 0.1: <w wd> = -0.1/1.01
  const double h = 1.0, dt = 0.1;
  Eigen::MatrixXcd om(1, 1);
  om << h * dt;
  const auto psi = exp_even(QuadraticForm(1, om));
  const auto one = GrassmannElement::scalar(1, 1.0);
  CHECK(std::abs(expectation(psi, one) - cplx(1.0)) < 1e-15);

  const auto w = GrassmannElement::generator(1, field_gen(0));
  const auto wd = GrassmannElement::generator(1, conj_gen(0));
  const cplx got = expectation(psi, w * wd);
  CHECK(std::abs(got - cplx(-h * dt / (h * dt * h * dt + 1.0))) < 1e-14);
  CHECK(std::abs(got - cplx(-0.1 / 1.01)) < 1e-14);
}

TEST_CASE("taylor shift: zero shift and Appendix-style two-variable expansion") {
  const auto f = rand_element(2);
  CHECK(dist(taylor_shift(f, {}, 2), f) == 0.0);

  // f = a + b u1 + c u2 + d u1 u2 shifted by (v1, v2):
  // f + v1 (b + d u2) + v2 (c - d u1) + d v1 v2
  const int n = 2, big = 4;
  const cplx a = rand_cplx(), b = rand_cplx(), c = rand_cplx(), d = rand_cplx();
  const auto u1 = GrassmannElement::generator(big, field_gen(0));
  const auto u2 = GrassmannElement::generator(big, field_gen(1));
  const auto v1 = GrassmannElement::generator(big, field_gen(2));
  const auto v2 = GrassmannElement::generator(big, field_gen(3));
  GrassmannElement f2(n);
  f2.add_term(0, a);
  f2.add_term(0b01, b);
  f2.add_term(0b10, c);
  f2 += d * (GrassmannElement::generator(n, field_gen(0)) * GrassmannElement::generator(n, field_gen(1)));

  const auto shifted = taylor_shift(f2, {{field_gen(0), v1}, {field_gen(1), v2}}, big);
  const auto want = embed(f2, big) + v1 * (GrassmannElement::scalar(big, b) + d * u2) +
                    v2 * (GrassmannElement::scalar(big, c) - d * u1) + d * (v1 * v2);
  CHECK(dist(shifted, want) < 1e-14);
}

TEST_CASE("taylor shift matches the substitution oracle") {
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2, big = 4;
    const auto f = rand_element(n, 8);
    std::vector<std::pair<GeneratorIndex, GrassmannElement>> shifts;
    for (int m = 0; m < n; ++m) {
      shifts.emplace_back(field_gen(m), rand_cplx() * GrassmannElement::generator(big, field_gen(n + m)));
      shifts.emplace_back(conj_gen(m), rand_cplx() * GrassmannElement::generator(big, conj_gen(n + m)));
    }
    CHECK(dist(taylor_shift(f, shifts, big), substitute(f, shifts, big)) < 1e-13);
  }
}

TEST_CASE("integration by parts") {
  // int (dF/du_a) Om_ab G_b = -int F(-u,-ud) d/du_a (Om_ab G_b)
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 8; ++trial) {
      const auto F = rand_element(n);
      std::vector<GrassmannElement> G;
      for (int b = 0; b < n; ++b) G.push_back(rand_element(n));
      const Eigen::MatrixXcd om = rand_matrix(n);

      cplx lhs = 0.0, rhs = 0.0;
      const auto Fflip = parity_flip(F);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          lhs += om(a, b) * berezin_integrate(derive(F, field_gen(a)) * G[b]);
          rhs += -om(a, b) * berezin_integrate(Fflip * derive(G[b], field_gen(a)));
        }
      }
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

TEST_CASE("sign-free integration by parts for even sign-invariant functionals") {
  // For even F with F(-u,-ud) = F the rule loses the parity flip.
  const int n = 2;
  for (int trial = 0; trial < 8; ++trial) {
    const auto F = rand_even(n);
    const auto G = rand_element(n);
    REQUIRE(dist(parity_flip(F), F) == 0.0);
    const cplx lhs = berezin_integrate(derive(F, field_gen(0)) * G);
    const cplx rhs = -berezin_integrate(F * derive(G, field_gen(0)));
    CHECK(std::abs(lhs - rhs) < 1e-13);
  }
}

TEST_CASE("errors: mode count mismatch") {
  const auto a = GrassmannElement::scalar(1, 1.0);
  const auto b = GrassmannElement::scalar(2, 1.0);
  CHECK_THROWS_AS(a * b, std::invalid_argument);
  CHECK_THROWS_AS(inner_product(a, b), std::invalid_argument);
}

TEST_CASE("stable text rendering") {
  const int n = 1;
  const auto u0 = GrassmannElement::generator(n, field_gen(0));
  const auto ud0 = GrassmannElement::generator(n, conj_gen(0));
  auto e = GrassmannElement::scalar(n, 1.0) + cplx(2.0) * (ud0 * u0);
  CHECK(to_string(e) == "(1+0i) + (-2+0i) u0 ud0");
  CHECK(to_string(GrassmannElement(1)) == "0");
}
