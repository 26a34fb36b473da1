#pragma once

// Finite-mode Fermi self-interaction sector. The quartic coupling G(psi-bar psi)^2
// enters through g = gamma0 sqrt(G) delta(x-y), realized here as the identity on
// the mode index tensored with gamma0 sqrt(G). Two quantization routes are
// provided for the interacting Schroedinger equation right-hand side:
//   nonlinear:       i d Psi/dt = H0 Psi + Lambda(rho, S) Psi
//   linear quartic:  i d Psi/dt = H0 Psi - (16/lambda^2) ((d/dpsi) g (d/dpsid))^2 Psi
// with rho = conj(Psi) Psi and S = (i/2)(ln conj(Psi) - ln Psi). The two differ
// at G > 0; comparing them numerically is the point of this module.

#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "fermivar/grassmann.hpp"

namespace fermivar {

struct InteractionSpec {
  double coupling = 0.0;      // G >= 0
  Eigen::MatrixXcd g_kernel;  // gamma0 sqrt(G) on the finite modes
  Eigen::MatrixXcd h_kernel;  // free first-quantized Hamiltonian
  double lambda = 2.0;
  int n_modes = 0;

  void validate() const {
    if (coupling < 0) throw std::invalid_argument("InteractionSpec: coupling must be non-negative");
    if (lambda <= 0) throw std::invalid_argument("InteractionSpec: lambda must be positive");
    if (g_kernel.rows() != n_modes || g_kernel.cols() != n_modes ||
        h_kernel.rows() != n_modes || h_kernel.cols() != n_modes)
      throw std::invalid_argument("InteractionSpec: kernel dimension mismatch");
  }
};

// g = gamma0 sqrt(G) (x) identity on the remaining mode index. For an odd
// dimension the scalar reduction g = sqrt(G) * I is used (single-component
// toy modes).
inline InteractionSpec make_interaction_spec(const Eigen::MatrixXcd& h_kernel, double coupling,
                                             double lambda) {
  InteractionSpec spec;
  spec.coupling = coupling;
  spec.h_kernel = h_kernel;
  spec.lambda = lambda;
  spec.n_modes = static_cast<int>(h_kernel.rows());
  const double root = std::sqrt(coupling);
  if (spec.n_modes % 2 == 0) {
    Eigen::Matrix2cd gamma0;
    gamma0 << 1, 0, 0, -1;
    spec.g_kernel =
        root *
        Eigen::kroneckerProduct(Eigen::MatrixXcd::Identity(spec.n_modes / 2, spec.n_modes / 2), gamma0)
            .eval();
  } else {
    spec.g_kernel = root * Eigen::MatrixXcd::Identity(spec.n_modes, spec.n_modes);
  }
  spec.validate();
  return spec;
}

namespace detail {

// sum_ij k_ij (d/du_i) X  *  (d/dud_j) Y   (both factors functions)
inline GrassmannElement bilinear_derivative(const GrassmannElement& x, const GrassmannElement& y,
                                            const Eigen::MatrixXcd& k) {
  const int n = x.n_modes();
  GrassmannElement out(n);
  for (int i = 0; i < n; ++i) {
    const GrassmannElement dx = derive(x, field_gen(i));
    if (dx.is_zero()) continue;
    for (int j = 0; j < n; ++j) {
      if (k(i, j) == cplx(0.0)) continue;
      out += k(i, j) * (dx * derive(y, conj_gen(j)));
    }
  }
  return out;
}

// sum_ij k_ij (d/du_i)(d/dud_j) X   (second derivative of one function)
inline GrassmannElement laplacian_like(const GrassmannElement& x, const Eigen::MatrixXcd& k) {
  const int n = x.n_modes();
  GrassmannElement out(n);
  for (int j = 0; j < n; ++j) {
    const GrassmannElement dj = derive(x, conj_gen(j));
    if (dj.is_zero()) continue;
    for (int i = 0; i < n; ++i) {
      if (k(i, j) == cplx(0.0)) continue;
      out += k(i, j) * derive(dj, field_gen(i));
    }
  }
  return out;
}

}  // namespace detail

// Theta = (dS/dpsi) g (dS/dpsid)
inline GrassmannElement theta(const GrassmannElement& s, const InteractionSpec& spec) {
  if (!s.is_even()) throw std::invalid_argument("theta: S must be even");
  if (s.n_modes() != spec.n_modes) throw std::invalid_argument("theta: mode count mismatch");
  return detail::bilinear_derivative(s, s, spec.g_kernel);
}

// The full bracketed interaction functional:
// Lambda = (16/lambda^3) { [ (drho g dS) + (dS g drho) + 2 rho (d g dS) ] Theta
//                          + rho [ (dTheta g dS) + (dS g dTheta) ] - Theta^2 }
inline GrassmannElement lambda_functional(const GrassmannElement& rho, const GrassmannElement& s,
                                          const InteractionSpec& spec) {
  if (!rho.is_even() || rho.body() == cplx(0.0))
    throw std::invalid_argument("lambda_functional: rho must be even with nonzero body");
  if (!s.is_even()) throw std::invalid_argument("lambda_functional: S must be even");
  const auto& g = spec.g_kernel;
  const GrassmannElement th = theta(s, spec);

  GrassmannElement bracket =
      (detail::bilinear_derivative(rho, s, g) + detail::bilinear_derivative(s, rho, g) +
       cplx(2.0) * (rho * detail::laplacian_like(s, g))) *
      th;
  bracket += rho * (detail::bilinear_derivative(th, s, g) + detail::bilinear_derivative(s, th, g));
  bracket -= th * th;
  const double lam = spec.lambda;
  return cplx(16.0 / (lam * lam * lam)) * bracket;
}

// free-part action H0 Psi = (4/lambda) (d/dpsi) h (d/dpsid) Psi
inline GrassmannElement free_rhs(const GrassmannElement& psi, const InteractionSpec& spec) {
  return cplx(4.0 / spec.lambda) * detail::laplacian_like(psi, spec.h_kernel);
}

struct RhoS {
  GrassmannElement rho, s;
};

// rho = conj(Psi) Psi, S = (i/2)(ln conj(Psi) - ln Psi); principal branch on the body.
inline RhoS extract_rho_s(const GrassmannElement& psi) {
  if (psi.body() == cplx(0.0)) throw std::invalid_argument("extract_rho_s: Psi needs a nonzero body");
  const GrassmannElement bar = hermitian_conjugate(psi);
  const cplx half_i(0, 0.5);
  return {bar * psi, half_i * (ln_even(bar) - ln_even(psi))};
}

inline GrassmannElement nonlinear_rhs(const GrassmannElement& psi, const InteractionSpec& spec) {
  const RhoS rs = extract_rho_s(psi);
  return free_rhs(psi, spec) + lambda_functional(rs.rho, rs.s, spec) * psi;
}

inline GrassmannElement linear_quartic_rhs(const GrassmannElement& psi, const InteractionSpec& spec) {
  if (psi.body() == cplx(0.0))
    throw std::invalid_argument("linear_quartic_rhs: Psi needs a nonzero body");
  const GrassmannElement quartic =
      detail::laplacian_like(detail::laplacian_like(psi, spec.g_kernel), spec.g_kernel);
  const double lam = spec.lambda;
  return free_rhs(psi, spec) - cplx(16.0 / (lam * lam)) * quartic;
}

struct RhsComparison {
  GrassmannElement nonlinear, linear;
  double difference_norm = 0.0;
};

inline RhsComparison compare_rhs(const GrassmannElement& psi, const InteractionSpec& spec) {
  RhsComparison cmp{nonlinear_rhs(psi, spec), linear_quartic_rhs(psi, spec), 0.0};
  cmp.difference_norm = (cmp.nonlinear - cmp.linear).norm();
  return cmp;
}

}  // namespace fermivar
