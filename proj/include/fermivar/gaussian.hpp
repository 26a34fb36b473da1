#pragma once

// Gaussian functional states Psi = N exp(ud Omega u) and their dynamics.
// The covariance flows by i dOmega/dt = (lambda/4)(1 - 2 Omega/lambda) h (1 + 2 Omega/lambda),
// solved through the linear equation i dQ/dt = h Q with Q(t0) = P_minus and
// Omega = (lambda/2)(Q - P_plus)(Q + P_plus)^{-1}. Pair creation probabilities
// reduce to determinants over Bogoliubov data.

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fermivar/dirac.hpp"
#include "fermivar/grassmann.hpp"

namespace fermivar {

// kappa enters the creation-probability determinant; the single place where
// lambda and kappa are tied together. kappa(2) = 1.
inline double kappa_of_lambda(double lambda) {
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  const double nu = 1.0 + lambda * lambda / 4.0;
  return lambda * lambda / (nu * nu);
}

struct Covariance {
  Eigen::MatrixXcd omega;
  double lambda = 2.0;

  Covariance(Eigen::MatrixXcd om, double lam) : omega(std::move(om)), lambda(lam) {
    if (lambda <= 0) throw std::invalid_argument("Covariance: lambda must be positive");
    if (omega.rows() != omega.cols()) throw std::invalid_argument("Covariance: omega must be square");
  }
  int dim() const { return static_cast<int>(omega.rows()); }
};

// Free vacuum: Omega0 = (lambda/2)(P_minus - P_plus); Omega0^2 = lambda^2/4.
inline Covariance vacuum_covariance(const ModeBasis& basis, double lambda) {
  if (lambda <= 0) throw std::invalid_argument("vacuum_covariance: lambda must be positive");
  return Covariance((lambda / 2.0) * (basis.p_minus - basis.p_plus), lambda);
}

enum class Integrator { MatrixExpMidpoint, RK4 };

struct EvolutionState {
  Eigen::MatrixXcd q;  // Q(t1)
  double t = 0.0;
  Eigen::MatrixXcd p_minus, p_plus;
  // phase quadrature history: samples of Tr(h (Q-P+)(Q+P+)^{-1});
  // Tr(h Omega) = (lambda/2) times a sample.
  std::vector<double> sample_times;
  std::vector<cplx> phase_kernel;
};

namespace detail {

inline Eigen::MatrixXcd hermitian_exp(const Eigen::MatrixXcd& h, cplx factor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd phases = (factor * es.eigenvalues().cast<cplx>().array()).exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline void check_hermitian(const Eigen::MatrixXcd& h) {
  if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm()))
    throw std::invalid_argument("evolve_Q: h(t) must be Hermitian");
}

// Tikhonov-regularized inverse with condition reporting.
inline Eigen::MatrixXcd tikhonov_inverse(const Eigen::MatrixXcd& m, double sigma, double& cond) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  Eigen::VectorXd inv(s.size());
  for (int i = 0; i < s.size(); ++i) inv(i) = s(i) / (s(i) * s(i) + sigma * sigma);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

}  // namespace detail

// Advance an existing state to t1, appending phase-quadrature samples.
inline void continue_evolve(EvolutionState& st, const std::function<Eigen::MatrixXcd(double)>& h_of_t,
                            double t1, int steps, Integrator method = Integrator::MatrixExpMidpoint) {
  if (t1 <= st.t) throw std::invalid_argument("continue_evolve: need t1 > current time");
  if (steps < 1) throw std::invalid_argument("continue_evolve: need at least one step");
  const cplx I(0, 1);
  const double t0 = st.t;
  const double dt = (t1 - t0) / steps;

  auto record = [&](double t, const Eigen::MatrixXcd& h) {
    double cond;
    const Eigen::MatrixXcd inv = detail::tikhonov_inverse(st.q + st.p_plus, 1e-12, cond);
    st.sample_times.push_back(t);
    st.phase_kernel.push_back((h * (st.q - st.p_plus) * inv).trace());
  };

  if (st.sample_times.empty()) record(t0, h_of_t(t0));
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * dt;
    if (method == Integrator::MatrixExpMidpoint) {
      const Eigen::MatrixXcd hm = h_of_t(t + dt / 2);
      detail::check_hermitian(hm);
      st.q = detail::hermitian_exp(hm, -I * dt) * st.q;
    } else {
      const auto rhs = [&](double tt, const Eigen::MatrixXcd& q) -> Eigen::MatrixXcd {
        const Eigen::MatrixXcd h = h_of_t(tt);
        detail::check_hermitian(h);
        return -I * (h * q);
      };
      const Eigen::MatrixXcd k1 = rhs(t, st.q);
      const Eigen::MatrixXcd k2 = rhs(t + dt / 2, st.q + (dt / 2) * k1);
      const Eigen::MatrixXcd k3 = rhs(t + dt / 2, st.q + (dt / 2) * k2);
      const Eigen::MatrixXcd k4 = rhs(t + dt, st.q + dt * k3);
      st.q += (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    st.t = t + dt;
    record(st.t, h_of_t(st.t));
  }
}

// Integrate i dQ/dt = h(t) Q from Q(t0) = P_minus of the supplied basis.
// MatrixExpMidpoint applies the unitary exp(-i dt h(midpoint)) each step and
// conserves Q^dag Q = P_minus to machine precision; RK4 is available for
// convergence studies. Records the phase-quadrature samples along the way.
inline EvolutionState evolve_Q(const std::function<Eigen::MatrixXcd(double)>& h_of_t,
                               const ModeBasis& basis, double t0, double t1, int steps,
                               Integrator method = Integrator::MatrixExpMidpoint) {
  if (t1 <= t0) throw std::invalid_argument("evolve_Q: need t1 > t0");
  EvolutionState st;
  st.p_minus = basis.p_minus;
  st.p_plus = basis.p_plus;
  st.q = basis.p_minus;
  st.t = t0;
  continue_evolve(st, h_of_t, t1, steps, method);
  return st;
}

struct OmegaResult {
  Covariance covariance;
  double condition_number = 1.0;
  bool flagged = false;  // condition number above 1e10
};

// Omega(t) = (lambda/2)(Q - P_plus)(Q + P_plus)^{-1}, Tikhonov-regularized.
inline OmegaResult omega_from_Q(const EvolutionState& st, double lambda) {
  if (lambda <= 0) throw std::invalid_argument("omega_from_Q: lambda must be positive");
  double cond;
  const Eigen::MatrixXcd inv = detail::tikhonov_inverse(st.q + st.p_plus, 1e-12, cond);
  if (cond > 1e14)
    throw std::runtime_error("omega_from_Q: Q + P_plus singular beyond regularization threshold");
  OmegaResult res{Covariance((lambda / 2.0) * (st.q - st.p_plus) * inv, lambda), cond, cond > 1e10};
  return res;
}

// Right-hand side of i dOmega/dt (the covariance flow); used as a cross-check
// on the Q-based propagation.
inline Eigen::MatrixXcd covariance_flow_rhs(const Eigen::MatrixXcd& omega,
                                            const Eigen::MatrixXcd& h, double lambda) {
  const int d = static_cast<int>(omega.rows());
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  return (lambda / 4.0) * (id - (2.0 / lambda) * omega) * h * (id + (2.0 / lambda) * omega);
}

// N(t) = det(1 + Omega^dag Omega)^{-1/2} exp(-(i/lambda) int Re Tr(h Omega) ds),
// the phase evaluated by trapezoidal quadrature on the recorded history.
inline cplx normalization_factor(const EvolutionState& st, double lambda) {
  if (st.sample_times.empty())
    throw std::invalid_argument("normalization_factor: empty phase history");
  const Covariance cov = omega_from_Q(st, lambda).covariance;
  const int d = cov.dim();
  const Eigen::MatrixXcd one_pl = Eigen::MatrixXcd::Identity(d, d) + cov.omega.adjoint() * cov.omega;
  const double modulus = 1.0 / std::sqrt(one_pl.determinant().real());

  // (1/lambda) Tr(h Omega) = (1/2) * kernel sample: lambda cancels
  double integral = 0.0;
  for (size_t k = 0; k + 1 < st.sample_times.size(); ++k) {
    const double w = 0.5 * (st.sample_times[k + 1] - st.sample_times[k]);
    integral += w * (st.phase_kernel[k].real() + st.phase_kernel[k + 1].real());
  }
  const cplx I(0, 1);
  return modulus * std::exp(-I * 0.5 * integral);
}

struct OverlapResult {
  double value = 0.0;     // clipped to [0, 1]
  double raw = 0.0;       // determinant ratio before clipping
  double imag_residual = 0.0;
  bool clipped = false;
};

// |<Psi1|Psi2>|^2 for normalized Gaussian states:
//   det[(1+Om1^dag Om2)(1+Om2^dag Om1)] / det[(1+Om1^dag Om1)(1+Om2^dag Om2)]
inline OverlapResult overlap_sq_detailed(const Eigen::MatrixXcd& om1, const Eigen::MatrixXcd& om2) {
  if (om1.rows() != om2.rows() || om1.cols() != om2.cols())
    throw std::invalid_argument("overlap_sq: dimension mismatch");
  const int d = static_cast<int>(om1.rows());
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  const cplx num = ((id + om1.adjoint() * om2) * (id + om2.adjoint() * om1)).determinant();
  const cplx den = ((id + om1.adjoint() * om1) * (id + om2.adjoint() * om2)).determinant();
  const cplx ratio = num / den;
  OverlapResult res;
  res.raw = ratio.real();
  res.imag_residual = std::abs(ratio.imag());
  res.value = res.raw;
  if (res.value < 0.0 || res.value > 1.0 + 1e-12) res.clipped = true;
  res.value = std::min(std::max(res.value, 0.0), 1.0);
  return res;
}

inline double overlap_sq(const Eigen::MatrixXcd& om1, const Eigen::MatrixXcd& om2) {
  return overlap_sq_detailed(om1, om2).value;
}

inline double overlap_sq(const Covariance& a, const Covariance& b) {
  return overlap_sq(a.omega, b.omega);
}

// Bogoliubov mixing between negative- and positive-frequency modes.
struct BogoliubovData {
  Eigen::MatrixXcd alpha, beta;

  double normal_defect() const {
    const int n = static_cast<int>(alpha.cols());
    return (alpha.adjoint() * alpha + beta.adjoint() * beta -
            Eigen::MatrixXcd::Identity(n, n))
        .norm();
  }
};

// B = sum psi_n (alpha^{-1} beta)_{sn} chi_s^dag: maps negative-energy
// eigenfunctions to positive ones and annihilates positive ones; nilpotent.
// neg_modes / pos_modes are the eigenvector columns of the split.
inline Eigen::MatrixXcd pair_creation_operator(const Eigen::MatrixXcd& pos_modes,
                                               const Eigen::MatrixXcd& neg_modes,
                                               const BogoliubovData& bog) {
  const Eigen::MatrixXcd m = bog.alpha.inverse() * bog.beta;
  return pos_modes * m.transpose() * neg_modes.adjoint();
}

// Vacuum persistence per mode block:
//   |<Psi1|Psi2>|^2 = det(1 + kappa beta^dag (1 - beta beta^dag)^{-1} beta)^{-1}.
// At lambda = 2 (kappa = 1) this equals det(1 - beta^dag beta); both code
// paths are kept so they can be checked against each other.
inline double creation_probability(const Eigen::MatrixXcd& beta, double lambda) {
  const int n = static_cast<int>(beta.rows());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(beta);
  if (svd.singularValues()(0) >= 1.0)
    throw std::invalid_argument("creation_probability: ||beta|| >= 1 (non-asymptotic extraction)");
  const double kappa = kappa_of_lambda(lambda);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd inner = (id - beta * beta.adjoint()).inverse();
  const cplx det = (id + kappa * beta.adjoint() * inner * beta).determinant();
  return 1.0 / det.real();
}

inline double creation_probability_lambda2(const Eigen::MatrixXcd& beta) {
  const int n = static_cast<int>(beta.rows());
  return (Eigen::MatrixXcd::Identity(n, n) - beta.adjoint() * beta).determinant().real();
}

// Exact fluctuation moment <w_a wd_b> = -(h dt / ((h dt)^2 + 1))_{ab} for the
// transition weight p ~ exp(2 dt wd h w). Cross-checked against the Berezin
// oracle at small dimension.
inline Eigen::MatrixXcd fluctuation_expectation(const Eigen::MatrixXcd& h, double dt) {
  if (dt <= 0) throw std::invalid_argument("fluctuation_expectation: dt must be positive");
  const int d = static_cast<int>(h.rows());
  if ((h - h.adjoint()).norm() > 1e-12 * std::max(1.0, h.norm()))
    throw std::invalid_argument("fluctuation_expectation: h must be Hermitian");
  const Eigen::MatrixXcd hdt = dt * h;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  const Eigen::MatrixXcd closed = -hdt * (hdt * hdt + id).inverse();

  if (d <= 3) {
    const GrassmannElement psi = exp_even(QuadraticForm(d, hdt));
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        const cplx oracle = expectation(
            psi, GrassmannElement::generator(d, field_gen(a)) *
                     GrassmannElement::generator(d, conj_gen(b)));
        if (std::abs(oracle - closed(a, b)) > 1e-10)
          throw std::logic_error("fluctuation_expectation: closed form disagrees with Berezin oracle");
      }
    }
  }
  return closed;
}

// Ratio of the order-alpha Tsallis information metric to the Kullback-Leibler
// one for the fluctuation weight, evaluated by exact Grassmann Taylor
// expansion in a doubled algebra and the leading fluctuation moments
// <w_i wd_j> -> -h_ij dt. Equals alpha identically.
inline double tsallis_ratio(const GrassmannElement& rho, double alpha,
                            const Eigen::MatrixXcd* h_opt = nullptr) {
  const int n = rho.n_modes();
  if (n > 2) throw std::invalid_argument("tsallis_ratio: supported at up to 2 modes");
  if (!rho.is_even() || rho.body() == cplx(0.0))
    throw std::invalid_argument("tsallis_ratio: rho must be even with nonzero body");
  if (alpha <= 0) throw std::invalid_argument("tsallis_ratio: alpha must be positive");
  Eigen::MatrixXcd h = h_opt ? *h_opt : Eigen::MatrixXcd::Identity(n, n);
  if (h.rows() != n || h.cols() != n) throw std::invalid_argument("tsallis_ratio: h dimension mismatch");

  // doubled algebra: modes [0,n) carry psi, modes [n,2n) carry the fluctuation w
  const int big = 2 * n;
  const GrassmannElement rho_psi = embed(rho, big);
  std::vector<std::pair<GeneratorIndex, GrassmannElement>> shifts;
  for (int m = 0; m < n; ++m) {
    shifts.emplace_back(field_gen(m), GrassmannElement::generator(big, field_gen(n + m)));
    shifts.emplace_back(conj_gen(m), GrassmannElement::generator(big, conj_gen(n + m)));
  }
  const GrassmannElement rho_shift = taylor_shift(rho, shifts, big);
  const GrassmannElement ratio = rho_shift * inverse_even(rho_psi);  // 1 + y

  GrassmannElement integrand(big);
  if (std::abs(alpha - 1.0) < 1e-12) {
    integrand = cplx(-1.0) * (rho_psi * ln_even(ratio));  // KL: rho ln(rho/rho')
  } else {
    const GrassmannElement powed = rho_psi * pow_even(ratio, 1.0 - alpha);
    integrand = cplx(1.0 / (alpha - 1.0)) * (powed - rho_psi);
  }

  std::vector<int> psi_modes(n);
  for (int m = 0; m < n; ++m) psi_modes[m] = m;
  // after integrating out psi the support lives on the fluctuation modes [n, 2n)
  const GrassmannElement g = restrict_modes(berezin_partial(integrand, psi_modes), n, n);

  // leading moment substitution: canonical monomial w_i wd_j -> -h_ij
  cplx numerator = 0.0;
  for (const auto& [m, c] : g.terms()) {
    if (std::popcount(m) != 2) continue;
    const int id1 = std::countr_zero(m);
    const int id2 = std::countr_zero(m & (m - 1));
    if (id1 < n && id2 >= n) numerator += c * (-h(id1, id2 - n));
  }

  // KL slice: int (1/rho)(d rho/d psi_i) h_ij (d rho/d psi^dag_j)
  cplx denominator = 0.0;
  const GrassmannElement inv_rho = inverse_even(rho);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (h(i, j) == cplx(0.0)) continue;
      denominator += h(i, j) * berezin_integrate(inv_rho * derive(rho, field_gen(i)) *
                                                 derive(rho, conj_gen(j)));
    }
  if (std::abs(denominator) < 1e-14)
    throw std::invalid_argument("tsallis_ratio: singular normalization (vanishing base metric)");
  return (numerator / denominator).real();
}

}  // namespace fermivar
