#pragma once

// Pair creation in a ramped constant electric field E e_z. Each transverse
// mode reduces to a two-level Dirac problem with effective mass
// m_perp = sqrt(px^2 + py^2 + m^2); the gauge potential A_z(t) = -E t inside
// a smooth window shifts the longitudinal momentum through the gap. The
// extracted |beta|^2 is compared against exp(-pi xi), xi = m_perp^2 / |eE|,
// and the full-volume vacuum persistence probability is evaluated both by
// quadrature (any kappa) and in closed form at lambda = 2.

#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "fermivar/dirac.hpp"
#include "fermivar/gaussian.hpp"

namespace fermivar {

struct SchwingerJob {
  double m = 1.0;
  double eE = 1.0;
  std::vector<std::pair<double, double>> p_perp_grid;  // (px, py)
  std::vector<double> p_z_samples{-0.5, 0.0, 0.5};     // units of sqrt(eE)
  double T = 0.0;          // field-on duration; 0 = default 40/sqrt(eE)
  double ramp_width = 0.0; // 0 = default 5/sqrt(eE)
  double lambda = 2.0;
  int steps = 400000;
  double volume_time = 1.0;  // V*T factor of the persistence trace
  int max_workers = 1;

  void validate() const {
    if (eE == 0.0) throw std::invalid_argument("SchwingerJob: eE must be nonzero");
    if (m < 0.0) throw std::invalid_argument("SchwingerJob: mass must be non-negative");
    if (p_perp_grid.empty()) throw std::invalid_argument("SchwingerJob: empty transverse grid");
    if (p_z_samples.empty()) throw std::invalid_argument("SchwingerJob: empty p_z sample list");
    if (T < 0.0 || steps < 1 || lambda <= 0.0)
      throw std::invalid_argument("SchwingerJob: bad evolution parameters");
  }
  double effective_T() const { return T > 0 ? T : 40.0 / std::sqrt(std::abs(eE)); }
  double effective_width() const { return ramp_width > 0 ? ramp_width : 5.0 / std::sqrt(std::abs(eE)); }
};

struct ModeResult {
  double px = 0, py = 0;
  double xi = 0;
  double beta_sq_numeric = 0;
  double beta_sq_analytic = 0;
  double rel_err = 0;
  double drift = 0;      // relative |beta|^2 change between the two extraction times
  double pz_spread = 0;  // relative spread across the sampled p_z values
  double unitarity_defect = 0;
  bool ok = true;
  std::string error;
};

inline RampProfile make_schwinger_ramp(double eE, double T, double width = 0.0) {
  RampProfile r;
  r.shape = RampProfile::Shape::SmoothTanh;
  r.width = width > 0 ? width : 5.0 / std::sqrt(std::abs(eE));
  r.t_on = -T / 2;
  r.t_off = T / 2;
  r.validate();
  return r;
}

namespace detail {

// stable log cosh
inline double lncosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2 * ax)) - M_LN2;
}

// integral of the tanh window from t_on side: antiderivative of window(t)
inline double window_integral(const RampProfile& r, double t) {
  if (r.shape == RampProfile::Shape::Sudden) {
    if (t <= r.t_on) return 0.0;
    return std::min(t, r.t_off) - r.t_on;
  }
  return 0.5 * r.width * (lncosh((t - r.t_on) / r.width) - lncosh((t - r.t_off) / r.width));
}

// exp(-i dt (a . sigma)) for h = ax sx + ay sy + az sz (traceless 2x2)
inline Eigen::Matrix2cd pauli_exp(double ax, double ay, double az, double dt) {
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  const cplx I(0, 1);
  Eigen::Matrix2cd u;
  if (n < 1e-300) {
    u.setIdentity();
    return u;
  }
  const double c = std::cos(n * dt), s = std::sin(n * dt) / n;
  u(0, 0) = c - I * s * az;
  u(0, 1) = -I * s * (ax - I * ay);
  u(1, 0) = -I * s * (ax + I * ay);
  u(1, 1) = c + I * s * az;
  return u;
}

}  // namespace detail

// Integrate the two-level reduction i d chi/dt = h(t) chi across the ramped
// pulse; project onto the instantaneous out-eigenmodes after switch-off.
// The in-state is the negative-energy eigenvector of h(t_start).
inline ModeResult evolve_mode(double px, double py, double m, double eE, const RampProfile& ramp,
                              double T, int steps, double p_z = 0.0) {
  ModeResult res;
  res.px = px;
  res.py = py;
  const double m_perp = std::sqrt(px * px + py * py + m * m);
  res.xi = m_perp * m_perp / std::abs(eE);
  res.beta_sq_analytic = std::exp(-M_PI * res.xi);

  if (std::abs((ramp.t_off - ramp.t_on) - T) > 1e-9 * std::max(1.0, T)) {
    res.ok = false;
    res.error = "ramp window inconsistent with T";
    return res;
  }

  const double w = ramp.shape == RampProfile::Shape::SmoothTanh ? ramp.width : 0.0;
  const double margin = ramp.shape == RampProfile::Shape::SmoothTanh
                            ? 8.0 * w
                            : 0.5 / std::sqrt(std::abs(eE));
  const double t_start = ramp.t_on - margin;
  const double tau1 = ramp.t_off + margin;
  const double gap = std::max(2.0 * w, 0.5 / std::sqrt(std::abs(eE)));
  const double tau2 = tau1 + gap;

  // gauge potential: A_z(t) = -E * integral of the window, A_z(t_start) = 0
  const auto a_z = [&](double t) {
    return -(eE)*detail::window_integral(ramp, t);  // absorbing the charge into eE
  };
  // h(t) = -p(t) sigma_y + m_perp sigma_z with p(t) = p_z + A_z(t)
  const auto pz_of = [&](double t) { return p_z + a_z(t); };

  // in-state: negative-energy eigenvector at t_start
  const double p0 = pz_of(t_start);
  const double e0 = std::sqrt(p0 * p0 + m_perp * m_perp);
  Eigen::Vector2cd chi;
  {
    // h = -p sy + m sz; negative eigenvector of [[m, ip],[-ip, -m]]
    const cplx I(0, 1);
    Eigen::Matrix2cd h0;
    h0 << m_perp, I * p0, -I * p0, -m_perp;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h0);
    chi = es.eigenvectors().col(0);  // ascending: negative first
    (void)e0;
  }

  const double total = tau2 - t_start;
  const double dt = total / steps;
  double beta1 = -1.0;
  const auto project_beta = [&](double t) {
    const double p = pz_of(t);
    const cplx I(0, 1);
    Eigen::Matrix2cd h;
    h << m_perp, I * p, -I * p, -m_perp;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
    const Eigen::Vector2cd pos = es.eigenvectors().col(1);
    return std::norm(pos.dot(chi));
  };

  double t = t_start;
  for (int k = 0; k < steps; ++k) {
    const double tm = t + dt / 2;
    const double p = pz_of(tm);
    chi = detail::pauli_exp(0.0, -p, m_perp, dt) * chi;
    t = t_start + (k + 1) * dt;
    if (beta1 < 0 && t >= tau1) beta1 = project_beta(t);
  }
  const double beta2 = project_beta(t);
  res.unitarity_defect = std::abs(chi.norm() - 1.0);
  if (res.unitarity_defect > 1e-9) {
    res.ok = false;
    res.error = "unitarity defect exceeded";
    return res;
  }
  res.beta_sq_numeric = beta2;
  res.drift = std::abs(beta2 - beta1) / std::max(beta2, 1e-300);
  res.rel_err = std::abs(res.beta_sq_numeric - res.beta_sq_analytic) /
                std::max(res.beta_sq_analytic, 1e-300);
  return res;
}

// Full four-component route for the representation-independence check:
// evolves both negative-energy in-modes of the 3+1D h and sums the squared
// projections onto the positive out-modes, halved (two identical spin blocks).
inline double evolve_mode_4d_beta_sq(double px, double py, double m, double eE,
                                     const RampProfile& ramp, double T, int steps,
                                     double p_z = 0.0) {
  const GammaSet g4 = build_gamma(4);
  const double w = ramp.shape == RampProfile::Shape::SmoothTanh ? ramp.width : 0.0;
  const double margin = 8.0 * w;
  const double t_start = ramp.t_on - margin;
  const double tau = ramp.t_off + margin + std::max(2.0 * w, 0.5 / std::sqrt(std::abs(eE)));
  (void)T;

  const auto a_z = [&](double t) { return -(eE)*detail::window_integral(ramp, t); };
  const auto h_of = [&](double t) {
    Eigen::VectorXd p(3);
    p << px, py, p_z + a_z(t);
    return h_momentum(g4, p, m);
  };

  const ModeBasis in_basis = eigenmodes(h_of(t_start));
  Eigen::MatrixXcd chi(4, 2);
  int nneg = 0;
  for (int n = 0; n < 4; ++n)
    if (in_basis.energies(n) < 0) chi.col(nneg++) = in_basis.eigenvectors.col(n);

  const double dt = (tau - t_start) / steps;
  const cplx I(0, 1);
  for (int k = 0; k < steps; ++k) {
    const double tm = t_start + (k + 0.5) * dt;
    chi = detail::hermitian_exp(h_of(tm), -I * dt) * chi;
  }

  const ModeBasis out_basis = eigenmodes(h_of(tau));
  double total = 0.0;
  for (int n = 0; n < 4; ++n) {
    if (out_basis.energies(n) <= 0) continue;
    for (int c = 0; c < 2; ++c) total += std::norm(out_basis.eigenvectors.col(n).dot(chi.col(c)));
  }
  return total / 2.0;  // per spin block
}

struct SweepSummary {
  double max_rel_err = 0.0;
  double max_drift = 0.0;
  double max_pz_spread = 0.0;
  int failures = 0;
  bool empty = false;
  bool monotone_in_xi = true;
};

struct SweepResult {
  std::vector<ModeResult> modes;
  SweepSummary summary;
};

// Parallel map of evolve_mode over the transverse grid with deterministic
// output ordering; per-mode failures are reported and the run continues.
inline SweepResult sweep(const SchwingerJob& job) {
  job.validate();
  SweepResult out;
  out.modes.resize(job.p_perp_grid.size());
  const double T = job.effective_T();
  const RampProfile ramp = make_schwinger_ramp(job.eE, T, job.effective_width());
  const double pz_unit = std::sqrt(std::abs(job.eE));

  const auto run_one = [&](size_t idx) {
    const auto [px, py] = job.p_perp_grid[idx];
    std::vector<double> beta_sqs;
    ModeResult rep;
    for (const double pz : job.p_z_samples) {
      ModeResult r = evolve_mode(px, py, job.m, job.eE, ramp, T, job.steps, pz * pz_unit);
      if (!r.ok) {
        out.modes[idx] = r;
        return;
      }
      beta_sqs.push_back(r.beta_sq_numeric);
      if (beta_sqs.size() == 1)
        rep = r;
      else {
        rep.drift = std::max(rep.drift, r.drift);
        rep.unitarity_defect = std::max(rep.unitarity_defect, r.unitarity_defect);
      }
    }
    double lo = beta_sqs[0], hi = beta_sqs[0], sum = 0;
    for (double b : beta_sqs) {
      lo = std::min(lo, b);
      hi = std::max(hi, b);
      sum += b;
    }
    rep.beta_sq_numeric = sum / beta_sqs.size();
    rep.pz_spread = (hi - lo) / std::max(rep.beta_sq_numeric, 1e-300);
    rep.rel_err = std::abs(rep.beta_sq_numeric - rep.beta_sq_analytic) /
                  std::max(rep.beta_sq_analytic, 1e-300);
    out.modes[idx] = rep;
  };

  const int workers = std::max(1, std::min<int>(job.max_workers, std::thread::hardware_concurrency()));
  if (workers == 1 || job.p_perp_grid.size() <= 1) {
    for (size_t i = 0; i < job.p_perp_grid.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (size_t i = next++; i < job.p_perp_grid.size(); i = next++) run_one(i);
      });
    for (auto& th : pool) th.join();
  }

  out.summary.empty = out.modes.empty();
  double prev_xi = -1, prev_beta = 2;
  bool sorted_by_xi = true;
  for (const auto& r : out.modes) {
    if (!r.ok) {
      ++out.summary.failures;
      continue;
    }
    out.summary.max_rel_err = std::max(out.summary.max_rel_err, r.rel_err);
    out.summary.max_drift = std::max(out.summary.max_drift, r.drift);
    out.summary.max_pz_spread = std::max(out.summary.max_pz_spread, r.pz_spread);
    if (prev_xi >= 0 && r.xi > prev_xi && r.beta_sq_numeric >= prev_beta)
      out.summary.monotone_in_xi = false;
    if (r.xi < prev_xi) sorted_by_xi = false;
    prev_xi = r.xi;
    prev_beta = r.beta_sq_numeric;
  }
  if (!sorted_by_xi) out.summary.monotone_in_xi = true;  // only meaningful on sorted grids
  return out;
}

namespace detail {

// Gauss-Legendre nodes/weights on [0, 1] by Newton iteration.
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 - t);  // map [-1,1] -> [0,1], reversed order is fine
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace detail

struct PersistenceResult {
  double exponent = 0.0;              // quadrature route, any lambda
  double exponent_closed_form = 0.0;  // lambda = 2 closed form (0 when unavailable)
  bool has_closed_form = false;
  double probability = 1.0;
  std::vector<double> terms;  // per-term contributions to the exponent
  double tail_estimate = 0.0;
};

// Vacuum persistence exponent
//   -(2 eE V T/(2 pi)^3) sum_n (1/n) int dpx dpy (kappa e^{-pi xi}/(1+(kappa-1)e^{-pi xi}))^n,
// with the angular integral done exactly and the radial one by Gauss-Legendre
// after the substitution w = exp(-pi (xi - xi0)). At lambda = 2 the integrals
// collapse to Schwinger's closed form and both routes are returned.
inline PersistenceResult persistence_probability(double m, double eE, double volume_time,
                                                 double lambda, double rel_tol = 1e-12,
                                                 int max_terms = 400) {
  if (eE == 0.0) throw std::invalid_argument("persistence_probability: eE must be nonzero");
  if (max_terms < 1) throw std::invalid_argument("persistence_probability: need at least one term");
  const double abs_eE = std::abs(eE);
  const double kappa = kappa_of_lambda(lambda);
  const double xi0 = m * m / abs_eE;
  const double prefactor = 2.0 * abs_eE * volume_time / std::pow(2 * M_PI, 3);
  const double e0 = std::exp(-M_PI * xi0);

  static thread_local std::vector<double> gx, gw;
  if (gx.size() != 96) detail::gauss_legendre_01(96, gx, gw);

  PersistenceResult res;
  double accum = 0.0;
  for (int n = 1; n <= max_terms; ++n) {
    // J_n = int_{xi0}^inf f^n dxi = (1/pi) int_0^1 g(v)^n dv / v,  g = kappa v e0 / (1+(kappa-1) v e0)
    double jn = 0.0;
    for (size_t q = 0; q < gx.size(); ++q) {
      const double v = gx[q];
      const double g = kappa * v * e0 / (1.0 + (kappa - 1.0) * v * e0);
      jn += gw[q] * std::pow(g, n) / v;
    }
    jn /= M_PI;
    const double term = prefactor * (M_PI * abs_eE) * jn / n;
    res.terms.push_back(-term);
    accum += term;
    if (term < rel_tol * std::max(accum, 1e-300)) {
      res.tail_estimate = term;
      break;
    }
    if (n == max_terms) {
      res.tail_estimate = term;
      if (term > rel_tol * std::max(accum, 1e-300))
        throw std::runtime_error("persistence_probability: series tail above tolerance");
    }
  }
  res.exponent = -accum;
  res.probability = std::exp(res.exponent);

  if (std::abs(kappa - 1.0) < 1e-14) {
    double closed = 0.0;
    for (int n = 1; n <= 200; ++n) {
      const double t = std::exp(-n * M_PI * xi0) / (n * n);
      closed += t;
      if (t < 1e-18 * std::max(closed, 1e-300)) break;
    }
    res.exponent_closed_form = -(2.0 * abs_eE * abs_eE * volume_time / std::pow(2 * M_PI, 3)) * closed;
    res.has_closed_form = true;
  }
  return res;
}

}  // namespace fermivar
