#pragma once

// First-quantized Dirac Hamiltonians: momentum-space h(p) in 3+1D, a periodic
// 1+1D spatial lattice (naive or SLAC derivative), eigen-decompositions with
// deterministic degeneracy resolution, spectral projectors, and external-field
// couplings. Units: hbar = c = 1.

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "fermivar/grassmann.hpp"

namespace fermivar {

struct GammaSet {
  int dimension;  // 2 (1+1D) or 4 (3+1D)
  Eigen::MatrixXcd gamma0;
  std::vector<Eigen::MatrixXcd> gamma_spatial;

  int n_spatial() const { return static_cast<int>(gamma_spatial.size()); }
};

// Dirac representation in 4D; {gamma0 = sigma3, gamma1 = i sigma1} in 2D.
inline GammaSet build_gamma(int dimension) {
  GammaSet gs;
  gs.dimension = dimension;
  const cplx I(0, 1);
  if (dimension == 2) {
    Eigen::MatrixXcd g0(2, 2), g1(2, 2);
    g0 << 1, 0, 0, -1;
    g1 << 0, I, I, 0;
    gs.gamma0 = g0;
    gs.gamma_spatial = {g1};
  } else if (dimension == 4) {
    Eigen::Matrix2cd s1, s2, s3, id;
    s1 << 0, 1, 1, 0;
    s2 << 0, -I, I, 0;
    s3 << 1, 0, 0, -1;
    id.setIdentity();
    Eigen::MatrixXcd g0 = Eigen::MatrixXcd::Zero(4, 4);
    g0.topLeftCorner(2, 2) = id;
    g0.bottomRightCorner(2, 2) = -id;
    gs.gamma0 = g0;
    for (const auto& s : {s1, s2, s3}) {
      Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(4, 4);
      g.topRightCorner(2, 2) = s;
      g.bottomLeftCorner(2, 2) = -s;
      gs.gamma_spatial.push_back(g);
    }
  } else {
    throw std::invalid_argument("build_gamma: dimension must be 2 or 4");
  }
  return gs;
}

// h(p) = gamma0 gamma^i p_i + m gamma0, Hermitian with eigenvalues
// +-sqrt(p^2 + m^2), each of multiplicity dimension/2.
inline Eigen::MatrixXcd h_momentum(const GammaSet& gs, const Eigen::VectorXd& p, double m) {
  if (p.size() != gs.n_spatial()) throw std::invalid_argument("h_momentum: momentum dimension mismatch");
  if (m < 0) throw std::invalid_argument("h_momentum: mass must be non-negative");
  Eigen::MatrixXcd h = m * gs.gamma0;
  for (int i = 0; i < gs.n_spatial(); ++i) h += p(i) * (gs.gamma0 * gs.gamma_spatial[i]);
  return h;
}

// h'(p) = h(p) + e gamma0 gamma^i A_i.
inline Eigen::MatrixXcd h_external(const GammaSet& gs, const Eigen::VectorXd& p, double m,
                                   const Eigen::VectorXd& a, double charge = 1.0) {
  if (a.size() != gs.n_spatial()) throw std::invalid_argument("h_external: potential dimension mismatch");
  Eigen::MatrixXcd h = h_momentum(gs, p, m);
  for (int i = 0; i < gs.n_spatial(); ++i) h += charge * a(i) * (gs.gamma0 * gs.gamma_spatial[i]);
  return h;
}

struct ModeLabel {
  Eigen::Vector3d momentum{0, 0, 0};
  int spinor = 0;
};

// A discretized single-particle Hilbert space: orthonormal eigenbasis of h,
// energies, and the spectral projectors onto the +/- energy subspaces.
struct ModeBasis {
  std::vector<ModeLabel> modes;
  Eigen::VectorXd energies;
  Eigen::MatrixXcd eigenvectors;  // columns psi_n
  Eigen::MatrixXcd p_minus, p_plus;
  int dim = 0;
  bool zero_mode_flagged = false;  // massless zero modes assigned to P_minus
};

namespace detail {

// Deterministic phase: largest-magnitude component made real positive.
inline void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  int best = 0;
  double best_mag = 0;
  for (int i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > best_mag + 1e-14) {
      best_mag = mag;
      best = i;
    }
  }
  if (best_mag > 0) v *= std::conj(v(best)) / std::abs(v(best));
}

}  // namespace detail

// Orthonormal eigenbasis of a Hermitian h. Within each degenerate eigenspace,
// the basis is fixed deterministically: if a secondary Hermitian observable is
// supplied (e.g. helicity for momentum modes) it is diagonalized there;
// otherwise Gram-Schmidt against the canonical basis. Zero modes go to
// P_minus by convention and are flagged.
inline ModeBasis eigenmodes(const Eigen::MatrixXcd& h,
                            const std::optional<Eigen::MatrixXcd>& secondary = std::nullopt,
                            double degeneracy_tol = 1e-9) {
  const int d = static_cast<int>(h.rows());
  if (h.cols() != d) throw std::invalid_argument("eigenmodes: square matrix required");
  if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm()))
    throw std::invalid_argument("eigenmodes: matrix is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXd evals = es.eigenvalues();
  Eigen::MatrixXcd evecs = es.eigenvectors();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());

  // resolve degenerate clusters
  int start = 0;
  while (start < d) {
    int end = start + 1;
    while (end < d && std::abs(evals(end) - evals(end - 1)) <= degeneracy_tol * scale) ++end;
    const int k = end - start;
    if (k > 1) {
      Eigen::MatrixXcd sub = evecs.middleCols(start, k);
      if (secondary) {
        const Eigen::MatrixXcd w = sub.adjoint() * (*secondary) * sub;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ws((w + w.adjoint()) / 2.0);
        sub = sub * ws.eigenvectors();
      } else {
        // project canonical basis vectors onto the subspace, keep the first k
        // independent ones, orthonormalize in order
        const Eigen::MatrixXcd proj = sub * sub.adjoint();
        Eigen::MatrixXcd cand(d, k);
        int got = 0;
        for (int e = 0; e < d && got < k; ++e) {
          Eigen::VectorXcd v = proj.col(e);
          for (int j = 0; j < got; ++j) v -= cand.col(j).dot(v) * cand.col(j);
          const double nrm = v.norm();
          if (nrm > 1e-6) cand.col(got++) = v / nrm;
        }
        if (got == k) sub = cand;
      }
      evecs.middleCols(start, k) = sub;
    }
    start = end;
  }
  for (int n = 0; n < d; ++n) detail::fix_phase(evecs.col(n));

  ModeBasis basis;
  basis.dim = d;
  basis.energies = evals;
  basis.eigenvectors = evecs;
  basis.p_minus = Eigen::MatrixXcd::Zero(d, d);
  basis.p_plus = Eigen::MatrixXcd::Zero(d, d);
  basis.modes.resize(d);
  const double zero_tol = degeneracy_tol * scale;
  for (int n = 0; n < d; ++n) {
    basis.modes[n].spinor = n;
    const auto outer = evecs.col(n) * evecs.col(n).adjoint();
    if (evals(n) > zero_tol) {
      basis.p_plus += outer;
    } else {
      basis.p_minus += outer;
      if (std::abs(evals(n)) <= zero_tol) basis.zero_mode_flagged = true;
    }
  }
  return basis;
}

enum class LatticeScheme { Naive, SLAC };

// Periodic 1+1D lattice Dirac operator with 2 spinor components per site.
// Basis index = 2*site + component; positions centered on the chain.
struct Lattice1p1 {
  int n_sites = 0;
  double spacing = 1.0;
  LatticeScheme scheme = LatticeScheme::SLAC;
  Eigen::MatrixXcd h;            // 2n x 2n Hermitian, traceless
  Eigen::MatrixXcd position;     // diagonal X = x_j (x) I_2
  Eigen::MatrixXcd momentum_op;  // p-hat, diagonal in the Fourier basis
  Eigen::VectorXd momenta;       // p_k per Fourier index (fft frequency order)
  Eigen::MatrixXcd fourier;      // site DFT (x) I_2, unitary
};

inline Lattice1p1 lattice_h_1p1(int n_sites, double m, double spacing, LatticeScheme scheme) {
  if (n_sites < 2) throw std::invalid_argument("lattice_h_1p1: need at least 2 sites");
  if (spacing <= 0) throw std::invalid_argument("lattice_h_1p1: spacing must be positive");
  const GammaSet gs = build_gamma(2);
  const Eigen::MatrixXcd g0g1 = gs.gamma0 * gs.gamma_spatial[0];
  const int n = n_sites, d = 2 * n;
  const cplx I(0, 1);

  Lattice1p1 lat;
  lat.n_sites = n;
  lat.spacing = spacing;
  lat.scheme = scheme;

  lat.momenta.resize(n);
  for (int k = 0; k < n; ++k) {
    const int wrapped = (k <= (n - 1) / 2) ? k : k - n;  // fft frequency order
    lat.momenta(k) = 2.0 * M_PI * wrapped / (n * spacing);
  }

  // site DFT: F(k, j) = exp(-i p_k x_j) / sqrt(n), tensored with I_2
  Eigen::MatrixXcd f_site(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      f_site(k, j) = std::exp(-I * lat.momenta(k) * (j * spacing)) / std::sqrt(double(n));
  lat.fourier = Eigen::kroneckerProduct(f_site, Eigen::Matrix2cd::Identity()).eval();

  if (scheme == LatticeScheme::SLAC) {
    // exact dispersion: block-diagonal h(p_k) in the Fourier basis
    Eigen::MatrixXcd hk = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd p(1);
      p << lat.momenta(k);
      hk.block<2, 2>(2 * k, 2 * k) = h_momentum(gs, p, m);
    }
    lat.h = lat.fourier.adjoint() * hk * lat.fourier;
    Eigen::MatrixXcd pk = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < n; ++k) pk.block<2, 2>(2 * k, 2 * k) = lat.momenta(k) * Eigen::Matrix2cd::Identity();
    lat.momentum_op = lat.fourier.adjoint() * pk * lat.fourier;
  } else {
    // central difference -i(psi_{j+1} - psi_{j-1})/(2a)
    lat.h = Eigen::MatrixXcd::Zero(d, d);
    for (int j = 0; j < n; ++j) {
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      lat.h.block<2, 2>(2 * j, 2 * jp) += -I / (2 * spacing) * g0g1;
      lat.h.block<2, 2>(2 * j, 2 * jm) += I / (2 * spacing) * g0g1;
      lat.h.block<2, 2>(2 * j, 2 * j) += m * gs.gamma0;
    }
    lat.momentum_op = Eigen::MatrixXcd::Zero(d, d);
    for (int j = 0; j < n; ++j) {
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      lat.momentum_op.block<2, 2>(2 * j, 2 * jp) += -I / (2 * spacing) * Eigen::Matrix2cd::Identity();
      lat.momentum_op.block<2, 2>(2 * j, 2 * jm) += I / (2 * spacing) * Eigen::Matrix2cd::Identity();
    }
  }

  lat.position = Eigen::MatrixXcd::Zero(d, d);
  for (int j = 0; j < n; ++j) {
    const double x = (j - 0.5 * (n - 1)) * spacing;
    lat.position.block<2, 2>(2 * j, 2 * j) = x * Eigen::Matrix2cd::Identity();
  }
  lat.h = ((lat.h + lat.h.adjoint()) / 2.0).eval();  // kill roundoff asymmetry
  return lat;
}

// Two-flavor SU(2) minimal coupling: I_2 (x) h + (g/2) sum_{i,a} W_i^a tau_a (x) (gamma0 gamma^i).
// Basis ordering: isospin slow, spinor fast.
inline Eigen::MatrixXcd su2_minimal_coupling(const Eigen::MatrixXcd& h_block, double g,
                                             const std::vector<Eigen::Vector3d>& w,
                                             const GammaSet& gs) {
  const int d = static_cast<int>(h_block.rows());
  if (h_block.cols() != d || d != gs.dimension)
    throw std::invalid_argument("su2_minimal_coupling: dimension mismatch");
  if (static_cast<int>(w.size()) != gs.n_spatial())
    throw std::invalid_argument("su2_minimal_coupling: one isotriplet per spatial direction required");
  const cplx I(0, 1);
  Eigen::Matrix2cd tau[3];
  tau[0] << 0, 1, 1, 0;
  tau[1] << 0, -I, I, 0;
  tau[2] << 1, 0, 0, -1;

  Eigen::MatrixXcd out = Eigen::kroneckerProduct(Eigen::Matrix2cd::Identity(), h_block).eval();
  for (int i = 0; i < gs.n_spatial(); ++i) {
    const Eigen::MatrixXcd g0gi = gs.gamma0 * gs.gamma_spatial[i];
    for (int a = 0; a < 3; ++a) {
      if (w[i](a) == 0.0) continue;
      out += (g / 2.0) * w[i](a) * Eigen::kroneckerProduct(tau[a], g0gi).eval();
    }
  }
  return out;
}

// Ramped switching profile for external fields. The paper only requires the
// field to be on in the past and off again in the future; the profile shape
// is an artifact choice.
struct RampProfile {
  enum class Shape { Sudden, SmoothTanh };
  Shape shape = Shape::SmoothTanh;
  double width = 1.0;  // > 0 for SmoothTanh
  double t_on = 0.0;
  double t_off = 0.0;

  void validate() const {
    if (t_on >= t_off) throw std::invalid_argument("RampProfile: t_on must precede t_off");
    if (shape == Shape::SmoothTanh && width <= 0)
      throw std::invalid_argument("RampProfile: SmoothTanh needs width > 0");
  }

  // window weight in [0,1]: 1 while the field is on
  double window(double t) const {
    if (shape == Shape::Sudden) return (t >= t_on && t < t_off) ? 1.0 : 0.0;
    return 0.5 * (std::tanh((t - t_on) / width) - std::tanh((t - t_off) / width));
  }
};

struct ExternalField {
  enum class Kind { None, ConstantE, StaticVectorPotential };
  Kind kind = Kind::None;
  double eE = 0.0;  // ConstantE: field strength times charge, nonzero
  RampProfile ramp;
  Eigen::VectorXd static_a;  // StaticVectorPotential

  void validate() const {
    if (kind == Kind::ConstantE) {
      if (eE == 0.0) throw std::invalid_argument("ExternalField: ConstantE requires eE != 0");
      ramp.validate();
    }
  }
};

}  // namespace fermivar
