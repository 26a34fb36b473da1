#pragma once

// Operator matrices on the finite Grassmann functional space. The state space
// for d single-particle modes is the full Grassmann algebra on 2d generators
// (dimension 4^d), indexed by monomial bitmask. Elementary operators are
// multiplication by a generator and the left functional derivative; everything
// quadratic is assembled from those. A budget guard caps d at 8 (dim 65536).

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fermivar/dirac.hpp"
#include "fermivar/grassmann.hpp"

namespace fermivar {

using SparseOp = Eigen::SparseMatrix<cplx>;

constexpr int kMaxFockModes = 8;

inline std::int64_t fock_dimension(int n_modes) { return std::int64_t{1} << (2 * n_modes); }

inline void check_fock_budget(int n_modes, int max_modes = kMaxFockModes) {
  if (n_modes < 1) throw std::invalid_argument("fock: need at least one mode");
  if (n_modes > max_modes)
    throw std::invalid_argument("fock: mode count exceeds the memory budget guard");
}

enum class ElemKind { MultField, MultConj, DerField, DerConj };

namespace detail {

// Apply an elementary operator to a basis monomial. Returns false when the
// image vanishes; otherwise fills the target mask and the +-1 sign.
inline bool apply_elem(ElemKind kind, int mode, int n_modes, std::uint64_t m,
                       std::uint64_t& out, int& sign) {
  const int id = (kind == ElemKind::MultField || kind == ElemKind::DerField) ? mode : n_modes + mode;
  const std::uint64_t bit = std::uint64_t{1} << id;
  const bool multiply = (kind == ElemKind::MultField || kind == ElemKind::MultConj);
  if (multiply) {
    if (m & bit) return false;
    out = m | bit;
  } else {
    if (!(m & bit)) return false;
    out = m & ~bit;
  }
  sign = sign_below(m, id);  // bits below id agree between source and target
  return true;
}

}  // namespace detail

inline SparseOp elementary_op(int n_modes, ElemKind kind, int mode) {
  check_fock_budget(n_modes);
  if (mode < 0 || mode >= n_modes) throw std::invalid_argument("elementary_op: mode out of range");
  const std::int64_t dim = fock_dimension(n_modes);
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(dim / 2);
  for (std::int64_t m = 0; m < dim; ++m) {
    std::uint64_t out;
    int sign;
    if (detail::apply_elem(kind, mode, n_modes, static_cast<std::uint64_t>(m), out, sign))
      trips.emplace_back(static_cast<int>(out), static_cast<int>(m), cplx(sign, 0));
  }
  SparseOp op(dim, dim);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

// sum_ij kernel(i,j) * A_i B_j with B applied first.
inline SparseOp quadratic_op(int n_modes, const Eigen::MatrixXcd& kernel, ElemKind a, ElemKind b) {
  check_fock_budget(n_modes);
  if (kernel.rows() != n_modes || kernel.cols() != n_modes)
    throw std::invalid_argument("quadratic_op: kernel dimension mismatch");
  const std::int64_t dim = fock_dimension(n_modes);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::int64_t m = 0; m < dim; ++m) {
    for (int i = 0; i < n_modes; ++i) {
      for (int j = 0; j < n_modes; ++j) {
        const cplx c = kernel(i, j);
        if (c == cplx(0.0)) continue;
        std::uint64_t m1, m2;
        int s1, s2;
        if (!detail::apply_elem(b, j, n_modes, static_cast<std::uint64_t>(m), m1, s1)) continue;
        if (!detail::apply_elem(a, i, n_modes, m1, m2, s2)) continue;
        trips.emplace_back(static_cast<int>(m2), static_cast<int>(m), double(s1 * s2) * c);
      }
    }
  }
  SparseOp op(dim, dim);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

inline Eigen::VectorXcd grassmann_to_vector(const GrassmannElement& e) {
  const std::int64_t dim = fock_dimension(e.n_modes());
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  for (const auto& [m, c] : e.terms()) v(static_cast<int>(m)) = c;
  return v;
}

inline GrassmannElement vector_to_grassmann(const Eigen::VectorXcd& v, int n_modes) {
  if (v.size() != fock_dimension(n_modes))
    throw std::invalid_argument("vector_to_grassmann: size mismatch");
  GrassmannElement e(n_modes);
  for (int m = 0; m < v.size(); ++m)
    if (v(m) != cplx(0.0)) e.add_term(static_cast<std::uint64_t>(m), v(m));
  return e;
}

// Fock-space realization of the mode Hamiltonian: particle operators
//   a_n      = (sqrt(lambda)/2) (u_n + (2/lambda) d/d(ud_n))
//   adag_n   = (sqrt(lambda)/2) (ud_n + (2/lambda) d/d(u_n))
// satisfying {a_a, adag_b} = delta_ab, with H = sum_n E_n adag_n a_n and the
// Gaussian ground state exp(ud Omega u), Omega_nn = -+ lambda/2 per sign(E_n).
struct FockRep {
  ModeBasis basis;
  double lambda = 2.0;
  int n_modes = 0;
  std::vector<SparseOp> a_ops, adag_ops;
  SparseOp hamiltonian;
  Eigen::VectorXcd vacuum;      // monomial-basis coefficients of exp(ud Omega u)
  Eigen::VectorXcd omega_diag;  // Omega_nn
  // Eigenvalue of H on the vacuum: sum of the negative mode energies. For a
  // traceless h this equals -(1/2) sum_n |E_n|.
  double vacuum_energy = 0.0;
};

inline FockRep build_fock(const ModeBasis& basis, double lambda, int max_modes = kMaxFockModes) {
  if (lambda <= 0) throw std::invalid_argument("build_fock: lambda must be positive");
  check_fock_budget(basis.dim, max_modes);
  FockRep rep;
  rep.basis = basis;
  rep.lambda = lambda;
  rep.n_modes = basis.dim;
  const int d = basis.dim;
  const std::int64_t dim = fock_dimension(d);
  const double c1 = std::sqrt(lambda) / 2.0;
  const double c2 = 1.0 / std::sqrt(lambda);

  rep.hamiltonian = SparseOp(dim, dim);
  for (int n = 0; n < d; ++n) {
    SparseOp a = c1 * elementary_op(d, ElemKind::MultField, n) +
                 c2 * elementary_op(d, ElemKind::DerConj, n);
    SparseOp adag = c1 * elementary_op(d, ElemKind::MultConj, n) +
                    c2 * elementary_op(d, ElemKind::DerField, n);
    rep.hamiltonian += basis.energies(n) * SparseOp(adag * a);
    rep.a_ops.push_back(std::move(a));
    rep.adag_ops.push_back(std::move(adag));
  }

  rep.omega_diag.resize(d);
  Eigen::MatrixXcd omega = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    // null under adag a for positive energy, occupied for negative
    rep.omega_diag(n) = (basis.energies(n) > 0 ? -lambda / 2.0 : lambda / 2.0);
    omega(n, n) = rep.omega_diag(n);
    if (basis.energies(n) <= 0) rep.vacuum_energy += basis.energies(n);
  }
  rep.vacuum = grassmann_to_vector(exp_even(QuadraticForm(d, omega)));
  return rep;
}

}  // namespace fermivar
