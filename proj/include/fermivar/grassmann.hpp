#pragma once

// Exact arithmetic over a finite Grassmann algebra with 2n generators:
// n "field" generators u_0..u_{n-1} and n conjugate generators ud_0..ud_{n-1}.
//
// Canonical generator order: all field generators by mode, then all conjugate
// generators by mode. A monomial is stored as a bitmask over generator ids
// (id(u_k) = k, id(ud_k) = n + k); coefficients are attached to monomials
// written in ascending id order. The order is fixed for the whole session so
// signs are reproducible bit for bit.
//
// Berezin integration uses the measure order D(ud) D(u):
//   integrate(X) = (-1)^{n(n-1)/2} * [coefficient of u_0..u_{n-1} ud_0..ud_{n-1}]
// The prefactor is the unique choice for which
//   integral of exp(ud A u) = det(-A),
// which in turn makes <Psi|Psi> = det(Om^dag Om + 1) hold for Gaussian
// functionals Psi = exp(ud Om u). A self-test locking the convention is in
// convention_self_test().

#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fermivar {

using cplx = std::complex<double>;

enum class GeneratorKind { Field, Conjugate };

struct GeneratorIndex {
  GeneratorKind kind;
  int mode;

  friend bool operator==(const GeneratorIndex&, const GeneratorIndex&) = default;
};

inline GeneratorIndex field_gen(int mode) { return {GeneratorKind::Field, mode}; }
inline GeneratorIndex conj_gen(int mode) { return {GeneratorKind::Conjugate, mode}; }

namespace detail {

inline int generator_id(const GeneratorIndex& g, int n_modes) {
  if (g.mode < 0 || g.mode >= n_modes) throw std::invalid_argument("generator mode out of range");
  return g.kind == GeneratorKind::Field ? g.mode : n_modes + g.mode;
}

// Parity sign of interleaving two disjoint ascending monomials a*b into
// ascending order: each element of b crosses every element of a above it.
inline int merge_sign(std::uint64_t a, std::uint64_t b) {
  int swaps = 0;
  for (std::uint64_t rest = b; rest != 0; rest &= rest - 1) {
    const int j = std::countr_zero(rest);
    swaps += std::popcount(j + 1 >= 64 ? 0 : (a >> (j + 1)));
  }
  return (swaps & 1) ? -1 : 1;
}

inline int sign_below(std::uint64_t mask, int id) {
  const std::uint64_t below = (id == 0) ? 0 : (mask & ((std::uint64_t{1} << id) - 1));
  return (std::popcount(below) & 1) ? -1 : 1;
}

// (-1)^{s(s-1)/2}: sign of the measure order D(ud) D(u) for s modes.
inline int measure_sign(int s) { return ((s * (s - 1) / 2) % 2) ? -1 : 1; }

}  // namespace detail

class GrassmannElement {
 public:
  using TermMap = std::map<std::uint64_t, cplx>;

  explicit GrassmannElement(int n_modes) : n_modes_(n_modes) {
    if (n_modes < 0 || n_modes > 32)
      throw std::invalid_argument("n_modes must be in [0, 32]");
  }

  static GrassmannElement scalar(int n_modes, cplx c) {
    GrassmannElement e(n_modes);
    if (c != cplx(0.0)) e.terms_[0] = c;
    return e;
  }

  static GrassmannElement generator(int n_modes, GeneratorIndex g) {
    GrassmannElement e(n_modes);
    e.terms_[std::uint64_t{1} << detail::generator_id(g, n_modes)] = 1.0;
    return e;
  }

  static GrassmannElement monomial(int n_modes, std::uint64_t mask, cplx c) {
    GrassmannElement e(n_modes);
    if (mask >> (2 * n_modes)) throw std::invalid_argument("monomial mask exceeds algebra");
    if (c != cplx(0.0)) e.terms_[mask] = c;
    return e;
  }

  int n_modes() const { return n_modes_; }
  int n_generators() const { return 2 * n_modes_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  cplx body() const {
    auto it = terms_.find(0);
    return it == terms_.end() ? cplx(0.0) : it->second;
  }

  cplx coefficient(std::uint64_t mask) const {
    auto it = terms_.find(mask);
    return it == terms_.end() ? cplx(0.0) : it->second;
  }

  // Parity is defined iff every monomial has the same degree parity.
  bool is_even() const {
    for (const auto& [m, c] : terms_)
      if (std::popcount(m) & 1) return false;
    return true;
  }
  bool is_odd() const {
    for (const auto& [m, c] : terms_)
      if (!(std::popcount(m) & 1)) return false;
    return !terms_.empty();
  }

  int max_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, std::popcount(m));
    return d;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [m, c] : terms_) s += std::norm(c);
    return std::sqrt(s);
  }

  void add_term(std::uint64_t mask, cplx c) {
    if (mask >> (2 * n_modes_)) throw std::invalid_argument("monomial mask exceeds algebra");
    auto [it, inserted] = terms_.try_emplace(mask, c);
    if (!inserted) {
      it->second += c;
      if (it->second == cplx(0.0)) terms_.erase(it);
    } else if (c == cplx(0.0)) {
      terms_.erase(it);
    }
  }

  // Remove coefficients with |c| <= eps. The default drop tolerance is zero
  // (exact arithmetic); an epsilon is only for chained products.
  GrassmannElement& prune(double eps = 0.0) {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) <= eps)
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }

  GrassmannElement operator-() const {
    GrassmannElement r(n_modes_);
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
  }

  friend GrassmannElement operator+(const GrassmannElement& a, const GrassmannElement& b) {
    if (a.n_modes_ != b.n_modes_) throw std::invalid_argument("mode count mismatch");
    GrassmannElement r = a;
    for (const auto& [m, c] : b.terms_) r.add_term(m, c);
    return r;
  }
  friend GrassmannElement operator-(const GrassmannElement& a, const GrassmannElement& b) {
    if (a.n_modes_ != b.n_modes_) throw std::invalid_argument("mode count mismatch");
    GrassmannElement r = a;
    for (const auto& [m, c] : b.terms_) r.add_term(m, -c);
    return r;
  }
  friend GrassmannElement operator*(cplx s, const GrassmannElement& a) {
    GrassmannElement r(a.n_modes_);
    if (s == cplx(0.0)) return r;
    for (const auto& [m, c] : a.terms_) r.terms_[m] = s * c;
    return r;
  }
  friend GrassmannElement operator*(const GrassmannElement& a, cplx s) { return s * a; }

  friend GrassmannElement operator*(const GrassmannElement& a, const GrassmannElement& b) {
    if (a.n_modes_ != b.n_modes_) throw std::invalid_argument("mode count mismatch");
    GrassmannElement r(a.n_modes_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        if (ma & mb) continue;  // repeated generator
        const int sign = detail::merge_sign(ma, mb);
        r.add_term(ma | mb, static_cast<double>(sign) * ca * cb);
      }
    }
    return r;
  }

  GrassmannElement& operator+=(const GrassmannElement& b) { return *this = *this + b; }
  GrassmannElement& operator-=(const GrassmannElement& b) { return *this = *this - b; }
  GrassmannElement& operator*=(const GrassmannElement& b) { return *this = *this * b; }
  GrassmannElement& operator*=(cplx s) { return *this = *this * s; }

 private:
  int n_modes_;
  TermMap terms_;
};

inline GrassmannElement multiply(const GrassmannElement& a, const GrassmannElement& b) {
  return a * b;
}

// Left Grassmann derivative: anticommute g to the leftmost position of each
// monomial containing it, then delete it.
inline GrassmannElement derive(const GrassmannElement& a, GeneratorIndex g) {
  const int id = detail::generator_id(g, a.n_modes());
  const std::uint64_t bit = std::uint64_t{1} << id;
  GrassmannElement r(a.n_modes());
  for (const auto& [m, c] : a.terms()) {
    if (!(m & bit)) continue;
    r.add_term(m & ~bit, static_cast<double>(detail::sign_below(m, id)) * c);
  }
  return r;
}

inline GrassmannElement parity_flip(const GrassmannElement& a) {
  GrassmannElement r(a.n_modes());
  for (const auto& [m, c] : a.terms()) r.add_term(m, (std::popcount(m) & 1) ? -c : c);
  return r;
}

// Conjugate coefficients, map each generator to its dagger partner, reverse
// the monomial order, re-canonicalize with sign.
inline GrassmannElement hermitian_conjugate(const GrassmannElement& a) {
  const int n = a.n_modes();
  const std::uint64_t field_block = (n == 0) ? 0 : ((std::uint64_t{1} << n) - 1);
  GrassmannElement r(n);
  for (const auto& [m, c] : a.terms()) {
    // ids of the reversed, dagger-mapped sequence
    std::vector<int> seq;
    for (int id = 2 * n - 1; id >= 0; --id) {
      if (!(m >> id & 1)) continue;
      seq.push_back(id < n ? id + n : id - n);
    }
    int inpairs = 0;
    for (size_t i = 0; i < seq.size(); ++i)
      for (size_t j = i + 1; j < seq.size(); ++j)
        if (seq[i] > seq[j]) ++inpairs;
    const std::uint64_t mask = ((m & field_block) << n) | (m >> n);
    r.add_term(mask, ((inpairs & 1) ? -1.0 : 1.0) * std::conj(c));
  }
  return r;
}

// Berezin integration over a subset of modes (measure order D(ud) D(u) per
// integrated sector). Monomials missing any generator of the subset drop out.
inline GrassmannElement berezin_partial(const GrassmannElement& a, const std::vector<int>& modes) {
  const int n = a.n_modes();
  std::uint64_t want = 0;
  for (int m : modes) {
    if (m < 0 || m >= n) throw std::invalid_argument("mode out of range");
    want |= (std::uint64_t{1} << m) | (std::uint64_t{1} << (n + m));
  }
  const int s = static_cast<int>(modes.size());
  const int msign = detail::measure_sign(s);
  GrassmannElement r(n);
  for (const auto& [m, c] : a.terms()) {
    if ((m & want) != want) continue;
    // Sign of factoring the monomial as (integrated block, ascending)(rest):
    // count crossings of integrated generators over retained ones below them.
    int swaps = 0;
    const std::uint64_t rest = m & ~want;
    for (std::uint64_t w = m & want; w != 0; w &= w - 1) {
      const int id = std::countr_zero(w);
      const std::uint64_t below = (id == 0) ? 0 : (rest & ((std::uint64_t{1} << id) - 1));
      swaps += std::popcount(below);
    }
    const int sign = ((swaps & 1) ? -1 : 1) * msign;
    r.add_term(rest, static_cast<double>(sign) * c);
  }
  return r;
}

inline cplx berezin_integrate(const GrassmannElement& a) {
  const int n = a.n_modes();
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  return berezin_partial(a, all).body();
}

// Quadratic form ud A u; the coefficient of ud_i A_ij u_j.
struct QuadraticForm {
  int n_modes;
  Eigen::MatrixXcd matrix;

  QuadraticForm(int n, Eigen::MatrixXcd m) : n_modes(n), matrix(std::move(m)) {
    if (matrix.rows() != n_modes || matrix.cols() != n_modes)
      throw std::invalid_argument("quadratic form dimension mismatch");
  }

  GrassmannElement to_element() const {
    GrassmannElement e(n_modes);
    for (int i = 0; i < n_modes; ++i)
      for (int j = 0; j < n_modes; ++j) {
        const cplx a = matrix(i, j);
        if (a == cplx(0.0)) continue;
        // ud_i u_j = -(u_j ud_i), stored canonically
        e.add_term((std::uint64_t{1} << j) | (std::uint64_t{1} << (n_modes + i)), -a);
      }
    return e;
  }
};

namespace detail {

inline void require_even(const GrassmannElement& a, const char* what) {
  if (!a.is_even()) throw std::invalid_argument(std::string(what) + ": input must be Grassmann-even");
}

}  // namespace detail

// exp of an even element; the series in the nilpotent part terminates.
inline GrassmannElement exp_even(const GrassmannElement& a) {
  detail::require_even(a, "exp_even");
  const cplx b = a.body();
  GrassmannElement nilp = a;
  nilp.add_term(0, -b);
  GrassmannElement result = GrassmannElement::scalar(a.n_modes(), 1.0);
  GrassmannElement term = GrassmannElement::scalar(a.n_modes(), 1.0);
  for (int k = 1; k <= a.n_modes() + 1 && !term.is_zero(); ++k) {
    term = term * nilp * cplx(1.0 / k);
    result += term;
  }
  return std::exp(b) * result;
}

inline GrassmannElement exp_even(const QuadraticForm& a) { return exp_even(a.to_element()); }

inline GrassmannElement ln_even(const GrassmannElement& a) {
  detail::require_even(a, "ln_even");
  const cplx b = a.body();
  if (b == cplx(0.0)) throw std::invalid_argument("ln_even: zero scalar body");
  GrassmannElement x = (1.0 / b) * a;  // 1 + nu
  x.add_term(0, -1.0);                 // nu
  GrassmannElement result = GrassmannElement::scalar(a.n_modes(), std::log(b));
  GrassmannElement power = GrassmannElement::scalar(a.n_modes(), 1.0);
  for (int k = 1; k <= a.n_modes() + 1; ++k) {
    power = power * x;
    if (power.is_zero()) break;
    result += cplx((k % 2 == 1) ? 1.0 / k : -1.0 / k) * power;
  }
  return result;
}

inline GrassmannElement inverse_even(const GrassmannElement& a) {
  detail::require_even(a, "inverse_even");
  const cplx b = a.body();
  if (b == cplx(0.0)) throw std::invalid_argument("inverse_even: zero scalar body");
  GrassmannElement x = (-1.0 / b) * a;
  x.add_term(0, 1.0);  // -nu/b
  GrassmannElement result = GrassmannElement::scalar(a.n_modes(), 1.0);
  GrassmannElement power = GrassmannElement::scalar(a.n_modes(), 1.0);
  for (int k = 1; k <= a.n_modes() + 1; ++k) {
    power = power * x;
    if (power.is_zero()) break;
    result += power;
  }
  return (1.0 / b) * result;
}

// x^p for even x with nonzero body, via exp(p ln x); exact (series terminate).
inline GrassmannElement pow_even(const GrassmannElement& a, cplx p) {
  return exp_even(p * ln_even(a));
}

// integral of exp(ud A u) over the full measure; equals det(-A).
inline cplx gaussian_integral(const QuadraticForm& a) {
  return berezin_integrate(exp_even(a));
}

// Map an n-mode element into an algebra with new_n >= n modes; original mode k
// becomes mode (offset + k). The remap preserves canonical order, so no signs.
inline GrassmannElement embed(const GrassmannElement& a, int new_n, int offset = 0) {
  const int n = a.n_modes();
  if (new_n < n + offset || offset < 0) throw std::invalid_argument("embed: bad target size");
  GrassmannElement r(new_n);
  for (const auto& [m, c] : a.terms()) {
    std::uint64_t mask = 0;
    for (std::uint64_t w = m; w != 0; w &= w - 1) {
      const int id = std::countr_zero(w);
      mask |= std::uint64_t{1} << (id < n ? id + offset : (id - n) + new_n + offset);
    }
    r.add_term(mask, c);
  }
  return r;
}

// Inverse of embed: requires the element to be supported on modes [offset, offset+new_n).
inline GrassmannElement restrict_modes(const GrassmannElement& a, int new_n, int offset = 0) {
  const int n = a.n_modes();
  if (new_n + offset > n || new_n < 0 || offset < 0)
    throw std::invalid_argument("restrict_modes: bad target size");
  GrassmannElement r(new_n);
  for (const auto& [m, c] : a.terms()) {
    std::uint64_t mask = 0;
    for (std::uint64_t w = m; w != 0; w &= w - 1) {
      const int id = std::countr_zero(w);
      const int mode = id < n ? id : id - n;
      if (mode < offset || mode >= offset + new_n)
        throw std::invalid_argument("restrict_modes: support outside target modes");
      mask |= std::uint64_t{1} << (id < n ? mode - offset : (mode - offset) + new_n);
    }
    r.add_term(mask, c);
  }
  return r;
}

// Dual functional Psi*[u,ud] = integral D(vd)D(v) exp(vd u - ud v) conj(Psi)[v,vd],
// computed exactly in a doubled algebra (original modes first, barred modes
// appended) and restricted back to the original generators.
inline GrassmannElement dual_functional(const GrassmannElement& psi) {
  const int n = psi.n_modes();
  const int n2 = 2 * n;
  GrassmannElement barred = embed(hermitian_conjugate(psi), n2, n);
  GrassmannElement kernel(n2);
  for (int k = 0; k < n; ++k) {
    const GrassmannElement u = GrassmannElement::generator(n2, field_gen(k));
    const GrassmannElement ud = GrassmannElement::generator(n2, conj_gen(k));
    const GrassmannElement v = GrassmannElement::generator(n2, field_gen(n + k));
    const GrassmannElement vd = GrassmannElement::generator(n2, conj_gen(n + k));
    kernel += vd * u - ud * v;
  }
  std::vector<int> barred_modes(n);
  for (int k = 0; k < n; ++k) barred_modes[k] = n + k;
  const GrassmannElement integrated = berezin_partial(exp_even(kernel) * barred, barred_modes);
  return restrict_modes(integrated, n, 0);
}

// <Psi1|Psi2> = integral D(ud)D(u) Psi1* Psi2.
inline cplx inner_product(const GrassmannElement& psi1, const GrassmannElement& psi2) {
  if (psi1.n_modes() != psi2.n_modes()) throw std::invalid_argument("mode count mismatch");
  return berezin_integrate(dual_functional(psi1) * psi2);
}

// Normalized expectation value <Psi| O |Psi> / <Psi|Psi>.
inline cplx expectation(const GrassmannElement& psi, const GrassmannElement& op) {
  if (psi.n_modes() != op.n_modes()) throw std::invalid_argument("mode count mismatch");
  const GrassmannElement dual = dual_functional(psi);
  const cplx norm = berezin_integrate(dual * psi);
  if (norm == cplx(0.0)) throw std::invalid_argument("expectation: zero norm");
  return berezin_integrate(dual * op * psi) / norm;
}

// F(u + delta) with displacement factors written to the left of derivatives:
//   F(u+v) = sum over subsets S of shifted generators, ascending id order,
//            (prod_{g in S} v_g) (D_{g_k} ... D_{g_1} F)
// with the innermost derivative taken by the smallest id. Exact; shift values
// must be odd elements of the target algebra.
inline GrassmannElement taylor_shift(const GrassmannElement& f,
                                     const std::vector<std::pair<GeneratorIndex, GrassmannElement>>& shifts,
                                     int target_modes) {
  const int n = f.n_modes();
  if (target_modes < n) throw std::invalid_argument("taylor_shift: target algebra too small");
  std::vector<std::pair<int, const GrassmannElement*>> by_id;
  by_id.reserve(shifts.size());
  for (const auto& [g, val] : shifts) {
    if (val.n_modes() != target_modes)
      throw std::invalid_argument("taylor_shift: shift value mode count mismatch");
    if (!val.is_zero() && !val.is_odd())
      throw std::invalid_argument("taylor_shift: shift values must be odd");
    by_id.emplace_back(detail::generator_id(g, n), &val);
  }
  std::sort(by_id.begin(), by_id.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 1; i < by_id.size(); ++i)
    if (by_id[i].first == by_id[i - 1].first)
      throw std::invalid_argument("taylor_shift: duplicate shifted generator");

  const size_t k = by_id.size();
  if (k > 20) throw std::invalid_argument("taylor_shift: too many shifted generators");
  GrassmannElement result(target_modes);
  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << k); ++subset) {
    GrassmannElement deriv = f;
    GrassmannElement disp = GrassmannElement::scalar(target_modes, 1.0);
    for (size_t i = 0; i < k; ++i) {
      if (!(subset >> i & 1)) continue;
      const int id = by_id[i].first;
      const GeneratorIndex g = id < n ? field_gen(id) : conj_gen(id - n);
      deriv = derive(deriv, g);
      disp = disp * (*by_id[i].second);
      if (deriv.is_zero() || disp.is_zero()) break;
    }
    if (deriv.is_zero() || disp.is_zero()) continue;
    result += disp * embed(deriv, target_modes);
  }
  return result;
}

// Stable textual rendering: monomials in ascending mask order.
inline std::string to_string(const GrassmannElement& a) {
  std::string out;
  const int n = a.n_modes();
  char buf[64];
  for (const auto& [m, c] : a.terms()) {
    if (!out.empty()) out += " + ";
    const double re = c.real() == 0.0 ? 0.0 : c.real();  // drop negative zero
    const double im = c.imag() == 0.0 ? 0.0 : c.imag();
    std::snprintf(buf, sizeof(buf), "(%.17g%+.17gi)", re, im);
    out += buf;
    for (std::uint64_t w = m; w != 0; w &= w - 1) {
      const int id = std::countr_zero(w);
      out += (id < n) ? " u" + std::to_string(id) : " ud" + std::to_string(id - n);
    }
  }
  if (out.empty()) out = "0";
  return out;
}

// Locks the measure-order sign convention: <Psi|Psi> = det(Om^dag Om + 1) must
// hold verbatim for Psi = exp(ud Om u). Throws if the convention is broken.
inline void convention_self_test() {
  Eigen::MatrixXcd om(2, 2);
  om << cplx(0.7, -0.3), cplx(-1.1, 0.4), cplx(0.2, 0.9), cplx(1.3, 0.5);
  const GrassmannElement psi = exp_even(QuadraticForm(2, om));
  const cplx got = inner_product(psi, psi);
  const cplx want = (om.adjoint() * om + Eigen::MatrixXcd::Identity(2, 2)).determinant();
  if (std::abs(got - want) > 1e-12 * std::abs(want))
    throw std::logic_error("grassmann convention self-test failed");
}

}  // namespace fermivar
