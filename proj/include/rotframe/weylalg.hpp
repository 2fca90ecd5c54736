// Exact polynomial-coefficient differential operators.
//
// A DiffOp is a finite sum of terms  coeff * x^mono * d^deriv  over a fixed
// ordered coordinate list, kept in canonical (normal-ordered) form: every
// derivative stands to the right of every monomial, terms sorted in graded
// lexicographic order on (derivative, monomial), zero coefficients pruned.
// Composition uses the exact reordering rule
//   d^b x^c = sum_k  k! C(b,k) C(c,k)  x^{c-k} d^{b-k}   (componentwise),
// which follows from [d_k, x_l] = delta_{kl}.  Coefficients live in an exact
// ring: Gaussian radical sums, or formal power series in a bookkeeping
// parameter eps whose coefficients are Gaussian radical sums.
#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotframe/gauge.hpp"
#include "rotframe/numeric.hpp"

namespace rotframe {

// ---------------------------------------------------------------------------
// Laurent series in a formal small parameter (integer powers, possibly
// negative).  Used to grade operator coefficients by the displacement scale.
// ---------------------------------------------------------------------------
class EpsSeries {
 public:
  EpsSeries() = default;
  EpsSeries(const GaussianRS& c) { if (!c.is_zero()) terms_[0] = c; }  // NOLINT
  static EpsSeries eps(int power, GaussianRS c = GaussianRS(RadicalSum(1))) {
    EpsSeries s;
    if (!c.is_zero()) s.terms_[power] = std::move(c);
    return s;
  }

  bool is_zero() const { return terms_.empty(); }
  const std::map<int, GaussianRS>& terms() const { return terms_; }
  GaussianRS at(int power) const {
    auto it = terms_.find(power);
    return it == terms_.end() ? GaussianRS() : it->second;
  }
  int min_power() const { return terms_.empty() ? 0 : terms_.begin()->first; }

  EpsSeries operator-() const {
    EpsSeries r;
    for (const auto& [p, c] : terms_) r.terms_[p] = -c;
    return r;
  }
  EpsSeries& operator+=(const EpsSeries& o) {
    for (const auto& [p, c] : o.terms_) {
      GaussianRS& slot = terms_[p];
      slot += c;
      if (slot.is_zero()) terms_.erase(p);
    }
    return *this;
  }
  EpsSeries& operator-=(const EpsSeries& o) { return *this += -o; }
  friend EpsSeries operator+(EpsSeries a, const EpsSeries& b) { return a += b; }
  friend EpsSeries operator-(EpsSeries a, const EpsSeries& b) { return a -= b; }
  friend EpsSeries operator*(const EpsSeries& a, const EpsSeries& b) {
    EpsSeries r;
    for (const auto& [pa, ca] : a.terms_)
      for (const auto& [pb, cb] : b.terms_) {
        GaussianRS& slot = r.terms_[pa + pb];
        slot += ca * cb;
        if (slot.is_zero()) r.terms_.erase(pa + pb);
      }
    return r;
  }
  EpsSeries& operator*=(const EpsSeries& o) { return *this = *this * o; }
  EpsSeries operator*(const Rational& s) const {
    EpsSeries r;
    if (s == 0) return r;
    for (const auto& [p, c] : terms_) r.terms_[p] = c * s;
    return r;
  }
  bool operator==(const EpsSeries& o) const { return terms_ == o.terms_; }

  // Drop powers above max_power (series truncation).
  EpsSeries truncated(int max_power) const {
    EpsSeries r;
    for (const auto& [p, c] : terms_)
      if (p <= max_power) r.terms_[p] = c;
    return r;
  }
  // Keep a single power.
  EpsSeries component(int power) const {
    EpsSeries r;
    auto it = terms_.find(power);
    if (it != terms_.end()) r.terms_[power] = it->second;
    return r;
  }

  std::complex<double> eval(double eps_value) const {
    std::complex<double> acc = 0.0;
    for (const auto& [p, c] : terms_) acc += c.to_complex() * std::pow(eps_value, p);
    return acc;
  }

 private:
  std::map<int, GaussianRS> terms_;
};

// ---------------------------------------------------------------------------
// canonical term keys
// ---------------------------------------------------------------------------
struct TermKey {
  std::vector<std::uint8_t> mono;   // monomial exponents per coordinate
  std::vector<std::uint8_t> deriv;  // derivative exponents per coordinate

  bool operator==(const TermKey& o) const { return mono == o.mono && deriv == o.deriv; }
};

// Graded lexicographic on (derivative, monomial): compare total derivative
// order first, then the derivative multi-index, then the monomial likewise.
struct TermKeyLess {
  static int total(const std::vector<std::uint8_t>& v) {
    int t = 0;
    for (auto e : v) t += e;
    return t;
  }
  bool operator()(const TermKey& a, const TermKey& b) const {
    const int da = total(a.deriv), db = total(b.deriv);
    if (da != db) return da < db;
    if (a.deriv != b.deriv) return a.deriv < b.deriv;
    const int ma = total(a.mono), mb = total(b.mono);
    if (ma != mb) return ma < mb;
    return a.mono < b.mono;
  }
};

// ---------------------------------------------------------------------------
// the operator algebra
// ---------------------------------------------------------------------------
template <class K>
class DiffOp {
 public:
  using TermMap = std::map<TermKey, K, TermKeyLess>;

  DiffOp() = default;
  explicit DiffOp(std::vector<std::string> coords) : coords_(std::move(coords)) {}

  static DiffOp constant(std::vector<std::string> coords, K value) {
    DiffOp op(std::move(coords));
    op.add_term(TermKey{op.zero_vec(), op.zero_vec()}, std::move(value));
    return op;
  }
  static DiffOp coordinate(std::vector<std::string> coords, std::size_t index, K value = K(GaussianRS(RadicalSum(1)))) {
    DiffOp op(std::move(coords));
    TermKey key{op.zero_vec(), op.zero_vec()};
    key.mono.at(index) = 1;
    op.add_term(std::move(key), std::move(value));
    return op;
  }
  static DiffOp derivative(std::vector<std::string> coords, std::size_t index, K value = K(GaussianRS(RadicalSum(1)))) {
    DiffOp op(std::move(coords));
    TermKey key{op.zero_vec(), op.zero_vec()};
    key.deriv.at(index) = 1;
    op.add_term(std::move(key), std::move(value));
    return op;
  }

  const std::vector<std::string>& coords() const { return coords_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t n_coords() const { return coords_.size(); }

  void add_term(TermKey key, K value) {
    if (value.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(std::move(key), std::move(value));
    if (!inserted) {
      it->second += value;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  DiffOp operator-() const {
    DiffOp r(coords_);
    for (const auto& [k, c] : terms_) r.terms_[k] = -c;
    return r;
  }
  DiffOp& operator+=(const DiffOp& o) {
    require_same_coords(o);
    for (const auto& [k, c] : o.terms_) {
      auto [it, inserted] = terms_.try_emplace(k, c);
      if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
      }
    }
    return *this;
  }
  DiffOp& operator-=(const DiffOp& o) { return *this += -o; }
  friend DiffOp operator+(DiffOp a, const DiffOp& b) { return a += b; }
  friend DiffOp operator-(DiffOp a, const DiffOp& b) { return a -= b; }

  DiffOp scaled(const K& s) const {
    DiffOp r(coords_);
    for (const auto& [k, c] : terms_) {
      K v = c * s;
      if (!v.is_zero()) r.terms_[k] = std::move(v);
    }
    return r;
  }

  friend DiffOp operator*(const DiffOp& a, const DiffOp& b) {
    a.require_same_coords(b);
    const std::size_t nc = a.coords_.size();
    DiffOp r(a.coords_);
    std::vector<std::size_t> active;
    for (const auto& [ka, ca] : a.terms_) {
      for (const auto& [kb, cb] : b.terms_) {
        // Reorder d^{da} x^{mb}: k ranges componentwise over 0..min(da, mb).
        active.clear();
        for (std::size_t j = 0; j < nc; ++j)
          if (ka.deriv[j] > 0 && kb.mono[j] > 0) active.push_back(j);
        std::vector<std::uint8_t> k(active.size(), 0);
        const K cab = ca * cb;
        while (true) {
          Rational mult(1);
          for (std::size_t t = 0; t < active.size(); ++t) {
            const int kk = k[t];
            const int da = ka.deriv[active[t]];
            const int mb = kb.mono[active[t]];
            // k! * C(da,k) * C(mb,k) = prod_{u<k} (da-u)(mb-u)/(u+1)
            for (int u = 0; u < kk; ++u)
              mult *= Rational(Integer(da - u) * Integer(mb - u), Integer(u + 1));
          }
          TermKey key;
          key.mono.resize(nc);
          key.deriv.resize(nc);
          for (std::size_t j = 0; j < nc; ++j) {
            key.mono[j] = static_cast<std::uint8_t>(ka.mono[j] + kb.mono[j]);
            key.deriv[j] = static_cast<std::uint8_t>(ka.deriv[j] + kb.deriv[j]);
          }
          for (std::size_t t = 0; t < active.size(); ++t) {
            key.mono[active[t]] = static_cast<std::uint8_t>(key.mono[active[t]] - k[t]);
            key.deriv[active[t]] = static_cast<std::uint8_t>(key.deriv[active[t]] - k[t]);
          }
          r.add_term(std::move(key), cab * mult);
          // odometer over k
          std::size_t pos = 0;
          while (pos < active.size()) {
            const std::uint8_t cap = std::min(ka.deriv[active[pos]], kb.mono[active[pos]]);
            if (k[pos] < cap) {
              ++k[pos];
              break;
            }
            k[pos] = 0;
            ++pos;
          }
          if (pos == active.size()) break;  // covers active.empty(): single pass
        }
      }
    }
    return r;
  }

  bool operator==(const DiffOp& o) const {
    return coords_ == o.coords_ && terms_ == o.terms_;
  }
  bool operator!=(const DiffOp& o) const { return !(*this == o); }

  // Map the coefficients through f (e.g. eps truncation), pruning zeros.
  template <class F>
  DiffOp map_coeffs(F&& f) const {
    DiffOp r(coords_);
    for (const auto& [k, c] : terms_) {
      K v = f(c);
      if (!v.is_zero()) r.terms_[k] = std::move(v);
    }
    return r;
  }

  // Stable text form, e.g. "(1/2) dQ4^2 d/dQ5 + (-1+1i) d/dQ4".
  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "[" << coeff_str(c) << "]";
      for (std::size_t j = 0; j < coords_.size(); ++j)
        if (k.mono[j] > 0) {
          os << " " << coords_[j];
          if (k.mono[j] > 1) os << "^" << static_cast<int>(k.mono[j]);
        }
      for (std::size_t j = 0; j < coords_.size(); ++j)
        if (k.deriv[j] > 0) {
          os << " d/d" << coords_[j];
          if (k.deriv[j] > 1) os << "^" << static_cast<int>(k.deriv[j]);
        }
    }
    return os.str();
  }

 private:
  static std::string coeff_str(const GaussianRS& c) { return c.str(); }
  static std::string coeff_str(const EpsSeries& c) {
    std::string s;
    for (const auto& [p, g] : c.terms()) {
      if (!s.empty()) s += " + ";
      s += "(" + g.str() + ")*eps^" + std::to_string(p);
    }
    return s.empty() ? "0" : s;
  }

  std::vector<std::uint8_t> zero_vec() const {
    return std::vector<std::uint8_t>(coords_.size(), 0);
  }
  void require_same_coords(const DiffOp& o) const {
    if (coords_ != o.coords_)
      throw std::invalid_argument("DiffOp: coordinate lists differ");
  }

  std::vector<std::string> coords_;
  TermMap terms_;
};

using DiffOpX = DiffOp<GaussianRS>;   // exact Gaussian-radical coefficients
using DiffOpE = DiffOp<EpsSeries>;    // eps-graded coefficients

template <class K>
DiffOp<K> commutator(const DiffOp<K>& a, const DiffOp<K>& b) {
  return a * b - b * a;
}

// Four-term Weyl symmetrization of  c(x) * d_a d_b:
//   (1/4) (c d_a d_b + d_a c d_b + d_b c d_a + d_a d_b c).
template <class K>
DiffOp<K> weyl_symmetrize(const DiffOp<K>& coeff, std::size_t a, std::size_t b) {
  for (const auto& [k, c] : coeff.terms())
    for (auto e : k.deriv)
      if (e != 0)
        throw std::invalid_argument("weyl_symmetrize: coefficient must be a multiplication operator");
  const auto da = DiffOp<K>::derivative(coeff.coords(), a);
  const auto db = DiffOp<K>::derivative(coeff.coords(), b);
  DiffOp<K> sum = coeff * da * db + da * coeff * db + db * coeff * da + da * db * coeff;
  return sum.scaled(K(GaussianRS(RadicalSum(Rational(1, 4)))));
}

// ---------------------------------------------------------------------------
// coordinate naming helpers
// ---------------------------------------------------------------------------
inline std::vector<std::string> lab_coords(Eigen::Index n_particles) {
  static const char axes[3] = {'x', 'y', 'z'};
  std::vector<std::string> c;
  for (Eigen::Index al = 0; al < n_particles; ++al)
    for (int i = 0; i < 3; ++i)
      c.push_back("dR" + std::to_string(al + 1) + axes[i]);
  return c;
}

inline std::vector<std::string> mode_coords(Eigen::Index n_particles, Eigen::Index n_modes) {
  std::vector<std::string> c;
  for (Eigen::Index a = 0; a < n_modes; ++a) c.push_back("dQ" + std::to_string(a + 4));
  (void)n_particles;
  return c;
}

// ---------------------------------------------------------------------------
// physics constructors (exact scalars)
// ---------------------------------------------------------------------------

// Gauge-projected momentum operators P_{alpha i} in lab displacement
// coordinates; first order with constant coefficients.  The projection
// guarantees S_a({P/m}) = 0 and, for translation-invariant specs,
// sum_alpha P_alpha = 0 as exact operator identities.
std::vector<DiffOpX> momentum_operators(const GaugeSpecX& spec);
std::vector<DiffOpX> momentum_operators(const GaugeSpecX& spec, const ExtendedBasisX& basis);

// Residual angular momentum Lambda_n = sum_gamma eps_{npq} R_{gamma p} P_{gamma q}.
// Lab-coordinate form (polynomial coefficients):
std::array<DiffOpX, 3> residual_angular_momentum(const GaugeSpecX& spec);
// Normal-coordinate form over the basis modes (translation rows excluded for
// translation-invariant specs):
std::array<DiffOpX, 3> residual_angular_momentum(const GaugeSpecX& spec,
                                                 const ExtendedBasisX& basis);

// Monomial operators for the gauge functions S_a in lab coordinates.
std::array<DiffOpX, 3> gauge_function_operators(const GaugeSpecX& spec);

// Exact remainder of the residual-momentum algebra in lab coordinates:
//   [Lambda_i, Lambda_j] = i eps_{ijk} Lambda_k + anomaly(i, j).
// The remainder is linear in the momenta with coefficients built from the
// rotational response of the gauge rows; it is supported on the gauge
// directions, so it annihilates every gauge-invariant state.
DiffOpX residual_momentum_anomaly(const GaugeSpecX& spec, int i, int j);

// Angular sector: spin matrices for total angular momentum l, dimension
// 2l+1, basis ordered by descending magnetic quantum number.  Entries are
// exact; they satisfy [s_i, s_j] = i eps_{ijk} s_k and s^2 = l(l+1).
struct AngularSector {
  int l = 0;
  int dim = 1;
  std::vector<GaussianRS> sx, sy, sz;  // row-major dim x dim

  const GaussianRS& at(const std::vector<GaussianRS>& m, int r, int c) const {
    return m[static_cast<std::size_t>(r * dim + c)];
  }
};
AngularSector angular_sector(int l);

}  // namespace rotframe
