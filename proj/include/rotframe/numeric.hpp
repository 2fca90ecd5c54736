// Exact scalar stack used by the symbolic layers: arbitrary-precision
// rationals, sums of rational multiples of square roots of integers
// (closed under +, -, *, and field inversion), and Gaussian extensions
// a + b*i over either.  Floating-point numerics elsewhere use Eigen.
#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace rotframe {

using Integer  = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// ---------------------------------------------------------------------------
// RadicalSum: finite sums  sum_k  c_k * sqrt(d_k)  with c_k rational and d_k
// distinct squarefree positive integers (d = 1 is the rational part).  This
// is a commutative ring; inversion is implemented by repeated conjugation,
// so nonzero elements are invertible (the set of radicands stays finite).
// ---------------------------------------------------------------------------
class RadicalSum {
 public:
  using TermMap = std::map<long long, Rational>;

  RadicalSum() = default;
  RadicalSum(int v) { if (v != 0) terms_[1] = v; }                  // NOLINT
  RadicalSum(long long v) { if (v != 0) terms_[1] = v; }            // NOLINT
  RadicalSum(const Rational& v) { if (v != 0) terms_[1] = v; }      // NOLINT

  // sqrt(n) for n >= 0, with the square part factored out exactly.
  static RadicalSum root(long long n) {
    if (n < 0) throw std::domain_error("RadicalSum::root: negative radicand");
    if (n == 0) return RadicalSum();
    long long square_free = n, outside = 1;
    for (long long p = 2; p * p <= square_free; ++p) {
      while (square_free % (p * p) == 0) {
        square_free /= p * p;
        outside *= p;
      }
    }
    RadicalSum r;
    r.terms_[square_free] = outside;
    return r;
  }

  // sqrt(p/q) = sqrt(p) sqrt(q) / q for a nonnegative rational p/q.
  static RadicalSum root_of(const Rational& v) {
    if (v < 0) throw std::domain_error("RadicalSum::root_of: negative");
    if (v == 0) return RadicalSum();
    const Integer num = boost::multiprecision::numerator(v);
    const Integer den = boost::multiprecision::denominator(v);
    constexpr long long kCap = 1'000'000'000'000LL;  // keep radicand products in range
    if (num > kCap || den > kCap)
      throw std::domain_error("RadicalSum::root_of: radicand too large for exact arithmetic");
    const long long n = num.convert_to<long long>();
    const long long d = den.convert_to<long long>();
    return root(n) * root(d) * Rational(1, d);
  }

  bool is_zero() const { return terms_.empty(); }
  bool is_rational() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 1);
  }
  Rational rational_part() const {
    auto it = terms_.find(1);
    return it == terms_.end() ? Rational(0) : it->second;
  }
  const TermMap& terms() const { return terms_; }

  RadicalSum operator-() const {
    RadicalSum r;
    for (const auto& [d, c] : terms_) r.terms_[d] = -c;
    return r;
  }
  RadicalSum& operator+=(const RadicalSum& o) {
    for (const auto& [d, c] : o.terms_) {
      Rational& slot = terms_[d];
      slot += c;
      if (slot == 0) terms_.erase(d);
    }
    return *this;
  }
  RadicalSum& operator-=(const RadicalSum& o) { return *this += -o; }
  friend RadicalSum operator+(RadicalSum a, const RadicalSum& b) { return a += b; }
  friend RadicalSum operator-(RadicalSum a, const RadicalSum& b) { return a -= b; }

  friend RadicalSum operator*(const RadicalSum& a, const RadicalSum& b) {
    RadicalSum r;
    for (const auto& [da, ca] : a.terms_) {
      for (const auto& [db, cb] : b.terms_) {
        // sqrt(da)*sqrt(db) = g*sqrt((da/g)*(db/g)) with g = gcd(da, db);
        // both factors are squarefree, so the product radicand is too.
        const long long g = std::gcd(da, db);
        const long long rad = (da / g) * (db / g);
        Rational& slot = r.terms_[rad];
        slot += ca * cb * g;
        if (slot == 0) r.terms_.erase(rad);
      }
    }
    return r;
  }
  RadicalSum& operator*=(const RadicalSum& o) { return *this = *this * o; }

  // Exact inverse.  Conjugating with respect to one prime at a time clears
  // that prime from every radicand of v * conj(v), so the loop terminates.
  RadicalSum inverse() const {
    if (is_zero()) throw std::domain_error("RadicalSum::inverse: zero");
    RadicalSum value = *this;
    RadicalSum accum = RadicalSum(1);
    while (!value.is_rational()) {
      const long long rad = value.terms_.rbegin()->first;
      long long p = 2;
      while (rad % p != 0) ++p;
      RadicalSum conj;
      for (const auto& [d, c] : value.terms_)
        conj.terms_[d] = (d % p == 0) ? -c : c;
      accum = accum * conj;
      value = value * conj;
    }
    const Rational q = value.rational_part();
    if (q == 0) throw std::domain_error("RadicalSum::inverse: zero norm");
    return accum * Rational(1 / q);
  }

  RadicalSum operator*(const Rational& s) const {
    RadicalSum r;
    if (s == 0) return r;
    for (const auto& [d, c] : terms_) r.terms_[d] = c * s;
    return r;
  }

  bool operator==(const RadicalSum& o) const { return terms_ == o.terms_; }
  bool operator!=(const RadicalSum& o) const { return terms_ != o.terms_; }

  double to_double() const {
    double sum = 0.0;
    for (const auto& [d, c] : terms_)
      sum += rotframe::to_double(c) * std::sqrt(static_cast<double>(d));
    return sum;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [d, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += c.str();
      if (d != 1) s += "*sqrt(" + std::to_string(d) + ")";
    }
    return s;
  }

 private:
  TermMap terms_;
};

// ---------------------------------------------------------------------------
// Gaussian extension a + b*i over an exact scalar.  Keeps the power-of-i
// grading of operator coefficients exact instead of using floating complex.
// ---------------------------------------------------------------------------
template <class S>
struct Gaussian {
  S re{}, im{};

  Gaussian() = default;
  Gaussian(S r) : re(std::move(r)) {}  // NOLINT
  Gaussian(S r, S i) : re(std::move(r)), im(std::move(i)) {}
  static Gaussian i() { return Gaussian(S(0), S(1)); }

  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  Gaussian conj() const { return Gaussian(re, -im); }
  Gaussian times_i() const { return Gaussian(-im, re); }

  Gaussian operator-() const { return Gaussian(-re, -im); }
  Gaussian& operator+=(const Gaussian& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Gaussian& operator-=(const Gaussian& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend Gaussian operator+(Gaussian a, const Gaussian& b) { return a += b; }
  friend Gaussian operator-(Gaussian a, const Gaussian& b) { return a -= b; }
  friend Gaussian operator*(const Gaussian& a, const Gaussian& b) {
    return Gaussian(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  Gaussian& operator*=(const Gaussian& o) { return *this = *this * o; }
  Gaussian operator*(const Rational& s) const { return Gaussian(re * s, im * s); }
  Gaussian inverse() const {
    const S n = re * re + im * im;
    const S ninv = n.inverse();
    return Gaussian(re * ninv, -(im * ninv));
  }
  bool operator==(const Gaussian& o) const { return re == o.re && im == o.im; }

  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
  std::string str() const { return "(" + re.str() + ") + (" + im.str() + ")*i"; }
};

using GaussianRS = Gaussian<RadicalSum>;

// Exact rational view of a double that is known to be a small rational
// (used when ingesting plain config numbers into the exact layer).
inline Rational rational_from_double(double v, long long max_den = 1'000'000) {
  // Continued-fraction expansion; exact when v is representable.
  Rational best(0);
  double x = v;
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(x);
    const long long a = static_cast<long long>(fl);
    const long long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    best = Rational(p1, q1);
    const double rem = x - fl;
    if (rem < 1e-15) break;
    x = 1.0 / rem;
  }
  return best;
}

}  // namespace rotframe
