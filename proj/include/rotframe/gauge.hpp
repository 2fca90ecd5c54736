// Linear gauges for N-body rotating frames.
//
// A gauge is a triple of mass-weighted linear conditions
//   S_a(R) = sum_alpha m_alpha Gamma_{a,alpha i} R_{alpha i} = 0,   a = 1..3,
// whose rows are mass-orthogonal:  sum m Gamma_a . Gamma_b = Rsq_a delta_ab.
// The same machinery runs over double (numerics) and RadicalSum (exact
// identities), so the core types are templated on the scalar.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rotframe/numeric.hpp"

namespace rotframe {

// --------------------------------------------------------------------------
// scalar helpers shared by the double / exact instantiations
// --------------------------------------------------------------------------
namespace detail {
inline double as_double(double v) { return v; }
inline double as_double(const Rational& v) { return to_double(v); }
inline double as_double(const RadicalSum& v) { return v.to_double(); }

inline bool strictly_zero(double v) { return v == 0.0; }
inline bool strictly_zero(const RadicalSum& v) { return v.is_zero(); }

inline double recip(double v) { return 1.0 / v; }
inline RadicalSum recip(const RadicalSum& v) { return v.inverse(); }

inline double sqrt_scalar(double v) { return std::sqrt(v); }
inline RadicalSum sqrt_scalar(const RadicalSum& v) {
  if (!v.is_rational())
    throw std::domain_error("sqrt of a non-rational exact scalar is not representable");
  return RadicalSum::root_of(v.rational_part());
}
}  // namespace detail

// --------------------------------------------------------------------------
// domain types
// --------------------------------------------------------------------------
template <class S>
struct GaugeSpecT {
  Eigen::Index n_particles = 0;
  std::vector<S> masses;                // N entries, all > 0
  std::array<std::vector<S>, 3> gamma;  // rows a = 1..3; each 3N, layout [alpha*3+i]
  std::array<S, 3> norm_sq;             // Rsq_a = sum m Gamma_a . Gamma_a
  bool translation_invariant = false;   // whether sum_alpha m Gamma_{a,alpha} = 0
};
using GaugeSpec  = GaugeSpecT<double>;
using GaugeSpecX = GaugeSpecT<RadicalSum>;

enum class FrameTag { lab, body };

template <class S>
struct ConfigurationT {
  Eigen::Index n_particles = 0;
  std::vector<S> positions;  // 3N, layout [alpha*3+i]
  FrameTag frame_tag = FrameTag::lab;
};
using Configuration  = ConfigurationT<double>;
using ConfigurationX = ConfigurationT<RadicalSum>;

// Full orthogonal completion of the gauge rows: rows a = 1..3 are the gauge
// rows; rows 4..3N are mass-orthogonal completions sharing one norm.  For
// translation-invariant specs the three uniform-translation rows sit last.
template <class S>
struct ExtendedBasisT {
  Eigen::Index n_particles = 0;
  std::vector<std::vector<S>> gamma;  // 3N rows of length 3N
  std::array<S, 3> norm_sq_low;       // norms of rows 1..3
  S norm_sq_high{};                   // common norm of rows a >= 4
  bool translation_invariant = false;
};
using ExtendedBasis  = ExtendedBasisT<double>;
using ExtendedBasisX = ExtendedBasisT<RadicalSum>;

// Number of configuration modes carried by reduced wave functions: all
// non-gauge rows, except that translation rows are dropped in the
// translation-invariant case.
template <class S>
Eigen::Index mode_count(const GaugeSpecT<S>& spec) {
  return 3 * spec.n_particles - 3 - (spec.translation_invariant ? 3 : 0);
}

template <class S>
struct GaugeGeometryT {
  // qmat(a,i) = d S_a / d(rotation i): response of the gauge functions to an
  // infinitesimal body-frame rotation about axis i.
  std::array<std::array<S, 3>, 3> qmat{};
  std::array<std::array<S, 3>, 3> ninv{};  // inverse rotational metric
  S det_q{};
  double jac = 0.0;  // |det qmat| / (R_1 R_2 R_3); 0 when singular
  int sign = 0;      // sign of det qmat
  bool singular = false;
};
using GaugeGeometry  = GaugeGeometryT<double>;
using GaugeGeometryX = GaugeGeometryT<RadicalSum>;

struct QuantumPotentials {
  double v1 = 0.0;  // frame-curvature piece built from qmat^{-1} and the gauge rows
  double v2 = 0.0;  // piece built from ninv and the full configuration
};

// --------------------------------------------------------------------------
// validation
// --------------------------------------------------------------------------
template <class S>
void validate_spec(const GaugeSpecT<S>& spec, double tol = 1e-10) {
  const Eigen::Index n = spec.n_particles;
  if (n < 1) throw std::invalid_argument("GaugeSpec: need at least one particle");
  if (static_cast<Eigen::Index>(spec.masses.size()) != n)
    throw std::invalid_argument("GaugeSpec: masses size mismatch");
  for (const S& m : spec.masses)
    if (detail::as_double(m) <= 0.0)
      throw std::invalid_argument("GaugeSpec: masses must be strictly positive");
  for (int a = 0; a < 3; ++a) {
    if (static_cast<Eigen::Index>(spec.gamma[a].size()) != 3 * n)
      throw std::invalid_argument("GaugeSpec: gauge row size mismatch");
    if (detail::as_double(spec.norm_sq[a]) <= 0.0)
      throw std::invalid_argument("GaugeSpec: row norms must be positive");
  }
  // Mass-weighted orthogonality of the rows, relative to the norm scale.
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      S dot{};
      for (Eigen::Index al = 0; al < n; ++al)
        for (int i = 0; i < 3; ++i)
          dot += spec.masses[al] * spec.gamma[a][al * 3 + i] * spec.gamma[b][al * 3 + i];
      const S expect = (a == b) ? spec.norm_sq[a] : S{};
      const double scale = std::sqrt(detail::as_double(spec.norm_sq[a]) *
                                     detail::as_double(spec.norm_sq[b]));
      if (std::abs(detail::as_double(dot) - detail::as_double(expect)) > tol * scale)
        throw std::invalid_argument("GaugeSpec: rows are not mass-orthogonal");
    }
  }
  if (spec.translation_invariant) {
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 3; ++i) {
        S sum{};
        for (Eigen::Index al = 0; al < n; ++al)
          sum += spec.masses[al] * spec.gamma[a][al * 3 + i];
        if (std::abs(detail::as_double(sum)) >
            tol * std::sqrt(detail::as_double(spec.norm_sq[a])))
          throw std::invalid_argument(
              "GaugeSpec: translation-invariant flag set but rows are not");
      }
  }
}

// --------------------------------------------------------------------------
// gauge functions and rotational geometry
// --------------------------------------------------------------------------
template <class S>
std::array<S, 3> eval_gauge(const GaugeSpecT<S>& spec, const ConfigurationT<S>& cfg) {
  if (cfg.n_particles != spec.n_particles)
    throw std::invalid_argument("eval_gauge: particle-count mismatch");
  std::array<S, 3> s{};
  for (int a = 0; a < 3; ++a)
    for (Eigen::Index al = 0; al < spec.n_particles; ++al)
      for (int i = 0; i < 3; ++i)
        s[a] += spec.masses[al] * spec.gamma[a][al * 3 + i] * cfg.positions[al * 3 + i];
  return s;
}

namespace detail {
constexpr int eps3(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((j - i + 3) % 3 == 1) ? 1 : -1;
}
}  // namespace detail

template <class S>
GaugeGeometryT<S> eval_geometry(const GaugeSpecT<S>& spec, const ConfigurationT<S>& cfg) {
  if (cfg.n_particles != spec.n_particles)
    throw std::invalid_argument("eval_geometry: particle-count mismatch");
  GaugeGeometryT<S> g;
  const Eigen::Index n = spec.n_particles;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i) {
      S q{};
      for (Eigen::Index b = 0; b < n; ++b)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            if (detail::eps3(j, i, k) != 0)
              q += spec.masses[b] * spec.gamma[a][b * 3 + j] *
                   cfg.positions[b * 3 + k] * S(detail::eps3(j, i, k));
      g.qmat[a][i] = q;
    }

  // det and adjugate of qmat (rows a, columns i).
  auto& q = g.qmat;
  g.det_q = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) -
            q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
            q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);

  const double norm_prod = std::sqrt(detail::as_double(spec.norm_sq[0]) *
                                     detail::as_double(spec.norm_sq[1]) *
                                     detail::as_double(spec.norm_sq[2]));
  const double det_d = detail::as_double(g.det_q);
  const double jac_abs = std::abs(det_d) / norm_prod;

  const bool exact_scalar = !std::is_same_v<S, double>;
  const bool zero_det = exact_scalar ? detail::strictly_zero(g.det_q) : (jac_abs < 1e-12);
  if (zero_det) {
    g.singular = true;
    g.jac = 0.0;
    g.sign = 0;
    return g;
  }

  // qinv(i,a): inverse indexed (vector, gauge-row), sum_i qmat(a,i) qinv(i,b) = delta_ab.
  std::array<std::array<S, 3>, 3> qinv{};
  const S inv_det = detail::recip(g.det_q);
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) {
      const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
      const int a1 = (a + 1) % 3, a2 = (a + 2) % 3;
      // cofactor expansion: qinv = adj(q)^T with rows/cols as labeled
      qinv[i][a] = (q[a1][i1] * q[a2][i2] - q[a1][i2] * q[a2][i1]) * inv_det;
    }

  // ninv_{jk} = sum_d Rsq_d qinv(j,d) qinv(k,d)
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) {
      S acc{};
      for (int d = 0; d < 3; ++d) acc += spec.norm_sq[d] * qinv[j][d] * qinv[k][d];
      g.ninv[j][k] = acc;
    }

  g.jac = jac_abs;
  g.sign = det_d > 0.0 ? 1 : -1;
  return g;
}

// --------------------------------------------------------------------------
// basis completion, mode projection
// --------------------------------------------------------------------------
template <class S>
ExtendedBasisT<S> extend_basis(const GaugeSpecT<S>& spec,
                               const std::vector<std::vector<S>>& seeds,
                               const S& norm_sq_high) {
  validate_spec(spec);
  const Eigen::Index n = spec.n_particles;
  const Eigen::Index dim = 3 * n;
  if (detail::as_double(norm_sq_high) <= 0.0)
    throw std::invalid_argument("extend_basis: norm_sq must be positive");

  auto mdot = [&](const std::vector<S>& x, const std::vector<S>& y) {
    S acc{};
    for (Eigen::Index al = 0; al < n; ++al)
      for (int i = 0; i < 3; ++i)
        acc += spec.masses[al] * x[al * 3 + i] * y[al * 3 + i];
    return acc;
  };

  ExtendedBasisT<S> basis;
  basis.n_particles = n;
  basis.translation_invariant = spec.translation_invariant;
  basis.norm_sq_low = spec.norm_sq;
  basis.norm_sq_high = norm_sq_high;
  basis.gamma.resize(static_cast<std::size_t>(dim));
  for (int a = 0; a < 3; ++a) basis.gamma[static_cast<std::size_t>(a)] = spec.gamma[a];

  // Fixed rows the completions must stay orthogonal to: the gauge rows and,
  // for translation-invariant specs, the three uniform-translation rows that
  // occupy the last slots of the completion.
  std::vector<std::vector<S>> fixed;
  std::vector<S> fixed_norm;
  for (int a = 0; a < 3; ++a) {
    fixed.push_back(spec.gamma[a]);
    fixed_norm.push_back(spec.norm_sq[a]);
  }
  const Eigen::Index n_shape = mode_count(spec);
  std::vector<std::vector<S>> translations;
  if (spec.translation_invariant) {
    S total_mass{};
    for (const S& m : spec.masses) total_mass += m;
    const S amp = detail::sqrt_scalar(norm_sq_high * detail::recip(total_mass));
    for (int i = 0; i < 3; ++i) {
      std::vector<S> row(static_cast<std::size_t>(dim), S{});
      for (Eigen::Index al = 0; al < n; ++al) row[al * 3 + i] = amp;
      translations.push_back(row);
      fixed.push_back(row);
      fixed_norm.push_back(norm_sq_high);
    }
  }

  // Candidate list: caller seeds first, then standard basis vectors so short
  // seed lists still complete to full rank.
  std::vector<std::vector<S>> candidates = seeds;
  for (Eigen::Index k = 0; k < dim; ++k) {
    std::vector<S> e(static_cast<std::size_t>(dim), S{});
    e[static_cast<std::size_t>(k)] = S(1);
    candidates.push_back(std::move(e));
  }

  std::vector<std::vector<S>> modes;
  std::vector<S> mode_norm;
  for (std::size_t c = 0; c < candidates.size() &&
                          static_cast<Eigen::Index>(modes.size()) < n_shape; ++c) {
    std::vector<S> v = candidates[c];
    if (static_cast<Eigen::Index>(v.size()) != dim)
      throw std::invalid_argument("extend_basis: seed length mismatch");
    const double orig_scale = std::max(detail::as_double(mdot(v, v)), 1e-300);
    // Two Gram-Schmidt passes (the second pass cures floating-point drift).
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t r = 0; r < fixed.size(); ++r) {
        const S coef = mdot(v, fixed[r]) * detail::recip(fixed_norm[r]);
        for (Eigen::Index k = 0; k < dim; ++k)
          v[static_cast<std::size_t>(k)] -= coef * fixed[r][static_cast<std::size_t>(k)];
      }
      for (std::size_t r = 0; r < modes.size(); ++r) {
        const S coef = mdot(v, modes[r]) * detail::recip(mode_norm[r]);
        for (Eigen::Index k = 0; k < dim; ++k)
          v[static_cast<std::size_t>(k)] -= coef * modes[r][static_cast<std::size_t>(k)];
      }
    }
    const S nsq = mdot(v, v);
    const bool dependent = std::is_same_v<S, double>
                               ? detail::as_double(nsq) < 1e-20 * orig_scale
                               : detail::strictly_zero(nsq);
    if (dependent) {
      if (c < seeds.size())
        throw std::invalid_argument("extend_basis: seed set is rank-deficient");
      continue;  // standard-basis candidate already spanned; skip
    }
    const S scale = detail::sqrt_scalar(norm_sq_high * detail::recip(nsq));
    for (Eigen::Index k = 0; k < dim; ++k) v[static_cast<std::size_t>(k)] *= scale;
    modes.push_back(std::move(v));
    mode_norm.push_back(norm_sq_high);
  }
  if (static_cast<Eigen::Index>(modes.size()) != n_shape)
    throw std::invalid_argument("extend_basis: could not complete the basis");

  for (std::size_t r = 0; r < modes.size(); ++r) basis.gamma[3 + r] = std::move(modes[r]);
  std::size_t slot = 3 + modes.size();
  for (auto& t : translations) basis.gamma[slot++] = t;
  return basis;
}

// Mode amplitudes Q_a (a = 4..3N) of a gauge-satisfying configuration:
// Q_a = sum m Gamma_a . R / Rsq_a.  Throws when the configuration violates
// the gauge conditions beyond an absolute mass-weighted tolerance.
template <class S>
std::vector<S> project_coords(const GaugeSpecT<S>& spec, const ExtendedBasisT<S>& basis,
                              const ConfigurationT<S>& cfg, double gauge_tol = 1e-8) {
  const std::array<S, 3> s = eval_gauge(spec, cfg);
  for (int a = 0; a < 3; ++a) {
    const double viol = std::abs(detail::as_double(s[a])) /
                        std::sqrt(detail::as_double(spec.norm_sq[a]));
    if (viol > gauge_tol)
      throw std::invalid_argument("project_coords: configuration violates the gauge");
  }
  const Eigen::Index n = spec.n_particles;
  const Eigen::Index dim = 3 * n;
  std::vector<S> q;
  const S inv_high = detail::recip(basis.norm_sq_high);
  for (Eigen::Index a = 3; a < dim; ++a) {
    S acc{};
    for (Eigen::Index al = 0; al < n; ++al)
      for (int i = 0; i < 3; ++i)
        acc += spec.masses[al] * basis.gamma[static_cast<std::size_t>(a)][al * 3 + i] *
               cfg.positions[al * 3 + i];
    q.push_back(acc * inv_high);
  }
  return q;
}

template <class S>
ConfigurationT<S> embed_coords(const GaugeSpecT<S>& /*spec*/, const ExtendedBasisT<S>& basis,
                               const std::vector<S>& q) {
  const Eigen::Index n = basis.n_particles;
  const Eigen::Index dim = 3 * n;
  if (static_cast<Eigen::Index>(q.size()) != dim - 3)
    throw std::invalid_argument("embed_coords: need one amplitude per non-gauge row");
  ConfigurationT<S> cfg;
  cfg.n_particles = n;
  cfg.frame_tag = FrameTag::body;
  cfg.positions.assign(static_cast<std::size_t>(dim), S{});
  for (Eigen::Index a = 3; a < dim; ++a)
    for (Eigen::Index k = 0; k < dim; ++k)
      cfg.positions[static_cast<std::size_t>(k)] +=
          q[static_cast<std::size_t>(a - 3)] * basis.gamma[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
  return cfg;
}

// --------------------------------------------------------------------------
// the rotational (Eckart) gauge about a rigid equilibrium
// --------------------------------------------------------------------------
// Gauge rows Gamma_{a,alpha i} = eps_{a j i} Z_{alpha j}; S_a(R) then measures
// sum m (Z_alpha x R_alpha)_a.  Requires the equilibrium to be centered and
// aligned with its principal axes; the row norms are the inertia moments.
template <class S>
GaugeSpecT<S> eckart_gauge(const std::vector<S>& equilibrium, const std::vector<S>& masses,
                           double tol = 1e-8) {
  const Eigen::Index n = static_cast<Eigen::Index>(masses.size());
  if (n < 2 || static_cast<Eigen::Index>(equilibrium.size()) != 3 * n)
    throw std::invalid_argument("eckart_gauge: bad equilibrium/mass sizes");

  double mass_scale = 0.0, len_scale = 0.0;
  for (Eigen::Index al = 0; al < n; ++al) {
    mass_scale += detail::as_double(masses[al]);
    for (int i = 0; i < 3; ++i)
      len_scale = std::max(len_scale, std::abs(detail::as_double(equilibrium[al * 3 + i])));
  }
  if (len_scale == 0.0)
    throw std::invalid_argument("eckart_gauge: unsupported configuration (all at origin)");

  for (int i = 0; i < 3; ++i) {
    S c{};
    for (Eigen::Index al = 0; al < n; ++al) c += masses[al] * equilibrium[al * 3 + i];
    if (std::abs(detail::as_double(c)) > tol * mass_scale * len_scale)
      throw std::invalid_argument("eckart_gauge: equilibrium is not mass-centered");
  }
  std::array<std::array<S, 3>, 3> inertia_prod{};  // sum m Z_i Z_j
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      S acc{};
      for (Eigen::Index al = 0; al < n; ++al)
        acc += masses[al] * equilibrium[al * 3 + i] * equilibrium[al * 3 + j];
      inertia_prod[i][j] = acc;
    }
  const double iscale = mass_scale * len_scale * len_scale;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j && std::abs(detail::as_double(inertia_prod[i][j])) > tol * iscale)
        throw std::invalid_argument("eckart_gauge: equilibrium not on principal axes");

  GaugeSpecT<S> spec;
  spec.n_particles = n;
  spec.masses = masses;
  spec.translation_invariant = true;
  const S trace = inertia_prod[0][0] + inertia_prod[1][1] + inertia_prod[2][2];
  for (int a = 0; a < 3; ++a) {
    spec.gamma[a].assign(static_cast<std::size_t>(3 * n), S{});
    for (Eigen::Index al = 0; al < n; ++al)
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
          if (detail::eps3(a, j, i) != 0)
            spec.gamma[a][al * 3 + i] +=
                equilibrium[al * 3 + j] * S(detail::eps3(a, j, i));
    spec.norm_sq[a] = trace - inertia_prod[a][a];  // principal inertia moment
    if (detail::as_double(spec.norm_sq[a]) <= tol * iscale)
      throw std::invalid_argument(
          "eckart_gauge: unsupported configuration (degenerate inertia moment)");
  }
  validate_spec(spec);
  return spec;
}

// --------------------------------------------------------------------------
// quantum potentials (curvature corrections of the rotating frame)
// --------------------------------------------------------------------------
// Closed-form pieces of the frame-induced potential; both scale as 1/c^2
// when positions are scaled by c.  Throws std::domain_error on the horizon
// (det qmat = 0), where the frame is undefined.
QuantumPotentials eval_quantum_potentials(const GaugeSpec& spec, const Configuration& cfg);

// Convenience: spec/configuration scalar conversion (exact -> double).
inline GaugeSpec to_double_spec(const GaugeSpecX& s) {
  GaugeSpec d;
  d.n_particles = s.n_particles;
  d.translation_invariant = s.translation_invariant;
  d.masses.reserve(s.masses.size());
  for (const auto& m : s.masses) d.masses.push_back(m.to_double());
  for (int a = 0; a < 3; ++a) {
    d.norm_sq[a] = s.norm_sq[a].to_double();
    d.gamma[a].reserve(s.gamma[a].size());
    for (const auto& g : s.gamma[a]) d.gamma[a].push_back(g.to_double());
  }
  return d;
}

inline ExtendedBasis to_double_basis(const ExtendedBasisX& b) {
  ExtendedBasis d;
  d.n_particles = b.n_particles;
  d.translation_invariant = b.translation_invariant;
  d.norm_sq_high = b.norm_sq_high.to_double();
  for (int a = 0; a < 3; ++a) d.norm_sq_low[a] = b.norm_sq_low[a].to_double();
  d.gamma.resize(b.gamma.size());
  for (std::size_t r = 0; r < b.gamma.size(); ++r) {
    d.gamma[r].reserve(b.gamma[r].size());
    for (const auto& g : b.gamma[r]) d.gamma[r].push_back(g.to_double());
  }
  return d;
}

}  // namespace rotframe
