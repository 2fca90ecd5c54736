#include "rotframe/weylalg.hpp"

namespace rotframe {

namespace {

const GaussianRS kOne{RadicalSum(1)};
const GaussianRS kMinusI{RadicalSum(0), RadicalSum(-1)};  // 1/i

}  // namespace

std::vector<DiffOpX> momentum_operators(const GaugeSpecX& spec) {
  validate_spec(spec);
  const auto coords = lab_coords(spec.n_particles);
  const Eigen::Index n = spec.n_particles;

  // Total mass (translation-invariant case).
  RadicalSum total_mass;
  for (const auto& m : spec.masses) total_mass += m;
  const RadicalSum inv_total = spec.translation_invariant ? total_mass.inverse() : RadicalSum();

  std::array<RadicalSum, 3> inv_norm;
  for (int a = 0; a < 3; ++a) inv_norm[a] = spec.norm_sq[a].inverse();

  std::vector<DiffOpX> ops;
  ops.reserve(static_cast<std::size_t>(3 * n));
  for (Eigen::Index al = 0; al < n; ++al) {
    for (int j = 0; j < 3; ++j) {
      DiffOpX p(coords);
      for (Eigen::Index be = 0; be < n; ++be) {
        for (int k = 0; k < 3; ++k) {
          RadicalSum c;
          if (al == be && j == k) c += RadicalSum(1);
          for (int a = 0; a < 3; ++a)
            c -= spec.masses[al] * spec.gamma[a][al * 3 + j] *
                 spec.gamma[a][be * 3 + k] * inv_norm[a];
          if (spec.translation_invariant && j == k) c -= spec.masses[al] * inv_total;
          if (c.is_zero()) continue;
          TermKey key{std::vector<std::uint8_t>(coords.size(), 0),
                      std::vector<std::uint8_t>(coords.size(), 0)};
          key.deriv[static_cast<std::size_t>(be * 3 + k)] = 1;
          p.add_term(std::move(key), kMinusI * GaussianRS(c));
        }
      }
      ops.push_back(std::move(p));
    }
  }
  return ops;
}

std::vector<DiffOpX> momentum_operators(const GaugeSpecX& spec, const ExtendedBasisX& basis) {
  if (basis.n_particles != spec.n_particles)
    throw std::invalid_argument("momentum_operators: basis/spec particle count mismatch");
  return momentum_operators(spec);
}

std::array<DiffOpX, 3> gauge_function_operators(const GaugeSpecX& spec) {
  validate_spec(spec);
  const auto coords = lab_coords(spec.n_particles);
  std::array<DiffOpX, 3> ops{DiffOpX(coords), DiffOpX(coords), DiffOpX(coords)};
  for (int a = 0; a < 3; ++a)
    for (Eigen::Index al = 0; al < spec.n_particles; ++al)
      for (int j = 0; j < 3; ++j) {
        RadicalSum c = spec.masses[al] * spec.gamma[a][al * 3 + j];
        if (c.is_zero()) continue;
        TermKey key{std::vector<std::uint8_t>(coords.size(), 0),
                    std::vector<std::uint8_t>(coords.size(), 0)};
        key.mono[static_cast<std::size_t>(al * 3 + j)] = 1;
        ops[a].add_term(std::move(key), GaussianRS(c));
      }
  return ops;
}

std::array<DiffOpX, 3> residual_angular_momentum(const GaugeSpecX& spec) {
  const auto momenta = momentum_operators(spec);
  const auto coords = lab_coords(spec.n_particles);
  std::array<DiffOpX, 3> lam{DiffOpX(coords), DiffOpX(coords), DiffOpX(coords)};
  for (int n = 0; n < 3; ++n) {
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) {
        const int e = detail::eps3(n, p, q);
        if (e == 0) continue;
        for (Eigen::Index ga = 0; ga < spec.n_particles; ++ga) {
          const auto pos = DiffOpX::coordinate(coords, static_cast<std::size_t>(ga * 3 + p));
          DiffOpX term = pos * momenta[static_cast<std::size_t>(ga * 3 + q)];
          if (e < 0) term = -term;
          lam[n] += term;
        }
      }
  }
  return lam;
}

std::array<DiffOpX, 3> residual_angular_momentum(const GaugeSpecX& spec,
                                                 const ExtendedBasisX& basis) {
  validate_spec(spec);
  if (basis.n_particles != spec.n_particles)
    throw std::invalid_argument("residual_angular_momentum: basis/spec particle count mismatch");
  const Eigen::Index n_modes = mode_count(spec);
  const auto coords = mode_coords(spec.n_particles, n_modes);
  const RadicalSum inv_norm = basis.norm_sq_high.inverse();

  std::array<DiffOpX, 3> lam{DiffOpX(coords), DiffOpX(coords), DiffOpX(coords)};
  for (int n = 0; n < 3; ++n) {
    for (Eigen::Index c = 0; c < n_modes; ++c) {
      const auto& gc = basis.gamma[static_cast<std::size_t>(3 + c)];
      for (Eigen::Index d = 0; d < n_modes; ++d) {
        const auto& gd = basis.gamma[static_cast<std::size_t>(3 + d)];
        // W^n_{cd} = sum_beta m_beta Gamma_{c beta j} eps_{jnk} Gamma_{d beta k}
        RadicalSum w;
        for (Eigen::Index be = 0; be < spec.n_particles; ++be)
          for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
              const int e = detail::eps3(j, n, k);
              if (e == 0) continue;
              RadicalSum t = spec.masses[be] * gc[be * 3 + j] * gd[be * 3 + k];
              if (e < 0)
                w -= t;
              else
                w += t;
            }
        if (w.is_zero()) continue;
        TermKey key{std::vector<std::uint8_t>(coords.size(), 0),
                    std::vector<std::uint8_t>(coords.size(), 0)};
        key.mono[static_cast<std::size_t>(d)] = 1;
        key.deriv[static_cast<std::size_t>(c)] = 1;
        lam[n].add_term(std::move(key), kMinusI * GaussianRS(w * inv_norm));
      }
    }
  }
  return lam;
}

DiffOpX residual_momentum_anomaly(const GaugeSpecX& spec, int i, int j) {
  validate_spec(spec);
  if (i < 0 || i > 2 || j < 0 || j > 2)
    throw std::invalid_argument("residual_momentum_anomaly: axis out of range");
  const auto coords = lab_coords(spec.n_particles);
  const auto mom = momentum_operators(spec);
  const Eigen::Index n = spec.n_particles;

  // Multiplication operators for the rotational response of the gauge rows,
  // qmat_{a j}(R) = sum_{beta l k} m_beta Gamma_{a,beta l} eps_{l j k} R_{beta k}.
  std::array<std::array<DiffOpX, 3>, 3> qop;
  for (int a = 0; a < 3; ++a)
    for (int jj = 0; jj < 3; ++jj) {
      DiffOpX acc(coords);
      for (Eigen::Index be = 0; be < n; ++be)
        for (int l = 0; l < 3; ++l)
          for (int k = 0; k < 3; ++k) {
            const int e = detail::eps3(l, jj, k);
            if (e == 0) continue;
            acc += DiffOpX::coordinate(coords, static_cast<std::size_t>(be * 3 + k))
                       .scaled(GaussianRS(spec.masses[be] * spec.gamma[a][be * 3 + l] *
                                          Rational(e)));
          }
      qop[a][jj] = acc;
    }

  // -i sum_{al,a} (1/Rsq_a) Gamma_{a,al m} (eps_{imn} qop_{aj} - eps_{jmn} qop_{ai}) P_{al n}
  DiffOpX out(coords);
  for (Eigen::Index al = 0; al < n; ++al)
    for (int a = 0; a < 3; ++a) {
      const RadicalSum inv_norm = spec.norm_sq[a].inverse();
      for (int m = 0; m < 3; ++m) {
        const RadicalSum g = spec.gamma[a][al * 3 + m] * inv_norm;
        if (g.is_zero()) continue;
        for (int nn = 0; nn < 3; ++nn) {
          DiffOpX bracket(coords);
          const int ei = detail::eps3(i, m, nn);
          const int ej = detail::eps3(j, m, nn);
          if (ei != 0) bracket += qop[a][j].scaled(GaussianRS(RadicalSum(ei)));
          if (ej != 0) bracket -= qop[a][i].scaled(GaussianRS(RadicalSum(ej)));
          if (bracket.is_zero()) continue;
          out += (bracket * mom[static_cast<std::size_t>(al * 3 + nn)])
                     .scaled(kMinusI * GaussianRS(g));
        }
      }
    }
  return out;
}

AngularSector angular_sector(int l) {
  if (l < 0) throw std::invalid_argument("angular_sector: l must be non-negative");
  AngularSector sec;
  sec.l = l;
  sec.dim = 2 * l + 1;
  const std::size_t sz = static_cast<std::size_t>(sec.dim) * static_cast<std::size_t>(sec.dim);
  sec.sx.assign(sz, GaussianRS());
  sec.sy.assign(sz, GaussianRS());
  sec.sz.assign(sz, GaussianRS());
  auto idx = [&](int r, int c) { return static_cast<std::size_t>(r * sec.dim + c); };
  for (int r = 0; r < sec.dim; ++r) {
    const int m = l - r;  // descending magnetic quantum number
    sec.sz[idx(r, r)] = GaussianRS(RadicalSum(m));
  }
  for (int r = 1; r < sec.dim; ++r) {
    // raising element <m+1| s+ |m> = sqrt(r (2l - r + 1)) with m = l - r
    const RadicalSum half_amp =
        RadicalSum::root(static_cast<long long>(r) * (2 * l - r + 1)) * Rational(1, 2);
    sec.sx[idx(r - 1, r)] = GaussianRS(half_amp);
    sec.sx[idx(r, r - 1)] = GaussianRS(half_amp);
    sec.sy[idx(r - 1, r)] = GaussianRS(RadicalSum(), -half_amp);
    sec.sy[idx(r, r - 1)] = GaussianRS(RadicalSum(), half_amp);
  }
  return sec;
}

}  // namespace rotframe
