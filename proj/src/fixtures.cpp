#include "rotframe/fixtures.hpp"

namespace rotframe {

namespace {

// c * sqrt(d)
RadicalSum rt(long long d, const Rational& c) { return RadicalSum::root(d) * c; }

std::vector<RadicalSum> row_from(std::initializer_list<RadicalSum> v) { return {v}; }

}  // namespace

ExactSystem triangle_system() {
  const Rational h(1, 6);  // 1/(2 sqrt 3) = sqrt(3)/6
  ExactSystem sys;

  std::vector<RadicalSum> z = {
      RadicalSum(Rational(-1, 2)), rt(3, -h), RadicalSum(),
      RadicalSum(Rational(1, 2)),  rt(3, -h), RadicalSum(),
      RadicalSum(),                rt(3, Rational(1, 3)), RadicalSum(),
  };
  std::vector<RadicalSum> masses(3, RadicalSum(1));
  sys.spec = eckart_gauge(z, masses);

  // Mass-orthonormal modes diagonalizing the harmonic pair Hessian: the
  // degenerate pair first, the breathing mode last.
  std::vector<std::vector<RadicalSum>> seeds;
  seeds.push_back(row_from({RadicalSum(Rational(1, 2)), rt(3, -h), RadicalSum(),
                            RadicalSum(Rational(-1, 2)), rt(3, -h), RadicalSum(),
                            RadicalSum(), rt(3, Rational(1, 3)), RadicalSum()}));
  seeds.push_back(row_from({rt(3, -h), RadicalSum(Rational(-1, 2)), RadicalSum(),
                            rt(3, -h), RadicalSum(Rational(1, 2)), RadicalSum(),
                            rt(3, Rational(1, 3)), RadicalSum(), RadicalSum()}));
  seeds.push_back(z);  // radial displacement = breathing direction (norm 1 here)
  sys.basis = extend_basis(sys.spec, seeds, RadicalSum(1));

  sys.equilibrium.n_particles = 3;
  sys.equilibrium.frame_tag = FrameTag::body;
  sys.equilibrium.positions = z;
  sys.sigma_sq = {Rational(3, 2), Rational(3, 2), Rational(3)};
  return sys;
}

ExactSystem tetrahedron_system() {
  ExactSystem sys;
  // Vertices (a/sqrt 8)(±1, ±1, ±1) with an even number of minus signs; unit
  // edge length.
  const RadicalSum c = rt(2, Rational(1, 4));  // 1/sqrt(8)
  const int signs[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  std::vector<RadicalSum> z;
  for (const auto& s : signs)
    for (int i = 0; i < 3; ++i) z.push_back(s[i] > 0 ? c : -c);
  std::vector<RadicalSum> masses(4, RadicalSum(1));
  sys.spec = eckart_gauge(z, masses);

  // Integer seed vectors for the normal modes, ordered doublet, triplet,
  // breathing; extend_basis rescales them to mass-weighted norm 1.
  const int seed_data[6][12] = {
      {0, 1, -1, 0, -1, 1, 0, 1, 1, 0, -1, -1},      // doublet 1
      {2, -1, -1, 2, 1, 1, -2, -1, 1, -2, 1, -1},    // doublet 2
      {0, 1, 1, 0, -1, -1, 0, -1, 1, 0, 1, -1},      // triplet x
      {1, 0, 1, -1, 0, 1, -1, 0, -1, 1, 0, -1},      // triplet y
      {1, 1, 0, -1, 1, 0, 1, -1, 0, -1, -1, 0},      // triplet z
      {1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1},    // breathing
  };
  std::vector<std::vector<RadicalSum>> seeds;
  for (const auto& row : seed_data) {
    std::vector<RadicalSum> s;
    for (int v : row) s.push_back(RadicalSum(v));
    seeds.push_back(std::move(s));
  }
  sys.basis = extend_basis(sys.spec, seeds, RadicalSum(1));

  sys.equilibrium.n_particles = 4;
  sys.equilibrium.frame_tag = FrameTag::body;
  sys.equilibrium.positions = z;
  sys.sigma_sq = {Rational(1), Rational(1), Rational(2), Rational(2), Rational(2), Rational(4)};
  return sys;
}

GaugeSpecX axis_gauge_spec() {
  GaugeSpecX spec;
  spec.n_particles = 3;
  spec.masses.assign(3, RadicalSum(1));
  spec.translation_invariant = false;
  for (int a = 0; a < 3; ++a) spec.gamma[a].assign(9, RadicalSum());
  spec.gamma[0][1] = RadicalSum(1);  // R_{1y}
  spec.gamma[1][2] = RadicalSum(1);  // R_{1z}
  spec.gamma[2][4] = RadicalSum(1);  // R_{2y}
  spec.norm_sq = {RadicalSum(1), RadicalSum(1), RadicalSum(1)};
  validate_spec(spec);
  return spec;
}

std::vector<RadicalSum> pairwise_hessian(const std::vector<RadicalSum>& masses,
                                         const std::vector<RadicalSum>& equilibrium) {
  const std::size_t n = masses.size();
  const std::size_t dim = 3 * n;
  if (equilibrium.size() != dim)
    throw std::invalid_argument("pairwise_hessian: size mismatch");
  std::vector<RadicalSum> h(dim * dim, RadicalSum());
  auto at = [&](std::size_t r, std::size_t c) -> RadicalSum& { return h[r * dim + c]; };

  for (std::size_t al = 0; al < n; ++al) {
    for (std::size_t be = al + 1; be < n; ++be) {
      std::array<RadicalSum, 3> d;
      RadicalSum dsq;
      for (int i = 0; i < 3; ++i) {
        d[i] = equilibrium[al * 3 + i] - equilibrium[be * 3 + i];
        dsq += d[i] * d[i];
      }
      const RadicalSum inv_dsq = dsq.inverse();
      // At natural length only the longitudinal block survives:
      // k n n^T with n the unit pair direction (k = 1 here).
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const RadicalSum blk = d[i] * d[j] * inv_dsq;
          at(al * 3 + i, al * 3 + j) += blk;
          at(be * 3 + i, be * 3 + j) += blk;
          at(al * 3 + i, be * 3 + j) -= blk;
          at(be * 3 + i, al * 3 + j) -= blk;
        }
    }
  }
  // Mass weighting: Hw = M^{-1/2} H M^{-1/2}; with the unit masses used by
  // the fixtures this is the identity, but keep it general.
  std::vector<RadicalSum> inv_sqrt_m;
  for (const auto& m : masses) inv_sqrt_m.push_back(detail::sqrt_scalar(m.inverse()));
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c)
      at(r, c) = inv_sqrt_m[r / 3] * at(r, c) * inv_sqrt_m[c / 3];
  return h;
}

GaugeSpecX random_gauge_spec(Rng& rng, int n_particles, bool translation_invariant) {
  if (n_particles < 2) throw std::invalid_argument("random_gauge_spec: need >= 2 particles");
  const std::size_t dim = static_cast<std::size_t>(3 * n_particles);

  for (int attempt = 0; attempt < 64; ++attempt) {
    GaugeSpecX spec;
    spec.n_particles = n_particles;
    spec.translation_invariant = translation_invariant;
    spec.masses.clear();
    for (int al = 0; al < n_particles; ++al)
      spec.masses.push_back(RadicalSum(Rational(rng.uniform_int(1, 9), rng.uniform_int(1, 4))));

    RadicalSum total_mass;
    for (const auto& m : spec.masses) total_mass += m;
    const RadicalSum inv_total = total_mass.inverse();

    auto mdot = [&](const std::vector<RadicalSum>& x, const std::vector<RadicalSum>& y) {
      RadicalSum acc;
      for (std::size_t k = 0; k < dim; ++k) acc += spec.masses[k / 3] * x[k] * y[k];
      return acc;
    };

    bool ok = true;
    for (int a = 0; a < 3 && ok; ++a) {
      std::vector<RadicalSum> row(dim);
      for (std::size_t k = 0; k < dim; ++k)
        row[k] = RadicalSum(Rational(rng.uniform_int(-4, 4), rng.uniform_int(1, 3)));
      if (translation_invariant) {
        // Remove the uniform-translation components (exact projection).
        for (int i = 0; i < 3; ++i) {
          RadicalSum s;
          for (int al = 0; al < n_particles; ++al) s += spec.masses[al] * row[al * 3 + i];
          const RadicalSum shift = s * inv_total;
          for (int al = 0; al < n_particles; ++al) row[al * 3 + i] -= shift;
        }
      }
      for (int b = 0; b < a; ++b) {
        const RadicalSum coef = mdot(row, spec.gamma[b]) * spec.norm_sq[b].inverse();
        for (std::size_t k = 0; k < dim; ++k) row[k] -= coef * spec.gamma[b][k];
      }
      const RadicalSum nsq = mdot(row, row);
      if (nsq.is_zero()) {
        ok = false;
        break;
      }
      spec.gamma[a] = std::move(row);
      spec.norm_sq[a] = nsq;
    }
    if (!ok) continue;
    validate_spec(spec);
    return spec;
  }
  throw std::runtime_error("random_gauge_spec: repeated rank deficiency");
}

}  // namespace rotframe
