#include "doctest.h"

#include "rotframe/fixtures.hpp"
#include "rotframe/weylalg.hpp"

using namespace rotframe;

namespace {

const GaussianRS kI = GaussianRS::i();
const GaussianRS kMinusI(RadicalSum(0), RadicalSum(-1));

DiffOpX mono(const std::vector<std::string>& coords, std::size_t j) {
  return DiffOpX::coordinate(coords, j);
}
DiffOpX del(const std::vector<std::string>& coords, std::size_t j) {
  return DiffOpX::derivative(coords, j);
}

// random operator with small integer data
DiffOpX random_op(Rng& rng, const std::vector<std::string>& coords, int n_terms) {
  DiffOpX op(coords);
  for (int t = 0; t < n_terms; ++t) {
    TermKey key{std::vector<std::uint8_t>(coords.size(), 0),
                std::vector<std::uint8_t>(coords.size(), 0)};
    for (auto& e : key.mono) e = static_cast<std::uint8_t>(rng.uniform_int(0, 2));
    for (auto& e : key.deriv) e = static_cast<std::uint8_t>(rng.uniform_int(0, 2));
    op.add_term(std::move(key),
                GaussianRS(RadicalSum(rng.uniform_int(-3, 3)),
                           RadicalSum(rng.uniform_int(-3, 3))));
  }
  return op;
}

// multiply two row-major square GaussianRS matrices
std::vector<GaussianRS> matmul(const std::vector<GaussianRS>& a,
                               const std::vector<GaussianRS>& b, int n) {
  std::vector<GaussianRS> c(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const GaussianRS& aik = a[i * n + k];
      if (aik.is_zero()) continue;
      for (int j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  return c;
}

}  // namespace

TEST_CASE("canonical reordering: [d_k, x_l] = delta_kl and the power rule") {
  const std::vector<std::string> c{"x", "y"};
  CHECK(commutator(del(c, 0), mono(c, 0)) == // force newline
        DiffOpX::constant(c, GaussianRS(RadicalSum(1))));
  CHECK(commutator(del(c, 0), mono(c, 1)).is_zero());

  // d^2 x^2 = x^2 d^2 + 4 x d + 2
  const DiffOpX lhs = del(c, 0) * del(c, 0) * mono(c, 0) * mono(c, 0);
  DiffOpX rhs = mono(c, 0) * mono(c, 0) * del(c, 0) * del(c, 0);
  rhs += (mono(c, 0) * del(c, 0)).scaled(GaussianRS(RadicalSum(4)));
  rhs += DiffOpX::constant(c, GaussianRS(RadicalSum(2)));
  CHECK(lhs == rhs);

  CHECK(commutator(lhs, lhs).is_zero());
  CHECK_THROWS_AS(commutator(DiffOpX({"x"}), DiffOpX({"y"})), std::invalid_argument);
}

TEST_CASE("operator product is associative on random triples") {
  Rng rng(99);
  const std::vector<std::string> coords{"q1", "q2", "q3"};
  for (int trial = 0; trial < 500; ++trial) {
    const DiffOpX a = random_op(rng, coords, 2);
    const DiffOpX b = random_op(rng, coords, 2);
    const DiffOpX c = random_op(rng, coords, 2);
    CHECK(((a * b) * c) == (a * (b * c)));
  }
}

TEST_CASE("jacobi identity holds exactly") {
  Rng rng(3);
  const std::vector<std::string> coords{"q1", "q2"};
  for (int trial = 0; trial < 100; ++trial) {
    const DiffOpX a = random_op(rng, coords, 2);
    const DiffOpX b = random_op(rng, coords, 2);
    const DiffOpX c = random_op(rng, coords, 2);
    DiffOpX sum = commutator(a, commutator(b, c));
    sum += commutator(b, commutator(c, a));
    sum += commutator(c, commutator(a, b));
    CHECK(sum.is_zero());
  }
}

TEST_CASE("weyl symmetrization") {
  const std::vector<std::string> c{"x", "y"};
  // constant coefficient: symmetrization is a no-op
  const DiffOpX k2 = DiffOpX::constant(c, GaussianRS(RadicalSum(2)));
  CHECK(weyl_symmetrize(k2, 0, 1) == k2 * del(c, 0) * del(c, 1));

  // coefficient x with a = b = x: naive and Weyl orders differ by a
  // first-order operator
  const DiffOpX naive = mono(c, 0) * del(c, 0) * del(c, 0);
  const DiffOpX weyl = weyl_symmetrize(mono(c, 0), 0, 0);
  const DiffOpX diff = weyl - naive;
  for (const auto& [key, coeff] : diff.terms()) {
    int dtot = 0;
    for (auto e : key.deriv) dtot += e;
    CHECK(dtot <= 1);
  }
  CHECK(!diff.is_zero());

  // derivative coefficients are rejected
  CHECK_THROWS_AS(weyl_symmetrize(del(c, 0), 0, 1), std::invalid_argument);
}

TEST_CASE("projected momenta: canonical pairs, gauge annihilation, total momentum") {
  Rng rng(424242);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + trial % 4;
    const bool ti = trial % 2 == 0;
    const GaugeSpecX spec = random_gauge_spec(rng, n, ti);
    const auto coords = lab_coords(n);
    const auto mom = momentum_operators(spec);

    RadicalSum total_mass;
    for (const auto& m : spec.masses) total_mass += m;

    // [R_{alpha i}, P_{beta j}] matches the projected-commutator formula
    for (int al = 0; al < n; ++al)
      for (int i = 0; i < 3; ++i)
        for (int be = 0; be < n; ++be)
          for (int j = 0; j < 3; ++j) {
            const DiffOpX comm =
                commutator(mono(coords, static_cast<std::size_t>(al * 3 + i)),
                           mom[static_cast<std::size_t>(be * 3 + j)]);
            RadicalSum expect;
            if (al == be && i == j) expect += RadicalSum(1);
            for (int a = 0; a < 3; ++a)
              expect -= spec.masses[be] * spec.gamma[a][al * 3 + i] *
                        spec.gamma[a][be * 3 + j] * spec.norm_sq[a].inverse();
            if (ti && i == j) expect -= spec.masses[be] * total_mass.inverse();
            CHECK(comm == DiffOpX::constant(coords, kI * GaussianRS(expect)));
          }

    // gauge functions of the velocities vanish: sum_al Gamma_{a,al j} P_{al j} = 0
    for (int a = 0; a < 3; ++a) {
      DiffOpX acc(coords);
      for (int al = 0; al < n; ++al)
        for (int j = 0; j < 3; ++j)
          acc += mom[static_cast<std::size_t>(al * 3 + j)].scaled(
              GaussianRS(spec.gamma[a][al * 3 + j]));
      CHECK(acc.is_zero());
    }

    // translation-invariant specs: total momentum vanishes identically
    if (ti) {
      for (int j = 0; j < 3; ++j) {
        DiffOpX acc(coords);
        for (int al = 0; al < n; ++al) acc += mom[static_cast<std::size_t>(al * 3 + j)];
        CHECK(acc.is_zero());
      }
    }
  }
}

TEST_CASE("axis gauge: fixed coordinates have frozen momenta") {
  const GaugeSpecX spec = axis_gauge_spec();
  const auto coords = lab_coords(3);
  const auto mom = momentum_operators(spec);
  // R_{1y} is gauge-fixed: its conjugate pair collapses
  CHECK(commutator(mono(coords, 1), mom[1]).is_zero());
  // R_{1x} stays canonical
  CHECK(commutator(mono(coords, 0), mom[0]) ==
        DiffOpX::constant(coords, kI));
}

TEST_CASE("residual angular momentum: ordering freedom and gauge compatibility") {
  Rng rng(11);
  const GaugeSpecX spec = random_gauge_spec(rng, 3, false);
  const auto coords = lab_coords(3);
  const auto mom = momentum_operators(spec);
  const auto lam = residual_angular_momentum(spec);
  const auto gauges = gauge_function_operators(spec);

  // eps R P and eps P R agree (the trace of eps vanishes)
  for (int nn = 0; nn < 3; ++nn) {
    DiffOpX swapped(coords);
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) {
        const int e = detail::eps3(nn, p, q);
        if (e == 0) continue;
        for (int ga = 0; ga < 3; ++ga) {
          DiffOpX term = mom[static_cast<std::size_t>(ga * 3 + q)] *
                         mono(coords, static_cast<std::size_t>(ga * 3 + p));
          if (e < 0) term = -term;
          swapped += term;
        }
      }
    CHECK(lam[nn] == swapped);
  }

  // [Lambda_n, S_a] = 0 exactly
  for (int nn = 0; nn < 3; ++nn)
    for (int a = 0; a < 3; ++a) CHECK(commutator(lam[nn], gauges[a]).is_zero());
}

TEST_CASE("residual angular momentum: commutator anomaly has the closed form") {
  Rng rng(5150);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 2 + trial;
    const GaugeSpecX spec = random_gauge_spec(rng, n, trial % 2 == 1);
    const auto coords = lab_coords(n);
    const auto mom = momentum_operators(spec);
    const auto lam = residual_angular_momentum(spec);

    // multiplication operators for the rotational response qmat_{aj}(R)
    std::array<std::array<DiffOpX, 3>, 3> qop;
    for (int a = 0; a < 3; ++a)
      for (int j = 0; j < 3; ++j) {
        DiffOpX acc(coords);
        for (int be = 0; be < n; ++be)
          for (int l = 0; l < 3; ++l)
            for (int k = 0; k < 3; ++k) {
              const int e = detail::eps3(l, j, k);
              if (e == 0) continue;
              acc += mono(coords, static_cast<std::size_t>(be * 3 + k))
                         .scaled(GaussianRS(spec.masses[be] * spec.gamma[a][be * 3 + l] *
                                            Rational(e)));
            }
        qop[a][j] = acc;
      }

    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        DiffOpX lhs = commutator(lam[i], lam[j]);
        for (int k = 0; k < 3; ++k) {
          const int e = detail::eps3(i, j, k);
          if (e != 0) lhs -= lam[k].scaled(kI * GaussianRS(RadicalSum(e)));
        }
        // remainder: -i sum_{al,a} (1/Rsq_a) Gamma_{a,al m}
        //            (eps_{imn} qop_{aj} - eps_{jmn} qop_{ai}) P_{al n}
        DiffOpX expect(coords);
        for (int al = 0; al < n; ++al)
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
                expect += (bracket * mom[static_cast<std::size_t>(al * 3 + nn)])
                              .scaled(kMinusI * GaussianRS(g));
              }
            }
          }
        CHECK(lhs == expect);
      }
  }
}

TEST_CASE("triangle modes: only the axial component of the residual momentum survives") {
  const ExactSystem sys = triangle_system();
  const auto lam = residual_angular_momentum(sys.spec, sys.basis);
  CHECK(lam[0].is_zero());
  CHECK(lam[1].is_zero());

  // Lambda_3 = (1/i)(Q5 d4 - Q4 d5)
  const auto coords = mode_coords(3, 3);
  DiffOpX expect(coords);
  {
    TermKey key{{0, 1, 0}, {1, 0, 0}};
    expect.add_term(std::move(key), kMinusI);
  }
  {
    TermKey key{{1, 0, 0}, {0, 1, 0}};
    expect.add_term(std::move(key), -kMinusI);
  }
  CHECK(lam[2] == expect);
}

TEST_CASE("tetrahedron modes: doubled residual momenta close like spin") {
  const ExactSystem sys = tetrahedron_system();
  const auto lam = residual_angular_momentum(sys.spec, sys.basis);
  for (int i = 0; i < 3; ++i) CHECK(!lam[i].is_zero());
  const GaussianRS two(RadicalSum(2));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      DiffOpX lhs = commutator(lam[i].scaled(two), lam[j].scaled(two));
      DiffOpX rhs(lam[0].coords());
      for (int k = 0; k < 3; ++k) {
        const int e = detail::eps3(i, j, k);
        if (e != 0) rhs += lam[k].scaled(kI * two * GaussianRS(RadicalSum(e)));
      }
      CHECK(lhs == rhs);
    }
}

TEST_CASE("angular sectors: exact spin algebra for l <= 4") {
  for (int l = 0; l <= 4; ++l) {
    const AngularSector s = angular_sector(l);
    const int d = s.dim;
    REQUIRE(d == 2 * l + 1);
    const std::array<const std::vector<GaussianRS>*, 3> mats{&s.sx, &s.sy, &s.sz};
    // [s_i, s_j] = i eps_{ijk} s_k
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        std::vector<GaussianRS> comm = matmul(*mats[i], *mats[j], d);
        const std::vector<GaussianRS> ji = matmul(*mats[j], *mats[i], d);
        for (int t = 0; t < d * d; ++t) comm[t] -= ji[t];
        std::vector<GaussianRS> expect(static_cast<std::size_t>(d) * d);
        for (int k = 0; k < 3; ++k) {
          const int e = detail::eps3(i, j, k);
          if (e == 0) continue;
          for (int t = 0; t < d * d; ++t)
            expect[t] += kI * (*mats[k])[t] * GaussianRS(RadicalSum(e));
        }
        CHECK(comm == expect);
      }
    // Casimir s^2 = l(l+1)
    std::vector<GaussianRS> casimir(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < 3; ++i) {
      const auto sq = matmul(*mats[i], *mats[i], d);
      for (int t = 0; t < d * d; ++t) casimir[t] += sq[t];
    }
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        CHECK(casimir[r * d + c] ==
              (r == c ? GaussianRS(RadicalSum(l * (l + 1))) : GaussianRS()));
  }
}
