#include "doctest.h"

#include "rotframe/fixtures.hpp"

using namespace rotframe;

namespace {

// sigma^2_{cd} = Gamma_c H Gamma_d with the mass-weighted Hessian; for the
// unit-mass fixtures the mass weighting is trivial.
RadicalSum mode_hessian_entry(const ExactSystem& sys, const std::vector<RadicalSum>& h,
                              std::size_t c, std::size_t d) {
  const std::size_t dim = sys.spec.gamma[0].size();
  RadicalSum acc;
  for (std::size_t p = 0; p < dim; ++p)
    for (std::size_t q = 0; q < dim; ++q)
      acc += sys.basis.gamma[3 + c][p] * h[p * dim + q] * sys.basis.gamma[3 + d][q];
  return acc;
}

}  // namespace

TEST_CASE("triangle fixture: inertia, mode normalization, Hessian diagonalization") {
  const ExactSystem sys = triangle_system();
  CHECK(sys.spec.translation_invariant);
  CHECK(sys.spec.norm_sq[0] == RadicalSum(Rational(1, 2)));
  CHECK(sys.spec.norm_sq[1] == RadicalSum(Rational(1, 2)));
  CHECK(sys.spec.norm_sq[2] == RadicalSum(1));
  CHECK(mode_count(sys.spec) == 3);

  std::vector<RadicalSum> equil = sys.equilibrium.positions;
  const auto h = pairwise_hessian(sys.spec.masses, equil);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t d = 0; d < 3; ++d) {
      const RadicalSum entry = mode_hessian_entry(sys, h, c, d);
      if (c == d)
        CHECK(entry == RadicalSum(sys.sigma_sq[c]));
      else
        CHECK(entry.is_zero());
    }

  // pair distances at equilibrium are exactly 1
  for (int al = 0; al < 3; ++al)
    for (int be = al + 1; be < 3; ++be) {
      RadicalSum dsq;
      for (int i = 0; i < 3; ++i) {
        const RadicalSum d = equil[al * 3 + i] - equil[be * 3 + i];
        dsq += d * d;
      }
      CHECK(dsq == RadicalSum(1));
    }
}

TEST_CASE("tetrahedron fixture: inertia, Hessian diagonalization, edge lengths") {
  const ExactSystem sys = tetrahedron_system();
  for (int a = 0; a < 3; ++a) CHECK(sys.spec.norm_sq[a] == RadicalSum(1));
  CHECK(mode_count(sys.spec) == 6);
  REQUIRE(sys.basis.gamma.size() == 12);

  const auto h = pairwise_hessian(sys.spec.masses, sys.equilibrium.positions);
  for (std::size_t c = 0; c < 6; ++c)
    for (std::size_t d = 0; d < 6; ++d) {
      const RadicalSum entry = mode_hessian_entry(sys, h, c, d);
      if (c == d)
        CHECK(entry == RadicalSum(sys.sigma_sq[c]));
      else
        CHECK(entry.is_zero());
    }

  for (int al = 0; al < 4; ++al)
    for (int be = al + 1; be < 4; ++be) {
      RadicalSum dsq;
      for (int i = 0; i < 3; ++i) {
        const RadicalSum d = sys.equilibrium.positions[al * 3 + i] -
                             sys.equilibrium.positions[be * 3 + i];
        dsq += d * d;
      }
      CHECK(dsq == RadicalSum(1));
    }
}

TEST_CASE("breathing mode of the tetrahedron is the last basis row") {
  const ExactSystem sys = tetrahedron_system();
  // proportional to the equilibrium positions themselves (radial motion)
  const auto& breathing = sys.basis.gamma[8];
  const auto& z = sys.equilibrium.positions;
  // ratio must be constant: b_k * z_0 = b_0 * z_k for all k
  for (std::size_t k = 0; k < z.size(); ++k)
    CHECK((breathing[k] * z[0] - breathing[0] * z[k]).is_zero());
}

TEST_CASE("fixture bases resolve the identity exactly") {
  for (const ExactSystem& sys : {triangle_system(), tetrahedron_system()}) {
    const std::size_t dim = sys.spec.gamma[0].size();
    for (std::size_t p = 0; p < dim; ++p)
      for (std::size_t q = 0; q < dim; ++q) {
        RadicalSum acc;
        for (std::size_t a = 0; a < dim; ++a) {
          const RadicalSum& nrm =
              a < 3 ? sys.basis.norm_sq_low[a] : sys.basis.norm_sq_high;
          acc += sys.basis.gamma[a][p] * sys.basis.gamma[a][q] *
                 sys.spec.masses[q / 3] * nrm.inverse();
        }
        CHECK(acc == (p == q ? RadicalSum(1) : RadicalSum()));
      }
  }
}

TEST_CASE("random exact specs validate across sizes") {
  Rng rng(2024);
  for (int n = 2; n <= 5; ++n) {
    const GaugeSpecX a = random_gauge_spec(rng, n, false);
    CHECK(a.n_particles == n);
    const GaugeSpecX b = random_gauge_spec(rng, n, true);
    CHECK(b.translation_invariant);
  }
}
