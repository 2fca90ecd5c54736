#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rotframe/fixtures.hpp"
#include "rotframe/geometry.hpp"
#include "rotframe/rng.hpp"
#include "rotframe/spectra.hpp"

using namespace rotframe;

namespace {

using CMat = Eigen::MatrixXcd;

EpsSeries erat(const Rational& q) { return EpsSeries(GaussianRS(RadicalSum(q))); }

// Oscillator operator sum_c (-1/2 d_c^2 + sigma_c^2/2 x_c^2) at eps^0.
DiffOpE oscillator_operator(const std::vector<std::string>& coords,
                            const std::vector<Rational>& sigma_sq) {
  DiffOpE h(coords);
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const DiffOpE d = DiffOpE::derivative(coords, c);
    const DiffOpE x = DiffOpE::coordinate(coords, c);
    h += (d * d).scaled(erat(Rational(-1, 2)));
    h += (x * x).scaled(erat(sigma_sq[c] * Rational(1, 2)));
  }
  return h;
}

bool is_constant(const DiffOpE& op) { return without_constant(op).is_zero(); }

std::vector<double> sorted_real_eigenvalues(const CMat& h, double imag_tol) {
  Eigen::ComplexEigenSolver<CMat> solver(h);
  REQUIRE(solver.info() == Eigen::Success);
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    CHECK(std::abs(solver.eigenvalues()(i).imag()) <= imag_tol);
    vals.push_back(solver.eigenvalues()(i).real());
  }
  std::sort(vals.begin(), vals.end());
  return vals;
}

}  // namespace

TEST_CASE("oscillator basis enumerates shells with a lexicographic order") {
  const OscillatorBasis b = make_oscillator_basis({1.0, 2.0}, 3);
  CHECK(b.size() == 10);  // C(3+2, 2)
  CHECK(b.states.front() == std::vector<int>{0, 0});
  // shell 1 after shell 0, lexicographic inside the shell
  CHECK(b.states[1] == std::vector<int>{0, 1});
  CHECK(b.states[2] == std::vector<int>{1, 0});
  int prev_total = 0;
  for (const auto& s : b.states) {
    const int total = s[0] + s[1];
    CHECK(total >= prev_total);
    prev_total = total;
    CHECK(b.states[static_cast<std::size_t>(b.index.at(s))] == s);
  }

  const OscillatorBasis none = make_oscillator_basis({}, 4);
  CHECK(none.size() == 1);
  CHECK(build_h0(none)(0, 0) == 0.0);

  CHECK_THROWS_AS(make_oscillator_basis({1.0}, -1), std::invalid_argument);
  CHECK_THROWS_AS(make_oscillator_basis({0.0}, 2), std::invalid_argument);
}

TEST_CASE("ladder matrices satisfy the canonical pairing below the cutoff") {
  const OscillatorBasis b = make_oscillator_basis({std::sqrt(1.5), std::sqrt(3.0)}, 5);
  for (Eigen::Index mode = 0; mode < 2; ++mode) {
    const Eigen::MatrixXd x = position_matrix(b, mode);
    const Eigen::MatrixXd d = derivative_matrix(b, mode);
    const Eigen::MatrixXd comm = d * x - x * d;
    for (std::size_t s = 0; s < b.states.size(); ++s) {
      if (b.states[s][0] + b.states[s][1] >= b.cutoff) continue;  // raising truncated
      for (std::size_t r = 0; r < b.states.size(); ++r) {
        const double expect = r == s ? 1.0 : 0.0;
        CHECK(std::abs(comm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) -
                       expect) <= 1e-12);
      }
    }
  }

  // -1/2 d^2 + sigma^2/2 x^2 reproduces the diagonal oscillator energies on
  // states two quanta below the cutoff.
  const Eigen::MatrixXd h0 = build_h0(b);
  Eigen::MatrixXd taylored = Eigen::MatrixXd::Zero(b.size(), b.size());
  for (Eigen::Index mode = 0; mode < 2; ++mode) {
    const Eigen::MatrixXd x = position_matrix(b, mode);
    const Eigen::MatrixXd d = derivative_matrix(b, mode);
    const double s2 = b.freqs[static_cast<std::size_t>(mode)] *
                      b.freqs[static_cast<std::size_t>(mode)];
    taylored += -0.5 * (d * d) + 0.5 * s2 * (x * x);
  }
  for (std::size_t s = 0; s < b.states.size(); ++s) {
    if (b.states[s][0] + b.states[s][1] > b.cutoff - 2) continue;
    for (std::size_t r = 0; r < b.states.size(); ++r)
      CHECK(std::abs(taylored(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) -
                     h0(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s))) <= 1e-12);
  }
}

TEST_CASE("axial residual momentum has an integer spectrum shell by shell") {
  const ExactSystem sys = triangle_system();
  const auto lam = residual_angular_momentum(sys.spec, sys.basis);
  std::vector<double> freqs;
  for (const Rational& s2 : sys.sigma_sq) freqs.push_back(std::sqrt(to_double(s2)));
  const OscillatorBasis b = make_oscillator_basis(freqs, 6);
  const CMat l3 = render_operator(lam[2], b);
  CHECK((l3 - l3.adjoint()).cwiseAbs().maxCoeff() <= 1e-13);

  // The axial component moves quanta between the two degenerate modes only,
  // so each (pair total, axial count) block carries the ladder
  // {-t, -t+2, ..., t}.  Blocks touching the cutoff shell are excluded: there
  // the dropped raising amplitudes halve the rendered coupling.
  for (int tp = 0; tp <= 6; ++tp)
    for (int nb = 0; tp + nb < 6; ++nb) {
      std::vector<Eigen::Index> idx;
      for (std::size_t s = 0; s < b.states.size(); ++s)
        if (b.states[s][0] + b.states[s][1] == tp && b.states[s][2] == nb)
          idx.push_back(static_cast<Eigen::Index>(s));
      REQUIRE(static_cast<int>(idx.size()) == tp + 1);
      CMat block(idx.size(), idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = l3(idx[r], idx[c]);
      const HermitianEigen eig = diagonalize(block);
      for (int k = 0; k <= tp; ++k)
        CHECK(std::abs(eig.values(k) - static_cast<double>(-tp + 2 * k)) <= 1e-12);
    }
}

TEST_CASE("flat-measure expansion: oscillator base, vanishing odd order, axial coupling") {
  const ExactSystem sys = triangle_system();
  const GradedHamiltonian gh =
      assemble_graded_hamiltonian(sys, HamiltonianForm::weyl_ordered, 2);
  const auto lam = residual_angular_momentum(sys.spec, sys.basis);

  CHECK(eps_component(gh.scalar, -2).is_zero());
  CHECK(eps_component(gh.scalar, -1).is_zero());
  CHECK(eps_component(gh.scalar, 1).is_zero());

  // Order zero: exactly the mode oscillator.  The candidate ordering
  // corrections carry the rotational gauge functions of the momenta, which
  // vanish identically, so no constant survives.
  const DiffOpE h0op = oscillator_operator(gh.coords, sys.sigma_sq);
  const DiffOpE diff0 = eps_component(gh.scalar, 0) - h0op;
  CAPTURE(diff0.str());
  CHECK(diff0.is_zero());

  // Order two: half the squared axial residual momentum plus a constant.
  const DiffOpE half_l3_sq = graded(lam[2] * lam[2], 2).scaled(erat(Rational(1, 2)));
  const DiffOpE diff2 = eps_component(gh.scalar, 2) - half_l3_sq;
  CAPTURE(diff2.str());
  CHECK(is_constant(diff2));

  // Linear spin couplings: only the axial residual momentum survives.
  CHECK(gh.spin[0].is_zero());
  CHECK(gh.spin[1].is_zero());
  CHECK(gh.spin[2] == graded(lam[2], 2));

  // Quadratic spin couplings: half the inverse metric, diagonal (2, 2, 1)/2
  // at the reference shape.
  const std::array<Rational, 3> expect{Rational(1), Rational(1), Rational(1, 2)};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const DiffOpE lead = eps_component(gh.spin_spin[i][j], 2);
      if (i != j) {
        CHECK(lead.is_zero());
      } else {
        CHECK(lead == DiffOpE::constant(gh.coords, EpsSeries::eps(
                                                       2, GaussianRS(RadicalSum(
                                                              expect[static_cast<std::size_t>(
                                                                  i)])))));
      }
    }

  // Frame-curvature constants at the reference shape.
  CHECK(gh.flat_constant == doctest::Approx(-2.125).epsilon(1e-12));
}

TEST_CASE("frame expansion exposes the residual momenta and reference metric") {
  const ExactSystem sys = triangle_system();
  const FrameExpansion fe = frame_expansion(sys, 2);
  const auto lam = residual_angular_momentum(sys.spec, sys.basis);
  for (int i = 0; i < 3; ++i) CHECK(fe.residual[static_cast<std::size_t>(i)] == graded(lam[static_cast<std::size_t>(i)]));

  const std::array<Rational, 3> diag{Rational(2), Rational(2), Rational(1)};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const DiffOpE lead = eps_component(fe.ninv[i][j], 2);
      if (i != j)
        CHECK(lead.is_zero());
      else
        CHECK(lead == DiffOpE::constant(
                          fe.coords,
                          EpsSeries::eps(2, GaussianRS(RadicalSum(diag[static_cast<std::size_t>(i)])))));
    }

  const DiffOpE one = DiffOpE::constant(fe.coords, erat(1));
  CHECK(eps_component(fe.volume_ratio, 0) == one);
  CHECK(eps_component(fe.volume_ratio_inv, 0) == one);
}

TEST_CASE("volume-measure expansion shares the oscillator base exactly") {
  const ExactSystem sys = triangle_system();
  const GradedHamiltonian gh = assemble_graded_hamiltonian(sys, HamiltonianForm::reduced, 2);

  CHECK(eps_component(gh.scalar, -2).is_zero());
  CHECK(eps_component(gh.scalar, -1).is_zero());
  const DiffOpE h0op = oscillator_operator(gh.coords, sys.sigma_sq);
  CHECK(eps_component(gh.scalar, 0) == h0op);
  // The volume-factor similarity contributes genuine first-order terms; they
  // cancel spectrally, not term by term.
  CHECK(!eps_component(gh.scalar, 1).is_zero());
  CHECK(gh.flat_constant == 0.0);
}

TEST_CASE("flat and volume forms agree spectrally at small displacement scale") {
  const ExactSystem sys = triangle_system();
  const double eps = 1e-3;
  const int cutoff = 8;
  const int l = 1;
  std::vector<double> freqs;
  for (const Rational& s2 : sys.sigma_sq) freqs.push_back(std::sqrt(to_double(s2)));
  const OscillatorBasis basis = make_oscillator_basis(freqs, cutoff);

  const CMat h_flat =
      assemble_full_hamiltonian(sys, basis, l, HamiltonianForm::weyl_ordered, eps, 2);
  const CMat h_vol =
      assemble_full_hamiltonian(sys, basis, l, HamiltonianForm::reduced, eps, 2);
  const CMat h_gf =
      assemble_full_hamiltonian(sys, basis, l, HamiltonianForm::gauge_fixed, eps, 2);
  CHECK((h_gf - h_vol).cwiseAbs().maxCoeff() == 0.0);

  // The symmetrically ordered form is Hermitian up to basis truncation.
  CHECK((h_flat - h_flat.adjoint()).cwiseAbs().maxCoeff() <= 5e-5);

  Eigen::SelfAdjointEigenSolver<CMat> flat_solver(0.5 * (h_flat + h_flat.adjoint()));
  REQUIRE(flat_solver.info() == Eigen::Success);
  std::vector<double> flat_vals(flat_solver.eigenvalues().data(),
                                flat_solver.eigenvalues().data() + h_flat.rows());

  // The volume form is only similar to a Hermitian operator; its spectrum is
  // real up to truncation noise.
  const std::vector<double> vol_vals = sorted_real_eigenvalues(h_vol, 1e-5);

  // The two forms are similarity images of the same operator, so the
  // spectra agree where the basis resolves them (states well under the
  // cutoff).  The flat constant is absent from the volume form.
  const double shift = -2.125 * eps * eps;  // frame-curvature constants
  const std::size_t safe = 105;             // three spin rows x 35 low states
  REQUIRE(flat_vals.size() >= safe);
  double max_diff = 0.0;
  for (std::size_t k = 0; k < safe; ++k)
    max_diff = std::max(max_diff, std::abs(flat_vals[k] - shift - vol_vals[k]));
  CHECK(max_diff <= 3e-5);
}

TEST_CASE("quadratic model reproduces the closed-form spectrum") {
  const ExactSystem sys = triangle_system();
  const double eps = 0.05;
  const int n_max = 8;
  const SpectrumTable closed = closed_form_spectrum_n3(n_max, 2, eps);

  // Degeneracy bookkeeping: 165 oscillator states per angular row.
  std::size_t n_rows = 0;
  for (const auto& row : closed.rows) n_rows += static_cast<std::size_t>(row.degeneracy);
  CHECK(n_rows == 165 * 9);
  CHECK(std::is_sorted(closed.rows.begin(), closed.rows.end(),
                       [](const SpectrumRow& a, const SpectrumRow& b) {
                         return a.energy < b.energy;
                       }));

  // Ground state: sqrt(3)/2 + sqrt(3/2).
  CHECK(closed.rows.front().energy ==
        doctest::Approx(std::sqrt(3.0) / 2.0 + std::sqrt(1.5)).epsilon(1e-14));

  for (int l = 0; l <= 2; ++l) {
    const HamiltonianModel model = make_quadratic_model(sys, l, eps, n_max);
    const SpectrumTable numeric = model_spectrum(model);
    std::vector<double> got;
    for (const auto& row : numeric.rows)
      if (row.n.value() < n_max) got.push_back(row.energy);
    std::vector<double> expect;
    for (const auto& row : closed.rows)
      if (row.l == l &&
          2 * row.n.value() + std::abs(row.lambda.value()) + row.n_zeta.value() < n_max)
        for (int d = 0; d < row.degeneracy; ++d) expect.push_back(row.energy);
    std::sort(expect.begin(), expect.end());
    // Shells strictly below the cutoff: C(n_max + 2, 3) states per m-row.
    REQUIRE(got.size() == static_cast<std::size_t>(120 * (2 * l + 1)));
    REQUIRE(got.size() == expect.size());
    // The coupling never leaves an oscillator shell, so below the cutoff the
    // truncated model is exact level by level.
    for (std::size_t k = 0; k < expect.size(); ++k) {
      const double rel =
          std::abs(got[k] - expect[k]) / std::max(1.0, std::abs(expect[k]));
      CHECK(rel <= 1e-10);
    }
  }
}

TEST_CASE("rotational coupling preserves the oscillator grading") {
  const ExactSystem sys = triangle_system();
  for (int l = 0; l <= 2; ++l) {
    const HamiltonianModel model = make_quadratic_model(sys, l, 0.05, 6);
    const CMat comm = model.h0 * model.h1 - model.h1 * model.h0;
    const double scale = std::max(1.0, model.h1.cwiseAbs().maxCoeff());
    CHECK(comm.cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("at l = 0 the coupling squares the axial ladder") {
  const ExactSystem sys = triangle_system();
  const double eps = 0.05;
  const HamiltonianModel model = make_quadratic_model(sys, 0, eps, 6);
  // Restrict to shells below the cutoff; the coupling is block-diagonal in
  // the shell bookkeeping, so the restriction is exact.
  std::vector<Eigen::Index> safe;
  for (std::size_t s = 0; s < model.basis.states.size(); ++s) {
    const auto& occ = model.basis.states[s];
    if (occ[0] + occ[1] + occ[2] < model.basis.cutoff)
      safe.push_back(static_cast<Eigen::Index>(s));
  }
  CMat sub(safe.size(), safe.size());
  for (std::size_t r = 0; r < safe.size(); ++r)
    for (std::size_t c = 0; c < safe.size(); ++c)
      sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          model.h1(safe[r], safe[c]) / (eps * eps);
  const HermitianEigen eig = diagonalize(sub);
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double twice = 2.0 * eig.values(i);
    const double root = std::round(std::sqrt(std::max(0.0, twice)));
    CHECK(std::abs(twice - root * root) <= 1e-9);
  }
}

TEST_CASE("the coupling builder rejects unsupported gauges") {
  ExactSystem sys = triangle_system();
  // Shift one particle: the gauge functions no longer vanish at the
  // reference shape.
  sys.equilibrium.positions[0] += RadicalSum(Rational(1, 10));
  const OscillatorBasis basis = make_oscillator_basis({1.0, 1.0, 1.0}, 2);
  CHECK_THROWS_AS(build_h1(sys, angular_sector(1), basis, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(assemble_graded_hamiltonian(sys, HamiltonianForm::weyl_ordered, 2),
                  std::invalid_argument);
}

TEST_CASE("expansion order is capped") {
  const ExactSystem sys = triangle_system();
  CHECK_THROWS_AS(assemble_graded_hamiltonian(sys, HamiltonianForm::weyl_ordered, 3),
                  std::invalid_argument);
  const OscillatorBasis basis = make_oscillator_basis({1.0, 1.0, 1.0}, 2);
  CHECK_THROWS_AS(
      assemble_full_hamiltonian(sys, basis, 0, HamiltonianForm::weyl_ordered, 0.05, 3),
      std::invalid_argument);
}

TEST_CASE("breathing mode decouples from the residual momenta exactly") {
  const ExactSystem sys = tetrahedron_system();
  const Eigen::Index n = sys.spec.n_particles;
  const Eigen::Index m = mode_count(sys.spec);
  REQUIRE(m == 6);

  // Rotational response seen by the breathing row:
  //   W^i_{bc} = sum_{beta j k} m_beta Gamma_{b beta j} eps_{j i k} V_{beta k}
  // with V the reference positions or any mode direction.  Every entry
  // vanishes identically: the radial pattern is blind to frame rotations.
  const auto& radial_row = sys.basis.gamma[static_cast<std::size_t>(3 + m - 1)];
  const auto response = [&](const auto& direction, int i, auto at) {
    RadicalSum w;
    for (Eigen::Index be = 0; be < n; ++be)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          const int e = detail::eps3(j, i, k);
          if (e == 0) continue;
          w += sys.spec.masses[static_cast<std::size_t>(be)] *
               radial_row[static_cast<std::size_t>(be * 3 + j)] *
               at(direction, static_cast<std::size_t>(be * 3 + k)) *
               RadicalSum(Rational(e));
        }
    return w;
  };
  const auto at_vec = [](const std::vector<RadicalSum>& v, std::size_t k) { return v[k]; };
  for (int i = 0; i < 3; ++i) {
    CHECK(response(sys.equilibrium.positions, i, at_vec).is_zero());
    for (Eigen::Index c = 0; c < m; ++c)
      CHECK(response(sys.basis.gamma[static_cast<std::size_t>(3 + c)], i, at_vec).is_zero());
  }

  const auto lam = residual_angular_momentum(sys.spec, sys.basis);
  // Doubled residual momenta close as an su(2) algebra.
  const GaussianRS half_i(RadicalSum(0), RadicalSum(Rational(1, 2)));
  for (int i = 0; i < 3; ++i) {
    const std::size_t j = static_cast<std::size_t>((i + 1) % 3);
    const std::size_t k = static_cast<std::size_t>((i + 2) % 3);
    CHECK(commutator(lam[static_cast<std::size_t>(i)], lam[j]) == lam[k].scaled(half_i));
  }
  const auto coords = mode_coords(n, m);
  const DiffOpX breathing = DiffOpX::coordinate(coords, static_cast<std::size_t>(m - 1));
  DiffOpX shell(coords);
  for (Eigen::Index c = 0; c + 1 < m; ++c) {
    const DiffOpX xc = DiffOpX::coordinate(coords, static_cast<std::size_t>(c));
    shell += xc * xc;
  }
  DiffOpX vpot(coords);
  for (Eigen::Index c = 0; c < m; ++c) {
    const DiffOpX xc = DiffOpX::coordinate(coords, static_cast<std::size_t>(c));
    vpot += (xc * xc).scaled(GaussianRS(RadicalSum(
        sys.sigma_sq[static_cast<std::size_t>(c)] * Rational(1, 2))));
  }
  for (int i = 0; i < 3; ++i) {
    CHECK(commutator(lam[static_cast<std::size_t>(i)], breathing).is_zero());
    CHECK(commutator(lam[static_cast<std::size_t>(i)], shell).is_zero());
    // The potential splits the degenerate shells, so it must not commute:
    // that is what makes the corrections nontrivial.
    CHECK(!commutator(lam[static_cast<std::size_t>(i)], vpot).is_zero());
  }
}

TEST_CASE("tetrahedron corrections match the ladder oracle") {
  const ExactSystem sys = tetrahedron_system();
  for (int l = 0; l <= 2; ++l) {
    // Unit displacement scale: corrections come out directly in the units
    // the oracle is written in.
    const HamiltonianModel model = make_quadratic_model(sys, l, 1.0, 3);
    const SpectrumTable pt = degenerate_perturbation(model.h0, model.h1);
    const auto oracle = tetrahedron_ladder_oracle(l);

    // The first three oscillator levels are non-mixing: ground, the doublet
    // singles, the triplet singles.
    for (int level = 0; level < 3; ++level) {
      std::vector<std::pair<double, int>> got;
      for (const auto& row : pt.rows)
        if (row.n == level) got.push_back({row.energy, row.degeneracy});
      std::sort(got.begin(), got.end());
      const auto& expect = oracle[static_cast<std::size_t>(level)].corrections;
      REQUIRE(got.size() == expect.size());
      for (std::size_t k = 0; k < expect.size(); ++k) {
        CHECK(std::abs(got[k].first - expect[k].first) <= 1e-9);
        CHECK(got[k].second == expect[k].second);
      }
    }
  }
}

TEST_CASE("perturbation bookkeeping: trivial coupling, diagonality, guard band") {
  const CMat h0 = Eigen::Vector4cd(0.0, 0.0, 1.0, 2.0).asDiagonal();
  const CMat zero = CMat::Zero(4, 4);
  const SpectrumTable trivial = degenerate_perturbation(h0, zero);
  int total = 0;
  for (const auto& row : trivial.rows) {
    CHECK(row.energy == 0.0);
    total += row.degeneracy;
  }
  CHECK(total == 4);

  CMat off = h0;
  off(0, 3) = 0.5;
  CHECK_THROWS_AS(degenerate_perturbation(off, zero), std::invalid_argument);

  const CMat close = Eigen::Vector2cd(0.0, 5e-7).asDiagonal();
  CHECK_THROWS_AS(degenerate_perturbation(close, CMat::Zero(2, 2)), std::invalid_argument);

  const CMat apart = Eigen::Vector2cd(0.0, 1e-5).asDiagonal();
  const SpectrumTable two = degenerate_perturbation(apart, CMat::Zero(2, 2));
  CHECK(two.rows.size() == 2);
}

TEST_CASE("hermitian diagonalization on the real embedding") {
  CMat h(2, 2);
  h << std::complex<double>(2.0, 0.0), std::complex<double>(0.0, 1.0),
      std::complex<double>(0.0, -1.0), std::complex<double>(2.0, 0.0);
  const HermitianEigen eig = diagonalize(h);
  CHECK(eig.values(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eig.values(1) == doctest::Approx(3.0).epsilon(1e-12));
  for (int k = 0; k < 2; ++k) {
    const Eigen::VectorXcd r = h * eig.vectors.col(k) - eig.values(k) * eig.vectors.col(k);
    CHECK(r.norm() <= 1e-10);
  }

  CMat bad(2, 2);
  bad << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(diagonalize(bad), std::invalid_argument);

  // Random Hermitian matrix: values and vectors against the residual.
  Rng rng(20240817);
  const int n = 20;
  CMat a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      a(r, c) = std::complex<double>(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  const CMat herm = 0.5 * (a + a.adjoint());
  const HermitianEigen eig2 = diagonalize(herm);
  Eigen::SelfAdjointEigenSolver<CMat> ref(herm);
  for (int k = 0; k < n; ++k) {
    CHECK(std::abs(eig2.values(k) - ref.eigenvalues()(k)) <= 1e-11);
    const Eigen::VectorXcd r = herm * eig2.vectors.col(k) - eig2.values(k) * eig2.vectors.col(k);
    CHECK(r.norm() <= 1e-9);
  }
  CHECK((eig2.vectors.adjoint() * eig2.vectors - CMat::Identity(n, n)).cwiseAbs().maxCoeff() <=
        1e-9);
}

TEST_CASE("flat-measure form is Hermitian under the mode quadrature") {
  const ExactSystem sys = triangle_system();
  const double eps = 0.05;
  const GradedHamiltonian gh =
      assemble_graded_hamiltonian(sys, HamiltonianForm::weyl_ordered, 2);
  const NumericOp op = to_numeric(gh.scalar, eps);

  Eigen::VectorXd sigma(3);
  for (int c = 0; c < 3; ++c) sigma(c) = std::sqrt(to_double(sys.sigma_sq[static_cast<std::size_t>(c)]));
  const GaussPoly ground = gauss_ground(sigma);

  // Monomial-times-Gaussian probes through total degree three.
  std::vector<GaussPoly> probes;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; a + b <= 3; ++b)
      for (int c = 0; a + b + c <= 3; ++c) {
        GaussPoly f = ground;
        for (int t = 0; t < a; ++t) f = f.times_coordinate(0);
        for (int t = 0; t < b; ++t) f = f.times_coordinate(1);
        for (int t = 0; t < c; ++t) f = f.times_coordinate(2);
        probes.push_back(f);
      }

  const GaugeSpec dspec = to_double_spec(sys.spec);
  const ExtendedBasis dbasis = to_double_basis(sys.basis);
  InnerProductRule rule;
  rule.points_per_mode = 12;

  const std::size_t np = probes.size();
  CMat gram(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np));
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < np; ++j)
      gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          inner_product(dspec, dbasis, probes[i], apply(op, probes[j]),
                        MeasureWeight::reduced, rule);
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  CHECK((gram - gram.adjoint()).cwiseAbs().maxCoeff() <= 1e-8 * scale);
}

TEST_CASE("model spectrum rejects couplings that cross levels") {
  const ExactSystem sys = triangle_system();
  HamiltonianModel model = make_quadratic_model(sys, 0, 0.05, 4);
  // Couple the ground state to a one-quantum state: levels now mix.
  model.h1(0, 3) = 0.1;
  model.h1(3, 0) = 0.1;
  CHECK_THROWS_AS(model_spectrum(model), std::invalid_argument);
}

TEST_CASE("rendering validates the coordinate count") {
  const OscillatorBasis b = make_oscillator_basis({1.0, 1.0, 1.0}, 2);
  const auto coords = std::vector<std::string>{"dQ4", "dQ5"};
  const DiffOpX op = DiffOpX::coordinate(coords, 0);
  CHECK_THROWS_AS(render_operator(op, b), std::invalid_argument);
}
