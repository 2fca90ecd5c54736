// Truncated harmonic-oscillator representations of the rotating-frame
// Hamiltonians: occupation-number bases, matrix rendering of exact
// differential operators, the quadratic model with its rotational coupling,
// closed-form reference spectra, degenerate perturbation theory, and the
// eps-graded assembly of the full gauge-fixed / reduced / Weyl-ordered forms.
//
// Grading convention: the equilibrium shape sits at distance ~ 1/eps in
// oscillator units, so the reference positions carry eps^-1, the gauge-row
// norms eps^-2, and displacement coordinates eps^0.  Collecting a fixed eps
// power of an assembled operator yields the corresponding expansion term.
#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rotframe/fixtures.hpp"
#include "rotframe/weylalg.hpp"

namespace rotframe {

// ---------------------------------------------------------------------------
// occupation-number basis
// ---------------------------------------------------------------------------
struct OscillatorBasis {
  Eigen::Index mode_count = 0;
  std::vector<double> freqs;  // sigma_c per mode, in units of omega
  int cutoff = 0;             // total-quantum cap
  // States ordered shell by shell (total quanta ascending), lexicographic
  // within a shell; size = C(cutoff + mode_count, mode_count).
  std::vector<std::vector<int>> states;
  std::map<std::vector<int>, Eigen::Index> index;

  Eigen::Index size() const { return static_cast<Eigen::Index>(states.size()); }
};

OscillatorBasis make_oscillator_basis(std::vector<double> freqs, int cutoff);

// Ladder / coordinate / derivative matrices over the basis.  Raising out of
// the top shell is dropped (truncation edge); X and D are exact on states
// whose images stay under the cutoff.
Eigen::MatrixXd lowering_matrix(const OscillatorBasis& basis, Eigen::Index mode);
// X_c = (a + a^T)/sqrt(2 sigma_c)
Eigen::MatrixXd position_matrix(const OscillatorBasis& basis, Eigen::Index mode);
// D_c = sqrt(sigma_c/2) (a - a^T)   (the derivative d/dQ_c)
Eigen::MatrixXd derivative_matrix(const OscillatorBasis& basis, Eigen::Index mode);

// Diagonal matrix sum_c sigma_c (n_c + 1/2) in hbar*omega units.
Eigen::MatrixXd build_h0(const OscillatorBasis& basis);

// Matrix of a polynomial-coefficient operator: each term contributes
// coeff * prod X_c^{mono_c} * prod D_c^{deriv_c} (monomials left of
// derivatives, matching the canonical normal-ordered form).
Eigen::MatrixXcd render_operator(const DiffOpX& op, const OscillatorBasis& basis);
// Graded variant: coefficients are evaluated at eps_value with powers above
// max_eps_power dropped.
Eigen::MatrixXcd render_operator(const DiffOpE& op, const OscillatorBasis& basis,
                                 double eps_value, int max_eps_power);

// ---------------------------------------------------------------------------
// grading utilities
// ---------------------------------------------------------------------------
inline DiffOpE graded(const DiffOpX& op, int eps_power = 0) {
  DiffOpE r(op.coords());
  for (const auto& [k, c] : op.terms()) r.add_term(k, EpsSeries::eps(eps_power, c));
  return r;
}
inline DiffOpE eps_component(const DiffOpE& op, int power) {
  return op.map_coeffs([power](const EpsSeries& c) { return c.component(power); });
}
inline DiffOpE eps_truncated(const DiffOpE& op, int max_power) {
  return op.map_coeffs([max_power](const EpsSeries& c) { return c.truncated(max_power); });
}
// Drop the coordinate-free term (constant operators shift all levels equally).
template <class K>
DiffOp<K> without_constant(const DiffOp<K>& op) {
  DiffOp<K> r(op.coords());
  for (const auto& [k, c] : op.terms()) {
    bool constant = true;
    for (std::size_t j = 0; j < k.mono.size(); ++j)
      if (k.mono[j] != 0 || k.deriv[j] != 0) {
        constant = false;
        break;
      }
    if (!constant) r.add_term(k, c);
  }
  return r;
}

// ---------------------------------------------------------------------------
// quadratic model: h0 + rotational coupling on oscillator (x) angular space
// ---------------------------------------------------------------------------
// Kronecker layout: index = angular_row * basis.size() + oscillator_row.
struct HamiltonianModel {
  OscillatorBasis basis;
  int l = 0;
  Eigen::MatrixXcd h0;  // diagonal, block-constant in total quanta
  Eigen::MatrixXcd h1;  // rotational coupling, includes the eps^2 prefactor
  double epsilon = 0.0;
  int order = 2;
};

// Rotational coupling of the quadratic model for the bundled reference
// systems, with the eps^2 prefactor included.  Planar triangle:
// s^2 - s3^2 + (1/2)(s3 + L3)^2 (half inverse-inertia weights, matching the
// closed-form symmetric-top spectrum).  Tetrahedron: (s + L)^2 with the
// residual coupling L of the six modes (unit weights, matching the ladder
// oracle).  Throws std::invalid_argument for gauges whose reference response
// is not symmetric (non-Eckart) or for unsupported mode counts.
Eigen::MatrixXcd build_h1(const ExactSystem& sys, const AngularSector& sector,
                          const OscillatorBasis& basis, double epsilon);

HamiltonianModel make_quadratic_model(const ExactSystem& sys, int l, double epsilon,
                                      int cutoff);

// ---------------------------------------------------------------------------
// spectrum tables
// ---------------------------------------------------------------------------
struct SpectrumRow {
  double energy = 0.0;  // hbar*omega units
  std::optional<int> n, lambda, n_zeta, l, m;
  int degeneracy = 1;
};
struct SpectrumTable {
  std::vector<SpectrumRow> rows;  // sorted ascending by energy
};

// Closed-form spectrum of the planar-triangle model: for every
// (n, lambda, n_zeta) with 2n+|lambda|+n_zeta <= n_max and every (l, m) with
// l <= l_max,
//   E = sqrt(3)(n_zeta + 1/2) + sqrt(3/2)(2n + |lambda| + 1)
//       + eps^2 (l(l+1) - m^2 + (m + lambda)^2 / 2).
SpectrumTable closed_form_spectrum_n3(int n_max, int l_max, double epsilon);

// Exact spectrum of h0 + h1 for models whose coupling preserves the h0
// level (h1 block-diagonal across h0 eigenspaces): eigenvalues are computed
// block by block.  Rows carry the sector in `l` and, in `n`, the largest
// oscillator shell entering the block: rendered ladder operators are faithful
// strictly below the basis cutoff, so rows with n < cutoff are free of
// truncation-edge error.  Cross-block couplings above 1e-12 * scale throw
// std::invalid_argument.
SpectrumTable model_spectrum(const HamiltonianModel& model);

// First-order corrections of a diagonal h0 by h1: eigenvalues of the h1 block
// projected onto each h0 eigenspace (levels grouped to 1e-9 absolute; level
// gaps inside the guard band above that throw an ambiguous-degeneracy error).
// Row energies are the corrections in the scale h1 carries; the `n` label is
// the ordinal of the h0 level, ascending.
SpectrumTable degenerate_perturbation(const Eigen::MatrixXcd& h0,
                                      const Eigen::MatrixXcd& h1);

// Independent closed-form corrections for the tetrahedron model at total
// angular momentum l, derived by ladder-operator expectation values: the
// lowest three oscillator levels with their distinct corrections (in eps^2
// units) and multiplicities, ascending.
struct OracleLevel {
  double level = 0.0;  // h0 value in hbar*omega units
  std::vector<std::pair<double, int>> corrections;  // (value, multiplicity)
};
std::array<OracleLevel, 3> tetrahedron_ladder_oracle(int l);

// ---------------------------------------------------------------------------
// Hermitian diagonalization (cyclic Jacobi on the real embedding)
// ---------------------------------------------------------------------------
struct HermitianEigen {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns match values
};
// Throws std::invalid_argument when ||h - h^dagger||_max > herm_tol * scale.
HermitianEigen diagonalize(const Eigen::MatrixXcd& h, double herm_tol = 1e-10);

// ---------------------------------------------------------------------------
// eps-graded assembly of the full Hamiltonians
// ---------------------------------------------------------------------------
enum class HamiltonianForm {
  gauge_fixed,   // rotor-coupled form on the volume-weighted measure
  reduced,       // constraint-reduced form; renders identically to gauge_fixed
                 // because the rotor angular momentum acts on physical states
                 // as minus the angular sector
  weyl_ordered,  // symmetrically ordered flat-measure form with the
                 // frame-curvature constants
};

// Frame geometry expanded about the reference shape, over the mode
// displacement coordinates.
struct FrameExpansion {
  std::vector<std::string> coords;
  // Inverse rotational metric; entries start at eps^2.
  std::array<std::array<DiffOpE, 3>, 3> ninv;
  // Volume-factor ratio j = (volume factor)/(reference value) and its
  // reciprocal, expanded through second order in the determinant ratio.
  DiffOpE volume_ratio;
  DiffOpE volume_ratio_inv;
  // Residual angular momentum over the modes (pure eps^0 for these gauges).
  std::array<DiffOpE, 3> residual;
};
FrameExpansion frame_expansion(const ExactSystem& sys, int order = 2);

// One Hamiltonian form as graded operators over the mode coordinates:
//   H = scalar + sum_k spin[k] * s_k + sum_ij spin_spin[i][j] * s_i s_j
//       + flat_constant * eps^2.
// All prefactors are folded into the stored operators.
struct GradedHamiltonian {
  HamiltonianForm form = HamiltonianForm::weyl_ordered;
  int order = 2;
  std::vector<std::string> coords;
  DiffOpE scalar;
  std::array<DiffOpE, 3> spin;
  std::array<std::array<DiffOpE, 3>, 3> spin_spin;
  // Frame-curvature constants at the reference shape (weyl_ordered only);
  // they enter the rendered matrix at eps^2.
  double flat_constant = 0.0;
};
GradedHamiltonian assemble_graded_hamiltonian(const ExactSystem& sys, HamiltonianForm form,
                                              int order = 2);

// Matrix of the chosen form on oscillator (x) angular space at the given
// expansion order (<= 2; higher orders throw std::invalid_argument).
Eigen::MatrixXcd assemble_full_hamiltonian(const ExactSystem& sys, const OscillatorBasis& basis,
                                           int l, HamiltonianForm form, double epsilon,
                                           int order = 2);

}  // namespace rotframe
