// Reference systems with exact (radical-sum) data:
//  * three unit masses at the vertices of an equilateral triangle,
//  * four unit masses at the vertices of a regular tetrahedron,
// each equipped with the rotational gauge about its equilibrium and a
// completion whose modes diagonalize the pairwise-harmonic Hessian, plus a
// small non-translation-invariant "axis" gauge used by the copy-counting
// searches, and a random-spec generator for exact algebra sweeps.
#pragma once

#include <vector>

#include "rotframe/gauge.hpp"
#include "rotframe/rng.hpp"

namespace rotframe {

struct ExactSystem {
  GaugeSpecX spec;             // rotational gauge about the equilibrium
  ExtendedBasisX basis;        // modes diagonalize the harmonic pair potential
  ConfigurationX equilibrium;  // body-frame equilibrium positions (unit scale)
  std::vector<Rational> sigma_sq;  // Hessian eigenvalue per mode, units m*omega^2
};

// Equilateral triangle, unit masses, unit side.  Modes: degenerate pair
// (sigma^2 = 3/2 each), then the breathing mode (sigma^2 = 3).
ExactSystem triangle_system();

// Regular tetrahedron, unit masses, unit edge.  Modes: doublet (1, 1),
// triplet (2, 2, 2), breathing (4).
ExactSystem tetrahedron_system();

// Gauge fixing particle 1 to the x-axis and particle 2 to the x-z plane:
// S = (R_{1y}, R_{1z}, R_{2y}) with unit masses, three particles, not
// translation invariant.
GaugeSpecX axis_gauge_spec();

// Mass-weighted Hessian of V = (1/2) sum_{pairs} (|r_a - r_b| - d_ab)^2 at
// the given equilibrium (each pair at its natural length), as a dense
// 3N x 3N matrix in row-major layout [ (alpha*3+i)*3N + (beta*3+j) ].
std::vector<RadicalSum> pairwise_hessian(const std::vector<RadicalSum>& masses,
                                         const std::vector<RadicalSum>& equilibrium);

// Random exact gauge spec: rational masses and rows, rows mass-orthogonal by
// construction (Gram-Schmidt without normalization keeps everything in Q).
GaugeSpecX random_gauge_spec(Rng& rng, int n_particles, bool translation_invariant);

}  // namespace rotframe
