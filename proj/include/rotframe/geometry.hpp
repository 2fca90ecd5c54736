// Curvilinear geometry of the gauge-fixed frame: the coordinate map
// (theta, Q) -> lab positions, its inverse-metric blocks and volume factor,
// a finite-difference oracle for the frame-curvature potential, and weighted
// inner products over the gauge surface.
#pragma once

#include <complex>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "rotframe/gauge.hpp"
#include "rotframe/rotation.hpp"
#include "rotframe/weylalg.hpp"

namespace rotframe {

// ---------------------------------------------------------------------------
// coordinate map at a point
// ---------------------------------------------------------------------------
struct CoordinateMap {
  GaugeSpec spec;
  ExtendedBasis basis;
  RotationChart chart;
  Eigen::VectorXd q;  // amplitudes of all 3N-3 non-gauge rows

  // caches evaluated at (chart, q)
  Eigen::Matrix3d u = Eigen::Matrix3d::Identity();  // U(theta)
  ChartMatrices chart_mats;                         // Lambda, lambda, |Lambda|
  Configuration body;                               // R(Q), gauge-satisfying
  Configuration lab;                                // r = U^T R per particle
  GaugeGeometry geom;                               // qmat, ninv, jac, sign
};

// Builds and validates the map.  Throws std::invalid_argument on size or
// basis/spec mismatch, std::domain_error when the chart is singular or the
// point lies on the horizon (det qmat = 0).
CoordinateMap make_coordinate_map(const GaugeSpec& spec, const ExtendedBasis& basis,
                                  const RotationChart& chart, const Eigen::VectorXd& q);

// ---------------------------------------------------------------------------
// inverse metric and volume factor
// ---------------------------------------------------------------------------
struct MetricBlocks {
  Eigen::Matrix3d rot_rot;    // Lambda^{-T} Ninv Lambda^{-1}
  Eigen::MatrixXd rot_mode;   // 3 x M : Lambda^{-T} Ninv Qext^T / Rsq
  Eigen::MatrixXd mode_rot;   // M x 3 : transpose block
  Eigen::MatrixXd mode_mode;  // M x M : I/Rsq + Qext Ninv Qext^T / Rsq^2
  double jacobian = 0.0;      // Rsq^{(3N-3)/2} |Lambda| jac  (non-negative)
};

MetricBlocks metric_blocks(const CoordinateMap& map);

// The blocks assembled into one (3+M) x (3+M) matrix, ordered (theta, Q).
Eigen::MatrixXd inverse_metric(const MetricBlocks& blocks);

// Reference kinetic metric M_AB = sum_alpha m_alpha (dr_alpha/dA).(dr_alpha/dB)
// over (theta, Q), built from central differences of the lab embedding.  The
// independent check for the closed-form inverse metric and volume factor.
Eigen::MatrixXd finite_difference_metric(const GaugeSpec& spec, const ExtendedBasis& basis,
                                         const RotationChart& chart, const Eigen::VectorXd& q,
                                         double step = 1e-6);

// ---------------------------------------------------------------------------
// frame-curvature potential oracle
// ---------------------------------------------------------------------------
// (1/8) sum_{A,B,c} (d_B G_{Ac})(d_A G_{Bc}) where G_{Ac} is the closed first
// derivative d(theta,Q)_A / dq_c of the curvilinear coordinates with respect
// to the mass-orthonormal lab coordinates, differentiated once more by a
// central difference.  mode_block restricts both curvilinear indices to the
// modes; chart_term is the contribution of the chart-matrix derivatives.
struct QuantumPotentialSplit {
  double total = 0.0;
  double mode_block = 0.0;
  double chart_term = 0.0;
};

QuantumPotentialSplit quantum_potential_oracle(const CoordinateMap& map,
                                               double fd_step = 1e-5);

// ---------------------------------------------------------------------------
// polynomial-times-Gaussian functions over the shape modes
// ---------------------------------------------------------------------------
// f(Q) = sum_k c_k prod_c Q_c^{k_c} * exp(-1/2 sum_c sigma_c Q_c^2).
// Closed under differentiation, so operators with polynomial coefficients
// act exactly.
struct GaussPoly {
  std::map<std::vector<int>, std::complex<double>> poly;
  Eigen::VectorXd sigma;

  std::complex<double> value(const Eigen::VectorXd& q) const;
  int degree() const;
  GaussPoly derivative(int c) const;      // d/dQ_c
  GaussPoly times_coordinate(int c) const;  // Q_c *
  GaussPoly scaled(std::complex<double> s) const;
  GaussPoly& operator+=(const GaussPoly& o);  // requires identical sigma
};

// Ground-state Gaussian (unit coefficient) for the given envelope.
GaussPoly gauss_ground(const Eigen::VectorXd& sigma);

// Numeric rendering of an exact operator for pointwise application.
struct NumericTerm {
  std::vector<int> mono, deriv;
  std::complex<double> coeff;
};
struct NumericOp {
  std::vector<std::string> coords;
  std::vector<NumericTerm> terms;
};
NumericOp to_numeric(const DiffOpX& op);
NumericOp to_numeric(const DiffOpE& op, double eps_value);

// Exact action of a polynomial-coefficient operator on a GaussPoly.
GaussPoly apply(const NumericOp& op, const GaussPoly& f);

// ---------------------------------------------------------------------------
// inner products over the gauge surface
// ---------------------------------------------------------------------------
enum class MeasureWeight {
  with_jacobian,  // unsigned volume factor jac(Q); restrict regions via predicates
  reduced         // flat mode measure
};

using ModeFn = std::function<std::complex<double>(const Eigen::VectorXd&)>;
using ModePredicate = std::function<bool(const Eigen::VectorXd&)>;

struct InnerProductRule {
  int points_per_mode = 20;
  // Degree of the polynomial part of conj(f) * g when known; a Hermite rule
  // with n points integrates degrees <= 2n-1 exactly, lower orders raise.
  int max_poly_degree = -1;
  ModePredicate region;  // optional region indicator (multiplies the measure)
  // Mode-space offset at which displacements are embedded when the volume
  // factor is evaluated (typically the reference-shape amplitudes).
  Eigen::VectorXd origin;
};

// Integral of conj(f) g over the shape modes with Gaussian envelopes
// exp(-1/2 sigma q^2) factored into the quadrature.  The rotational sector
// is not integrated here: angular factors contract exactly upstream.
std::complex<double> inner_product(const GaugeSpec& spec, const ExtendedBasis& basis,
                                   const ModeFn& f, const ModeFn& g,
                                   const Eigen::VectorXd& sigma_f,
                                   const Eigen::VectorXd& sigma_g, MeasureWeight weight,
                                   const InnerProductRule& rule = {});

// Convenience overload for GaussPoly arguments (degrees filled in).
std::complex<double> inner_product(const GaugeSpec& spec, const ExtendedBasis& basis,
                                   const GaussPoly& f, const GaussPoly& g,
                                   MeasureWeight weight, InnerProductRule rule = {});

}  // namespace rotframe
