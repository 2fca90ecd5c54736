// Parametrizations of SO(3) and their left-trivialized derivative matrices.
//
// A chart theta -> U(theta) comes with the matrix Lambda defined by
//   dU/dtheta_a U^T = Lambda_{ai} T_i,
// where (T_j)_{ik} = eps_{ijk} are the antisymmetric generators, plus the
// right-trivialized companion lambda_{aj} = Lambda_{ai} U_{ij}.  |Lambda| is
// the chart's Haar density.  Supported charts: the exponential map on the
// ball |theta| < pi, and z-y-z Euler angles (theta_1 applied first).
#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>

namespace rotframe {

enum class ChartKind { exponential, euler_zyz };

struct RotationChart {
  ChartKind kind = ChartKind::exponential;
  Eigen::Vector3d theta = Eigen::Vector3d::Zero();
};

// Generators with (T_j)_{ik} = eps_{ijk}; exact integer entries.  They obey
// [T_i, T_j] = eps_{ijk} T_k (so that [v]_x = v_j T_j is the cross-product
// matrix and exp([theta]_x) rotates by |theta| about theta).
std::array<Eigen::Matrix3i, 3> so3_generators();

// Cross-product matrix [v]_x w = v x w.
Eigen::Matrix3d hat(const Eigen::Vector3d& v);

// U(theta) for the given chart.  Throws std::invalid_argument on non-finite
// parameters.  The result is orthogonal with determinant +1 to 1e-12.
Eigen::Matrix3d rotation_matrix(const RotationChart& chart);

struct ChartMatrices {
  Eigen::Matrix3d Lambda;      // left-trivialized derivative, rows indexed by a
  Eigen::Matrix3d lambda;      // lambda = Lambda * U
  double det_lambda = 0.0;     // Haar density of the chart at theta
};

// Closed-form Lambda, lambda, |Lambda|.  Throws std::domain_error when the
// chart is singular (|det Lambda| < 1e-10) and std::invalid_argument on
// non-finite parameters.
ChartMatrices chart_matrices(const RotationChart& chart);

struct HaarRule {
  int points_per_param = 24;  // >= 8 required
};

// Integral of f over SO(3) with unnormalized Haar measure (total volume
// 8*pi^2), evaluated in the requested chart's natural domain.
double haar_integrate(const std::function<double(const Eigen::Matrix3d&)>& f,
                      ChartKind chart, const HaarRule& rule = {});

}  // namespace rotframe
