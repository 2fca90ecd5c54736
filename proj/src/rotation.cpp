#include "rotframe/rotation.hpp"

#include <cmath>
#include <stdexcept>

#include "rotframe/quadrature.hpp"

namespace rotframe {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_finite(const Eigen::Vector3d& theta) {
  if (!theta.allFinite())
    throw std::invalid_argument("rotation: non-finite chart parameters");
}

Eigen::Matrix3d rot_z(double t) {
  Eigen::Matrix3d r;
  const double c = std::cos(t), s = std::sin(t);
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Eigen::Matrix3d rot_y(double t) {
  Eigen::Matrix3d r;
  const double c = std::cos(t), s = std::sin(t);
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

// Series-safe coefficients of the exponential chart:
//   U      = I + s1*K + c2*K^2
//   Lambda = I - c2*K + c3*K^2          (K = [theta]_x, t = |theta|)
// with s1 = sin t / t, c2 = (1-cos t)/t^2, c3 = (t - sin t)/t^3.
struct ExpCoeffs {
  double s1, c2, c3, det_lambda;
};

ExpCoeffs exp_coeffs(double t) {
  ExpCoeffs c{};
  const double t2 = t * t;
  if (t < 1e-4) {
    c.s1 = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    c.c2 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    c.c3 = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    c.s1 = std::sin(t) / t;
    c.c2 = (1.0 - std::cos(t)) / t2;
    c.c3 = (t - std::sin(t)) / (t2 * t);
  }
  c.det_lambda = 2.0 * c.c2;  // det(I - c2 K + c3 K^2) = 2(1-cos t)/t^2
  return c;
}

}  // namespace

std::array<Eigen::Matrix3i, 3> so3_generators() {
  auto eps = [](int i, int j, int k) -> int {
    if (i == j || j == k || i == k) return 0;
    return ((j - i + 3) % 3 == 1) ? 1 : -1;  // +1 on cyclic triples
  };
  std::array<Eigen::Matrix3i, 3> t;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        t[static_cast<std::size_t>(j)](i, k) = eps(i, j, k);
  return t;
}

Eigen::Matrix3d hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d k;
  k << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return k;
}

Eigen::Matrix3d rotation_matrix(const RotationChart& chart) {
  require_finite(chart.theta);
  if (chart.kind == ChartKind::exponential) {
    const double t = chart.theta.norm();
    const ExpCoeffs c = exp_coeffs(t);
    const Eigen::Matrix3d k = hat(chart.theta);
    return Eigen::Matrix3d::Identity() + c.s1 * k + c.c2 * k * k;
  }
  // z-y-z Euler angles, theta_1 applied first.
  return rot_z(chart.theta(2)) * rot_y(chart.theta(1)) * rot_z(chart.theta(0));
}

ChartMatrices chart_matrices(const RotationChart& chart) {
  require_finite(chart.theta);
  ChartMatrices out;
  if (chart.kind == ChartKind::exponential) {
    const double t = chart.theta.norm();
    const ExpCoeffs c = exp_coeffs(t);
    const Eigen::Matrix3d k = hat(chart.theta);
    out.Lambda = Eigen::Matrix3d::Identity() - c.c2 * k + c.c3 * k * k;
    out.det_lambda = c.det_lambda;
  } else {
    const double t2 = chart.theta(1), t3 = chart.theta(2);
    const double s2 = std::sin(t2), c2 = std::cos(t2);
    const double s3 = std::sin(t3), c3 = std::cos(t3);
    // Rows a = 1..3 of dU/dtheta_a U^T resolved on the generators:
    //   a=1: Rz(t3) Ry(t2) e_z ; a=2: Rz(t3) e_y ; a=3: e_z.
    out.Lambda << s2 * c3, s2 * s3, c2,
                  -s3,     c3,      0,
                  0,       0,       1;
    out.det_lambda = s2;
  }
  if (std::abs(out.det_lambda) < 1e-10)
    throw std::domain_error("chart_matrices: chart singular at this point");
  out.lambda = out.Lambda * rotation_matrix(chart);
  return out;
}

double haar_integrate(const std::function<double(const Eigen::Matrix3d&)>& f,
                      ChartKind chart, const HaarRule& rule) {
  if (rule.points_per_param < 8)
    throw std::invalid_argument("haar_integrate: need >= 8 points per parameter");
  const int n = rule.points_per_param;
  double total = 0.0;

  if (chart == ChartKind::exponential) {
    // Integrate over the ball |theta| <= pi in spherical coordinates; the
    // radial Haar density t^2 * 2(1-cos t)/t^2 collapses to 2(1-cos t).
    const Quadrature qr = gauss_legendre(n);   // radius
    const Quadrature qu = gauss_legendre(n);   // cos(polar)
    for (int ir = 0; ir < n; ++ir) {
      const double t = 0.5 * kPi * (qr.nodes[static_cast<std::size_t>(ir)] + 1.0);
      const double wt = 0.5 * kPi * qr.weights[static_cast<std::size_t>(ir)] *
                        2.0 * (1.0 - std::cos(t));
      for (int iu = 0; iu < n; ++iu) {
        const double u = qu.nodes[static_cast<std::size_t>(iu)];
        const double wu = qu.weights[static_cast<std::size_t>(iu)];
        const double su = std::sqrt(std::max(0.0, 1.0 - u * u));
        for (int ip = 0; ip < n; ++ip) {
          const double phi = 2.0 * kPi * (ip + 0.5) / n;
          const double wp = 2.0 * kPi / n;
          RotationChart c{ChartKind::exponential,
                          Eigen::Vector3d(t * su * std::cos(phi),
                                          t * su * std::sin(phi), t * u)};
          total += wt * wu * wp * f(rotation_matrix(c));
        }
      }
    }
    return total;
  }

  // Euler z-y-z: uniform (periodic) rules in theta_1, theta_3 and a
  // Gauss-Legendre rule in cos(theta_2), which absorbs the sin(theta_2)
  // Haar density exactly.
  const Quadrature qu = gauss_legendre(n);
  for (int i1 = 0; i1 < n; ++i1) {
    const double th1 = 2.0 * kPi * (i1 + 0.5) / n;
    for (int iu = 0; iu < n; ++iu) {
      const double th2 = std::acos(qu.nodes[static_cast<std::size_t>(iu)]);
      const double wu = qu.weights[static_cast<std::size_t>(iu)];
      for (int i3 = 0; i3 < n; ++i3) {
        const double th3 = 2.0 * kPi * (i3 + 0.5) / n;
        RotationChart c{ChartKind::euler_zyz, Eigen::Vector3d(th1, th2, th3)};
        total += wu * (2.0 * kPi / n) * (2.0 * kPi / n) * f(rotation_matrix(c));
      }
    }
  }
  return total;
}

}  // namespace rotframe
