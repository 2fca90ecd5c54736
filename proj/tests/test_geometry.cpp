#include "rotframe/geometry.hpp"

#include <cmath>
#include <complex>

#include "doctest.h"
#include "rotframe/fixtures.hpp"
#include "rotframe/rng.hpp"

using namespace rotframe;

namespace {

struct DoubleSystem {
  GaugeSpec spec;
  ExtendedBasis basis;
  Eigen::VectorXd omega;  // mode frequencies (envelope of the ground state)
  Eigen::VectorXd q_eq;   // amplitudes of the reference shape (all non-gauge rows)
};

DoubleSystem lower(const ExactSystem& sys) {
  DoubleSystem out;
  out.spec = to_double_spec(sys.spec);
  out.basis = to_double_basis(sys.basis);
  out.omega.resize(static_cast<Eigen::Index>(sys.sigma_sq.size()));
  for (Eigen::Index c = 0; c < out.omega.size(); ++c)
    out.omega[c] = std::sqrt(detail::as_double(sys.sigma_sq[static_cast<std::size_t>(c)]));

  Configuration eq;
  eq.n_particles = sys.equilibrium.n_particles;
  eq.frame_tag = sys.equilibrium.frame_tag;
  for (const auto& x : sys.equilibrium.positions) eq.positions.push_back(detail::as_double(x));
  const std::vector<double> amp = project_coords(out.spec, out.basis, eq);
  out.q_eq = Eigen::Map<const Eigen::VectorXd>(amp.data(), static_cast<Eigen::Index>(amp.size()));
  return out;
}

RotationChart random_exp_chart(Rng& rng) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  return RotationChart{ChartKind::exponential, axis * rng.uniform(0.3, 2.5)};
}

Eigen::VectorXd random_amplitudes(Rng& rng, Eigen::Index n_free, double span) {
  Eigen::VectorXd q(n_free);
  for (Eigen::Index i = 0; i < n_free; ++i) q[i] = rng.uniform(-span, span);
  return q;
}

// kinetic metric M_AB = sum_alpha m_alpha (d r_alpha / dA) . (d r_alpha / dB)
// by central differences over (theta, Q)
Eigen::MatrixXd fd_metric(const GaugeSpec& spec, const ExtendedBasis& basis,
                          const RotationChart& chart, const Eigen::VectorXd& q, double h) {
  const Eigen::Index n_free = q.size();
  const Eigen::Index dim = 3 + n_free;
  const Eigen::Index n3 = 3 * spec.n_particles;

  auto lab_at = [&](const Eigen::Vector3d& dth, const Eigen::VectorXd& dq) {
    RotationChart c = chart;
    c.theta += dth;
    const Eigen::Matrix3d u = rotation_matrix(c);
    std::vector<double> amp(static_cast<std::size_t>(n_free));
    for (Eigen::Index i = 0; i < n_free; ++i) amp[static_cast<std::size_t>(i)] = q[i] + dq[i];
    const Configuration body = embed_coords(spec, basis, amp);
    Eigen::VectorXd r(n3);
    for (Eigen::Index al = 0; al < spec.n_particles; ++al) {
      Eigen::Vector3d rb(body.positions[al * 3], body.positions[al * 3 + 1],
                         body.positions[al * 3 + 2]);
      r.segment<3>(al * 3) = u.transpose() * rb;
    }
    return r;
  };

  Eigen::MatrixXd dr(n3, dim);
  for (Eigen::Index a = 0; a < dim; ++a) {
    Eigen::Vector3d dth = Eigen::Vector3d::Zero();
    Eigen::VectorXd dq = Eigen::VectorXd::Zero(n_free);
    if (a < 3)
      dth[a] = h;
    else
      dq[a - 3] = h;
    dr.col(a) = (lab_at(dth, dq) - lab_at(-dth, -dq)) / (2 * h);
  }

  Eigen::MatrixXd metric = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b) {
      double acc = 0.0;
      for (Eigen::Index al = 0; al < spec.n_particles; ++al)
        acc += spec.masses[al] * dr.col(a).segment<3>(al * 3).dot(dr.col(b).segment<3>(al * 3));
      metric(a, b) = acc;
    }
  return metric;
}

void check_metric_against_fd(const DoubleSystem& sys, Rng& rng, int n_points) {
  const Eigen::Index n_free = 3 * sys.spec.n_particles - 3;
  for (int trial = 0; trial < n_points; ++trial) {
    const RotationChart chart = random_exp_chart(rng);
    const Eigen::VectorXd q = sys.q_eq + random_amplitudes(rng, n_free, 0.2);
    const CoordinateMap map = make_coordinate_map(sys.spec, sys.basis, chart, q);
    const MetricBlocks blocks = metric_blocks(map);
    const Eigen::MatrixXd ginv = inverse_metric(blocks);

    const Eigen::MatrixXd metric = fd_metric(sys.spec, sys.basis, chart, q, 1e-6);
    const Eigen::MatrixXd ref = metric.inverse();
    CHECK((ginv - ref).norm() <= 1e-6 * ref.norm());

    const double jac_ref = std::sqrt(metric.determinant());
    CHECK(blocks.jacobian == doctest::Approx(jac_ref).epsilon(1e-6));

    Eigen::LLT<Eigen::MatrixXd> llt(ginv);
    CHECK(llt.info() == Eigen::Success);
  }
}

void check_potential_oracle(const DoubleSystem& sys, Rng& rng, int n_points) {
  const Eigen::Index n_free = 3 * sys.spec.n_particles - 3;
  for (int trial = 0; trial < n_points; ++trial) {
    const RotationChart chart = random_exp_chart(rng);
    const Eigen::VectorXd q = sys.q_eq + random_amplitudes(rng, n_free, 0.15);
    const CoordinateMap map = make_coordinate_map(sys.spec, sys.basis, chart, q);
    const QuantumPotentialSplit split = quantum_potential_oracle(map);
    const QuantumPotentials pots = eval_quantum_potentials(sys.spec, map.body);
    CHECK(split.mode_block == doctest::Approx(pots.v2).epsilon(1e-5));
    CHECK(split.total - split.chart_term ==
          doctest::Approx(pots.v1 + pots.v2).epsilon(1e-5));
  }
}

double jacobian_of_modes(const DoubleSystem& sys, const Eigen::VectorXd& q_modes) {
  const Eigen::Index n_free = 3 * sys.spec.n_particles - 3;
  std::vector<double> amp(static_cast<std::size_t>(n_free), 0.0);
  for (Eigen::Index c = 0; c < q_modes.size(); ++c)
    amp[static_cast<std::size_t>(c)] = sys.q_eq[c] + q_modes[c];
  const Configuration body = embed_coords(sys.spec, sys.basis, amp);
  return eval_geometry(sys.spec, body).jac;
}

}  // namespace

TEST_CASE("coordinate map validates inputs and flags the horizon") {
  const DoubleSystem tri = lower(triangle_system());
  const RotationChart id{ChartKind::exponential, Eigen::Vector3d::Zero()};

  CHECK_THROWS_AS(make_coordinate_map(tri.spec, tri.basis, id, Eigen::VectorXd::Zero(4)),
                  std::invalid_argument);

  // zero amplitudes collapse every particle onto the origin
  CHECK_THROWS_AS(make_coordinate_map(tri.spec, tri.basis, id, Eigen::VectorXd::Zero(6)),
                  std::domain_error);

  const RotationChart gimbal{ChartKind::euler_zyz, Eigen::Vector3d(0.3, 0.0, 0.5)};
  CHECK_THROWS_AS(make_coordinate_map(tri.spec, tri.basis, gimbal, tri.q_eq), std::domain_error);
}

TEST_CASE("metric blocks at the reference shape are diagonal") {
  const DoubleSystem tri = lower(triangle_system());
  const RotationChart id{ChartKind::exponential, Eigen::Vector3d::Zero()};
  const CoordinateMap map = make_coordinate_map(tri.spec, tri.basis, id, tri.q_eq);
  const MetricBlocks blocks = metric_blocks(map);

  Eigen::Vector3d inv_moments(2.0, 2.0, 1.0);
  CHECK((blocks.rot_rot - inv_moments.asDiagonal().toDenseMatrix()).norm() < 1e-13);
  CHECK(blocks.rot_mode.norm() < 1e-13);
  CHECK((blocks.mode_mode - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-13);
  CHECK(blocks.jacobian == doctest::Approx(0.5).epsilon(1e-13));
  // the response matrix at the reference shape is +diag(inertia moments)
  CHECK(map.geom.sign == 1);
}

TEST_CASE("inverse metric and volume factor match finite differences") {
  Rng rng(404);
  check_metric_against_fd(lower(triangle_system()), rng, 6);
  check_metric_against_fd(lower(tetrahedron_system()), rng, 4);
}

TEST_CASE("derivative-coupling potential splits into closed-form pieces") {
  Rng rng(405);
  check_potential_oracle(lower(triangle_system()), rng, 3);
  check_potential_oracle(lower(tetrahedron_system()), rng, 2);
}

TEST_CASE("gauss polynomials differentiate exactly") {
  const DoubleSystem tri = lower(triangle_system());
  const GaussPoly ground = gauss_ground(tri.omega);

  // oscillator sum: -(1/2) d_c^2 + (1/2) omega_c^2 Q_c^2 maps the ground
  // state to (1/2) sum omega_c times itself
  DiffOpX h(mode_coords(3, 3));
  for (int c = 0; c < 3; ++c) {
    TermKey kin, pot;
    kin.mono.assign(3, 0);
    kin.deriv.assign(3, 0);
    pot = kin;
    kin.deriv[static_cast<std::size_t>(c)] = 2;
    pot.mono[static_cast<std::size_t>(c)] = 2;
    const Rational w_sq = (c == 2) ? Rational(3) : Rational(3, 2);
    h.add_term(kin, GaussianRS(RadicalSum(Rational(-1, 2))));
    h.add_term(pot, GaussianRS(RadicalSum(w_sq * Rational(1, 2))));
  }
  const GaussPoly image = apply(to_numeric(h), ground);

  const double energy = 0.5 * (tri.omega[0] + tri.omega[1] + tri.omega[2]);
  Rng rng(406);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::VectorXd q = random_amplitudes(rng, 3, 0.8);
    const std::complex<double> want = energy * ground.value(q);
    CHECK(std::abs(image.value(q) - want) <= 1e-12 * std::abs(want));
  }

  // derivative against finite differences
  const GaussPoly f = ground.times_coordinate(0).times_coordinate(1).scaled(0.7);
  const GaussPoly df = f.derivative(1);
  const double h_fd = 1e-6;
  Eigen::VectorXd q = random_amplitudes(rng, 3, 0.5);
  Eigen::VectorXd qp = q, qm = q;
  qp[1] += h_fd;
  qm[1] -= h_fd;
  const std::complex<double> fd = (f.value(qp) - f.value(qm)) / (2 * h_fd);
  CHECK(std::abs(df.value(q) - fd) < 1e-8);

  GaussPoly other = gauss_ground(Eigen::Vector3d(1.0, 1.0, 1.0));
  GaussPoly acc = ground;
  CHECK_THROWS_AS(acc += other, std::invalid_argument);
}

TEST_CASE("mode inner products integrate Gaussian envelopes") {
  const DoubleSystem tri = lower(triangle_system());
  const GaussPoly ground = gauss_ground(tri.omega);

  const double norm_flat =
      std::sqrt(M_PI / tri.omega[0]) * std::sqrt(M_PI / tri.omega[1]) *
      std::sqrt(M_PI / tri.omega[2]);
  const std::complex<double> ip =
      inner_product(tri.spec, tri.basis, ground, ground, MeasureWeight::reduced);
  CHECK(std::abs(ip - std::complex<double>(norm_flat)) <= 1e-12 * norm_flat);

  // odd integrand vanishes; excited diagonal picks up 1/(2 omega)
  const GaussPoly lifted = ground.times_coordinate(0);
  CHECK(std::abs(inner_product(tri.spec, tri.basis, ground, lifted, MeasureWeight::reduced)) <
        1e-13);
  const std::complex<double> diag =
      inner_product(tri.spec, tri.basis, lifted, lifted, MeasureWeight::reduced);
  const double want = norm_flat / (2 * tri.omega[0]);
  CHECK(std::abs(diag - std::complex<double>(want)) <= 1e-12 * want);

  // a half-space region indicator halves a symmetric integral
  InnerProductRule half_rule;
  half_rule.region = [](const Eigen::VectorXd& q) { return q[0] > 0.0; };
  const std::complex<double> half =
      inner_product(tri.spec, tri.basis, ground, ground, MeasureWeight::reduced, half_rule);
  CHECK(std::abs(half - 0.5 * std::complex<double>(norm_flat)) <= 1e-12 * norm_flat);

  // volume weighting agrees with folding sqrt(jac) into both arguments
  const DoubleSystem* sys = &tri;
  const GaussPoly* g = &ground;
  ModeFn plain = [g](const Eigen::VectorXd& q) { return g->value(q); };
  ModeFn weighted = [sys, g](const Eigen::VectorXd& q) {
    return g->value(q) * std::sqrt(jacobian_of_modes(*sys, q));
  };
  InnerProductRule about_eq;
  about_eq.origin = tri.q_eq.head(3);
  const std::complex<double> with_jac = inner_product(tri.spec, tri.basis, ground, ground,
                                                      MeasureWeight::with_jacobian, about_eq);
  const std::complex<double> folded =
      inner_product(tri.spec, tri.basis, weighted, weighted, tri.omega, tri.omega,
                    MeasureWeight::reduced, InnerProductRule{});
  CHECK(std::abs(with_jac - folded) <= 1e-12 * std::abs(folded));

  // quadrature order below the polynomial degree is an error
  GaussPoly high = ground;
  for (int k = 0; k < 6; ++k) high = high.times_coordinate(0);
  InnerProductRule coarse;
  coarse.points_per_mode = 3;
  CHECK_THROWS_AS(
      inner_product(tri.spec, tri.basis, high, high, MeasureWeight::reduced, coarse),
      std::invalid_argument);

  CHECK_THROWS_AS(inner_product(tri.spec, tri.basis, plain, plain, Eigen::VectorXd::Ones(2),
                                tri.omega, MeasureWeight::reduced, InnerProductRule{}),
                  std::invalid_argument);
}
