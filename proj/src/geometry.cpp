#include "rotframe/geometry.hpp"

#include "rotframe/quadrature.hpp"

#include <cmath>

namespace rotframe {

namespace {

// Rotational response rows qmat_{ai} = sum_b m_b Gamma_{a,b j} eps_{jik} R_{bk}
// for basis rows [r0, r1).
Eigen::MatrixXd response_rows(const GaugeSpec& spec, const ExtendedBasis& basis,
                              const std::vector<double>& pos, int r0, int r1) {
  const Eigen::Index n = spec.n_particles;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r1 - r0, 3);
  for (int a = r0; a < r1; ++a) {
    const auto& row = basis.gamma[static_cast<std::size_t>(a)];
    for (int i = 0; i < 3; ++i) {
      double acc = 0.0;
      for (Eigen::Index b = 0; b < n; ++b)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            const int e = detail::eps3(j, i, k);
            if (e != 0) acc += spec.masses[b] * row[b * 3 + j] * pos[b * 3 + k] * e;
          }
      out(a - r0, i) = acc;
    }
  }
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

double column_norm_sq(const ExtendedBasis& basis, Eigen::Index c) {
  return c < 3 ? basis.norm_sq_low[c] : basis.norm_sq_high;
}

// Closed first derivatives G_{Ac} = d(theta,Q)_A / dq_c of the curvilinear
// coordinates with respect to the mass-orthonormal lab coordinates
// q_c = sum m Gamma_c . r / sqrt(Rsq_c), with r = U^T R.
Eigen::MatrixXd closed_coordinate_gradients(const GaugeSpec& spec,
                                            const ExtendedBasis& basis,
                                            const RotationChart& chart,
                                            const Eigen::VectorXd& q) {
  const Eigen::Index n = spec.n_particles;
  const Eigen::Index dim = 3 * n;
  const Eigen::Matrix3d u = rotation_matrix(chart);
  const ChartMatrices cm = chart_matrices(chart);
  const Eigen::Matrix3d laminv = cm.Lambda.inverse();

  const Configuration body = embed_coords(spec, basis, to_std(q));
  const Eigen::MatrixXd q_all = response_rows(spec, basis, body.positions, 0,
                                              static_cast<int>(dim));
  const Eigen::Matrix3d q_gauge = q_all.topRows(3);
  const Eigen::Matrix3d qinv = q_gauge.inverse();  // qinv(i, a)

  // w(a, c) = sum_x m_x Gamma_a[x i] U(i, j) Gamma_c[x j]
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a) {
    const auto& ga = basis.gamma[static_cast<std::size_t>(a)];
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto& gc = basis.gamma[static_cast<std::size_t>(c)];
      double acc = 0.0;
      for (Eigen::Index x = 0; x < n; ++x)
        for (int i = 0; i < 3; ++i) {
          const double gai = ga[x * 3 + i];
          if (gai == 0.0) continue;
          for (int j = 0; j < 3; ++j) acc += spec.masses[x] * gai * u(i, j) * gc[x * 3 + j];
        }
      w(a, c) = acc;
    }
  }

  const double rext_sq = basis.norm_sq_high;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double inv_root = 1.0 / std::sqrt(column_norm_sq(basis, c));
    // rotational rows
    for (int a = 0; a < 3; ++a) {
      double s = 0.0;
      for (int b = 0; b < 3; ++b) {
        const double coef = laminv.col(a).dot(qinv.col(b));
        s -= coef * w(b, c) * inv_root;
      }
      out(a, c) = s;
    }
    // mode rows
    for (Eigen::Index a = 3; a < dim; ++a) {
      double t1 = w(a, c);
      double t2 = 0.0;
      for (int d = 0; d < 3; ++d) {
        const double qq = q_all.row(a).dot(qinv.col(d));
        t2 += qq * w(d, c);
      }
      out(a, c) = (t1 - t2) / rext_sq * inv_root;
    }
  }
  return out;
}

struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

CoordinateMap make_coordinate_map(const GaugeSpec& spec, const ExtendedBasis& basis,
                                  const RotationChart& chart, const Eigen::VectorXd& q) {
  validate_spec(spec);
  if (basis.n_particles != spec.n_particles)
    throw std::invalid_argument("make_coordinate_map: basis/spec mismatch");
  if (q.size() != 3 * spec.n_particles - 3)
    throw std::invalid_argument("make_coordinate_map: need one amplitude per non-gauge row");

  CoordinateMap map;
  map.spec = spec;
  map.basis = basis;
  map.chart = chart;
  map.q = q;
  map.u = rotation_matrix(chart);
  map.chart_mats = chart_matrices(chart);  // throws on singular chart
  map.body = embed_coords(spec, basis, to_std(q));
  map.geom = eval_geometry(spec, map.body);
  if (map.geom.singular)
    throw std::domain_error("make_coordinate_map: point lies on the horizon (det qmat = 0)");

  map.lab.n_particles = spec.n_particles;
  map.lab.frame_tag = FrameTag::lab;
  map.lab.positions.assign(map.body.positions.size(), 0.0);
  for (Eigen::Index al = 0; al < spec.n_particles; ++al) {
    const Eigen::Vector3d rb(map.body.positions[al * 3 + 0], map.body.positions[al * 3 + 1],
                             map.body.positions[al * 3 + 2]);
    const Eigen::Vector3d rl = map.u.transpose() * rb;
    for (int i = 0; i < 3; ++i) map.lab.positions[al * 3 + i] = rl[i];
  }
  return map;
}

MetricBlocks metric_blocks(const CoordinateMap& map) {
  const Eigen::Index n = map.spec.n_particles;
  const Eigen::Index m_rows = 3 * n - 3;
  const double rsq = map.basis.norm_sq_high;

  Eigen::Matrix3d ninv;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) ninv(j, k) = map.geom.ninv[j][k];

  const Eigen::MatrixXd q_ext =
      response_rows(map.spec, map.basis, map.body.positions, 3, static_cast<int>(3 * n));
  const Eigen::Matrix3d laminv = map.chart_mats.Lambda.inverse();

  MetricBlocks b;
  b.rot_rot = laminv.transpose() * ninv * laminv;
  b.rot_mode = laminv.transpose() * ninv * q_ext.transpose() / rsq;
  b.mode_rot = b.rot_mode.transpose();
  b.mode_mode = Eigen::MatrixXd::Identity(m_rows, m_rows) / rsq +
                q_ext * ninv * q_ext.transpose() / (rsq * rsq);
  b.jacobian = std::pow(rsq, 0.5 * static_cast<double>(m_rows)) *
               std::abs(map.chart_mats.det_lambda) * map.geom.jac;
  return b;
}

Eigen::MatrixXd inverse_metric(const MetricBlocks& blocks) {
  const Eigen::Index m_rows = blocks.mode_mode.rows();
  Eigen::MatrixXd g(3 + m_rows, 3 + m_rows);
  g.topLeftCorner(3, 3) = blocks.rot_rot;
  g.topRightCorner(3, m_rows) = blocks.rot_mode;
  g.bottomLeftCorner(m_rows, 3) = blocks.mode_rot;
  g.bottomRightCorner(m_rows, m_rows) = blocks.mode_mode;
  return g;
}

Eigen::MatrixXd finite_difference_metric(const GaugeSpec& spec, const ExtendedBasis& basis,
                                         const RotationChart& chart, const Eigen::VectorXd& q,
                                         double step) {
  validate_spec(spec);
  if (basis.n_particles != spec.n_particles)
    throw std::invalid_argument("finite_difference_metric: basis/spec mismatch");
  if (q.size() != 3 * spec.n_particles - 3)
    throw std::invalid_argument("finite_difference_metric: need one amplitude per non-gauge row");
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
      const Eigen::Vector3d rb(body.positions[al * 3], body.positions[al * 3 + 1],
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
      dth[a] = step;
    else
      dq[a - 3] = step;
    dr.col(a) = (lab_at(dth, dq) - lab_at(-dth, -dq)) / (2 * step);
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

QuantumPotentialSplit quantum_potential_oracle(const CoordinateMap& map, double fd_step) {
  const Eigen::Index dim = 3 * map.spec.n_particles;
  const Eigen::Index n_free = dim - 3;

  auto gradients_at = [&](const Eigen::Vector3d& dtheta, const Eigen::VectorXd& dq) {
    RotationChart chart = map.chart;
    chart.theta += dtheta;
    return closed_coordinate_gradients(map.spec, map.basis, chart, map.q + dq);
  };

  // dg[B](A, c) = d G_{Ac} / d coordinate_B by central difference
  std::vector<Eigen::MatrixXd> dg;
  dg.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index bb = 0; bb < dim; ++bb) {
    Eigen::Vector3d dtheta = Eigen::Vector3d::Zero();
    Eigen::VectorXd dq = Eigen::VectorXd::Zero(n_free);
    if (bb < 3)
      dtheta[bb] = fd_step;
    else
      dq[bb - 3] = fd_step;
    dg.push_back((gradients_at(dtheta, dq) - gradients_at(-dtheta, -dq)) / (2 * fd_step));
  }

  QuantumPotentialSplit split;
  for (Eigen::Index bb = 0; bb < dim; ++bb)
    for (Eigen::Index aa = 0; aa < dim; ++aa) {
      const double partial = dg[static_cast<std::size_t>(bb)].row(aa).dot(
          dg[static_cast<std::size_t>(aa)].row(bb));
      split.total += partial / 8.0;
      if (aa >= 3 && bb >= 3) split.mode_block += partial / 8.0;
    }

  // chart-derivative term: (1/8) Ninv_{l l'} dLaminv[a](l', a') dLaminv[a'](l, a)
  std::array<Eigen::Matrix3d, 3> dlaminv;
  const double h = 1e-6;
  for (int a = 0; a < 3; ++a) {
    RotationChart cp = map.chart, cm = map.chart;
    cp.theta[a] += h;
    cm.theta[a] -= h;
    dlaminv[a] =
        (chart_matrices(cp).Lambda.inverse() - chart_matrices(cm).Lambda.inverse()) / (2 * h);
  }
  for (int a = 0; a < 3; ++a)
    for (int ap = 0; ap < 3; ++ap)
      for (int l = 0; l < 3; ++l)
        for (int lp = 0; lp < 3; ++lp)
          split.chart_term +=
              map.geom.ninv[l][lp] * dlaminv[a](lp, ap) * dlaminv[ap](l, a) / 8.0;
  return split;
}

// ---------------------------------------------------------------------------
// GaussPoly
// ---------------------------------------------------------------------------
std::complex<double> GaussPoly::value(const Eigen::VectorXd& q) const {
  std::complex<double> p = 0.0;
  for (const auto& [k, c] : poly) {
    double monom = 1.0;
    for (std::size_t i = 0; i < k.size(); ++i)
      for (int e = 0; e < k[i]; ++e) monom *= q[static_cast<Eigen::Index>(i)];
    p += c * monom;
  }
  double expo = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) expo += sigma[i] * q[i] * q[i];
  return p * std::exp(-0.5 * expo);
}

int GaussPoly::degree() const {
  int d = 0;
  for (const auto& [k, c] : poly) {
    (void)c;
    int t = 0;
    for (int e : k) t += e;
    d = std::max(d, t);
  }
  return d;
}

GaussPoly GaussPoly::derivative(int c) const {
  GaussPoly out;
  out.sigma = sigma;
  for (const auto& [k, coeff] : poly) {
    if (k[static_cast<std::size_t>(c)] > 0) {  // polynomial part
      std::vector<int> down = k;
      down[static_cast<std::size_t>(c)] -= 1;
      out.poly[down] += coeff * static_cast<double>(k[static_cast<std::size_t>(c)]);
    }
    std::vector<int> up = k;  // envelope part: -sigma_c q_c
    up[static_cast<std::size_t>(c)] += 1;
    out.poly[up] -= coeff * sigma[c];
  }
  for (auto it = out.poly.begin(); it != out.poly.end();)
    it = it->second == 0.0 ? out.poly.erase(it) : std::next(it);
  return out;
}

GaussPoly GaussPoly::times_coordinate(int c) const {
  GaussPoly out;
  out.sigma = sigma;
  for (const auto& [k, coeff] : poly) {
    std::vector<int> up = k;
    up[static_cast<std::size_t>(c)] += 1;
    out.poly[up] += coeff;
  }
  return out;
}

GaussPoly GaussPoly::scaled(std::complex<double> s) const {
  GaussPoly out;
  out.sigma = sigma;
  for (const auto& [k, coeff] : poly) out.poly[k] = coeff * s;
  return out;
}

GaussPoly& GaussPoly::operator+=(const GaussPoly& o) {
  if (sigma.size() != o.sigma.size() || (sigma - o.sigma).norm() != 0.0)
    throw std::invalid_argument("GaussPoly: envelope mismatch");
  for (const auto& [k, coeff] : o.poly) {
    auto& slot = poly[k];
    slot += coeff;
    if (slot == 0.0) poly.erase(k);
  }
  return *this;
}

GaussPoly gauss_ground(const Eigen::VectorXd& sigma) {
  GaussPoly g;
  g.sigma = sigma;
  g.poly[std::vector<int>(static_cast<std::size_t>(sigma.size()), 0)] = 1.0;
  return g;
}

NumericOp to_numeric(const DiffOpX& op) {
  NumericOp out;
  out.coords = op.coords();
  for (const auto& [key, coeff] : op.terms()) {
    NumericTerm t;
    t.mono.assign(key.mono.begin(), key.mono.end());
    t.deriv.assign(key.deriv.begin(), key.deriv.end());
    t.coeff = coeff.to_complex();
    out.terms.push_back(std::move(t));
  }
  return out;
}

NumericOp to_numeric(const DiffOpE& op, double eps_value) {
  NumericOp out;
  out.coords = op.coords();
  for (const auto& [key, coeff] : op.terms()) {
    NumericTerm t;
    t.mono.assign(key.mono.begin(), key.mono.end());
    t.deriv.assign(key.deriv.begin(), key.deriv.end());
    t.coeff = coeff.eval(eps_value);
    if (t.coeff == 0.0) continue;
    out.terms.push_back(std::move(t));
  }
  return out;
}

GaussPoly apply(const NumericOp& op, const GaussPoly& f) {
  if (static_cast<Eigen::Index>(op.coords.size()) != f.sigma.size())
    throw std::invalid_argument("apply: operator/function dimension mismatch");
  GaussPoly out;
  out.sigma = f.sigma;
  for (const auto& term : op.terms) {
    GaussPoly g = f;
    for (std::size_t c = 0; c < term.deriv.size(); ++c)
      for (int e = 0; e < term.deriv[c]; ++e) g = g.derivative(static_cast<int>(c));
    for (std::size_t c = 0; c < term.mono.size(); ++c)
      for (int e = 0; e < term.mono[c]; ++e) g = g.times_coordinate(static_cast<int>(c));
    out += g.scaled(term.coeff);
  }
  return out;
}

// ---------------------------------------------------------------------------
// inner products
// ---------------------------------------------------------------------------
std::complex<double> inner_product(const GaugeSpec& spec, const ExtendedBasis& basis,
                                   const ModeFn& f, const ModeFn& g,
                                   const Eigen::VectorXd& sigma_f,
                                   const Eigen::VectorXd& sigma_g, MeasureWeight weight,
                                   const InnerProductRule& rule) {
  const Eigen::Index n_modes = mode_count(spec);
  if (sigma_f.size() != n_modes || sigma_g.size() != n_modes)
    throw std::invalid_argument("inner_product: envelope size must match the mode count");
  for (Eigen::Index c = 0; c < n_modes; ++c)
    if (sigma_f[c] + sigma_g[c] <= 0.0)
      throw std::invalid_argument("inner_product: combined envelope must decay");
  if (rule.points_per_mode < 2)
    throw std::invalid_argument("inner_product: need at least two points per mode");
  if (rule.max_poly_degree >= 0 && 2 * rule.points_per_mode - 1 < rule.max_poly_degree)
    throw std::invalid_argument("inner_product: quadrature order below the polynomial degree");
  if (rule.origin.size() != 0 && rule.origin.size() != n_modes)
    throw std::invalid_argument("inner_product: origin size must match the mode count");

  const Quadrature gh = gauss_hermite(rule.points_per_mode);
  const Eigen::Index n_nodes = gh.nodes.size();

  Eigen::VectorXd stretch(n_modes);
  double scale = 1.0;
  for (Eigen::Index c = 0; c < n_modes; ++c) {
    stretch[c] = std::sqrt(2.0 / (sigma_f[c] + sigma_g[c]));
    scale *= stretch[c];
  }

  const Eigen::Index n_free = 3 * spec.n_particles - 3;
  std::vector<double> amplitudes(static_cast<std::size_t>(n_free), 0.0);

  KahanSum re, im;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_modes), 0);
  Eigen::VectorXd q(n_modes);
  while (true) {
    double wprod = 1.0, t_sq = 0.0;
    for (Eigen::Index c = 0; c < n_modes; ++c) {
      const double x = gh.nodes[idx[static_cast<std::size_t>(c)]];
      q[c] = x * stretch[c];
      wprod *= gh.weights[idx[static_cast<std::size_t>(c)]];
      t_sq += x * x;
    }
    bool keep = !rule.region || rule.region(q);
    double jac_weight = 1.0;
    if (keep && weight == MeasureWeight::with_jacobian) {
      for (Eigen::Index c = 0; c < n_modes; ++c)
        amplitudes[static_cast<std::size_t>(c)] =
            q[c] + (rule.origin.size() ? rule.origin[c] : 0.0);
      Configuration body = embed_coords(spec, basis, amplitudes);
      const GaugeGeometry geom = eval_geometry(spec, body);
      jac_weight = geom.jac;  // hard zero at and beyond the horizon
      if (jac_weight == 0.0) keep = false;
    }
    if (keep) {
      // split the envelope-cancelling factor to keep both halves finite
      const double half = std::exp(0.5 * t_sq);
      const std::complex<double> val =
          (std::conj(f(q)) * half) * (g(q) * half) * wprod * jac_weight;
      re.add(val.real());
      im.add(val.imag());
    }
    // odometer
    Eigen::Index pos = 0;
    while (pos < n_modes) {
      if (++idx[static_cast<std::size_t>(pos)] < n_nodes) break;
      idx[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n_modes) break;
  }
  return std::complex<double>(re.sum, im.sum) * scale;
}

std::complex<double> inner_product(const GaugeSpec& spec, const ExtendedBasis& basis,
                                   const GaussPoly& f, const GaussPoly& g,
                                   MeasureWeight weight, InnerProductRule rule) {
  if (rule.max_poly_degree < 0) rule.max_poly_degree = f.degree() + g.degree();
  const GaussPoly* fp = &f;
  const GaussPoly* gp = &g;
  return inner_product(
      spec, basis, [fp](const Eigen::VectorXd& q) { return fp->value(q); },
      [gp](const Eigen::VectorXd& q) { return gp->value(q); }, f.sigma, g.sigma, weight, rule);
}

}  // namespace rotframe
