#include "rotframe/gauge.hpp"

#include <vector>

namespace rotframe {

namespace {

inline int eps3(int i, int j, int k) { return detail::eps3(i, j, k); }

}  // namespace

QuantumPotentials eval_quantum_potentials(const GaugeSpec& spec, const Configuration& cfg) {
  const Eigen::Index n = spec.n_particles;
  const GaugeGeometry g = eval_geometry(spec, cfg);
  if (g.singular || g.jac < 1e-10)
    throw std::domain_error("eval_quantum_potentials: configuration on the horizon");

  // qinv(i,a): sum_i qmat(a,i) qinv(i,b) = delta_ab (same convention as
  // eval_geometry; recomputed here since eval_geometry does not expose it).
  Eigen::Matrix3d qm;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i) qm(a, i) = g.qmat[a][i];
  const Eigen::Matrix3d qinv = qm.inverse();  // qinv(i,a) = (qm^{-1})(i,a)

  Eigen::Matrix3d ninv;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) ninv(j, k) = g.ninv[j][k];

  auto gamma = [&](int a, Eigen::Index al, int i) -> double {
    return spec.gamma[static_cast<std::size_t>(a)][al * 3 + i];
  };
  auto pos = [&](Eigen::Index al, int i) -> double { return cfg.positions[al * 3 + i]; };

  QuantumPotentials out;

  // v1: contraction of two frame-response inverses against the gauge rows.
  double v1 = 0.0;
  for (Eigen::Index al = 0; al < n; ++al) {
    const double mass = spec.masses[static_cast<std::size_t>(al)];
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d)
        for (int l = 0; l < 3; ++l)
          for (int lp = 0; lp < 3; ++lp)
            for (int mm = 0; mm < 3; ++mm)
              for (int kk = 0; kk < 3; ++kk)
                for (int p = 0; p < 3; ++p) {
                  const int e1 = eps3(kk, lp, p), e2 = eps3(p, l, mm);
                  if (e1 == 0 || e2 == 0) continue;
                  v1 += -0.125 * mass * qinv(lp, c) * gamma(c, al, l) *
                        qinv(mm, d) * gamma(d, al, kk) * e1 * e2;
                }
  }
  out.v1 = v1;

  // v2: contraction of the inverse rotational metric with two projector-like
  // tensors built from the configuration and the frame response.
  std::vector<double> a1(static_cast<std::size_t>(n * n * 9), 0.0);
  std::vector<double> a2(static_cast<std::size_t>(n * n * 9), 0.0);
  auto idx = [&](Eigen::Index be, Eigen::Index ga, int x, int y) -> std::size_t {
    return static_cast<std::size_t>(((be * n + ga) * 3 + x) * 3 + y);
  };
  for (Eigen::Index be = 0; be < n; ++be)
    for (Eigen::Index ga = 0; ga < n; ++ga) {
      for (int lp = 0; lp < 3; ++lp)
        for (int nn = 0; nn < 3; ++nn) {
          double v = (be == ga && lp == nn) ? 1.0 : 0.0;
          double s = 0.0;
          for (int gg = 0; gg < 3; ++gg)
            for (int ss = 0; ss < 3; ++ss) {
              const int e = eps3(lp, gg, ss);
              if (e == 0) continue;
              for (int a = 0; a < 3; ++a)
                s += e * pos(ga, ss) * qinv(gg, a) *
                     spec.masses[static_cast<std::size_t>(be)] * gamma(a, be, nn);
            }
          a1[idx(be, ga, lp, nn)] = v - s;
        }
      for (int np = 0; np < 3; ++np)
        for (int l = 0; l < 3; ++l) {
          double v = (be == ga && np == l) ? 1.0 : 0.0;
          double s = 0.0;
          for (int mm = 0; mm < 3; ++mm)
            for (int p = 0; p < 3; ++p) {
              const int e = eps3(l, mm, p);
              if (e == 0) continue;
              for (int b = 0; b < 3; ++b)
                s += e * pos(be, p) * qinv(mm, b) *
                     spec.masses[static_cast<std::size_t>(ga)] * gamma(b, ga, np);
            }
          a2[idx(be, ga, np, l)] = v - s;
        }
    }

  double v2 = 0.0;
  for (Eigen::Index be = 0; be < n; ++be)
    for (Eigen::Index ga = 0; ga < n; ++ga)
      for (int nn = 0; nn < 3; ++nn)
        for (int l = 0; l < 3; ++l)
          for (int kk = 0; kk < 3; ++kk) {
            const int e1 = eps3(nn, l, kk);
            if (e1 == 0) continue;
            for (int hh = 0; hh < 3; ++hh)
              for (int lp = 0; lp < 3; ++lp)
                for (int np = 0; np < 3; ++np) {
                  const int e2 = eps3(hh, lp, np);
                  if (e2 == 0) continue;
                  v2 += -0.125 * e1 * ninv(kk, hh) * e2 * a1[idx(be, ga, lp, nn)] *
                        a2[idx(be, ga, np, l)];
                }
          }
  out.v2 = v2;
  return out;
}

}  // namespace rotframe
