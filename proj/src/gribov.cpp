#include "rotframe/gribov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "rotframe/rotation.hpp"

namespace rotframe {

namespace {

Configuration rotate_to_body(const Configuration& lab, const Eigen::Matrix3d& u) {
  Configuration body;
  body.n_particles = lab.n_particles;
  body.frame_tag = FrameTag::body;
  body.positions.assign(lab.positions.size(), 0.0);
  for (Eigen::Index al = 0; al < lab.n_particles; ++al) {
    const Eigen::Vector3d r(lab.positions[al * 3], lab.positions[al * 3 + 1],
                            lab.positions[al * 3 + 2]);
    const Eigen::Vector3d rb = u * r;
    for (int i = 0; i < 3; ++i) body.positions[al * 3 + i] = rb[i];
  }
  return body;
}

Eigen::Vector3d gauge_values(const GaugeSpec& spec, const Configuration& body) {
  const std::array<double, 3> s = eval_gauge(spec, body);
  return Eigen::Vector3d(s[0], s[1], s[2]);
}

// Response matrix qmat_{ac} = dS_a/de_c for a left-multiplicative update
// U -> exp(hat(e)) U of the frame.
Eigen::Matrix3d response_matrix(const GaugeSpec& spec, const Configuration& body) {
  Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i) {
      double acc = 0.0;
      for (Eigen::Index b = 0; b < spec.n_particles; ++b)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            const int e = detail::eps3(j, i, k);
            if (e != 0)
              acc += spec.masses[b] * spec.gamma[static_cast<std::size_t>(a)][b * 3 + j] *
                     body.positions[b * 3 + k] * e;
          }
      q(a, i) = acc;
    }
  return q;
}

Eigen::Matrix3d exp_rotation(const Eigen::Vector3d& v) {
  return rotation_matrix(RotationChart{ChartKind::exponential, v});
}

Eigen::Matrix3d reorthonormalize(const Eigen::Matrix3d& u) {
  Eigen::Quaterniond q(u);
  q.normalize();
  return q.toRotationMatrix();
}

struct SeedResult {
  bool converged = false;
  Eigen::Matrix3d u = Eigen::Matrix3d::Identity();
};

SeedResult refine_seed(const GaugeSpec& spec, const Configuration& lab,
                       const Eigen::Matrix3d& seed, double tol_abs, int max_iterations) {
  SeedResult out;
  Eigen::Matrix3d u = seed;
  Eigen::Vector3d s = gauge_values(spec, rotate_to_body(lab, u));
  double ns = s.norm();
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (ns <= tol_abs) {
      out.converged = true;
      out.u = u;
      return out;
    }
    const Configuration body = rotate_to_body(lab, u);
    const Eigen::Matrix3d q = response_matrix(spec, body);
    Eigen::FullPivLU<Eigen::Matrix3d> lu(q);
    if (!lu.isInvertible()) return out;
    const Eigen::Vector3d step = lu.solve(-s);

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 50; ++halving) {
      const Eigen::Matrix3d u2 = reorthonormalize(exp_rotation(t * step) * u);
      const Eigen::Vector3d s2 = gauge_values(spec, rotate_to_body(lab, u2));
      if (s2.norm() < ns) {
        u = u2;
        s = s2;
        ns = s2.norm();
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return out;
  }
  if (ns <= tol_abs) {
    out.converged = true;
    out.u = u;
  }
  return out;
}

// Deterministic ordering: canonical quaternion (non-negative leading
// component), compared lexicographically.
Eigen::Vector4d canonical_quaternion(const Eigen::Matrix3d& u) {
  Eigen::Quaterniond q(u);
  Eigen::Vector4d v(q.w(), q.x(), q.y(), q.z());
  for (int i = 0; i < 4; ++i) {
    if (v[i] > 0.0) break;
    if (v[i] < 0.0) {
      v = -v;
      break;
    }
  }
  return v;
}

}  // namespace

double geodesic_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double c = ((a * b.transpose()).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

unsigned worker_count(unsigned requested) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ROTFRAME_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

CopyReport find_copies(const GaugeSpec& spec, const Configuration& cfg_lab,
                       const std::vector<CopyPredicate>& predicates,
                       const GribovSearch& search) {
  validate_spec(spec);
  if (cfg_lab.n_particles != spec.n_particles ||
      cfg_lab.positions.size() != static_cast<std::size_t>(3 * spec.n_particles))
    throw std::invalid_argument("find_copies: configuration size mismatch");
  if (search.grid < 2) throw std::invalid_argument("find_copies: grid too coarse");

  // scale of one gauge value: sqrt(row norm) * mass-weighted config norm
  double mr2 = 0.0;
  for (Eigen::Index al = 0; al < spec.n_particles; ++al)
    for (int i = 0; i < 3; ++i)
      mr2 += spec.masses[al] * cfg_lab.positions[al * 3 + i] * cfg_lab.positions[al * 3 + i];
  double rows2 = 0.0;
  for (int a = 0; a < 3; ++a) rows2 += spec.norm_sq[a];
  const double tol_abs = search.tol * std::sqrt(rows2 * mr2);

  const long n_seeds = static_cast<long>(search.grid) * search.grid * search.grid;
  const unsigned n_workers =
      static_cast<unsigned>(std::min<long>(worker_count(search.threads), n_seeds));

  std::vector<std::vector<SeedResult>> found(n_workers);
  std::vector<long> failures(n_workers, 0);
  auto run_range = [&](unsigned w, long lo, long hi) {
    const int g = search.grid;
    for (long s = lo; s < hi; ++s) {
      const int i = static_cast<int>(s % g);
      const int j = static_cast<int>((s / g) % g);
      const int k = static_cast<int>(s / (static_cast<long>(g) * g));
      const Eigen::Vector3d angles(2.0 * M_PI * (i + 0.5) / g, M_PI * (j + 0.5) / g,
                                   2.0 * M_PI * (k + 0.5) / g);
      const Eigen::Matrix3d seed = rotation_matrix(RotationChart{ChartKind::euler_zyz, angles});
      SeedResult r = refine_seed(spec, cfg_lab, seed, tol_abs, search.max_iterations);
      if (r.converged)
        found[w].push_back(r);
      else
        ++failures[w];
    }
  };

  if (n_workers <= 1) {
    run_range(0, 0, n_seeds);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (n_seeds + n_workers - 1) / n_workers;
    for (unsigned w = 0; w < n_workers; ++w)
      pool.emplace_back(run_range, w, w * chunk, std::min(n_seeds, (w + 1) * chunk));
    for (auto& t : pool) t.join();
  }

  CopyReport report;
  for (unsigned w = 0; w < n_workers; ++w) {
    report.converged_seeds += static_cast<long>(found[w].size());
    report.failed_seeds += failures[w];
  }
  report.search_quality_warning = report.failed_seeds * 20 > n_seeds;

  // deterministic merge: sort all converged rotations, then deduplicate
  std::vector<SeedResult> all;
  for (auto& v : found) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end(), [](const SeedResult& a, const SeedResult& b) {
    const Eigen::Vector4d qa = canonical_quaternion(a.u), qb = canonical_quaternion(b.u);
    for (int i = 0; i < 4; ++i) {
      if (qa[i] < qb[i]) return true;
      if (qa[i] > qb[i]) return false;
    }
    return false;
  });

  std::vector<Eigen::Matrix3d> kept;
  for (const auto& r : all) {
    bool dup = false;
    for (const auto& u : kept)
      if (geodesic_distance(r.u, u) <= search.merge_radius) {
        dup = true;
        break;
      }
    if (!dup) kept.push_back(r.u);
  }

  for (const auto& u : kept) {
    const Configuration body = rotate_to_body(cfg_lab, u);
    const GaugeGeometry geom = eval_geometry(spec, body);
    GaugeCopy copy;
    copy.rotation = u;
    copy.det_q = geom.det_q;
    copy.jac = geom.jac;
    const Eigen::Vector3d s = gauge_values(spec, body);
    copy.residual = s.cwiseAbs().maxCoeff();
    for (const auto& pred : predicates) copy.predicate_flags.push_back(pred(body));
    report.roots.push_back(std::move(copy));
  }

  report.total_count = static_cast<int>(report.roots.size());
  double min_abs_det = std::numeric_limits<double>::infinity();
  for (const auto& copy : report.roots) {
    min_abs_det = std::min(min_abs_det, std::abs(copy.det_q));
    if (copy.det_q > 0.0) {
      ++report.count_jac_positive;
      bool all_flags = true;
      for (bool f : copy.predicate_flags) all_flags = all_flags && f;
      if (all_flags) ++report.count_fully_fixed;
    }
  }
  const double det_scale = std::sqrt(spec.norm_sq[0] * spec.norm_sq[1] * spec.norm_sq[2]) *
                           std::pow(mr2, 1.5);
  if (!report.roots.empty() && min_abs_det <= search.horizon_floor * det_scale)
    throw std::domain_error("find_copies: configuration lies on a gauge horizon");
  return report;
}

IdentityResolution verify_identity_resolution(const GaugeSpec& spec,
                                              const std::vector<Configuration>& samples,
                                              const std::vector<CopyPredicate>& predicates,
                                              const GribovSearch& search) {
  IdentityResolution out;
  for (const auto& cfg : samples) {
    const CopyReport report = find_copies(spec, cfg, predicates, search);
    out.multiplicities.push_back(predicates.empty() ? report.count_jac_positive
                                                    : report.count_fully_fixed);
  }
  out.constant = !out.multiplicities.empty();
  for (int v : out.multiplicities) out.constant = out.constant && v == out.multiplicities[0];
  if (out.constant) out.multiplicity = out.multiplicities[0];
  return out;
}

std::vector<CopyPredicate> axis_gauge_predicates(const GaugeSpec& spec) {
  std::vector<CopyPredicate> preds;
  preds.push_back(
      [spec](const Configuration& body) { return eval_geometry(spec, body).sign > 0; });
  preds.push_back([](const Configuration& body) { return body.positions[0] > 0.0; });
  return preds;
}

}  // namespace rotframe
