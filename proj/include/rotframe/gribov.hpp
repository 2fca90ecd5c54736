#pragma once

// Enumeration of gauge copies: the rotations U for which a lab configuration
// satisfies the gauge conditions in the rotated frame.  Roots of S_a(U r) = 0
// over SO(3) are found by grid seeding plus damped Newton refinement with the
// analytic Jacobian (the rotational response matrix), then classified by the
// sign of det qmat and by caller-supplied supplementary sign conditions.

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "rotframe/gauge.hpp"

namespace rotframe {

// Sign condition evaluated on the body-frame configuration of a root.
using CopyPredicate = std::function<bool(const Configuration&)>;

struct GribovSearch {
  int grid = 24;               // Euler-angle seeds per axis (grid^3 cells)
  int max_iterations = 50;     // damped Newton steps per seed
  double tol = 1e-12;          // residual norm, relative to the config scale
  double merge_radius = 1e-4;  // geodesic deduplication radius
  double horizon_floor = 1e-6; // minimal |det qmat| relative to scale
  unsigned threads = 0;        // 0 = hardware default; ROTFRAME_THREADS caps
};

struct GaugeCopy {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // body = rotation * lab
  double det_q = 0.0;     // signed response determinant at the root
  double jac = 0.0;       // unsigned volume factor at the root
  double residual = 0.0;  // max |S_a| at the root
  std::vector<bool> predicate_flags;
};

struct CopyReport {
  std::vector<GaugeCopy> roots;
  int total_count = 0;
  int count_jac_positive = 0;  // roots with det_q > 0
  int count_fully_fixed = 0;   // det_q > 0 and every predicate holds
  long converged_seeds = 0;
  long failed_seeds = 0;
  bool search_quality_warning = false;  // more than 5% of seeds failed
};

CopyReport find_copies(const GaugeSpec& spec, const Configuration& cfg_lab,
                       const std::vector<CopyPredicate>& predicates = {},
                       const GribovSearch& search = {});

// Copy multiplicity across a sample of lab configurations: the fully fixed
// count when predicates are supplied, otherwise the det-positive count.
struct IdentityResolution {
  std::vector<int> multiplicities;  // one entry per sample
  bool constant = false;
  int multiplicity = 0;  // the common value when constant
};

IdentityResolution verify_identity_resolution(const GaugeSpec& spec,
                                              const std::vector<Configuration>& samples,
                                              const std::vector<CopyPredicate>& predicates = {},
                                              const GribovSearch& search = {});

// Worked example for the axis gauge (particle 1 on the X axis, particle 2 in
// the XZ plane): the orientation sign det qmat > 0 (equivalently R2z < 0
// there) and the supplementary half-axis condition R1x > 0.
std::vector<CopyPredicate> axis_gauge_predicates(const GaugeSpec& spec);

// Rotation angle of a b^T: the geodesic distance on SO(3).
double geodesic_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

// Worker count honoring the ROTFRAME_THREADS environment cap.
unsigned worker_count(unsigned requested);

}  // namespace rotframe
