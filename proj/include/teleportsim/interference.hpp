#pragma once
// Two-photon interference: Hong-Ou-Mandel coincidence model, dip fitting,
// indistinguishability, and interference fringe visibility.

#include <algorithm>
#include <cmath>
#include <vector>

#include "teleportsim/core.hpp"
#include "teleportsim/stats.hpp"

namespace tsim {

// Mean photon numbers and normalized second-order correlations of the two
// inputs to the beamsplitter; overlap is the effective mode overlap of the
// wavepackets (indistinguishability times any temporal envelope).
struct HomConfig {
  double mean_n1 = 0.0;
  double mean_n2 = 0.0;
  double g2_1 = 1.0;
  double g2_2 = 1.0;
  double overlap = 1.0;
};

inline void validate(const HomConfig& c) {
  if (!(c.mean_n1 >= 0.0) || !(c.mean_n2 >= 0.0)) {
    throw InputError("mean photon numbers must be >= 0");
  }
  if (!(c.g2_1 >= 0.0) || !(c.g2_2 >= 0.0)) {
    throw InputError("g2 values must be >= 0");
  }
  if (!(c.overlap >= 0.0 && c.overlap <= 1.0)) {
    throw InputError("overlap must be in [0, 1]");
  }
}

// Coincidence probability across the beamsplitter outputs for weak fields:
// same-source terms g2*n^2 survive, the cross term is suppressed by the
// overlap. Perfect overlap of identical single photons gives zero.
inline double hom_coincidence_probability(const HomConfig& c) {
  validate(c);
  return 0.25 * (c.g2_1 * c.mean_n1 * c.mean_n1 +
                 c.g2_2 * c.mean_n2 * c.mean_n2 +
                 2.0 * c.mean_n1 * c.mean_n2 * (1.0 - c.overlap));
}

// Dip visibility for fully overlapping wavepackets:
// V = 2 n1 n2 / (g2_1 n1^2 + g2_2 n2^2 + 2 n1 n2).
inline double hom_visibility(double mean_n1, double mean_n2, double g2_1,
                             double g2_2) {
  if (!(mean_n1 > 0.0) || !(mean_n2 > 0.0)) {
    throw InputError("mean photon numbers must be > 0");
  }
  if (!(g2_1 >= 0.0) || !(g2_2 >= 0.0)) {
    throw InputError("g2 values must be >= 0");
  }
  const double cross = 2.0 * mean_n1 * mean_n2;
  return cross /
         (g2_1 * mean_n1 * mean_n1 + g2_2 * mean_n2 * mean_n2 + cross);
}

// Ratio of measured to source-statistics-limited visibility; may exceed 1
// for noisy estimates of a near-ideal interferometer.
inline double indistinguishability(double v_measured, double v_theory) {
  if (!(v_theory > 0.0)) throw InputError("theory visibility must be > 0");
  if (!(v_measured >= 0.0)) throw InputError("measured visibility must be >= 0");
  return v_measured / v_theory;
}

struct DipPoint {
  double delay_ps = 0.0;
  double coincidences = 0.0;
  double integration_s = 1.0;
};

// Scan of coincidences vs relative delay; delays must be sorted ascending.
using DipScan = std::vector<DipPoint>;

struct DipFit {
  double baseline = 0.0;    // coincidence rate far from the dip [1/s]
  double visibility = 0.0;
  double center_ps = 0.0;
  double width_ps = 0.0;    // Gaussian sigma of the dip
  FitResult fit;            // params {B, V, t0, w}
};

// Fits rate(tau) = B * (1 - V * exp(-(tau - t0)^2 / (2 w^2))).
inline DipFit fit_hom_dip(const DipScan& scan) {
  if (scan.size() < 5) throw InputError("dip scan needs at least 5 points");
  std::vector<Point2> pts;
  pts.reserve(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (i > 0 && !(scan[i].delay_ps > scan[i - 1].delay_ps)) {
      throw InputError("dip scan delays must be strictly increasing");
    }
    if (scan[i].coincidences < 0.0) throw InputError("counts must be >= 0");
    if (!(scan[i].integration_s > 0.0)) {
      throw InputError("integration_s must be > 0");
    }
    pts.push_back({scan[i].delay_ps, scan[i].coincidences / scan[i].integration_s});
  }
  DipFit out;
  out.fit = least_squares(pts, FitModel::kGaussianDip);
  out.baseline = out.fit.params[0];
  out.visibility = out.fit.params[1];
  out.center_ps = out.fit.params[2];
  out.width_ps = out.fit.params[3];
  return out;
}

struct FringePoint {
  double phase_rad = 0.0;
  double counts = 0.0;
  double integration_s = 1.0;
};

struct FringeFit {
  double visibility = 0.0;
  double visibility_sigma = 0.0;
  double phase_offset = 0.0;  // in [0, 2*pi)
  double amplitude = 0.0;     // mean rate level [1/s]
  FitResult fit;              // params {A, V, p0}
};

// Fits rate(phi) = A * (1 + V * cos(phi + p0)). The fixed-period sinusoid is
// linear in (A, A V cos p0, -A V sin p0), so the fit is a closed-form
// normal-equation solve. Requires at least 6 points spanning a full period.
inline FringeFit fringe_visibility(const std::vector<FringePoint>& points) {
  if (points.size() < 6) throw InputError("fringe scan needs at least 6 points");
  double lo = points.front().phase_rad;
  double hi = lo;
  std::vector<Point2> pts;
  pts.reserve(points.size());
  for (const FringePoint& p : points) {
    if (p.counts < 0.0) throw InputError("counts must be >= 0");
    if (!(p.integration_s > 0.0)) throw InputError("integration_s must be > 0");
    lo = std::min(lo, p.phase_rad);
    hi = std::max(hi, p.phase_rad);
    pts.push_back({p.phase_rad, p.counts / p.integration_s});
  }
  // Phase is periodic, so a uniform grid of n points covers the period when
  // the edge-to-edge span plus one mean step reaches 2*pi.
  const double n = static_cast<double>(points.size());
  if ((hi - lo) * n / (n - 1.0) < kTwoPi - 1e-9) {
    throw FitError("fringe scan must span at least one full period");
  }
  FringeFit out;
  out.fit = least_squares(pts, FitModel::kSinusoidFixedPeriod);
  out.amplitude = out.fit.params[0];
  out.visibility = out.fit.params[1];
  out.phase_offset = out.fit.params[2];
  out.visibility_sigma = out.fit.std_errors[1];
  return out;
}

}  // namespace tsim
