#pragma once
// Photon-pair source characterization: singles/coincidence count model,
// pump power scans, and pair-number extraction from measured counts.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "teleportsim/core.hpp"
#include "teleportsim/stats.hpp"

namespace tsim {

// Rate-level model of a pulsed pair source with Raman background and darks.
// Rates are per second, transmissions are probabilities, window is seconds.
struct PairCountModel {
  double pair_rate = 0.0;        // true pair rate R at the source
  double raman_rate_s = 0.0;     // noise photon rate into the signal channel
  double raman_rate_i = 0.0;     // noise photon rate into the idler channel
  double collection_s = 1.0;     // signal transmission incl. detector
  double collection_i = 1.0;     // idler transmission incl. detector
  double dark_rate_s = 0.0;      // signal dark count rate
  double dark_rate_i = 0.0;      // idler dark count rate
  double window = 200e-12;       // coincidence window
};

inline void validate(const PairCountModel& m) {
  if (!(m.pair_rate >= 0.0)) throw InputError("pair_rate must be >= 0");
  if (!(m.raman_rate_s >= 0.0) || !(m.raman_rate_i >= 0.0)) {
    throw InputError("raman rates must be >= 0");
  }
  if (!(m.collection_s >= 0.0 && m.collection_s <= 1.0) ||
      !(m.collection_i >= 0.0 && m.collection_i <= 1.0)) {
    throw InputError("collection efficiencies must be in [0, 1]");
  }
  if (!(m.dark_rate_s >= 0.0) || !(m.dark_rate_i >= 0.0)) {
    throw InputError("dark rates must be >= 0");
  }
  if (!(m.window > 0.0)) throw InputError("window must be > 0");
}

struct PredictedCounts {
  double singles_s = 0.0;
  double singles_i = 0.0;
  double coincidences = 0.0;
  double accidentals = 0.0;
};

// Singles collect true pairs, Raman noise, and darks; accidentals follow
// from the singles rates and the window; true coincidences add on top, so
// coincidences >= accidentals always holds.
inline PredictedCounts predict_counts(const PairCountModel& m,
                                      double integration_s) {
  validate(m);
  if (!(integration_s > 0.0)) throw InputError("integration_s must be > 0");
  const double rate_s =
      (m.pair_rate + m.raman_rate_s) * m.collection_s + m.dark_rate_s;
  const double rate_i =
      (m.pair_rate + m.raman_rate_i) * m.collection_i + m.dark_rate_i;
  const double rate_ac = rate_s * rate_i * m.window;
  const double rate_co =
      m.pair_rate * m.collection_s * m.collection_i + rate_ac;
  PredictedCounts out;
  out.singles_s = rate_s * integration_s;
  out.singles_i = rate_i * integration_s;
  out.accidentals = rate_ac * integration_s;
  out.coincidences = rate_co * integration_s;
  return out;
}

struct PowerScanPoint {
  double pump_power_mw = 0.0;
  double singles_s = 0.0;
  double singles_i = 0.0;
  double coincidences = 0.0;
  double accidentals = 0.0;
  double integration_s = 1.0;
};

struct PowerScanFit {
  FitResult signal;  // quadratic in pump power, singles rate [1/s]
  FitResult idler;
};

// Fits each singles rate as a quadratic in pump power (pairs scale with P^2
// through cascaded mixing, Raman noise linearly, darks constant). With
// poisson_weighted the points are inverse-variance weighted by their counts.
inline PowerScanFit fit_power_scan(const std::vector<PowerScanPoint>& points,
                                   bool poisson_weighted = false) {
  if (points.size() < 4) {
    throw FitError("power scan fit needs at least 4 points");
  }
  for (const PowerScanPoint& p : points) {
    if (!(p.pump_power_mw >= 0.0)) throw InputError("pump power must be >= 0");
    if (!(p.integration_s > 0.0)) throw InputError("integration_s must be > 0");
    if (p.singles_s < 0.0 || p.singles_i < 0.0) {
      throw InputError("singles counts must be >= 0");
    }
  }
  auto channel = [&](bool signal) {
    std::vector<Point2> pts;
    std::vector<double> weights;
    pts.reserve(points.size());
    for (const PowerScanPoint& p : points) {
      const double counts = signal ? p.singles_s : p.singles_i;
      pts.push_back({p.pump_power_mw, counts / p.integration_s});
      // var(rate) = counts / T^2 for Poissonian counts.
      weights.push_back(p.integration_s * p.integration_s /
                        std::max(counts, 1.0));
    }
    return poisson_weighted ? weighted_quadratic(pts, weights)
                            : least_squares(pts, FitModel::kQuadratic);
  };
  return {channel(true), channel(false)};
}

struct PairNumberResult {
  double pair_rate = 0.0;  // R, pairs per second at the source
  double mu = 0.0;         // mean pairs per pulse, R / rep_rate
};

// Inverts the coincidence model: R = (N_co - N_ac) / (t_s * t_i * T).
inline PairNumberResult extract_pair_number(double coincidences,
                                            double accidentals,
                                            double collection_s,
                                            double collection_i,
                                            double integration_s,
                                            double rep_rate_hz) {
  if (coincidences < 0.0 || accidentals < 0.0) {
    throw InputError("counts must be >= 0");
  }
  if (coincidences < accidentals) {
    throw InputError("coincidences below accidentals: nonphysical input");
  }
  if (!(collection_s > 0.0 && collection_s <= 1.0) ||
      !(collection_i > 0.0 && collection_i <= 1.0)) {
    throw InputError("collection efficiencies must be in (0, 1]");
  }
  if (!(integration_s > 0.0)) throw InputError("integration_s must be > 0");
  if (!(rep_rate_hz > 0.0)) throw InputError("rep_rate_hz must be > 0");
  PairNumberResult out;
  out.pair_rate = (coincidences - accidentals) /
                  (collection_s * collection_i * integration_s);
  out.mu = out.pair_rate / rep_rate_hz;
  return out;
}

// Coincidence-to-accidental ratio; +inf when no accidentals were recorded.
inline double car(double coincidences, double accidentals) {
  if (coincidences < 0.0 || accidentals < 0.0) {
    throw InputError("counts must be >= 0");
  }
  if (accidentals == 0.0) return std::numeric_limits<double>::infinity();
  return coincidences / accidentals;
}

}  // namespace tsim
