#pragma once
// Closed-form model of the three-fold coincidence rate and fidelity of
// time-bin teleportation with a weak coherent qubit source and an SPDC
// entangled-pair source.

#include <algorithm>
#include <cmath>
#include <vector>

#include "teleportsim/core.hpp"

namespace tsim {

// Probabilities per pulse of the four photon-number cases that produce a
// three-fold coincidence. The index triple reads (photons from the qubit
// source reaching the BSM, idler photons reaching the BSM, signal photons
// available at the receiver). Only the first and last interfere correctly;
// the middle two are background that dilutes the fidelity.
struct CaseProbabilities {
  double p111 = 0.0;
  double p022 = 0.0;
  double p201 = 0.0;
  double p112 = 0.0;

  double sum() const { return p111 + p022 + p201 + p112; }
};

// Leading-order case probabilities. The two-signal-photon cases detect at
// least one of the two signal photons, 1 - (1 - eta_s*xi_s)^2; with
// strict_two_photon the storage transmission is left out of that factor and
// only the detector efficiency enters, which overstates the background.
inline CaseProbabilities case_probabilities(const SystemParams& p,
                                            bool strict_two_photon = false) {
  validate(p);
  const double mu_bsm = p.mu_a * p.eta_a;          // qubit photons at the BSM
  const double atten = std::exp(-mu_bsm);
  const double xi2 = p.xi_bsm * p.xi_bsm;
  const double one_signal = p.eta_s * p.xi_s;
  const double det2 = strict_two_photon
                          ? 1.0 - (1.0 - p.xi_s * p.xi_s) * (1.0 - p.xi_s * p.xi_s)
                          : 1.0 - (1.0 - one_signal) * (1.0 - one_signal);
  CaseProbabilities c;
  c.p111 = 0.25 * p.mu_spdc * mu_bsm * atten * p.eta_i * xi2 * one_signal;
  c.p022 = 0.25 * p.mu_spdc * p.mu_spdc * atten * p.eta_i * p.eta_i * xi2 * det2;
  c.p201 = 0.25 * p.mu_spdc * 0.5 * mu_bsm * mu_bsm * atten * (1.0 - p.eta_i) *
           xi2 * one_signal;
  c.p112 = 0.5 * p.mu_spdc * p.mu_spdc * mu_bsm * atten * (1.0 - p.eta_i) *
           p.eta_i * xi2 * det2;
  return c;
}

// F = 1/2 + zeta * (interfering cases) / (2 * all cases).
inline double equatorial_fidelity(const CaseProbabilities& c, double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw InputError("zeta must be in [0, 1]");
  if (c.p111 < 0.0 || c.p022 < 0.0 || c.p201 < 0.0 || c.p112 < 0.0) {
    throw InputError("case probabilities must be >= 0");
  }
  const double total = c.sum();
  if (!(total > 0.0)) {
    throw NumericalError("fidelity undefined: all case probabilities are zero");
  }
  return 0.5 + zeta * (c.p111 + c.p112) / (2.0 * total);
}

// Three-fold rate in Hz. correction_db removes a known analysis loss from
// the detected rate (dividing by its transmission), e.g. the interferometer
// and detection losses of the measurement apparatus.
inline double teleport_rate(const CaseProbabilities& c, double rep_rate_hz,
                            double correction_db = 0.0) {
  if (!(rep_rate_hz > 0.0)) throw InputError("rep_rate_hz must be > 0");
  if (c.p111 < 0.0 || c.p022 < 0.0 || c.p201 < 0.0 || c.p112 < 0.0) {
    throw InputError("case probabilities must be >= 0");
  }
  return rep_rate_hz * c.sum() / db_to_linear(correction_db);
}

// Equatorial fidelity from a measured fringe visibility.
inline double fidelity_from_visibility(double visibility) {
  if (!(visibility >= -1.0 && visibility <= 1.0)) {
    throw InputError("visibility must be in [-1, 1]");
  }
  return 0.5 * (1.0 + visibility);
}

// Pole-state fidelity from correct/wrong counts or rates.
inline double pole_fidelity(double correct, double wrong) {
  if (correct < 0.0 || wrong < 0.0) throw InputError("counts must be >= 0");
  const double total = correct + wrong;
  if (!(total > 0.0)) {
    throw NumericalError("fidelity undefined: no counts in either bin");
  }
  return correct / total;
}

enum class AverageMode {
  // (4*F_equator + F_e + F_l) / 6: equatorial states assumed identical.
  kEquatorAndPoles,
  // (2*(F_plus + F_plus_i) + F_e + F_l) / 6: four measured states.
  kFourState
};

// Bloch-sphere average fidelity with symmetric error propagation.
inline Measured average_fidelity(const FidelitySummary& f, AverageMode mode) {
  auto need = [](const std::optional<Measured>& m, const char* name) {
    if (!m.has_value()) {
      throw InputError(std::string("average_fidelity: missing ") + name);
    }
    if (!(m->value >= 0.0 && m->value <= 1.0) || !(m->sigma >= 0.0)) {
      throw InputError(std::string("average_fidelity: invalid ") + name);
    }
    return *m;
  };
  const Measured fe = need(f.f_e, "f_e");
  const Measured fl = need(f.f_l, "f_l");
  Measured out;
  if (mode == AverageMode::kEquatorAndPoles) {
    const Measured feq = need(f.f_equator, "f_equator");
    out.value = (4.0 * feq.value + fe.value + fl.value) / 6.0;
    out.sigma = std::sqrt(16.0 * feq.sigma * feq.sigma + fe.sigma * fe.sigma +
                          fl.sigma * fl.sigma) /
                6.0;
  } else {
    const Measured fp = need(f.f_plus, "f_plus");
    const Measured fpi = need(f.f_plus_i, "f_plus_i");
    out.value = (2.0 * (fp.value + fpi.value) + fe.value + fl.value) / 6.0;
    out.sigma = std::sqrt(4.0 * fp.sigma * fp.sigma + 4.0 * fpi.sigma * fpi.sigma +
                          fe.sigma * fe.sigma + fl.sigma * fl.sigma) /
                6.0;
  }
  return out;
}

enum class SweepVariable { kMuA, kMuSpdc, kDistanceKm };

struct SweepSpec {
  SweepVariable variable = SweepVariable::kMuA;
  std::vector<double> values;
  double fiber_loss_db_per_km = 0.2;
  double correction_db = 0.0;
};

struct SweepPoint {
  double x = 0.0;
  double fidelity = 0.0;
  double rate_hz = 0.0;
};

// Fidelity and rate as one parameter varies. Mean photon numbers enter the
// case probabilities nonlinearly and are recomputed per point. Added fiber
// on the signal multiplies every case by the same linear transmission (the
// O(eta_s*xi_s) change of the two-photon detection factor is dropped), so
// the rate decays exactly exponentially with distance and the fidelity is
// exactly distance-independent.
inline std::vector<SweepPoint> sweep(const SystemParams& p, const SweepSpec& s) {
  validate(p);
  if (s.values.empty()) throw InputError("sweep needs at least one value");
  if (!(s.fiber_loss_db_per_km >= 0.0)) {
    throw InputError("fiber_loss_db_per_km must be >= 0");
  }
  std::vector<SweepPoint> out;
  out.reserve(s.values.size());
  if (s.variable == SweepVariable::kDistanceKm) {
    const double base_km = *std::min_element(s.values.begin(), s.values.end());
    const CaseProbabilities base = case_probabilities(p);
    const double fidelity = equatorial_fidelity(base, p.zeta);
    for (double km : s.values) {
      const double t = db_to_linear(s.fiber_loss_db_per_km * (km - base_km));
      CaseProbabilities c = base;
      c.p111 *= t;
      c.p022 *= t;
      c.p201 *= t;
      c.p112 *= t;
      out.push_back({km, fidelity, teleport_rate(c, p.rep_rate_hz, s.correction_db)});
    }
    return out;
  }
  for (double v : s.values) {
    SystemParams q = p;
    if (s.variable == SweepVariable::kMuA) {
      q.mu_a = v;
    } else {
      q.mu_spdc = v;
    }
    const CaseProbabilities c = case_probabilities(q);
    out.push_back({v, equatorial_fidelity(c, q.zeta),
                   teleport_rate(c, q.rep_rate_hz, s.correction_db)});
  }
  return out;
}

}  // namespace tsim
