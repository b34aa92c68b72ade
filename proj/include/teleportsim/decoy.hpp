#pragma once
// Decoy-state bounds on the single-photon yield, error rate, and fidelity
// of the teleportation channel driven by a Poissonian qubit source.

#include <cmath>
#include <string>
#include <vector>

#include "teleportsim/core.hpp"

namespace tsim {

// Measured gains and error rates of one input state at three source
// intensities. Gains may be rates in Hz or probabilities per pulse, as long
// as all three are in the same unit; the bounds are homogeneous in gain.
struct DecoyDataset {
  std::string state_label;
  double mu_signal = 0.0;
  double mu_decoy = 0.0;
  double mu_vacuum = 0.0;  // must be exactly zero
  double gain_signal = 0.0;
  double gain_decoy = 0.0;
  double gain_vacuum = 0.0;
  double error_signal = 0.0;
  double error_decoy = 0.0;
  double error_vacuum = 0.0;
};

inline void validate(const DecoyDataset& d) {
  if (!(d.mu_signal > d.mu_decoy && d.mu_decoy > 0.0)) {
    throw InputError("decoy dataset needs mu_signal > mu_decoy > 0");
  }
  if (d.mu_vacuum != 0.0) throw InputError("mu_vacuum must be 0");
  if (d.gain_signal < 0.0 || d.gain_decoy < 0.0 || d.gain_vacuum < 0.0) {
    throw InputError("gains must be >= 0");
  }
  auto err = [](double e, const char* name) {
    if (!(e >= 0.0 && e <= 1.0)) {
      throw InputError(std::string(name) + " must be in [0, 1]");
    }
  };
  err(d.error_signal, "error_signal");
  err(d.error_decoy, "error_decoy");
  err(d.error_vacuum, "error_vacuum");
}

// Lower bound on the single-photon yield from the decoy and signal gains.
// May come out negative for inconsistent (nonphysical) inputs; callers
// decide whether to flag or reject.
inline double yield_lower_bound(const DecoyDataset& d) {
  validate(d);
  const double mu_s = d.mu_signal;
  const double mu_d = d.mu_decoy;
  const double ratio = (mu_d * mu_d) / (mu_s * mu_s);
  return mu_s / (mu_s * mu_d - mu_d * mu_d) *
         (d.gain_decoy * std::exp(mu_d) - ratio * d.gain_signal * std::exp(mu_s) -
          (1.0 - ratio) * d.gain_vacuum);
}

// Upper bound on the single-photon error rate given a positive yield bound.
inline double error_upper_bound(const DecoyDataset& d, double y1_lower) {
  validate(d);
  if (!(y1_lower > 0.0)) {
    throw NumericalError("error bound undefined: yield lower bound is " +
                         std::to_string(y1_lower));
  }
  return (d.error_decoy * d.gain_decoy * std::exp(d.mu_decoy) -
          d.error_vacuum * d.gain_vacuum) /
         (d.mu_decoy * y1_lower);
}

struct DecoyBounds {
  double y1_lower = 0.0;
  double e1_upper = 0.0;
  double f1_lower = 0.0;
  double sp_gain = 0.0;  // single-photon gain at the decoy intensity
};

// Chains the yield and error bounds into a single-photon fidelity bound.
// e1_upper is reported as computed; values outside [0, 1] indicate inputs
// too noisy for a meaningful bound.
inline DecoyBounds single_photon_fidelity(const DecoyDataset& d) {
  DecoyBounds b;
  b.y1_lower = yield_lower_bound(d);
  b.e1_upper = error_upper_bound(d, b.y1_lower);
  b.f1_lower = 1.0 - b.e1_upper;
  b.sp_gain = std::exp(-d.mu_decoy) * d.mu_decoy * b.y1_lower;
  return b;
}

// Total gain of a Poissonian source at mean photon number mu given the
// per-photon-number yields: Q(mu) = sum_n Y_n mu^n e^(-mu) / n!.
inline double gain_model(const std::vector<double>& yields, double mu) {
  if (!(mu >= 0.0)) throw InputError("mu must be >= 0");
  for (double y : yields) {
    if (!(y >= 0.0 && y <= 1.0)) throw InputError("yields must be in [0, 1]");
  }
  double q = 0.0;
  double weight = std::exp(-mu);  // mu^n e^(-mu) / n! built up iteratively
  for (std::size_t n = 0; n < yields.size(); ++n) {
    if (n > 0) weight *= mu / static_cast<double>(n);
    q += yields[n] * weight;
  }
  return q;
}

// Error-weighted gain under the same model, used to produce consistent
// E(mu) inputs for bound-validity checks: E(mu) Q(mu) = sum_n e_n Y_n p_n.
inline double error_gain_model(const std::vector<double>& yields,
                               const std::vector<double>& errors, double mu) {
  if (errors.size() != yields.size()) {
    throw InputError("errors must match yields");
  }
  if (!(mu >= 0.0)) throw InputError("mu must be >= 0");
  double eq = 0.0;
  double weight = std::exp(-mu);
  for (std::size_t n = 0; n < yields.size(); ++n) {
    if (!(errors[n] >= 0.0 && errors[n] <= 1.0)) {
      throw InputError("errors must be in [0, 1]");
    }
    if (n > 0) weight *= mu / static_cast<double>(n);
    eq += errors[n] * yields[n] * weight;
  }
  return eq;
}

}  // namespace tsim
