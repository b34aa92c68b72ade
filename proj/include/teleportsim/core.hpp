#pragma once
// Shared domain types, time-bin qubit algebra, and unit conversions.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tsim {

inline constexpr std::string_view kVersion = "1.0.0";

// Bad user input or violated precondition (CLI exit code 2).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: undefined result, nonphysical intermediate (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fit did not converge; message carries the last iterate and residual norm.
struct FitError : NumericalError {
  using NumericalError::NumericalError;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace detail {

// Deterministic 64-bit mixer used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// amp_early|e> + amp_late*exp(i*phase)|l>. Canonical form: amplitudes are
// real non-negative, phase in [0, 2*pi), and phase = 0 whenever either
// amplitude vanishes, so equal states compare equal field by field.
struct TimeBinQubit {
  double amp_early = 1.0;
  double amp_late = 0.0;
  double phase = 0.0;

  bool operator==(const TimeBinQubit&) const = default;
};

inline double wrap_phase(double phase) {
  double w = std::fmod(phase, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod can return exactly kTwoPi after the correction when phase is a
  // tiny negative number.
  if (w >= kTwoPi) w = 0.0;
  return w;
}

inline TimeBinQubit canonical(TimeBinQubit q) {
  constexpr double kAmpTol = 1e-12;
  if (!(q.amp_early >= 0.0) || !(q.amp_late >= 0.0)) {
    throw InputError("time-bin qubit amplitudes must be non-negative");
  }
  const double norm2 = q.amp_early * q.amp_early + q.amp_late * q.amp_late;
  if (std::abs(norm2 - 1.0) > 1e-12) {
    throw InputError("time-bin qubit is not normalized: |amp|^2 = " +
                     std::to_string(norm2));
  }
  if (q.amp_early <= kAmpTol) {
    return {0.0, 1.0, 0.0};
  }
  if (q.amp_late <= kAmpTol) {
    return {1.0, 0.0, 0.0};
  }
  q.phase = wrap_phase(q.phase);
  return q;
}

// Accepts e, l, +, -, +i, -i (a leading U+2212 minus is treated as '-').
inline TimeBinQubit qubit_from_label(std::string_view label) {
  std::string s(label);
  if (s.rfind("−", 0) == 0) s = "-" + s.substr(3);
  const double r = 1.0 / std::numbers::sqrt2;
  if (s == "e") return {1.0, 0.0, 0.0};
  if (s == "l") return {0.0, 1.0, 0.0};
  if (s == "+") return {r, r, 0.0};
  if (s == "-") return {r, r, std::numbers::pi};
  if (s == "+i") return {r, r, std::numbers::pi / 2.0};
  if (s == "-i") return {r, r, 3.0 * std::numbers::pi / 2.0};
  throw InputError("unknown state label \"" + std::string(label) +
                   "\" (expected e, l, +, -, +i, -i)");
}

// Canonical label of one of the six cardinal states, or "custom".
inline std::string label_of(const TimeBinQubit& q) {
  const TimeBinQubit c = canonical(q);
  constexpr double kTol = 1e-9;
  auto near = [&](const TimeBinQubit& ref) {
    return std::abs(c.amp_early - ref.amp_early) < kTol &&
           std::abs(c.amp_late - ref.amp_late) < kTol &&
           std::abs(std::remainder(c.phase - ref.phase, kTwoPi)) < kTol;
  };
  for (const char* label : {"e", "l", "+", "-", "+i", "-i"}) {
    if (near(qubit_from_label(label))) return label;
  }
  return "custom";
}

// The post-teleportation state is sigma_y times the input, up to a global
// phase: (a, b*e^{i*p}) -> (b, a*e^{i*(pi-p)}) after canonicalization.
inline TimeBinQubit expected_output_state(const TimeBinQubit& q) {
  const TimeBinQubit c = canonical(q);
  return canonical({c.amp_late, c.amp_early, std::numbers::pi - c.phase});
}

// Loss in dB to linear transmission, 10^(-dB/10); inverse below.
inline double db_to_linear(double loss_db) {
  if (loss_db < 0.0) throw InputError("loss_db must be >= 0");
  return std::pow(10.0, -loss_db / 10.0);
}

inline double linear_to_db(double transmission) {
  if (!(transmission > 0.0) || transmission > 1.0) {
    throw InputError("transmission must be in (0, 1]");
  }
  return -10.0 * std::log10(transmission);
}

// Scalars describing one operating point of the full system.
// Times are seconds, rates are Hz, everything else is a probability.
struct SystemParams {
  double rep_rate_hz = 500e6;
  double mu_spdc = 0.042;  // mean pairs per pulse at the source
  double mu_a = 0.029;     // mean photons per pulse from Alice
  double eta_a = 0.147;    // transmission Alice -> BSM
  double eta_i = 0.012;    // transmission idler -> BSM
  double eta_s = 0.014;    // transmission signal incl. storage fiber
  double xi_bsm = 0.60;    // BSM detector efficiency
  double xi_s = 0.80;      // signal detector efficiency
  double zeta = 0.89;      // photon indistinguishability
  double bin_separation = 625e-12;
  double coincidence_window = 200e-12;
};

inline void validate(const SystemParams& p) {
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InputError(std::string(name) + " must be in [0, 1]");
    }
  };
  prob(p.eta_a, "eta_a");
  prob(p.eta_i, "eta_i");
  prob(p.eta_s, "eta_s");
  prob(p.xi_bsm, "xi_bsm");
  prob(p.xi_s, "xi_s");
  prob(p.zeta, "zeta");
  if (!(p.rep_rate_hz > 0.0)) throw InputError("rep_rate_hz must be > 0");
  if (!(p.mu_spdc >= 0.0)) throw InputError("mu_spdc must be >= 0");
  if (!(p.mu_a >= 0.0)) throw InputError("mu_a must be >= 0");
  if (!(p.bin_separation > 0.0)) throw InputError("bin_separation must be > 0");
  if (!(p.coincidence_window > 0.0 && p.coincidence_window < p.bin_separation)) {
    throw InputError("coincidence_window must be in (0, bin_separation)");
  }
}

struct CountRecord {
  std::string label;
  std::int64_t counts = 0;
  double integration_time = 1.0;  // seconds
};

inline void validate(const CountRecord& r) {
  if (r.counts < 0) throw InputError("counts must be >= 0");
  if (!(r.integration_time > 0.0)) {
    throw InputError("integration_time must be > 0");
  }
}

// A value with a symmetric one-sigma uncertainty.
struct Measured {
  double value = 0.0;
  double sigma = 0.0;
};

// Per-state and averaged fidelities; fields are optional so that averaging
// modes can detect missing components.
struct FidelitySummary {
  std::optional<Measured> f_e;
  std::optional<Measured> f_l;
  std::optional<Measured> f_plus;
  std::optional<Measured> f_plus_i;
  std::optional<Measured> f_equator;
  std::optional<Measured> f_avg;
};

}  // namespace tsim
