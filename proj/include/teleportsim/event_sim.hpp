#pragma once
// Pulse-by-pulse semi-classical Monte Carlo of the teleportation setup:
// photon generation, transmission, time-bin assignment, BSM click patterns
// with dark counts and click merging, signal detection, and bookkeeping of
// which photon-number case produced each accepted three-fold event.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "teleportsim/core.hpp"
#include "teleportsim/decoy.hpp"
#include "teleportsim/interference.hpp"

namespace tsim {

struct SimConfig {
  std::int64_t n_pulses = 0;
  std::uint64_t seed = 0;
  TimeBinQubit input_state = qubit_from_label("+");
  double dark_count_prob = 0.0;  // per detector, per time bin, per pulse
  enum class PairStatistics { kPoissonian, kThermal };
  PairStatistics pair_statistics = PairStatistics::kPoissonian;
  // Analysis interferometer phase relative to the expected output state;
  // 0 aligns the "max" port with ideal teleportation, scanning it traces
  // the three-fold fringe. Ignored for pole inputs.
  double umzi2_phase = 0.0;
};

inline void validate(const SimConfig& c) {
  if (c.n_pulses <= 0) throw InputError("n_pulses must be > 0");
  if (!(c.dark_count_prob >= 0.0 && c.dark_count_prob < 1.0)) {
    throw InputError("dark_count_prob must be in [0, 1)");
  }
  canonical(c.input_state);
}

struct CaseTallies {
  std::int64_t n111 = 0;  // one qubit photon and one idler at the BSM
  std::int64_t n022 = 0;  // two idlers at the BSM, no qubit photon
  std::int64_t n201 = 0;  // two qubit photons at the BSM, idler lost
  std::int64_t n112 = 0;  // one qubit photon, one of two idlers
  std::int64_t higher = 0;
  std::int64_t dark = 0;  // a dark count participated in the acceptance

  std::int64_t sum() const { return n111 + n022 + n201 + n112 + higher + dark; }
};

struct SimResult {
  std::int64_t n_pulses = 0;
  std::int64_t counts_max = 0;  // analyzer port aligned with the ideal output
  std::int64_t counts_min = 0;  // orthogonal port
  double gain = 0.0;            // accepted three-folds per pulse
  double fidelity_estimate = std::numeric_limits<double>::quiet_NaN();
  double fidelity_sigma = std::numeric_limits<double>::quiet_NaN();
  CaseTallies tallies;

  std::int64_t accepted() const { return counts_max + counts_min; }
};

namespace detail {

inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ (tag * 0x9e3779b97f4a7c15ULL));
}

// Emission numbers are truncated at kMaxGrid per source; the residual tail
// is enumerated explicitly up to kMaxTail.
inline constexpr int kMaxGrid = 8;
inline constexpr int kMaxTail = 24;

inline double poisson_pmf(double mu, int n) {
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  double p = std::exp(-mu);
  for (int i = 1; i <= n; ++i) p *= mu / static_cast<double>(i);
  return p;
}

inline double pair_pmf(SimConfig::PairStatistics stats, double mu, int n) {
  if (stats == SimConfig::PairStatistics::kThermal) {
    if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::pow(mu / (1.0 + mu), n) / (1.0 + mu);
  }
  return poisson_pmf(mu, n);
}

struct PulseOutcome {
  bool accepted = false;
  bool correct = false;
  bool dark_involved = false;
  int arrived_alice = 0;
  int arrived_idler = 0;
};

// Geometry of one run that stays fixed across pulses.
struct PulseContext {
  double p_late = 0.5;       // late-bin probability of the qubit photons
  bool pole_input = false;
  bool expect_late = false;  // ideal output bin for a pole input
  double p_interfere = 0.5;  // correct-port probability for capable events
  double dark = 0.0;
  double p_signal = 0.0;     // signal transmission times detector efficiency
  double eta_a = 0.0;
  double eta_i = 0.0;
  double xi_bsm = 0.0;
};

// Simulates one pulse that emitted n_alice qubit-source photons and n_pairs
// entangled pairs. The BSM accepts one click per detector in different bins
// (multiple photons in one detector-bin slot merge into a single click);
// the three-fold needs any signal click, chosen uniformly when several fire.
inline PulseOutcome simulate_pulse(const PulseContext& ctx, int n_alice,
                                   int n_pairs, std::mt19937_64& rng) {
  PulseOutcome out;

  std::array<bool, kMaxTail + 1> alice_arrived{};
  std::array<bool, kMaxTail + 1> idler_arrived{};
  for (int i = 0; i < n_alice; ++i) {
    alice_arrived[i] = u01(rng) < ctx.eta_a;
    out.arrived_alice += alice_arrived[i] ? 1 : 0;
  }
  for (int j = 0; j < n_pairs; ++j) {
    idler_arrived[j] = u01(rng) < ctx.eta_i;
    out.arrived_idler += idler_arrived[j] ? 1 : 0;
  }
  if (ctx.dark == 0.0 && out.arrived_alice + out.arrived_idler < 2) return out;

  // Time bins: qubit photons follow the input state, each pair picks a
  // common bin shared by its idler and signal.
  std::array<bool, kMaxTail + 1> alice_late{};
  std::array<bool, kMaxTail + 1> pair_late{};
  for (int i = 0; i < n_alice; ++i) {
    if (alice_arrived[i]) alice_late[i] = u01(rng) < ctx.p_late;
  }
  for (int j = 0; j < n_pairs; ++j) pair_late[j] = u01(rng) < 0.5;

  // BSM detection and routing; per detector-bin slot keep the photon count
  // plus what interference bookkeeping needs.
  int slot_photons[2][2] = {{0, 0}, {0, 0}};
  int detected_alice = 0;
  int detected_idler = 0;
  int detected_idler_pair = -1;
  for (int i = 0; i < n_alice; ++i) {
    if (!alice_arrived[i] || u01(rng) >= ctx.xi_bsm) continue;
    const int det = u01(rng) < 0.5 ? 0 : 1;
    ++slot_photons[det][alice_late[i] ? 1 : 0];
    ++detected_alice;
  }
  for (int j = 0; j < n_pairs; ++j) {
    if (!idler_arrived[j] || u01(rng) >= ctx.xi_bsm) continue;
    const int det = u01(rng) < 0.5 ? 0 : 1;
    ++slot_photons[det][pair_late[j] ? 1 : 0];
    ++detected_idler;
    detected_idler_pair = j;
  }

  bool slot_dark[2][2] = {{false, false}, {false, false}};
  if (ctx.dark > 0.0) {
    for (int det = 0; det < 2; ++det) {
      for (int bin = 0; bin < 2; ++bin) {
        slot_dark[det][bin] = u01(rng) < ctx.dark;
      }
    }
  }

  bool occ[2][2];
  for (int det = 0; det < 2; ++det) {
    for (int bin = 0; bin < 2; ++bin) {
      occ[det][bin] = slot_photons[det][bin] > 0 || slot_dark[det][bin];
    }
  }
  if (occ[0][0] == occ[0][1] || occ[1][0] == occ[1][1]) return out;
  const int bin_det0 = occ[0][1] ? 1 : 0;
  const int bin_det1 = occ[1][1] ? 1 : 0;
  if (bin_det0 == bin_det1) return out;

  const bool pattern_dark = slot_photons[0][bin_det0] == 0 ||
                            slot_photons[1][bin_det1] == 0;

  // Signal candidates: detected partner photons plus dark signal clicks.
  struct Candidate {
    bool late = false;
    int pair = -1;  // -1 marks a dark click
  };
  std::array<Candidate, kMaxTail + 3> cands{};
  int n_cand = 0;
  for (int j = 0; j < n_pairs; ++j) {
    if (u01(rng) < ctx.p_signal) cands[n_cand++] = {pair_late[j], j};
  }
  if (ctx.dark > 0.0) {
    for (int bin = 0; bin < 2; ++bin) {
      if (u01(rng) < ctx.dark) cands[n_cand++] = {bin == 1, -1};
    }
  }
  if (n_cand == 0) return out;
  int pick = static_cast<int>(u01(rng) * n_cand);
  if (pick >= n_cand) pick = n_cand - 1;
  const Candidate chosen = cands[pick];

  out.accepted = true;
  out.dark_involved = pattern_dark || chosen.pair < 0;

  if (ctx.pole_input) {
    out.correct = chosen.late == ctx.expect_late;
    return out;
  }
  // Interference requires the click pattern to be exactly the qubit photon
  // plus one idler whose partner pair produced the chosen signal click.
  const bool capable = !pattern_dark && detected_alice == 1 &&
                       detected_idler == 1 && chosen.pair >= 0 &&
                       chosen.pair == detected_idler_pair;
  out.correct = u01(rng) < (capable ? ctx.p_interfere : 0.5);
  return out;
}

inline PulseContext make_context(const SystemParams& p, const SimConfig& cfg) {
  const TimeBinQubit q = canonical(cfg.input_state);
  PulseContext ctx;
  ctx.p_late = q.amp_late * q.amp_late;
  ctx.pole_input = ctx.p_late == 0.0 || ctx.p_late == 1.0;
  ctx.expect_late = ctx.p_late < 0.5;
  if (!ctx.pole_input && std::abs(ctx.p_late - 0.5) > 1e-9) {
    throw InputError(
        "input_state must be a pole or equatorial state; outcome "
        "probabilities for other states are not modeled");
  }
  ctx.p_interfere = 0.5 * (1.0 + p.zeta * std::cos(cfg.umzi2_phase));
  ctx.dark = cfg.dark_count_prob;
  ctx.p_signal = p.eta_s * p.xi_s;
  ctx.eta_a = p.eta_a;
  ctx.eta_i = p.eta_i;
  ctx.xi_bsm = p.xi_bsm;
  return ctx;
}

inline void tally_outcome(const PulseOutcome& o, int n_pairs, SimResult& r) {
  if (!o.accepted) return;
  if (o.correct) {
    ++r.counts_max;
  } else {
    ++r.counts_min;
  }
  if (o.dark_involved) {
    ++r.tallies.dark;
  } else if (o.arrived_alice == 1 && o.arrived_idler == 1 && n_pairs == 1) {
    ++r.tallies.n111;
  } else if (o.arrived_alice == 0 && o.arrived_idler == 2 && n_pairs == 2) {
    ++r.tallies.n022;
  } else if (o.arrived_alice == 2 && o.arrived_idler == 0 && n_pairs == 1) {
    ++r.tallies.n201;
  } else if (o.arrived_alice == 1 && o.arrived_idler == 1 && n_pairs == 2) {
    ++r.tallies.n112;
  } else {
    ++r.tallies.higher;
  }
}

inline void finalize(SimResult& r) {
  r.gain = static_cast<double>(r.accepted()) / static_cast<double>(r.n_pulses);
  if (r.accepted() > 0) {
    const double n = static_cast<double>(r.accepted());
    const double f = static_cast<double>(r.counts_max) / n;
    r.fidelity_estimate = f;
    r.fidelity_sigma = std::sqrt(f * (1.0 - f) / n);
  }
}

}  // namespace detail

// Full run: pulses are partitioned over emitted (qubit photons, pairs)
// categories with one multinomial draw realized as sequential binomials, so
// cost scales with photon-bearing pulses rather than n_pulses. Identical
// seed and config give identical results.
inline SimResult run(const SystemParams& p, const SimConfig& cfg) {
  validate(p);
  validate(cfg);
  const detail::PulseContext ctx = detail::make_context(p, cfg);

  SimResult result;
  result.n_pulses = cfg.n_pulses;

  std::mt19937_64 split_rng(detail::stream_seed(cfg.seed, 1));

  // Category pulse counts via sequential binomial conditioning.
  std::int64_t remaining = cfg.n_pulses;
  double remaining_prob = 1.0;
  std::array<double, detail::kMaxGrid + 1> pa{};
  std::array<double, detail::kMaxGrid + 1> pk{};
  for (int n = 0; n <= detail::kMaxGrid; ++n) {
    pa[n] = detail::poisson_pmf(p.mu_a, n);
    pk[n] = detail::pair_pmf(cfg.pair_statistics, p.mu_spdc, n);
  }
  std::array<std::array<std::int64_t, detail::kMaxGrid + 1>,
             detail::kMaxGrid + 1>
      pulses{};
  for (int a = 0; a <= detail::kMaxGrid; ++a) {
    for (int k = 0; k <= detail::kMaxGrid; ++k) {
      const double cell = pa[a] * pk[k];
      if (remaining <= 0 || cell <= 0.0) {
        remaining_prob -= cell;
        continue;
      }
      const double cond = std::clamp(cell / remaining_prob, 0.0, 1.0);
      std::binomial_distribution<std::int64_t> bin(remaining, cond);
      const std::int64_t m = cond >= 1.0 ? remaining : bin(split_rng);
      pulses[a][k] = m;
      remaining -= m;
      remaining_prob -= cell;
    }
  }
  const std::int64_t tail_pulses = remaining;

  for (int a = 0; a <= detail::kMaxGrid; ++a) {
    for (int k = 0; k <= detail::kMaxGrid; ++k) {
      const std::int64_t m = pulses[a][k];
      if (m == 0) continue;
      // Without darks an acceptance needs two BSM photons and a signal.
      if (ctx.dark == 0.0 && (k == 0 || a + k < 2)) continue;
      std::mt19937_64 rng(detail::stream_seed(
          cfg.seed, 1000 + static_cast<std::uint64_t>(a) * 64 + k));
      if (a == 0 && k == 0) {
        // All-dark acceptances in closed form: a valid click pattern from
        // darks alone plus at least one dark signal click; the signal bin
        // is symmetric, so correctness is a coin flip.
        const double d = ctx.dark;
        const double p_pattern = 2.0 * d * d * (1.0 - d) * (1.0 - d);
        const double p_acc = p_pattern * (1.0 - (1.0 - d) * (1.0 - d));
        std::binomial_distribution<std::int64_t> acc_dist(m, p_acc);
        const std::int64_t acc = acc_dist(rng);
        std::binomial_distribution<std::int64_t> correct_dist(acc, 0.5);
        const std::int64_t good = acc > 0 ? correct_dist(rng) : 0;
        result.counts_max += good;
        result.counts_min += acc - good;
        result.tallies.dark += acc;
        continue;
      }
      for (std::int64_t i = 0; i < m; ++i) {
        detail::tally_outcome(detail::simulate_pulse(ctx, a, k, rng), k,
                              result);
      }
    }
  }

  if (tail_pulses > 0) {
    // Conditional distribution of the truncated tail, enumerated once.
    struct TailCell {
      int a;
      int k;
      double cum;
    };
    std::vector<TailCell> tail;
    double total = 0.0;
    for (int a = 0; a <= detail::kMaxTail; ++a) {
      const double wa = detail::poisson_pmf(p.mu_a, a);
      for (int k = 0; k <= detail::kMaxTail; ++k) {
        if (a <= detail::kMaxGrid && k <= detail::kMaxGrid) continue;
        const double w = wa * detail::pair_pmf(cfg.pair_statistics, p.mu_spdc, k);
        if (w <= 0.0) continue;
        total += w;
        tail.push_back({a, k, total});
      }
    }
    std::mt19937_64 rng(detail::stream_seed(cfg.seed, 2));
    for (std::int64_t i = 0; i < tail_pulses; ++i) {
      if (tail.empty()) break;
      const double u = detail::u01(rng) * total;
      std::size_t idx = 0;
      while (idx + 1 < tail.size() && tail[idx].cum < u) ++idx;
      detail::tally_outcome(
          detail::simulate_pulse(ctx, tail[idx].a, tail[idx].k, rng),
          tail[idx].k, result);
    }
  }

  detail::finalize(result);
  return result;
}

// Runs every pulse with a forced emission category. Exposes the geometric
// acceptance (1/4 for two distinguishable BSM photons at unit efficiency)
// to direct tests without Poissonian mixing.
inline SimResult run_fixed_counts(const SystemParams& p, const SimConfig& cfg,
                                  int n_alice, int n_pairs) {
  validate(p);
  validate(cfg);
  if (n_alice < 0 || n_pairs < 0 || n_alice > detail::kMaxTail ||
      n_pairs > detail::kMaxTail) {
    throw InputError("forced photon numbers must be in [0, 24]");
  }
  const detail::PulseContext ctx = detail::make_context(p, cfg);
  SimResult result;
  result.n_pulses = cfg.n_pulses;
  std::mt19937_64 rng(detail::stream_seed(cfg.seed, 3));
  for (std::int64_t i = 0; i < cfg.n_pulses; ++i) {
    detail::tally_outcome(detail::simulate_pulse(ctx, n_alice, n_pairs, rng),
                          n_pairs, result);
  }
  detail::finalize(result);
  return result;
}

// Mean BSM-detector photon numbers per pulse for the two inputs.
inline double bsm_mean_idler(const SystemParams& p) {
  return p.mu_spdc * p.eta_i * p.xi_bsm;
}

inline double bsm_mean_qubit(const SystemParams& p) {
  return p.mu_a * p.eta_a * p.xi_bsm;
}

// Visibility of the HOM dip at zero delay for this operating point: the
// thermal idler interferes with the coherent qubit photon, scaled by the
// source indistinguishability.
inline double drift_free_hom_visibility(const SystemParams& p) {
  return p.zeta * hom_visibility(bsm_mean_idler(p), bsm_mean_qubit(p), 2.0, 1.0);
}

struct HomScanConfig {
  std::int64_t pulses_per_delay = 0;
  std::uint64_t seed = 0;
  double wavepacket_sigma_ps = 30.0;  // Gaussian sigma of the wavepacket
  double g2_1 = 2.0;                  // idler arm statistics
  double g2_2 = 1.0;                  // qubit arm statistics
};

// Coincidence counts across the BSM beamsplitter versus relative delay.
// The mode overlap is the indistinguishability times a Gaussian envelope in
// the delay; counts are Poisson draws around the model expectation.
inline DipScan run_hom_scan(const SystemParams& p,
                            const std::vector<double>& delays_ps,
                            const HomScanConfig& cfg) {
  validate(p);
  if (delays_ps.empty()) throw InputError("delay scan must not be empty");
  if (cfg.pulses_per_delay <= 0) throw InputError("pulses_per_delay must be > 0");
  if (!(cfg.wavepacket_sigma_ps > 0.0)) {
    throw InputError("wavepacket_sigma_ps must be > 0");
  }
  for (std::size_t i = 1; i < delays_ps.size(); ++i) {
    if (!(delays_ps[i] > delays_ps[i - 1])) {
      throw InputError("delays must be strictly increasing");
    }
  }
  const double n1 = bsm_mean_idler(p);
  const double n2 = bsm_mean_qubit(p);
  const double sigma2 = cfg.wavepacket_sigma_ps * cfg.wavepacket_sigma_ps;
  std::mt19937_64 rng(detail::stream_seed(cfg.seed, 4));
  DipScan scan;
  scan.reserve(delays_ps.size());
  for (double tau : delays_ps) {
    HomConfig hom;
    hom.mean_n1 = n1;
    hom.mean_n2 = n2;
    hom.g2_1 = cfg.g2_1;
    hom.g2_2 = cfg.g2_2;
    hom.overlap = p.zeta * std::exp(-tau * tau / (2.0 * sigma2));
    const double mean =
        hom_coincidence_probability(hom) * static_cast<double>(cfg.pulses_per_delay);
    std::poisson_distribution<std::int64_t> pois(mean);
    const double counts = mean > 0.0 ? static_cast<double>(pois(rng)) : 0.0;
    scan.push_back(
        {tau, counts, static_cast<double>(cfg.pulses_per_delay) / p.rep_rate_hz});
  }
  return scan;
}

struct DriftConfig {
  double timing_walk_sigma_ps = 2.0;  // per channel, per control interval
  double pol_walk_sigma_rad = 0.006;
  double control_interval_s = 10.0;
  double delay_resolution_ps = 1.0;   // quantization of the delay actuator
  double wavepacket_sigma_ps = 30.0;
  bool timing_feedback = true;
  bool pol_feedback = true;
};

inline void validate(const DriftConfig& d) {
  if (!(d.timing_walk_sigma_ps >= 0.0) || !(d.pol_walk_sigma_rad >= 0.0)) {
    throw InputError("walk sigmas must be >= 0");
  }
  if (!(d.control_interval_s > 0.0)) {
    throw InputError("control_interval_s must be > 0");
  }
  if (!(d.delay_resolution_ps > 0.0)) {
    throw InputError("delay_resolution_ps must be > 0");
  }
  if (!(d.wavepacket_sigma_ps > 0.0)) {
    throw InputError("wavepacket_sigma_ps must be > 0");
  }
}

// One control interval: offsets are the post-correction residuals of the
// two channels; transmission and visibility describe the interval that just
// elapsed (before its correction was applied).
struct DriftSample {
  double t_s = 0.0;
  double offset_a_ps = 0.0;
  double offset_b_ps = 0.0;
  double pbs_transmission = 0.0;
  double hom_visibility = 0.0;
};

// Arrival-time and polarization drift as independent per-interval random
// walks. Timing feedback measures each channel's offset with shot-limited
// noise and corrects with a quantized delay line; polarization feedback
// hill-climbs the analyzer angle. The walk stream is independent of the
// feedback streams, so runs with feedback on and off see the same drift.
inline std::vector<DriftSample> run_with_drift(const SystemParams& p,
                                               const SimConfig& cfg,
                                               const DriftConfig& drift,
                                               double duration_s) {
  validate(p);
  validate(drift);
  if (!(duration_s >= drift.control_interval_s)) {
    throw InputError("duration must cover at least one control interval");
  }
  const auto n_intervals =
      static_cast<std::int64_t>(duration_s / drift.control_interval_s);
  std::mt19937_64 walk_rng(detail::stream_seed(cfg.seed, 5));
  std::mt19937_64 meas_rng(detail::stream_seed(cfg.seed, 6));
  // Separate distribution objects: normal_distribution caches a spare
  // variate, which must not leak between the two streams.
  std::normal_distribution<double> walk_gauss(0.0, 1.0);
  std::normal_distribution<double> meas_gauss(0.0, 1.0);

  const double v0 = drift_free_hom_visibility(p);
  // Interfering wavepackets of width w give exp(-dt^2 / (2*(sqrt(2)w)^2)).
  const double vis_sigma2 =
      2.0 * (2.0 * drift.wavepacket_sigma_ps * drift.wavepacket_sigma_ps);
  // Shot-noise-limited timing measurement per interval and channel.
  const double counts_a =
      bsm_mean_qubit(p) * p.rep_rate_hz * drift.control_interval_s;
  const double counts_b =
      bsm_mean_idler(p) * p.rep_rate_hz * drift.control_interval_s;
  const double meas_sigma_a =
      drift.wavepacket_sigma_ps / std::sqrt(std::max(counts_a, 1.0));
  const double meas_sigma_b =
      drift.wavepacket_sigma_ps / std::sqrt(std::max(counts_b, 1.0));

  double off_a = 0.0;
  double off_b = 0.0;
  double theta = 0.0;
  std::vector<DriftSample> out;
  out.reserve(static_cast<std::size_t>(n_intervals));
  for (std::int64_t i = 1; i <= n_intervals; ++i) {
    off_a += walk_gauss(walk_rng) * drift.timing_walk_sigma_ps;
    off_b += walk_gauss(walk_rng) * drift.timing_walk_sigma_ps;
    theta += walk_gauss(walk_rng) * drift.pol_walk_sigma_rad;

    DriftSample s;
    s.t_s = static_cast<double>(i) * drift.control_interval_s;
    const double dt = off_a - off_b;
    s.hom_visibility = v0 * std::exp(-dt * dt / vis_sigma2);
    s.pbs_transmission = std::cos(theta) * std::cos(theta);

    if (drift.timing_feedback) {
      const double measured_a = off_a + meas_gauss(meas_rng) * meas_sigma_a;
      const double measured_b = off_b + meas_gauss(meas_rng) * meas_sigma_b;
      off_a -= std::round(measured_a / drift.delay_resolution_ps) *
               drift.delay_resolution_ps;
      off_b -= std::round(measured_b / drift.delay_resolution_ps) *
               drift.delay_resolution_ps;
    }
    if (drift.pol_feedback) {
      const double step = drift.pol_walk_sigma_rad;
      const double up = std::cos(theta + step) * std::cos(theta + step);
      const double down = std::cos(theta - step) * std::cos(theta - step);
      if (up > s.pbs_transmission || down > s.pbs_transmission) {
        theta += up >= down ? step : -step;
      }
    }
    s.offset_a_ps = off_a;
    s.offset_b_ps = off_b;
    out.push_back(s);
  }
  return out;
}

struct DecoyIntensities {
  double mu_signal = 0.088;
  double mu_decoy = 0.029;
  double mu_vacuum = 0.0;
};

// Runs the simulator at the three source intensities for each input state
// and packages gains (Hz) and error rates into decoy datasets. States with
// no accepted events report an error rate of 0.5 (no information).
inline std::vector<DecoyDataset> decoy_experiment(
    const SystemParams& p, const DecoyIntensities& mu,
    const std::vector<SimConfig>& state_configs, std::int64_t n_pulses) {
  validate(p);
  if (!(mu.mu_signal > mu.mu_decoy && mu.mu_decoy > 0.0)) {
    throw InputError("intensities need mu_signal > mu_decoy > 0");
  }
  if (mu.mu_vacuum != 0.0) throw InputError("mu_vacuum must be 0");
  if (state_configs.empty()) throw InputError("need at least one input state");
  if (n_pulses <= 0) throw InputError("n_pulses must be > 0");

  std::vector<DecoyDataset> out;
  out.reserve(state_configs.size());
  const std::array<double, 3> levels = {mu.mu_signal, mu.mu_decoy, mu.mu_vacuum};
  for (std::size_t s = 0; s < state_configs.size(); ++s) {
    DecoyDataset d;
    d.state_label = label_of(state_configs[s].input_state);
    d.mu_signal = mu.mu_signal;
    d.mu_decoy = mu.mu_decoy;
    d.mu_vacuum = mu.mu_vacuum;
    std::array<double, 3> gains{};
    std::array<double, 3> errors{};
    for (int level = 0; level < 3; ++level) {
      SystemParams q = p;
      q.mu_a = levels[level];
      SimConfig run_cfg = state_configs[s];
      run_cfg.n_pulses = n_pulses;
      run_cfg.seed = detail::stream_seed(state_configs[s].seed,
                                         100 + s * 8 + level);
      const SimResult r = run(q, run_cfg);
      gains[level] = r.gain * p.rep_rate_hz;
      errors[level] = r.accepted() > 0
                          ? static_cast<double>(r.counts_min) /
                                static_cast<double>(r.accepted())
                          : 0.5;
    }
    d.gain_signal = gains[0];
    d.gain_decoy = gains[1];
    d.gain_vacuum = gains[2];
    d.error_signal = errors[0];
    d.error_decoy = errors[1];
    d.error_vacuum = errors[2];
    out.push_back(d);
  }
  return out;
}

}  // namespace tsim
