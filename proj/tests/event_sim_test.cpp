#include "teleportsim/event_sim.hpp"

#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

namespace tsim {
namespace {

SystemParams unit_efficiency_params() {
  SystemParams p;
  p.eta_a = 1.0;
  p.eta_i = 1.0;
  p.eta_s = 1.0;
  p.xi_s = 1.0;
  p.xi_bsm = 1.0;
  return p;
}

SimConfig fixed_cfg(std::int64_t n, const char* label) {
  SimConfig cfg;
  cfg.n_pulses = n;
  cfg.seed = 9;
  cfg.input_state = qubit_from_label(label);
  return cfg;
}

TEST(PairPmf, PoissonAndThermalWeights) {
  const double mu = 0.042;
  EXPECT_NEAR(detail::poisson_pmf(mu, 0), std::exp(-mu), 1e-15);
  EXPECT_NEAR(detail::poisson_pmf(mu, 2), std::exp(-mu) * mu * mu / 2.0,
              1e-15);
  EXPECT_NEAR(detail::pair_pmf(SimConfig::PairStatistics::kThermal, mu, 0),
              1.0 / (1.0 + mu), 1e-15);
  EXPECT_NEAR(detail::pair_pmf(SimConfig::PairStatistics::kThermal, mu, 2),
              mu * mu / std::pow(1.0 + mu, 3), 1e-15);
  EXPECT_DOUBLE_EQ(
      detail::pair_pmf(SimConfig::PairStatistics::kThermal, 0.0, 0), 1.0);
}

TEST(BsmMeans, IncludeCouplingAndDetectorEfficiency) {
  SystemParams p;
  EXPECT_DOUBLE_EQ(bsm_mean_idler(p), p.mu_spdc * p.eta_i * p.xi_bsm);
  EXPECT_DOUBLE_EQ(bsm_mean_qubit(p), p.mu_a * p.eta_a * p.xi_bsm);
  EXPECT_NEAR(drift_free_hom_visibility(p),
              p.zeta * hom_visibility(bsm_mean_idler(p), bsm_mean_qubit(p),
                                      2.0, 1.0),
              1e-15);
}

TEST(FixedCounts, GeometricQuarterAcceptanceForOnePhotonPerArm) {
  const SimResult r =
      run_fixed_counts(unit_efficiency_params(), fixed_cfg(200000, "+"), 1, 1);
  EXPECT_NEAR(r.gain, 0.25, 0.005);
  EXPECT_EQ(r.tallies.n111, r.accepted());
  EXPECT_NEAR(r.fidelity_estimate, 0.5 * (1.0 + 0.89), 0.01);
}

TEST(FixedCounts, AnalysisPhaseTracesFringe) {
  SystemParams p = unit_efficiency_params();
  SimConfig cfg = fixed_cfg(200000, "+");
  cfg.umzi2_phase = kTwoPi / 4.0;
  EXPECT_NEAR(run_fixed_counts(p, cfg, 1, 1).fidelity_estimate, 0.5, 0.01);
  cfg.umzi2_phase = kTwoPi / 2.0;
  EXPECT_NEAR(run_fixed_counts(p, cfg, 1, 1).fidelity_estimate,
              0.5 * (1.0 - 0.89), 0.01);
}

TEST(FixedCounts, PoleInputsTeleportDeterministically) {
  const SimResult re =
      run_fixed_counts(unit_efficiency_params(), fixed_cfg(50000, "e"), 1, 1);
  EXPECT_EQ(re.counts_min, 0);
  EXPECT_DOUBLE_EQ(re.fidelity_estimate, 1.0);
  EXPECT_NEAR(re.gain, 0.25, 0.01);
  const SimResult rl =
      run_fixed_counts(unit_efficiency_params(), fixed_cfg(50000, "l"), 1, 1);
  EXPECT_EQ(rl.counts_min, 0);
  EXPECT_DOUBLE_EQ(rl.fidelity_estimate, 1.0);
}

TEST(FixedCounts, TwoIdlersCarryNoQubitInformation) {
  const SimResult r =
      run_fixed_counts(unit_efficiency_params(), fixed_cfg(200000, "+"), 0, 2);
  EXPECT_NEAR(r.gain, 0.25, 0.005);
  EXPECT_EQ(r.tallies.n022, r.accepted());
  EXPECT_NEAR(r.fidelity_estimate, 0.5, 0.011);
}

TEST(FixedCounts, NoSignalMeansNoAcceptance) {
  const SimResult r20 =
      run_fixed_counts(unit_efficiency_params(), fixed_cfg(20000, "+"), 2, 0);
  EXPECT_EQ(r20.accepted(), 0);
  EXPECT_EQ(r20.gain, 0.0);
  const SimResult r10 =
      run_fixed_counts(unit_efficiency_params(), fixed_cfg(20000, "+"), 1, 0);
  EXPECT_EQ(r10.accepted(), 0);
  const SimResult r01 =
      run_fixed_counts(unit_efficiency_params(), fixed_cfg(20000, "+"), 0, 1);
  EXPECT_EQ(r01.accepted(), 0);
}

TEST(FixedCounts, RejectsOutOfRangePhotonNumbers) {
  EXPECT_THROW(
      run_fixed_counts(unit_efficiency_params(), fixed_cfg(100, "+"), -1, 1),
      InputError);
  EXPECT_THROW(
      run_fixed_counts(unit_efficiency_params(), fixed_cfg(100, "+"), 1, 25),
      InputError);
}

TEST(EventSim, IdenticalSeedGivesIdenticalResults) {
  SimConfig cfg;
  cfg.n_pulses = 4000000000;
  cfg.seed = 11;
  const SimResult a = run(SystemParams{}, cfg);
  const SimResult b = run(SystemParams{}, cfg);
  EXPECT_EQ(a.counts_max, b.counts_max);
  EXPECT_EQ(a.counts_min, b.counts_min);
  EXPECT_EQ(a.tallies.n111, b.tallies.n111);
  EXPECT_EQ(a.tallies.sum(), a.accepted());
  cfg.seed = 12;
  const SimResult c = run(SystemParams{}, cfg);
  EXPECT_FALSE(a.counts_max == c.counts_max && a.counts_min == c.counts_min &&
               a.tallies.n111 == c.tallies.n111 &&
               a.tallies.n022 == c.tallies.n022);
}

TEST(EventSim, GainAndFidelityTrackClosedFormAtDefaultOperatingPoint) {
  SimConfig cfg;
  cfg.n_pulses = 20000000000;
  cfg.seed = 2;
  const SimResult r = run(SystemParams{}, cfg);
  EXPECT_GT(r.accepted(), 20);
  EXPECT_GT(r.gain, 1.5e-9);
  EXPECT_LT(r.gain, 4.6e-9);
  EXPECT_GT(r.fidelity_estimate, 0.60);
  EXPECT_LE(r.fidelity_estimate, 1.0);
  EXPECT_EQ(r.tallies.dark, 0);
  EXPECT_GT(r.tallies.n111, r.tallies.n022);
  EXPECT_GT(r.tallies.n111, r.tallies.n201);
  EXPECT_GT(r.tallies.n111, r.tallies.n112);
}

TEST(EventSim, DarkCountsAddBackgroundAndWashOutFidelity) {
  SimConfig cfg;
  cfg.n_pulses = 4000000;
  cfg.seed = 5;
  const double g0 = run(SystemParams{}, cfg).gain;
  cfg.dark_count_prob = 0.01;
  const SimResult r1 = run(SystemParams{}, cfg);
  cfg.dark_count_prob = 0.05;
  const SimResult r5 = run(SystemParams{}, cfg);
  EXPECT_LT(g0, r1.gain);
  EXPECT_LT(r1.gain, r5.gain);
  EXPECT_GT(r5.tallies.dark, r5.accepted() * 9 / 10);
  EXPECT_NEAR(r5.fidelity_estimate, 0.5, 0.1);
}

TEST(EventSim, ThermalPairStatisticsBoostMultiPairCases) {
  SimConfig cfg;
  cfg.n_pulses = 20000000000;
  cfg.seed = 2;
  cfg.pair_statistics = SimConfig::PairStatistics::kThermal;
  const SimResult r = run(SystemParams{}, cfg);
  EXPECT_GT(r.accepted(), 20);
  EXPECT_GT(r.fidelity_estimate, 0.55);
  EXPECT_LT(r.fidelity_estimate, 0.95);
}

TEST(EventSim, RejectsInvalidConfigs) {
  SimConfig cfg;
  EXPECT_THROW(run(SystemParams{}, cfg), InputError);
  cfg.n_pulses = 100;
  cfg.dark_count_prob = 1.0;
  EXPECT_THROW(run(SystemParams{}, cfg), InputError);
  cfg.dark_count_prob = 0.0;
  cfg.input_state = TimeBinQubit{0.8, 0.6, 0.0};
  EXPECT_THROW(run(SystemParams{}, cfg), InputError);
}

TEST(HomScan, RecoversSourceLimitedVisibilityTimesOverlap) {
  SystemParams p;
  p.mu_a = p.mu_spdc * p.eta_i / p.eta_a;
  ASSERT_NEAR(bsm_mean_qubit(p), bsm_mean_idler(p), 1e-15);
  std::vector<double> delays;
  for (double tau = -150.0; tau <= 150.1; tau += 10.0) delays.push_back(tau);
  HomScanConfig cfg;
  cfg.pulses_per_delay = 400000000000;
  cfg.seed = 2;
  const DipScan scan = run_hom_scan(p, delays, cfg);
  const DipFit fit = fit_hom_dip(scan);
  EXPECT_NEAR(fit.visibility, p.zeta * 0.4, 0.01);
  EXPECT_NEAR(fit.center_ps, 0.0, 3.0);
  EXPECT_NEAR(std::abs(fit.width_ps), 30.0, 2.0);
  const double n = bsm_mean_idler(p);
  const double wing_rate = 1.25 * n * n * p.rep_rate_hz;
  EXPECT_NEAR(fit.baseline, wing_rate, wing_rate * 0.01);
}

TEST(HomScan, RejectsBadScansAndConfigs) {
  SystemParams p;
  HomScanConfig cfg;
  cfg.pulses_per_delay = 1000;
  EXPECT_THROW(run_hom_scan(p, {}, cfg), InputError);
  EXPECT_THROW(run_hom_scan(p, {0.0, 0.0}, cfg), InputError);
  cfg.pulses_per_delay = 0;
  EXPECT_THROW(run_hom_scan(p, {0.0, 1.0}, cfg), InputError);
  cfg.pulses_per_delay = 1000;
  cfg.wavepacket_sigma_ps = 0.0;
  EXPECT_THROW(run_hom_scan(p, {0.0, 1.0}, cfg), InputError);
}

TEST(Drift, FeedbackPinsResidualsToActuatorResolution) {
  SystemParams p;
  SimConfig cfg;
  cfg.n_pulses = 1;
  cfg.seed = 2;
  DriftConfig drift;
  const auto samples = run_with_drift(p, cfg, drift, 21600.0);
  ASSERT_EQ(samples.size(), 2160u);
  double max_residual = 0.0;
  double min_trans = 1.0;
  for (const DriftSample& s : samples) {
    max_residual = std::max(max_residual, std::abs(s.offset_a_ps));
    max_residual = std::max(max_residual, std::abs(s.offset_b_ps));
    min_trans = std::min(min_trans, s.pbs_transmission);
  }
  EXPECT_LE(max_residual, 1.5 * drift.delay_resolution_ps);
  EXPECT_GE(min_trans, 0.995);
}

TEST(Drift, SameSeedSeesSameWalkWithFeedbackOnOrOff) {
  SystemParams p;
  SimConfig cfg;
  cfg.n_pulses = 1;
  cfg.seed = 7;
  DriftConfig on;
  DriftConfig off;
  off.timing_feedback = false;
  off.pol_feedback = false;
  const auto son = run_with_drift(p, cfg, on, 3600.0);
  const auto soff = run_with_drift(p, cfg, off, 3600.0);
  ASSERT_EQ(son.size(), soff.size());
  EXPECT_DOUBLE_EQ(son[0].hom_visibility, soff[0].hom_visibility);
  EXPECT_DOUBLE_EQ(son[0].pbs_transmission, soff[0].pbs_transmission);
  double max_on = 0.0;
  double max_off = 0.0;
  double min_trans_on = 1.0;
  double min_trans_off = 1.0;
  for (std::size_t i = 0; i < son.size(); ++i) {
    max_on = std::max(max_on, std::abs(son[i].offset_a_ps - son[i].offset_b_ps));
    max_off = std::max(max_off,
                       std::abs(soff[i].offset_a_ps - soff[i].offset_b_ps));
    min_trans_on = std::min(min_trans_on, son[i].pbs_transmission);
    min_trans_off = std::min(min_trans_off, soff[i].pbs_transmission);
  }
  EXPECT_LT(max_on, max_off);
  EXPECT_GT(min_trans_on, min_trans_off);
}

TEST(Drift, RejectsInvalidConfigs) {
  SystemParams p;
  SimConfig cfg;
  cfg.n_pulses = 1;
  DriftConfig drift;
  EXPECT_THROW(run_with_drift(p, cfg, drift, 5.0), InputError);
  drift.control_interval_s = 0.0;
  EXPECT_THROW(run_with_drift(p, cfg, drift, 100.0), InputError);
  drift = DriftConfig{};
  drift.delay_resolution_ps = 0.0;
  EXPECT_THROW(run_with_drift(p, cfg, drift, 100.0), InputError);
}

TEST(DecoyExperiment, ProducesConsistentDatasetsPerState) {
  SystemParams p;
  std::vector<SimConfig> states(2);
  states[0].input_state = qubit_from_label("e");
  states[0].seed = 2;
  states[1].input_state = qubit_from_label("+");
  states[1].seed = 2;
  const auto data = decoy_experiment(p, DecoyIntensities{}, states, 1000000000);
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data[0].state_label, "e");
  EXPECT_EQ(data[1].state_label, "+");
  for (const DecoyDataset& d : data) {
    EXPECT_DOUBLE_EQ(d.mu_signal, 0.088);
    EXPECT_DOUBLE_EQ(d.mu_decoy, 0.029);
    EXPECT_DOUBLE_EQ(d.mu_vacuum, 0.0);
    EXPECT_GE(d.gain_signal, 0.0);
    EXPECT_GT(d.gain_signal, d.gain_vacuum);
    EXPECT_GE(d.error_signal, 0.0);
    EXPECT_LE(d.error_signal, 1.0);
    EXPECT_GE(d.error_vacuum, 0.0);
    EXPECT_LE(d.error_vacuum, 1.0);
  }
  const auto again = decoy_experiment(p, DecoyIntensities{}, states, 1000000000);
  EXPECT_EQ(again[0].gain_signal, data[0].gain_signal);
  EXPECT_EQ(again[1].error_signal, data[1].error_signal);
}

TEST(DecoyExperiment, RejectsBadIntensitiesAndEmptyStates) {
  SystemParams p;
  std::vector<SimConfig> states(1);
  DecoyIntensities mu;
  mu.mu_decoy = 0.2;
  EXPECT_THROW(decoy_experiment(p, mu, states, 1000), InputError);
  mu = DecoyIntensities{};
  mu.mu_vacuum = 0.001;
  EXPECT_THROW(decoy_experiment(p, mu, states, 1000), InputError);
  EXPECT_THROW(decoy_experiment(p, DecoyIntensities{}, {}, 1000), InputError);
  EXPECT_THROW(decoy_experiment(p, DecoyIntensities{}, states, 0), InputError);
}

}  // namespace
}  // namespace tsim
