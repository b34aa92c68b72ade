// Command-line driver: runs the closed-form model, the event-level
// simulator, and the analysis pipelines from one INI configuration, writing
// a key/value report (csv or json), optional curve tables, and a manifest
// describing the run.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "teleportsim/config.hpp"
#include "teleportsim/io.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

struct ReportValue {
  enum class Kind { kNumber, kInteger, kText };
  Kind kind = Kind::kNumber;
  double number = 0.0;
  std::int64_t integer = 0;
  std::string text;
};

struct Report {
  std::vector<std::pair<std::string, ReportValue>> items;

  void add(const std::string& key, double v) {
    ReportValue rv;
    rv.kind = ReportValue::Kind::kNumber;
    rv.number = v;
    items.emplace_back(key, rv);
  }
  void add_int(const std::string& key, std::int64_t v) {
    ReportValue rv;
    rv.kind = ReportValue::Kind::kInteger;
    rv.integer = v;
    items.emplace_back(key, rv);
  }
  void add_text(const std::string& key, const std::string& v) {
    ReportValue rv;
    rv.kind = ReportValue::Kind::kText;
    rv.text = v;
    items.emplace_back(key, rv);
  }
};

// Full-precision formatting so csv and json reports parse to identical
// doubles.
std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string render_value(const ReportValue& v) {
  switch (v.kind) {
    case ReportValue::Kind::kNumber:
      return format_full(v.number);
    case ReportValue::Kind::kInteger:
      return std::to_string(v.integer);
    case ReportValue::Kind::kText:
      return v.text;
  }
  return "";
}

void write_report(const std::string& path, const Report& report,
                  const std::string& format) {
  std::ofstream out(path);
  if (!out) throw tsim::InputError("cannot write " + path);
  if (format == "csv") {
    out << "key,value\n";
    for (const auto& [key, value] : report.items) {
      out << key << "," << render_value(value) << "\n";
    }
  } else {
    ordered_json j;
    for (const auto& [key, value] : report.items) {
      switch (value.kind) {
        case ReportValue::Kind::kNumber:
          j[key] = value.number;
          break;
        case ReportValue::Kind::kInteger:
          j[key] = value.integer;
          break;
        case ReportValue::Kind::kText:
          j[key] = value.text;
          break;
      }
    }
    out << j.dump(2) << "\n";
  }
  if (!out) throw tsim::InputError("failed writing " + path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tsim::InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(ss.str())));
  return buf;
}

void write_manifest(const std::string& path, const std::string& command,
                    std::uint64_t seed, const std::string& config_path,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  ordered_json j;
  j["command"] = command;
  j["version"] = tsim::kVersion;
  j["seed"] = seed;
  j["config"] = {{"path", config_path}, {"fnv1a64", file_hash_hex(config_path)}};
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  std::ofstream out(path);
  if (!out) throw tsim::InputError("cannot write " + path);
  out << j.dump(2) << "\n";
}

struct CommandIo {
  std::string out_dir;
  std::string format;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

Report run_model(const tsim::SystemParams& p, bool strict,
                 double correction_db) {
  const tsim::CaseProbabilities c = tsim::case_probabilities(p, strict);
  Report r;
  r.add("p111", c.p111);
  r.add("p022", c.p022);
  r.add("p201", c.p201);
  r.add("p112", c.p112);
  r.add("p_sum", c.sum());
  r.add("equatorial_fidelity", tsim::equatorial_fidelity(c, p.zeta));
  r.add("raw_rate_hz", tsim::teleport_rate(c, p.rep_rate_hz));
  r.add("correction_db", correction_db);
  r.add("corrected_rate_hz",
        tsim::teleport_rate(c, p.rep_rate_hz, correction_db));
  return r;
}

Report run_decoy(const tsim::ExperimentConfig& cfg,
                 const std::string& input_override, CommandIo& io) {
  std::vector<tsim::DecoyDataset> data;
  const std::string input =
      !input_override.empty() ? input_override : cfg.io.decoy_table;
  if (!input.empty()) {
    data = tsim::read_decoy_table(input);
    io.inputs.push_back(input);
  } else {
    std::vector<tsim::SimConfig> states;
    states.reserve(cfg.decoy.states.size());
    for (const std::string& label : cfg.decoy.states) {
      tsim::SimConfig sc = cfg.sim;
      sc.input_state = tsim::qubit_from_label(label);
      states.push_back(sc);
    }
    data = tsim::decoy_experiment(cfg.system, cfg.decoy.intensities, states,
                                  cfg.decoy.n_pulses);
  }
  Report r;
  r.add_int("n_states", static_cast<std::int64_t>(data.size()));
  double f1_sum = 0.0;
  tsim::FidelitySummary summary;
  for (const tsim::DecoyDataset& d : data) {
    const tsim::DecoyBounds b = tsim::single_photon_fidelity(d);
    r.add("y1_lower_" + d.state_label, b.y1_lower);
    r.add("e1_upper_" + d.state_label, b.e1_upper);
    r.add("f1_lower_" + d.state_label, b.f1_lower);
    r.add("sp_gain_hz_" + d.state_label, b.sp_gain);
    f1_sum += b.f1_lower;
    const tsim::Measured m{b.f1_lower, 0.0};
    if (d.state_label == "e") summary.f_e = m;
    if (d.state_label == "l") summary.f_l = m;
    if (d.state_label == "+") summary.f_plus = m;
    if (d.state_label == "+i") summary.f_plus_i = m;
  }
  r.add("f1_lower_mean", f1_sum / static_cast<double>(data.size()));
  if (summary.f_e && summary.f_l && summary.f_plus && summary.f_plus_i) {
    // Six-direction Bloch average: each equator state stands in for an
    // antipodal pair.
    r.add("f1_lower_avg",
          tsim::average_fidelity(summary, tsim::AverageMode::kFourState).value);
  }
  return r;
}

Report run_simulate(const tsim::ExperimentConfig& cfg) {
  const tsim::SimResult res = tsim::run(cfg.system, cfg.sim);
  Report r;
  r.add_int("n_pulses", res.n_pulses);
  r.add_text("input_state", tsim::label_of(cfg.sim.input_state));
  r.add_int("accepted", res.accepted());
  r.add_int("counts_max", res.counts_max);
  r.add_int("counts_min", res.counts_min);
  r.add("gain", res.gain);
  r.add("rate_hz", res.gain * cfg.system.rep_rate_hz);
  r.add("fidelity_estimate", res.fidelity_estimate);
  r.add("fidelity_sigma", res.fidelity_sigma);
  r.add_int("tally_111", res.tallies.n111);
  r.add_int("tally_022", res.tallies.n022);
  r.add_int("tally_201", res.tallies.n201);
  r.add_int("tally_112", res.tallies.n112);
  r.add_int("tally_higher", res.tallies.higher);
  r.add_int("tally_dark", res.tallies.dark);
  return r;
}

Report run_hom(const tsim::ExperimentConfig& cfg, CommandIo& io) {
  std::vector<double> delays;
  for (double x = cfg.hom.delay_min_ps; x <= cfg.hom.delay_max_ps + 1e-9;
       x += cfg.hom.delay_step_ps) {
    delays.push_back(x);
  }
  tsim::HomScanConfig hc = cfg.hom.scan;
  hc.seed = cfg.sim.seed;
  const tsim::DipScan scan = tsim::run_hom_scan(cfg.system, delays, hc);
  const tsim::DipFit fit = tsim::fit_hom_dip(scan);

  const double n1 = tsim::bsm_mean_idler(cfg.system);
  const double n2 = tsim::bsm_mean_qubit(cfg.system);
  const double v_raw = tsim::hom_visibility(n1, n2, hc.g2_1, hc.g2_2);

  Report r;
  r.add("visibility", fit.visibility);
  r.add("baseline_rate_hz", fit.baseline);
  r.add("center_ps", fit.center_ps);
  r.add("width_ps", fit.width_ps);
  r.add("visibility_theory", cfg.system.zeta * v_raw);
  r.add("visibility_statistical_limit", v_raw);
  r.add("indistinguishability_estimate",
        tsim::indistinguishability(fit.visibility, v_raw));

  std::vector<std::vector<double>> rows;
  rows.reserve(scan.size());
  for (const tsim::DipPoint& pt : scan) {
    const double rate = pt.coincidences / pt.integration_s;
    const double dx = pt.delay_ps - fit.center_ps;
    const double fitted =
        fit.baseline *
        (1.0 - fit.visibility *
                   std::exp(-dx * dx / (2.0 * fit.width_ps * fit.width_ps)));
    rows.push_back({pt.delay_ps, pt.coincidences, pt.integration_s, rate,
                    fitted});
  }
  const std::string curve = join_path(io.out_dir, "hom_scan.txt");
  tsim::write_table(curve,
                    {"delay_ps", "coincidences", "integration_s", "rate_hz",
                     "fit_rate_hz"},
                    rows);
  io.outputs.push_back(curve);
  return r;
}

Report run_drift(const tsim::ExperimentConfig& cfg, CommandIo& io) {
  const std::vector<tsim::DriftSample> samples = tsim::run_with_drift(
      cfg.system, cfg.sim, cfg.drift.config, cfg.drift.duration_s);
  const double v0 = tsim::drift_free_hom_visibility(cfg.system);

  double min_vis = samples.front().hom_visibility;
  double sum_vis = 0.0;
  double min_trans = samples.front().pbs_transmission;
  double sum_trans = 0.0;
  double max_delta = 0.0;
  for (const tsim::DriftSample& s : samples) {
    min_vis = std::min(min_vis, s.hom_visibility);
    sum_vis += s.hom_visibility;
    min_trans = std::min(min_trans, s.pbs_transmission);
    sum_trans += s.pbs_transmission;
    max_delta = std::max(max_delta, std::abs(s.offset_a_ps - s.offset_b_ps));
  }
  const double n = static_cast<double>(samples.size());
  const tsim::DriftSample& last = samples.back();

  Report r;
  r.add_int("n_intervals", static_cast<std::int64_t>(samples.size()));
  r.add("duration_s", cfg.drift.duration_s);
  r.add_text("timing_feedback",
             cfg.drift.config.timing_feedback ? "true" : "false");
  r.add_text("pol_feedback", cfg.drift.config.pol_feedback ? "true" : "false");
  r.add("drift_free_visibility", v0);
  r.add("min_visibility", min_vis);
  r.add("mean_visibility", sum_vis / n);
  r.add("final_visibility", last.hom_visibility);
  r.add("min_visibility_ratio", min_vis / v0);
  r.add("final_visibility_ratio", last.hom_visibility / v0);
  r.add("max_delta_ps", max_delta);
  r.add("final_delta_ps", std::abs(last.offset_a_ps - last.offset_b_ps));
  r.add("min_transmission", min_trans);
  r.add("mean_transmission", sum_trans / n);

  std::vector<std::vector<double>> rows;
  rows.reserve(samples.size());
  for (const tsim::DriftSample& s : samples) {
    rows.push_back({s.t_s, s.offset_a_ps, s.offset_b_ps,
                    s.offset_a_ps - s.offset_b_ps, s.pbs_transmission,
                    s.hom_visibility, s.hom_visibility / v0});
  }
  const std::string curve = join_path(io.out_dir, "drift_timeline.txt");
  tsim::write_table(curve,
                    {"t_s", "offset_a_ps", "offset_b_ps", "delta_ps",
                     "pbs_transmission", "hom_visibility", "visibility_ratio"},
                    rows);
  io.outputs.push_back(curve);
  return r;
}

Report run_sweep(const tsim::ExperimentConfig& cfg, CommandIo& io) {
  tsim::SweepSpec spec;
  spec.variable = cfg.sweep.variable;
  spec.values = cfg.sweep.values;
  spec.fiber_loss_db_per_km = cfg.sweep.fiber_loss_db_per_km;
  spec.correction_db = cfg.sweep.correction_db;
  const std::vector<tsim::SweepPoint> points = tsim::sweep(cfg.system, spec);

  const char* name = "distance_km";
  if (spec.variable == tsim::SweepVariable::kMuA) name = "mu_a";
  if (spec.variable == tsim::SweepVariable::kMuSpdc) name = "mu_spdc";

  const tsim::SweepPoint* peak = &points.front();
  double f_min = points.front().fidelity;
  double f_max = points.front().fidelity;
  for (const tsim::SweepPoint& pt : points) {
    if (pt.fidelity > peak->fidelity) peak = &pt;
    f_min = std::min(f_min, pt.fidelity);
    f_max = std::max(f_max, pt.fidelity);
  }

  Report r;
  r.add_text("variable", name);
  r.add_int("n_points", static_cast<std::int64_t>(points.size()));
  r.add("fidelity_min", f_min);
  r.add("fidelity_max", f_max);
  r.add("peak_x", peak->x);
  r.add("peak_fidelity", peak->fidelity);
  r.add("rate_first_hz", points.front().rate_hz);
  r.add("rate_last_hz", points.back().rate_hz);

  std::vector<std::vector<double>> rows;
  rows.reserve(points.size());
  for (const tsim::SweepPoint& pt : points) {
    rows.push_back({pt.x, pt.fidelity, pt.rate_hz, std::log10(pt.rate_hz)});
  }
  const std::string curve = join_path(io.out_dir, "sweep_curve.txt");
  tsim::write_table(curve, {name, "fidelity", "rate_hz", "log10_rate_hz"},
                    rows);
  io.outputs.push_back(curve);
  return r;
}

Report run_tomography(const tsim::ExperimentConfig& cfg,
                      const std::string& input_override, CommandIo& io) {
  const std::string input =
      !input_override.empty() ? input_override : cfg.io.tomography_counts;
  if (input.empty()) {
    throw tsim::InputError(
        "tomography needs --input or [io] tomography_counts");
  }
  const tsim::TomographyCounts counts = tsim::read_tomography_counts(input);
  io.inputs.push_back(input);
  const tsim::TimeBinQubit in_state =
      tsim::qubit_from_label(cfg.tomography_expected_input);
  const tsim::TomographyResult res = tsim::tomography_pipeline(counts, in_state);
  const auto bloch = tsim::bloch_vector(res.rho);
  const double r2 =
      bloch[0] * bloch[0] + bloch[1] * bloch[1] + bloch[2] * bloch[2];

  Report r;
  r.add_text("expected_input", cfg.tomography_expected_input);
  r.add_text("expected_output",
             tsim::label_of(tsim::expected_output_state(in_state)));
  r.add("fidelity", res.fidelity);
  r.add("purity", 0.5 * (1.0 + r2));
  r.add("bloch_x", bloch[0]);
  r.add("bloch_y", bloch[1]);
  r.add("bloch_z", bloch[2]);
  r.add("rho00_re", res.rho.m[0][0].real());
  r.add("rho01_re", res.rho.m[0][1].real());
  r.add("rho01_im", res.rho.m[0][1].imag());
  r.add("rho10_re", res.rho.m[1][0].real());
  r.add("rho10_im", res.rho.m[1][0].imag());
  r.add("rho11_re", res.rho.m[1][1].real());
  return r;
}

Report run_pairs(const tsim::ExperimentConfig& cfg,
                 const std::string& input_override, bool weighted,
                 CommandIo& io) {
  const std::string input =
      !input_override.empty() ? input_override : cfg.io.power_scan;
  if (input.empty()) {
    throw tsim::InputError("pairs needs --input or [io] power_scan");
  }
  const std::vector<tsim::PowerScanPoint> scan = tsim::read_power_scan(input);
  io.inputs.push_back(input);
  const tsim::PowerScanFit fit = tsim::fit_power_scan(scan, weighted);

  const tsim::PowerScanPoint* top = &scan.front();
  for (const tsim::PowerScanPoint& pt : scan) {
    if (pt.pump_power_mw > top->pump_power_mw) top = &pt;
  }
  const tsim::PairNumberResult pn = tsim::extract_pair_number(
      top->coincidences, top->accidentals, cfg.pairs.collection_s,
      cfg.pairs.collection_i, top->integration_s, cfg.system.rep_rate_hz);

  Report r;
  r.add_int("n_points", static_cast<std::int64_t>(scan.size()));
  r.add("signal_quadratic", fit.signal.params[0]);
  r.add("signal_linear", fit.signal.params[1]);
  r.add("signal_constant", fit.signal.params[2]);
  r.add("idler_quadratic", fit.idler.params[0]);
  r.add("idler_linear", fit.idler.params[1]);
  r.add("idler_constant", fit.idler.params[2]);
  r.add("top_power_mw", top->pump_power_mw);
  r.add("pair_rate_hz", pn.pair_rate);
  r.add("mu", pn.mu);
  const double car = tsim::car(top->coincidences, top->accidentals);
  if (std::isfinite(car)) {
    r.add("car", car);
  } else {
    r.add_text("car", "inf");
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(scan.size());
  for (const tsim::PowerScanPoint& pt : scan) {
    const tsim::PairNumberResult row_pn = tsim::extract_pair_number(
        pt.coincidences, pt.accidentals, cfg.pairs.collection_s,
        cfg.pairs.collection_i, pt.integration_s, cfg.system.rep_rate_hz);
    rows.push_back({pt.pump_power_mw, pt.singles_s / pt.integration_s,
                    pt.singles_i / pt.integration_s, row_pn.pair_rate,
                    row_pn.mu, tsim::car(pt.coincidences, pt.accidentals)});
  }
  const std::string curve = join_path(io.out_dir, "pair_curve.txt");
  tsim::write_table(curve,
                    {"pump_power_mw", "singles_s_rate_hz", "singles_i_rate_hz",
                     "pair_rate_hz", "mu", "car"},
                    rows);
  io.outputs.push_back(curve);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-bin qubit teleportation model and simulator"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "experiment configuration (INI)")
      ->required();
  std::string format = "csv";
  app.add_option("--format", format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));
  std::string out_dir_override;
  app.add_option("--out", out_dir_override, "output directory override");
  std::uint64_t seed_override = 0;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_override, "random seed override");

  CLI::App* cmd_model =
      app.add_subcommand("model", "closed-form gain and fidelity");
  bool strict = false;
  cmd_model->add_flag("--strict-p022", strict,
                      "require both receiver photons detected");
  double correction_db = 6.25;
  cmd_model->add_option("--correction-db", correction_db,
                        "loss correction applied to the corrected rate");

  CLI::App* cmd_decoy =
      app.add_subcommand("decoy", "single-photon bounds from decoy data");
  std::string decoy_input;
  cmd_decoy->add_option("--input", decoy_input, "measured decoy table");

  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "event-level teleportation run");

  CLI::App* cmd_hom =
      app.add_subcommand("hom", "two-photon interference delay scan");

  CLI::App* cmd_drift =
      app.add_subcommand("drift", "drift and feedback timeline");

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "fidelity and rate versus one parameter");

  CLI::App* cmd_tomography =
      app.add_subcommand("tomography", "density matrix from projection counts");
  std::string tomo_input;
  cmd_tomography->add_option("--input", tomo_input, "projection counts table");

  CLI::App* cmd_pairs =
      app.add_subcommand("pairs", "pair source characterization");
  std::string pairs_input;
  cmd_pairs->add_option("--input", pairs_input, "power scan table");
  bool pairs_weighted = false;
  cmd_pairs->add_flag("--weighted", pairs_weighted,
                      "Poisson-weighted power scan fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    tsim::ExperimentConfig cfg = tsim::load_experiment_config(config_path);
    if (seed_opt->count() > 0) cfg.sim.seed = seed_override;

    CommandIo io;
    io.out_dir = !out_dir_override.empty() ? out_dir_override : cfg.io.out_dir;
    io.format = format;
    std::filesystem::create_directories(io.out_dir);

    std::string command;
    Report report;
    if (cmd_model->parsed()) {
      command = "model";
      report = run_model(cfg.system, strict, correction_db);
    } else if (cmd_decoy->parsed()) {
      command = "decoy";
      report = run_decoy(cfg, decoy_input, io);
    } else if (cmd_simulate->parsed()) {
      command = "simulate";
      report = run_simulate(cfg);
    } else if (cmd_hom->parsed()) {
      command = "hom";
      report = run_hom(cfg, io);
    } else if (cmd_drift->parsed()) {
      command = "drift";
      report = run_drift(cfg, io);
    } else if (cmd_sweep->parsed()) {
      command = "sweep";
      report = run_sweep(cfg, io);
    } else if (cmd_tomography->parsed()) {
      command = "tomography";
      report = run_tomography(cfg, tomo_input, io);
    } else if (cmd_pairs->parsed()) {
      command = "pairs";
      report = run_pairs(cfg, pairs_input, pairs_weighted, io);
    }

    const std::string report_path =
        join_path(io.out_dir, command + "_report." + format);
    write_report(report_path, report, format);
    io.outputs.push_back(report_path);

    const std::string manifest_path =
        join_path(io.out_dir, command + "_manifest.json");
    write_manifest(manifest_path, command, cfg.sim.seed, config_path,
                   io.inputs, io.outputs);

    for (const auto& [key, value] : report.items) {
      std::cout << key << " = " << render_value(value) << "\n";
    }
    return 0;
  } catch (const tsim::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tsim::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
