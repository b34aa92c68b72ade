#pragma once
// Experiment configuration: a strict INI reader (unknown sections, unknown
// keys, duplicates, and malformed lines are errors with line numbers) and
// the typed settings consumed by the command-line tool. Missing keys fall
// back to the documented defaults; full-line comments start with '#' or ';'.

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "teleportsim/core.hpp"
#include "teleportsim/event_sim.hpp"
#include "teleportsim/teleport_model.hpp"

namespace tsim {

struct IniFile {
  std::string path;
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, int> section_lines;
  std::map<std::string, int> key_lines;  // "section.key"
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline InputError ini_error(const IniFile& f, int line, const std::string& m) {
  return InputError(f.path + ":" + std::to_string(line) + ": " + m);
}

}  // namespace detail

inline IniFile read_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  IniFile f;
  f.path = path;
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw detail::ini_error(f, line_no, "malformed section header");
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw detail::ini_error(f, line_no, "empty section name");
      }
      if (f.values.count(section)) {
        throw detail::ini_error(f, line_no,
                                "duplicate section [" + section + "]");
      }
      f.values[section];
      f.section_lines[section] = line_no;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw detail::ini_error(f, line_no, "expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw detail::ini_error(f, line_no, "empty key");
    if (section.empty()) {
      throw detail::ini_error(f, line_no, "key outside any section");
    }
    if (f.values[section].count(key)) {
      throw detail::ini_error(f, line_no, "duplicate key \"" + key + "\"");
    }
    f.values[section][key] = value;
    f.key_lines[section + "." + key] = line_no;
  }
  return f;
}

namespace detail {

inline const std::string* ini_find(const IniFile& f, const std::string& section,
                                   const std::string& key) {
  auto s = f.values.find(section);
  if (s == f.values.end()) return nullptr;
  auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  return &k->second;
}

inline int ini_line(const IniFile& f, const std::string& section,
                    const std::string& key) {
  auto it = f.key_lines.find(section + "." + key);
  return it == f.key_lines.end() ? 0 : it->second;
}

inline double ini_double(const IniFile& f, const std::string& section,
                         const std::string& key, double fallback) {
  const std::string* v = ini_find(f, section, key);
  if (!v) return fallback;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v->size() || v->empty()) {
    throw ini_error(f, ini_line(f, section, key),
                    "cannot parse \"" + *v + "\" as a number");
  }
  return value;
}

inline std::int64_t ini_int(const IniFile& f, const std::string& section,
                            const std::string& key, std::int64_t fallback) {
  const std::string* v = ini_find(f, section, key);
  if (!v) return fallback;
  std::size_t used = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v->size() || v->empty()) {
    throw ini_error(f, ini_line(f, section, key),
                    "cannot parse \"" + *v + "\" as an integer");
  }
  return value;
}

inline bool ini_bool(const IniFile& f, const std::string& section,
                     const std::string& key, bool fallback) {
  const std::string* v = ini_find(f, section, key);
  if (!v) return fallback;
  if (*v == "true") return true;
  if (*v == "false") return false;
  throw ini_error(f, ini_line(f, section, key),
                  "expected \"true\" or \"false\", got \"" + *v + "\"");
}

inline std::string ini_string(const IniFile& f, const std::string& section,
                              const std::string& key,
                              const std::string& fallback) {
  const std::string* v = ini_find(f, section, key);
  return v ? *v : fallback;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : s) {
    if (ch == ' ' || ch == '\t' || ch == ',') {
      if (!cell.empty()) {
        out.push_back(cell);
        cell.clear();
      }
      continue;
    }
    cell.push_back(ch);
  }
  if (!cell.empty()) out.push_back(cell);
  return out;
}

inline std::vector<double> ini_double_list(const IniFile& f,
                                           const std::string& section,
                                           const std::string& key,
                                           const std::vector<double>& fallback) {
  const std::string* v = ini_find(f, section, key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const std::string& cell : split_list(*v)) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cell.size()) {
      throw ini_error(f, ini_line(f, section, key),
                      "cannot parse \"" + cell + "\" as a number");
    }
    out.push_back(value);
  }
  if (out.empty()) {
    throw ini_error(f, ini_line(f, section, key), "empty list");
  }
  return out;
}

}  // namespace detail

struct DriftSettings {
  DriftConfig config;
  double duration_s = 3600.0;
};

struct DecoySettings {
  DecoyIntensities intensities;
  std::vector<std::string> states = {"e", "l", "+", "+i"};
  std::int64_t n_pulses = 1000000000;  // per state and intensity level
};

struct SweepSettings {
  SweepVariable variable = SweepVariable::kDistanceKm;
  std::vector<double> values = {0.0, 10.0, 20.0, 30.0, 40.0, 50.0};
  double fiber_loss_db_per_km = 0.2;
  double correction_db = 0.0;
};

struct HomSettings {
  double delay_min_ps = -150.0;
  double delay_max_ps = 150.0;
  double delay_step_ps = 10.0;
  HomScanConfig scan;
};

struct IoSettings {
  std::string out_dir = ".";
  std::string decoy_table;
  std::string power_scan;
  std::string tomography_counts;
};

struct PairSettings {
  double collection_s = 1.0;
  double collection_i = 1.0;
};

struct ExperimentConfig {
  SystemParams system;
  SimConfig sim;
  DriftSettings drift;
  DecoySettings decoy;
  SweepSettings sweep;
  HomSettings hom;
  IoSettings io;
  PairSettings pairs;
  std::string tomography_expected_input = "+";
};

inline void check_ini_schema(const IniFile& f) {
  static const std::map<std::string, std::set<std::string>> kSchema = {
      {"system",
       {"rep_rate_hz", "mu_spdc", "mu_a", "eta_a", "eta_i", "eta_s", "xi_bsm",
        "xi_s", "zeta", "bin_separation_ps", "coincidence_window_ps"}},
      {"sim",
       {"n_pulses", "seed", "input_state", "dark_count_prob",
        "pair_statistics", "umzi2_phase_rad"}},
      {"drift",
       {"timing_walk_sigma_ps", "pol_walk_sigma_rad", "control_interval_s",
        "delay_resolution_ps", "wavepacket_sigma_ps", "timing_feedback",
        "pol_feedback", "duration_s"}},
      {"decoy", {"mu_signal", "mu_decoy", "mu_vacuum", "states", "n_pulses"}},
      {"sweep",
       {"variable", "values", "fiber_loss_db_per_km", "correction_db"}},
      {"hom",
       {"delay_min_ps", "delay_max_ps", "delay_step_ps", "pulses_per_delay",
        "wavepacket_sigma_ps", "g2_1", "g2_2"}},
      {"io", {"out_dir", "decoy_table", "power_scan", "tomography_counts"}},
      {"tomography", {"expected_input"}},
      {"pairs", {"collection_s", "collection_i"}},
  };
  for (const auto& [section, kv] : f.values) {
    auto it = kSchema.find(section);
    if (it == kSchema.end()) {
      throw detail::ini_error(f, f.section_lines.at(section),
                              "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : kv) {
      if (!it->second.count(key)) {
        throw detail::ini_error(f, detail::ini_line(f, section, key),
                                "unknown key \"" + key + "\" in [" + section +
                                    "]");
      }
    }
  }
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  const IniFile f = read_ini(path);
  check_ini_schema(f);
  if (!f.values.count("system")) {
    throw InputError(path + ": missing required section [system]");
  }

  ExperimentConfig c;
  SystemParams& p = c.system;
  p.rep_rate_hz = detail::ini_double(f, "system", "rep_rate_hz", p.rep_rate_hz);
  p.mu_spdc = detail::ini_double(f, "system", "mu_spdc", p.mu_spdc);
  p.mu_a = detail::ini_double(f, "system", "mu_a", p.mu_a);
  p.eta_a = detail::ini_double(f, "system", "eta_a", p.eta_a);
  p.eta_i = detail::ini_double(f, "system", "eta_i", p.eta_i);
  p.eta_s = detail::ini_double(f, "system", "eta_s", p.eta_s);
  p.xi_bsm = detail::ini_double(f, "system", "xi_bsm", p.xi_bsm);
  p.xi_s = detail::ini_double(f, "system", "xi_s", p.xi_s);
  p.zeta = detail::ini_double(f, "system", "zeta", p.zeta);
  p.bin_separation =
      detail::ini_double(f, "system", "bin_separation_ps",
                         p.bin_separation * 1e12) *
      1e-12;
  p.coincidence_window =
      detail::ini_double(f, "system", "coincidence_window_ps",
                         p.coincidence_window * 1e12) *
      1e-12;
  validate(p);

  c.sim.n_pulses = detail::ini_int(f, "sim", "n_pulses", 10000000000LL);
  c.sim.seed = static_cast<std::uint64_t>(
      detail::ini_int(f, "sim", "seed", 0));
  c.sim.input_state =
      qubit_from_label(detail::ini_string(f, "sim", "input_state", "+"));
  c.sim.dark_count_prob =
      detail::ini_double(f, "sim", "dark_count_prob", 0.0);
  const std::string stats =
      detail::ini_string(f, "sim", "pair_statistics", "poissonian");
  if (stats == "poissonian") {
    c.sim.pair_statistics = SimConfig::PairStatistics::kPoissonian;
  } else if (stats == "thermal") {
    c.sim.pair_statistics = SimConfig::PairStatistics::kThermal;
  } else {
    throw detail::ini_error(f, detail::ini_line(f, "sim", "pair_statistics"),
                            "pair_statistics must be poissonian or thermal");
  }
  c.sim.umzi2_phase = detail::ini_double(f, "sim", "umzi2_phase_rad", 0.0);

  DriftConfig& d = c.drift.config;
  d.timing_walk_sigma_ps = detail::ini_double(f, "drift", "timing_walk_sigma_ps",
                                              d.timing_walk_sigma_ps);
  d.pol_walk_sigma_rad =
      detail::ini_double(f, "drift", "pol_walk_sigma_rad", d.pol_walk_sigma_rad);
  d.control_interval_s =
      detail::ini_double(f, "drift", "control_interval_s", d.control_interval_s);
  d.delay_resolution_ps =
      detail::ini_double(f, "drift", "delay_resolution_ps",
                         d.delay_resolution_ps);
  d.wavepacket_sigma_ps = detail::ini_double(f, "drift", "wavepacket_sigma_ps",
                                             d.wavepacket_sigma_ps);
  d.timing_feedback =
      detail::ini_bool(f, "drift", "timing_feedback", d.timing_feedback);
  d.pol_feedback = detail::ini_bool(f, "drift", "pol_feedback", d.pol_feedback);
  validate(d);
  c.drift.duration_s =
      detail::ini_double(f, "drift", "duration_s", c.drift.duration_s);

  c.decoy.intensities.mu_signal = detail::ini_double(
      f, "decoy", "mu_signal", c.decoy.intensities.mu_signal);
  c.decoy.intensities.mu_decoy =
      detail::ini_double(f, "decoy", "mu_decoy", c.decoy.intensities.mu_decoy);
  c.decoy.intensities.mu_vacuum = detail::ini_double(
      f, "decoy", "mu_vacuum", c.decoy.intensities.mu_vacuum);
  if (const std::string* v = detail::ini_find(f, "decoy", "states")) {
    c.decoy.states = detail::split_list(*v);
    if (c.decoy.states.empty()) {
      throw detail::ini_error(f, detail::ini_line(f, "decoy", "states"),
                              "empty state list");
    }
    for (const std::string& s : c.decoy.states) qubit_from_label(s);
  }
  c.decoy.n_pulses =
      detail::ini_int(f, "decoy", "n_pulses", c.decoy.n_pulses);

  const std::string variable =
      detail::ini_string(f, "sweep", "variable", "distance_km");
  if (variable == "mu_a") {
    c.sweep.variable = SweepVariable::kMuA;
  } else if (variable == "mu_spdc") {
    c.sweep.variable = SweepVariable::kMuSpdc;
  } else if (variable == "distance_km") {
    c.sweep.variable = SweepVariable::kDistanceKm;
  } else {
    throw detail::ini_error(f, detail::ini_line(f, "sweep", "variable"),
                            "variable must be mu_a, mu_spdc, or distance_km");
  }
  c.sweep.values = detail::ini_double_list(f, "sweep", "values", c.sweep.values);
  c.sweep.fiber_loss_db_per_km = detail::ini_double(
      f, "sweep", "fiber_loss_db_per_km", c.sweep.fiber_loss_db_per_km);
  c.sweep.correction_db =
      detail::ini_double(f, "sweep", "correction_db", c.sweep.correction_db);

  c.hom.delay_min_ps =
      detail::ini_double(f, "hom", "delay_min_ps", c.hom.delay_min_ps);
  c.hom.delay_max_ps =
      detail::ini_double(f, "hom", "delay_max_ps", c.hom.delay_max_ps);
  c.hom.delay_step_ps =
      detail::ini_double(f, "hom", "delay_step_ps", c.hom.delay_step_ps);
  if (!(c.hom.delay_step_ps > 0.0) ||
      !(c.hom.delay_max_ps > c.hom.delay_min_ps)) {
    throw InputError(path + ": [hom] needs delay_max_ps > delay_min_ps and " +
                     "delay_step_ps > 0");
  }
  c.hom.scan.pulses_per_delay =
      detail::ini_int(f, "hom", "pulses_per_delay", 10000000000LL);
  c.hom.scan.wavepacket_sigma_ps = detail::ini_double(
      f, "hom", "wavepacket_sigma_ps", c.hom.scan.wavepacket_sigma_ps);
  c.hom.scan.g2_1 = detail::ini_double(f, "hom", "g2_1", c.hom.scan.g2_1);
  c.hom.scan.g2_2 = detail::ini_double(f, "hom", "g2_2", c.hom.scan.g2_2);

  c.io.out_dir = detail::ini_string(f, "io", "out_dir", c.io.out_dir);
  c.io.decoy_table = detail::ini_string(f, "io", "decoy_table", "");
  c.io.power_scan = detail::ini_string(f, "io", "power_scan", "");
  c.io.tomography_counts =
      detail::ini_string(f, "io", "tomography_counts", "");

  c.tomography_expected_input = detail::ini_string(
      f, "tomography", "expected_input", c.tomography_expected_input);
  qubit_from_label(c.tomography_expected_input);

  c.pairs.collection_s =
      detail::ini_double(f, "pairs", "collection_s", c.pairs.collection_s);
  c.pairs.collection_i =
      detail::ini_double(f, "pairs", "collection_i", c.pairs.collection_i);
  if (!(c.pairs.collection_s > 0.0 && c.pairs.collection_s <= 1.0) ||
      !(c.pairs.collection_i > 0.0 && c.pairs.collection_i <= 1.0)) {
    throw InputError(path + ": [pairs] collection efficiencies must be in " +
                     "(0, 1]");
  }

  return c;
}

}  // namespace tsim
