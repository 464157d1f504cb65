#pragma once

// Run configuration: a flat, sectioned key = value text format. Frequencies
// are entered in MHz (nu = omega/2pi), times in microseconds, detection
// rates in Hz. Unknown sections or keys are rejected at parse time; value
// validation reports every violated invariant with its section.key name.

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstirap/detection.hpp"
#include "vstirap/params.hpp"
#include "vstirap/pulse.hpp"
#include "vstirap/simulation.hpp"
#include "vstirap/sweeps.hpp"

namespace vstirap {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // [system]
  Line line = Line::D2;
  double g_max_mhz = 5.1;
  double coupling_scale = 1.0;
  double kappa_mhz = 2.8;
  double gamma_mhz = 3.0;
  double delta_mhz = 0.0;
  double two_photon_detuning_mhz = 0.0;
  int n_max = 2;
  std::string polarization_modes = "single";  // single | two
  std::string initial_state = "pure";      // pure | pumped
  double preparation_fidelity = 0.9;

  // [pulse]
  std::string pulse_kind = "linear";  // linear | power | constant | piecewise
  double pulse_exponent = 0.75;
  double duration_us = 3.0;
  double omega_max_mhz = 10.0;
  std::string knots;  // "t0:w0,t1:w1,..." (us : MHz)

  // [solver]
  double rtol = 1e-8;
  double atol = 1e-10;
  int output_points = 1200;
  double quiet_threshold = 1e-6;
  double horizon_factor = 10.0;
  bool check_truncation = false;

  // [sweep]
  std::string sweep_axis = "coupling";  // coupling | omega | delta | steepness
  int sweep_points = 25;
  double sweep_min_mhz = 0.25;
  double sweep_max_mhz = 25.0;
  std::string sweep_spacing = "log";  // log | linear
  std::string sweep_include;          // extra comma-separated MHz values

  // [detection]
  double directionality = 0.89;
  double path_transmission = 0.625;
  double quantum_efficiency = 0.4997;
  double dark_count_rate_hz = 0.0;
  double repetition_rate_hz = 10000.0;
  double attempt_window_us = 8.0;
  long n_attempts = 300000;
  double bin_width_us = 1.0;
  double tau_max_us = 450.0;

  // [output]
  std::string output_directory = "out";

  // [run]
  std::uint64_t seed = 1;
  int jobs = 0;

  bool explicit_g_max = false;  // set when the file or an override names g_max

  static RunConfig parse(const std::string& text);
  static RunConfig parse_file(const std::string& path);

  /// "section.key=value" override, as used by --set.
  void apply_override(const std::string& assignment);

  std::vector<std::string> validate() const;

  SystemParams system_params() const;
  PulseProfile pulse_profile() const;
  SolverConfig solver_config() const;
  DetectionChain detection_chain() const;
  SweepSpec sweep_spec() const;

  /// Fully resolved key = value listing, for reproducibility headers.
  std::vector<std::string> resolved_lines() const;

 private:
  void set(const std::string& section, const std::string& key, const std::string& value);
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not a number: '" + v + "'");
  }
}

inline long to_long(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not an integer: '" + v + "'");
  }
}

inline bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where + ": not a boolean: '" + v + "'");
}

}  // namespace detail

inline void RunConfig::set(const std::string& section, const std::string& key,
                           const std::string& value) {
  const std::string where = section + "." + key;
  auto num = [&] { return detail::to_double(value, where); };
  auto integer = [&] { return detail::to_long(value, where); };

  if (section == "system") {
    if (key == "line") {
      if (value == "D1" || value == "d1") line = Line::D1;
      else if (value == "D2" || value == "d2") line = Line::D2;
      else throw ConfigError(where + ": expected D1 or D2");
      if (!explicit_g_max) g_max_mhz = line == Line::D1 ? 2.3 : 5.1;
    } else if (key == "g_max") { g_max_mhz = num(); explicit_g_max = true; }
    else if (key == "coupling_scale") coupling_scale = num();
    else if (key == "kappa") kappa_mhz = num();
    else if (key == "gamma") gamma_mhz = num();
    else if (key == "delta") delta_mhz = num();
    else if (key == "two_photon_detuning") two_photon_detuning_mhz = num();
    else if (key == "n_max") n_max = static_cast<int>(integer());
    else if (key == "polarization_modes") polarization_modes = value;
    else if (key == "initial_state") initial_state = value;
    else if (key == "preparation_fidelity") preparation_fidelity = num();
    else throw ConfigError("unknown key " + where);
  } else if (section == "pulse") {
    if (key == "kind") pulse_kind = value;
    else if (key == "exponent") pulse_exponent = num();
    else if (key == "duration") duration_us = num();
    else if (key == "omega_max") omega_max_mhz = num();
    else if (key == "knots") knots = value;
    else throw ConfigError("unknown key " + where);
  } else if (section == "solver") {
    if (key == "rtol") rtol = num();
    else if (key == "atol") atol = num();
    else if (key == "output_points") output_points = static_cast<int>(integer());
    else if (key == "quiet_threshold") quiet_threshold = num();
    else if (key == "horizon_factor") horizon_factor = num();
    else if (key == "check_truncation") check_truncation = detail::to_bool(value, where);
    else throw ConfigError("unknown key " + where);
  } else if (section == "sweep") {
    if (key == "axis") sweep_axis = value;
    else if (key == "points") sweep_points = static_cast<int>(integer());
    else if (key == "min") sweep_min_mhz = num();
    else if (key == "max") sweep_max_mhz = num();
    else if (key == "spacing") sweep_spacing = value;
    else if (key == "include") sweep_include = value;
    else throw ConfigError("unknown key " + where);
  } else if (section == "detection") {
    if (key == "directionality") directionality = num();
    else if (key == "path_transmission") path_transmission = num();
    else if (key == "quantum_efficiency") quantum_efficiency = num();
    else if (key == "dark_count_rate") dark_count_rate_hz = num();
    else if (key == "repetition_rate") repetition_rate_hz = num();
    else if (key == "attempt_window") attempt_window_us = num();
    else if (key == "n_attempts") n_attempts = integer();
    else if (key == "bin_width") bin_width_us = num();
    else if (key == "tau_max") tau_max_us = num();
    else throw ConfigError("unknown key " + where);
  } else if (section == "output") {
    if (key == "directory") output_directory = value;
    else throw ConfigError("unknown key " + where);
  } else if (section == "run") {
    if (key == "seed") seed = static_cast<std::uint64_t>(integer());
    else if (key == "jobs") jobs = static_cast<int>(integer());
    else throw ConfigError("unknown key " + where);
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

inline RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string s = raw;
    std::size_t hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
    cfg.set(section, key, value);
  }
  return cfg;
}

inline RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::ios_base::failure("cannot read config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

inline void RunConfig::apply_override(const std::string& assignment) {
  std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  std::string path = detail::trim(assignment.substr(0, eq));
  std::string value = detail::trim(assignment.substr(eq + 1));
  std::size_t dot = path.find('.');
  if (dot == std::string::npos)
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  set(path.substr(0, dot), path.substr(dot + 1), value);
}

inline std::vector<std::string> RunConfig::validate() const {
  std::vector<std::string> v;
  auto sys = [&]() -> std::optional<SystemParams> {
    if (polarization_modes != "two" && polarization_modes != "single") {
      v.push_back("system.polarization_modes must be 'two' or 'single'");
      return std::nullopt;
    }
    if (initial_state != "pure" && initial_state != "pumped") {
      v.push_back("system.initial_state must be 'pure' or 'pumped'");
      return std::nullopt;
    }
    return system_params();
  }();
  if (sys) {
    for (auto& msg : sys->validate()) v.push_back(msg);
  }
  if (pulse_kind != "linear" && pulse_kind != "power" && pulse_kind != "constant" &&
      pulse_kind != "piecewise") {
    v.push_back("pulse.kind must be linear|power|constant|piecewise");
  } else {
    for (auto& msg : pulse_profile().validate()) v.push_back(msg);
  }
  if (!(rtol > 0.0) || rtol > 1e-4) v.push_back("solver.rtol must be in (0, 1e-4]");
  if (!(atol > 0.0)) v.push_back("solver.atol must be > 0");
  if (output_points < 2) v.push_back("solver.output_points must be >= 2");
  if (quiet_threshold <= 0.0) v.push_back("solver.quiet_threshold must be > 0");
  if (horizon_factor < 1.0) v.push_back("solver.horizon_factor must be >= 1");
  if (sweep_axis != "coupling" && sweep_axis != "omega" && sweep_axis != "delta" &&
      sweep_axis != "steepness")
    v.push_back("sweep.axis must be coupling|omega|delta|steepness");
  if (sweep_points < 2) v.push_back("sweep.points must be >= 2");
  if (sweep_spacing != "log" && sweep_spacing != "linear")
    v.push_back("sweep.spacing must be log or linear");
  else if (sweep_spacing == "log" && sweep_min_mhz <= 0.0)
    v.push_back("sweep.min must be > 0 for log spacing");
  if (sweep_max_mhz <= sweep_min_mhz) v.push_back("sweep.max must exceed sweep.min");
  for (auto& msg : detection_chain().validate()) v.push_back(msg);
  if (n_attempts < 1) v.push_back("detection.n_attempts must be >= 1");
  if (bin_width_us <= 0.0) v.push_back("detection.bin_width must be > 0");
  if (tau_max_us <= 0.0) v.push_back("detection.tau_max must be > 0");
  return v;
}

inline SystemParams RunConfig::system_params() const {
  SystemParams p;
  p.line = line;
  p.g_max = angular_from_mhz(g_max_mhz);
  p.coupling_scale = coupling_scale;
  p.kappa = angular_from_mhz(kappa_mhz);
  p.gamma = angular_from_mhz(gamma_mhz);
  p.delta = angular_from_mhz(delta_mhz);
  p.two_photon_detuning = angular_from_mhz(two_photon_detuning_mhz);
  p.n_max = n_max;
  p.modes = polarization_modes == "single" ? PolarizationModes::SingleMode
                                           : PolarizationModes::TwoModes;
  p.initial.kind = initial_state == "pumped" ? InitialState::Kind::PumpedMixture
                                             : InitialState::Kind::PureF20;
  p.initial.fidelity = initial_state == "pumped" ? preparation_fidelity : 1.0;
  return p;
}

inline PulseProfile RunConfig::pulse_profile() const {
  if (pulse_kind == "linear")
    return PulseProfile::linear_ramp(duration_us, angular_from_mhz(omega_max_mhz));
  if (pulse_kind == "power")
    return PulseProfile::power_law(duration_us, angular_from_mhz(omega_max_mhz),
                                   pulse_exponent);
  if (pulse_kind == "constant") return PulseProfile::constant(angular_from_mhz(omega_max_mhz));
  // piecewise: "t0:w0,t1:w1,..."
  std::vector<std::pair<double, double>> pts;
  std::istringstream in(knots);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("pulse.knots: expected t:omega pairs, got '" + item + "'");
    double t = detail::to_double(detail::trim(item.substr(0, colon)), "pulse.knots");
    double w = detail::to_double(detail::trim(item.substr(colon + 1)), "pulse.knots");
    pts.emplace_back(t, angular_from_mhz(w));
  }
  return PulseProfile::piecewise(std::move(pts));
}

inline SolverConfig RunConfig::solver_config() const {
  SolverConfig s;
  s.rtol = rtol;
  s.atol = atol;
  s.output_points = output_points;
  s.quiet_threshold = quiet_threshold;
  s.horizon_factor = horizon_factor;
  s.check_truncation = check_truncation;
  return s;
}

inline DetectionChain RunConfig::detection_chain() const {
  DetectionChain c;
  c.directionality = directionality;
  c.path_transmission = path_transmission;
  c.quantum_efficiency = quantum_efficiency;
  c.dark_count_rate = dark_count_rate_hz;
  c.repetition_rate = repetition_rate_hz;
  c.attempt_window = attempt_window_us * 1e-6;
  return c;
}

inline SweepSpec RunConfig::sweep_spec() const {
  SweepSpec s;
  if (sweep_axis == "coupling") s.axis = SweepAxis::CouplingG;
  else if (sweep_axis == "omega") s.axis = SweepAxis::OmegaMax;
  else if (sweep_axis == "delta") s.axis = SweepAxis::Delta;
  else s.axis = SweepAxis::PulseSteepness;
  s.base = system_params();
  s.pulse = pulse_profile();
  s.solver = solver_config();
  s.jobs = jobs;
  std::vector<double> grid = sweep_spacing == "log"
                                 ? log_grid(sweep_min_mhz, sweep_max_mhz, sweep_points)
                                 : linear_grid(sweep_min_mhz, sweep_max_mhz, sweep_points);
  if (!sweep_include.empty()) {
    std::vector<double> marks;
    std::istringstream in(sweep_include);
    std::string item;
    while (std::getline(in, item, ','))
      marks.push_back(detail::to_double(detail::trim(item), "sweep.include"));
    grid = with_markers(std::move(grid), std::move(marks));
  }
  for (double& v : grid) v = angular_from_mhz(v);
  s.values = std::move(grid);
  return s;
}

inline std::vector<std::string> RunConfig::resolved_lines() const {
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
  };
  std::vector<std::string> out;
  out.push_back("system.line = " + std::string(line_name(line)));
  out.push_back("system.g_max = " + fmt(g_max_mhz));
  out.push_back("system.coupling_scale = " + fmt(coupling_scale));
  out.push_back("system.kappa = " + fmt(kappa_mhz));
  out.push_back("system.gamma = " + fmt(gamma_mhz));
  out.push_back("system.delta = " + fmt(delta_mhz));
  out.push_back("system.two_photon_detuning = " + fmt(two_photon_detuning_mhz));
  out.push_back("system.n_max = " + std::to_string(n_max));
  out.push_back("system.polarization_modes = " + polarization_modes);
  out.push_back("system.initial_state = " + initial_state);
  if (initial_state == "pumped")
    out.push_back("system.preparation_fidelity = " + fmt(preparation_fidelity));
  out.push_back("pulse.kind = " + pulse_kind);
  if (pulse_kind == "power") out.push_back("pulse.exponent = " + fmt(pulse_exponent));
  if (pulse_kind == "piecewise") out.push_back("pulse.knots = " + knots);
  out.push_back("pulse.duration = " + fmt(duration_us));
  out.push_back("pulse.omega_max = " + fmt(omega_max_mhz));
  out.push_back("solver.rtol = " + fmt(rtol));
  out.push_back("solver.atol = " + fmt(atol));
  out.push_back("solver.output_points = " + std::to_string(output_points));
  out.push_back("solver.quiet_threshold = " + fmt(quiet_threshold));
  out.push_back("solver.horizon_factor = " + fmt(horizon_factor));
  out.push_back("sweep.axis = " + sweep_axis);
  out.push_back("sweep.points = " + std::to_string(sweep_points));
  out.push_back("sweep.min = " + fmt(sweep_min_mhz));
  out.push_back("sweep.max = " + fmt(sweep_max_mhz));
  out.push_back("sweep.spacing = " + sweep_spacing);
  if (!sweep_include.empty()) out.push_back("sweep.include = " + sweep_include);
  out.push_back("detection.directionality = " + fmt(directionality));
  out.push_back("detection.path_transmission = " + fmt(path_transmission));
  out.push_back("detection.quantum_efficiency = " + fmt(quantum_efficiency));
  out.push_back("detection.dark_count_rate = " + fmt(dark_count_rate_hz));
  out.push_back("detection.repetition_rate = " + fmt(repetition_rate_hz));
  out.push_back("detection.attempt_window = " + fmt(attempt_window_us));
  out.push_back("detection.n_attempts = " + std::to_string(n_attempts));
  out.push_back("detection.bin_width = " + fmt(bin_width_us));
  out.push_back("detection.tau_max = " + fmt(tau_max_us));
  out.push_back("output.directory = " + output_directory);
  out.push_back("run.seed = " + std::to_string(seed));
  out.push_back("run.jobs = " + std::to_string(jobs));
  return out;
}

}  // namespace vstirap
