// Command-line front end: single runs, parameter sweeps, detection
// statistics and one-command reproductions of the standard protocol
// presets. Exit codes: 0 ok, 2 configuration error, 3 solver failure,
// 4 I/O failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vstirap/config.hpp"
#include "vstirap/detection.hpp"
#include "vstirap/io.hpp"
#include "vstirap/observables.hpp"
#include "vstirap/simulation.hpp"
#include "vstirap/sweeps.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file");
    cmd->add_option("--set", sets, "override: section.key=value")->take_all();
    auto add_u64 = cmd->add_option_function<std::uint64_t>(
        "--seed", [this](std::uint64_t v) { seed = v; }, "random seed");
    (void)add_u64;
    cmd->add_option_function<int>(
        "--jobs", [this](int v) { jobs = v; }, "concurrent work items (0 = hardware)");
    cmd->add_option_function<std::string>(
        "--out-dir", [this](const std::string& v) { out_dir = v; }, "output directory");
  }

  vstirap::RunConfig load() const {
    vstirap::RunConfig cfg;
    if (!config_path.empty()) cfg = vstirap::RunConfig::parse_file(config_path);
    for (const auto& s : sets) cfg.apply_override(s);
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (out_dir) cfg.output_directory = *out_dir;
    return cfg;
  }
};

vstirap::RunConfig load_validated(const CommonArgs& args) {
  vstirap::RunConfig cfg = args.load();
  auto violations = cfg.validate();
  if (!violations.empty()) {
    std::cerr << "configuration invalid:\n";
    for (const auto& v : violations) std::cerr << "  " << v << "\n";
    throw vstirap::ConfigError("invalid configuration");
  }
  return cfg;
}

std::vector<std::string> meta_for(const vstirap::RunConfig& cfg, const std::string& command) {
  std::vector<std::string> meta;
  meta.push_back("command: " + command);
  for (auto& line : cfg.resolved_lines()) meta.push_back(line);
  return meta;
}

// Presets carry their own protocol, so their files record the actual
// parameters of the runs rather than the base configuration.
std::vector<std::string> meta_for_protocol(const std::string& command,
                                           const vstirap::SystemParams& p,
                                           const vstirap::PulseProfile& pulse) {
  using vstirap::mhz_from_angular;
  auto fmt_num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  std::vector<std::string> meta;
  meta.push_back("command: " + command);
  meta.push_back("system.line = " + std::string(vstirap::line_name(p.line)));
  meta.push_back("system.g_max = " + fmt_num(mhz_from_angular(p.g_max)));
  meta.push_back("system.coupling_scale = " + fmt_num(p.coupling_scale));
  meta.push_back("system.kappa = " + fmt_num(mhz_from_angular(p.kappa)));
  meta.push_back("system.gamma = " + fmt_num(mhz_from_angular(p.gamma)));
  meta.push_back("system.delta = " + fmt_num(mhz_from_angular(p.delta)));
  meta.push_back("system.n_max = " + std::to_string(p.n_max));
  meta.push_back(std::string("system.polarization_modes = ") +
                 (p.modes == vstirap::PolarizationModes::SingleMode ? "single" : "two"));
  switch (pulse.kind) {
    case vstirap::PulseProfile::Kind::LinearRamp:
      meta.push_back("pulse.kind = linear");
      break;
    case vstirap::PulseProfile::Kind::PowerLaw:
      meta.push_back("pulse.kind = power");
      meta.push_back("pulse.exponent = " + fmt_num(pulse.exponent));
      break;
    case vstirap::PulseProfile::Kind::Constant:
      meta.push_back("pulse.kind = constant");
      break;
    case vstirap::PulseProfile::Kind::PiecewiseLinear: {
      std::string knots;
      for (const auto& [t, w] : pulse.knots) {
        if (!knots.empty()) knots += ", ";
        knots += fmt_num(t) + ":" + fmt_num(mhz_from_angular(w));
      }
      meta.push_back("pulse.kind = piecewise");
      meta.push_back("pulse.knots = " + knots);
      break;
    }
  }
  meta.push_back("pulse.duration = " + fmt_num(pulse.duration));
  meta.push_back("pulse.omega_max = " + fmt_num(mhz_from_angular(pulse.omega_max)));
  return meta;
}

std::string out_path(const vstirap::RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_directory) / name).string();
}

void write_timeseries(const vstirap::RunConfig& cfg, const vstirap::Trajectory& traj,
                      const std::string& file, const std::string& command) {
  std::vector<std::vector<double>> rows;
  auto wp = vstirap::wavepacket(traj);
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    rows.push_back({traj.times[i], wp.flux[i], traj.excited_population[i],
                    traj.cavity_population[i], traj.f1_population[i], traj.f2_population[i]});
  vstirap::write_csv(out_path(cfg, file), meta_for(cfg, command),
                     {"time_us", "flux_per_us", "excited_pop", "cavity_pop", "f1_pop", "f2_pop"},
                     rows);
}

int cmd_simulate(const CommonArgs& args) {
  auto cfg = load_validated(args);
  auto traj = vstirap::run_generation(cfg.system_params(), cfg.pulse_profile(),
                                      cfg.solver_config());
  auto eff = vstirap::efficiency(traj);
  write_timeseries(cfg, traj, "simulate_timeseries.csv", "simulate");
  std::printf("eta=%.6f%s\n", eff.value, eff.lower_bound ? " (lower bound: horizon cap)" : "");
  if (cfg.check_truncation) {
    double d = vstirap::truncation_error(cfg.system_params(), cfg.pulse_profile(),
                                         cfg.solver_config());
    std::printf("truncation_change=%.3e\n", d);
  }
  return 0;
}

int cmd_wavepacket(const CommonArgs& args) {
  auto cfg = load_validated(args);
  auto traj = vstirap::run_generation(cfg.system_params(), cfg.pulse_profile(),
                                      cfg.solver_config());
  auto wp = vstirap::wavepacket(traj);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < wp.times.size(); ++i)
    rows.push_back({wp.times[i], wp.flux[i], wp.cumulative[i]});
  vstirap::write_csv(out_path(cfg, "wavepacket.csv"), meta_for(cfg, "wavepacket"),
                     {"time_us", "flux_per_us", "cumulative"}, rows);
  std::printf("eta=%.6f fwhm_us=%.6f\n", wp.total, vstirap::fwhm(wp));
  return 0;
}

int cmd_budget(const CommonArgs& args) {
  auto cfg = load_validated(args);
  auto params = cfg.system_params();
  auto model = vstirap::build_model(params, cfg.pulse_profile());
  auto opts = cfg.solver_config().master_options(cfg.pulse_profile().duration);
  auto traj = vstirap::evolve_master(model, model.initial_density(),
                                     cfg.solver_config().horizon_factor *
                                         cfg.pulse_profile().duration,
                                     opts);
  auto b = vstirap::emission_budget(traj, model);
  vstirap::write_csv(
      out_path(cfg, "budget.csv"), meta_for(cfg, "budget"),
      {"eta_cavity", "free_space_f1", "free_space_f2", "free_space_total",
       "free_space_to_cavity_ratio", "purcell_fraction", "residual_f1", "residual_f2"},
      {{b.eta_cavity, b.free_space_f1, b.free_space_f2, b.free_space_total(),
        b.eta_cavity > 0 ? b.free_space_total() / b.eta_cavity : 0.0, b.purcell_fraction,
        b.residual_f1_population, b.residual_f2_population}});
  std::printf("eta=%.6f free_space_to_cavity=%.4f purcell_fraction=%.5f\n", b.eta_cavity,
              b.eta_cavity > 0 ? b.free_space_total() / b.eta_cavity : 0.0,
              b.purcell_fraction);
  return 0;
}

void write_sweep(const vstirap::RunConfig& cfg, const vstirap::SweepResult& res,
                 const std::string& file, const std::string& command) {
  std::vector<std::vector<double>> rows;
  for (const auto& pt : res.points)
    rows.push_back({vstirap::mhz_from_angular(pt.value), pt.eta,
                    pt.failed ? 1.0 : (pt.lower_bound ? 2.0 : 0.0)});
  vstirap::write_csv(out_path(cfg, file), meta_for(cfg, command),
                     {"axis_value_mhz", "eta", "flag"}, rows);
}

int cmd_sweep(const CommonArgs& args) {
  auto cfg = load_validated(args);
  auto spec = cfg.sweep_spec();
  auto res = vstirap::run_sweep(spec);
  write_sweep(cfg, res, "sweep_" + cfg.sweep_axis + ".csv", "sweep");
  int failed = 0;
  for (auto& pt : res.points) failed += pt.failed ? 1 : 0;
  std::printf("points=%zu failed=%d\n", res.points.size(), failed);
  return 0;
}

int cmd_g2(const CommonArgs& args) {
  auto cfg = load_validated(args);
  auto traj = vstirap::run_generation(cfg.system_params(), cfg.pulse_profile(),
                                      cfg.solver_config());
  auto wp = vstirap::wavepacket(traj);
  auto eff = vstirap::efficiency(traj);
  auto chain = cfg.detection_chain();
  auto stream = vstirap::synthesize_clicks(wp, eff.value, chain, cfg.n_attempts, cfg.seed);
  auto hist = vstirap::g2_histogram(stream, cfg.bin_width_us * 1e-6, cfg.tau_max_us * 1e-6);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    rows.push_back({0.5 * (hist.bin_edges[i] + hist.bin_edges[i + 1]),
                    static_cast<double>(hist.counts[i]), hist.g2[i]});
  vstirap::write_csv(out_path(cfg, "g2_histogram.csv"), meta_for(cfg, "g2"),
                     {"tau_s", "counts", "g2"}, rows);
  std::printf("g2_zero=%.5f side_peak_rel_error=%.4f\n", hist.g2_zero,
              hist.side_peak_rel_error);
  return 0;
}

int cmd_validate(const CommonArgs& args) {
  auto cfg = args.load();
  auto violations = cfg.validate();
  if (violations.empty()) {
    std::printf("configuration ok\n");
    return 0;
  }
  for (const auto& v : violations) std::printf("violation: %s\n", v.c_str());
  return kExitConfig;
}

int cmd_preset(const CommonArgs& args, const std::string& name) {
  using namespace vstirap;
  auto cfg = load_validated(args);

  auto run_lines_sweep = [&](auto make_spec, const std::string& stem) {
    for (Line line : {Line::D1, Line::D2}) {
      SweepSpec spec = make_spec(line);
      spec.jobs = cfg.jobs;
      auto res = run_sweep(spec);
      std::vector<std::vector<double>> rows;
      for (const auto& pt : res.points)
        rows.push_back({mhz_from_angular(pt.value), pt.eta,
                        pt.failed ? 1.0 : (pt.lower_bound ? 2.0 : 0.0)});
      std::string file = stem + "_" + line_name(line) + ".csv";
      write_csv(out_path(cfg, file), meta_for_protocol("preset " + name, spec.base, spec.pulse),
                {stem == "fig5_theory" ? "delta_over_2pi_MHz"
                 : stem == "fig3a"     ? "g_over_2pi_MHz"
                                       : "omega_max_over_2pi_MHz",
                 "eta", "flag"},
                rows);
      std::printf("%s: %zu points\n", file.c_str(), rows.size());
    }
  };

  if (name == "fig3a") {
    run_lines_sweep([](Line l) { return presets::coupling_scan(l); }, "fig3a");
  } else if (name == "fig3b") {
    for (Line line : {Line::D1, Line::D2}) {
      auto [params, pulse] = presets::dynamics_run(line);
      auto traj = run_generation(params, pulse, cfg.solver_config());
      auto wp = wavepacket(traj);
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < traj.times.size(); ++i)
        rows.push_back({traj.times[i], traj.cavity_population[i],
                        traj.excited_population[i], wp.flux[i]});
      std::string file = std::string("fig3b_") + line_name(line) + ".csv";
      write_csv(out_path(cfg, file), meta_for_protocol("preset " + name, params, pulse),
                {"time_us", "cavity_pop", "excited_pop", "flux_per_us"}, rows);
      std::printf("%s: eta=%.4f\n", file.c_str(), efficiency(traj).value);
    }
  } else if (name == "fig4a-theory") {
    run_lines_sweep([](Line l) { return presets::omega_scan(l); }, "fig4a_theory");
  } else if (name == "fig4b" || name == "tunability") {
    auto spec = name == "fig4b" ? presets::steepness_family() : presets::tunability_family();
    spec.jobs = cfg.jobs;
    auto packets = wavepacket_family(spec);
    for (std::size_t i = 0; i < packets.size(); ++i) {
      PulseProfile pulse = spec.pulse;
      SystemParams params = spec.base;
      detail::apply_axis(spec, spec.values[i], params, pulse);
      std::vector<std::vector<double>> rows;
      for (std::size_t j = 0; j < packets[i].times.size(); ++j)
        rows.push_back({packets[i].times[j], packets[i].flux[j]});
      char file[64];
      std::snprintf(file, sizeof file, "%s_packet_%02zu.csv", name.c_str(), i);
      write_csv(out_path(cfg, file), meta_for_protocol("preset " + name, params, pulse),
                {"time_us", "flux_per_us"}, rows);
      std::printf("%s: omega_max=%.2f MHz eta=%.4f fwhm_us=%.3f\n", file,
                  mhz_from_angular(spec.values[i]), packets[i].total, fwhm(packets[i]));
    }
  } else if (name == "fig5-theory") {
    run_lines_sweep([](Line l) { return presets::delta_scan(l); }, "fig5_theory");
  } else {
    std::cerr << "unknown preset '" << name
              << "' (expected fig3a, fig3b, fig4a-theory, fig4b, fig5-theory, tunability)\n";
    return kExitConfig;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vstirap: single-photon generation from an atom-cavity system"};
  app.require_subcommand(1);

  CommonArgs sim_args, wp_args, budget_args, sweep_args, g2_args, val_args, preset_args;
  std::string preset_name;

  sim_args.attach(app.add_subcommand("simulate", "one generation run, efficiency summary"));
  wp_args.attach(app.add_subcommand("wavepacket", "photon wave packet and width"));
  budget_args.attach(app.add_subcommand("budget", "per-channel emission budget"));
  sweep_args.attach(app.add_subcommand("sweep", "parameter scan from [sweep] config"));
  g2_args.attach(app.add_subcommand("g2", "detection statistics and g2 histogram"));
  val_args.attach(app.add_subcommand("validate", "check a configuration file"));
  auto* preset_cmd = app.add_subcommand("preset", "reproduce a standard protocol");
  preset_cmd
      ->add_option("name", preset_name, "fig3a|fig3b|fig4a-theory|fig4b|fig5-theory|tunability")
      ->required();
  preset_args.attach(preset_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("simulate")) return cmd_simulate(sim_args);
    if (app.got_subcommand("wavepacket")) return cmd_wavepacket(wp_args);
    if (app.got_subcommand("budget")) return cmd_budget(budget_args);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_args);
    if (app.got_subcommand("g2")) return cmd_g2(g2_args);
    if (app.got_subcommand("validate")) return cmd_validate(val_args);
    if (app.got_subcommand("preset")) return cmd_preset(preset_args, preset_name);
  } catch (const vstirap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const vstirap::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
