// Command-line front end: superarrivals <experiment> [--config FILE] [--key value ...]

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "superarrival/config.hpp"
#include "superarrival/errors.hpp"
#include "superarrival/experiment.hpp"

namespace sa = superarrival;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

void print_run(const sa::RunReport& r, const std::string& out) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (r.window) {
    const auto& w = *r.window;
    std::printf("superarrival detected: t_d = %.6g  t_c = %.6g  eta = %.6g\n", w.t_d, w.t_c, w.eta);
    if (r.signal) std::printf("signal velocity v_e = %.6g\n", r.signal->v_e);
    if (r.beta) std::printf("beta mean = %.6g over %zu particles\n", r.beta->mean, r.beta->kept);
  } else if (r.experiment != sa::ExperimentKind::qpotential) {
    std::printf("no superarrival detected\n");
  }
  for (const auto& s : r.diagnostics.leftmost_well)
    std::printf("leftmost Q well at step %zu: x = %.6f\n", s.step, s.value);
  std::printf("output written to %s\n", out.c_str());
}

void print_sweep(const sa::SweepReport& s, const std::string& out) {
  std::printf("%-12s %-14s %-14s %-14s\n", "epsilon", "eta", "v_e", "beta_mean");
  const auto cell = [](const std::optional<double>& v) { return v ? *v : std::nan(""); };
  for (const auto& row : s.rows) {
    if (row.error) {
      std::printf("%-12s failed: %s\n", row.epsilon_label.c_str(), row.error->c_str());
      continue;
    }
    std::printf("%-12s %-14.6g %-14.6g %-14.6g\n", row.epsilon_label.c_str(), cell(row.eta),
                cell(row.v_e), cell(row.beta_mean));
  }
  std::printf("output written to %s\n", out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superarrival experiments with a time-dependent barrier"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file");
  bool show_config = false;
  app.add_flag("--show-config", show_config, "print the resolved configuration and exit");

  std::map<std::string, std::string> overrides;
  for (const auto& key : sa::config_keys())
    app.add_option("--" + key, overrides[key], "override '" + key + "'");

  const std::pair<const char*, const char*> commands[] = {
      {"reflection-lowering", "static vs lowered barrier, reflection detector"},
      {"transmission-raising", "free vs raised barrier, transmission detector"},
      {"trajectories", "Bohmian ensemble with consistency checks"},
      {"qpotential", "quantum-potential snapshots"},
      {"sweep", "reflection-lowering over a list of ramp durations"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    sa::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = sa::load_config_file(config_path, cfg);
    for (const auto& key : sa::config_keys())
      if (app.count("--" + key) > 0) sa::set_value(cfg, key, overrides[key]);
    cfg.experiment = sa::experiment_kind_from_string(app.get_subcommands().front()->get_name());

    const auto resolved = sa::resolve(cfg);
    if (show_config) {
      for (const auto& [k, v] : sa::config_entries(resolved.config)) std::printf("%s = %s\n", k.c_str(), v.c_str());
      return 0;
    }

    const std::string out = resolved.config.output_dir;
    switch (cfg.experiment) {
      case sa::ExperimentKind::reflection_lowering:
        print_run(sa::run_reflection_lowering(resolved, out), out);
        break;
      case sa::ExperimentKind::transmission_raising:
        print_run(sa::run_transmission_raising(resolved, out), out);
        break;
      case sa::ExperimentKind::trajectories:
        print_run(sa::run_trajectories(resolved, out), out);
        break;
      case sa::ExperimentKind::qpotential:
        print_run(sa::run_qpotential_snapshots(resolved, cfg.snapshot_steps, out), out);
        break;
      case sa::ExperimentKind::sweep:
        print_sweep(sa::run_epsilon_sweep(resolved, cfg.epsilon_list, out), out);
        break;
    }
  } catch (const sa::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sa::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sa::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const sa::NumericalBreakdown& e) {
    std::cerr << "numerical breakdown: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const sa::DegenerateTiming& e) {
    std::cerr << "numerical breakdown: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
