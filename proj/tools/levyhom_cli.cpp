#include "levyhom/config.hpp"
#include "levyhom/experiment.hpp"
#include "levyhom/presets.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

void print_config_errors(const levyhom::ConfigError& e) {
  std::cerr << "configuration rejected:\n";
  for (const auto& f : e.errors()) std::cerr << "  " << f.field << ": " << f.constraint << "\n";
}

int cmd_presets() {
  for (const auto& p : levyhom::preset_registry())
    std::cout << std::left << std::setw(28) << p.name << p.description << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  const levyhom::ExperimentConfig cfg = levyhom::load_config(path);
  const levyhom::PresetModel preset = levyhom::make_preset(cfg.preset, cfg.preset_params);
  levyhom::ProbeGrid probes;
  probes.horizon = cfg.horizon;
  const auto report = levyhom::validate_assumptions(
      preset.model, preset.coeffs, probes,
      levyhom::convergence_theta_max(cfg.thetas, preset.model.eta()), &cfg.measure);
  for (const auto& c : report.clauses) {
    const char* verdict = c.pass ? "ok" : (c.informational ? "note" : "FAIL");
    std::cout << std::left << std::setw(6) << verdict << std::setw(36) << c.name << c.detail << "\n";
  }
  std::cout << "detected eta " << report.detected_eta << "\n";
  std::cout << "config hash " << levyhom::config_hash(cfg.source) << "\n";
  return report.all_pass() ? kExitOk : kExitValidation;
}

int cmd_run(const std::string& path, const levyhom::RunOptions& opts) {
  const levyhom::ExperimentConfig cfg = levyhom::load_config(path);
  const levyhom::RunManifest m = levyhom::run_experiment(cfg, opts);
  for (const auto& f : m.fits)
    std::cout << std::left << std::setw(22) << levyhom::to_string(f.quantity) << " theta=" << f.theta
              << " slope=" << f.fit.slope << " theory=" << f.fit.theoretical_exponent
              << " r2=" << f.fit.r_squared << (f.fit.pass ? " pass" : " FAIL") << "\n";
  std::cout << "wrote " << m.files.size() << " file(s) to " << m.output_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-mass limit experiments for Levy-driven Hamiltonian systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool no_plots = false;

  auto* run = app.add_subcommand("run", "Run the configured epsilon sweep");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides " + std::string(levyhom::kOutputDirEnv) + " and the config)");
  run->add_option("--seed", seed, "Master seed override");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_flag("--no-plots", no_plots, "Skip rates.svg");

  auto* validate = app.add_subcommand("validate", "Check a config and the model assumptions");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required();

  auto* presets = app.add_subcommand("presets", "List registered model presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (presets->parsed()) return cmd_presets();
    if (validate->parsed()) return cmd_validate(config_path);

    levyhom::RunOptions opts;
    opts.out_dir = out_dir;
    opts.seed = seed;
    opts.threads = threads;
    opts.no_plots = no_plots;
    opts.config_path = config_path;
    opts.flags["command"] = "run";
    opts.flags["config"] = config_path;
    opts.flags["out"] = out_dir ? nlohmann::ordered_json(*out_dir) : nlohmann::ordered_json(nullptr);
    opts.flags["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    opts.flags["threads"] = threads;
    opts.flags["no_plots"] = no_plots;
    const char* env = std::getenv(levyhom::kOutputDirEnv);
    opts.flags["env_" + std::string(levyhom::kOutputDirEnv)] =
        env ? nlohmann::ordered_json(env) : nlohmann::ordered_json(nullptr);
    return cmd_run(config_path, opts);
  } catch (const levyhom::ConfigError& e) {
    print_config_errors(e);
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
