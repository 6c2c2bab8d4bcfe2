#include "levyhom/experiment.hpp"

#include "levyhom/presets.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#ifndef LEVYHOM_VERSION
#define LEVYHOM_VERSION "0.0.0"
#endif

namespace levyhom {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string version_tag() { return LEVYHOM_VERSION; }

namespace {

bool exploded(const FullState& s) {
  return !s.finite() || s.q.norm() > kBlowupNorm || s.p.norm() > kBlowupNorm;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

PathSummary simulate_path(const PathSetup& setup, std::uint64_t seed, std::vector<PathRow>* rows,
                          std::size_t path_index) {
  const HamiltonianModel& model = setup.preset->model;
  const CoefficientSet& coeffs = setup.preset->coeffs;
  const JumpRealization jumps = sample_jumps(*setup.measure, 0.0, setup.horizon, seed);
  const TimeGrid grid = TimeGrid::build(0.0, setup.horizon, setup.base_step, jumps);

  const FullStepper full(model, coeffs, setup.epsilon, setup.compensator);
  const LimitingStepper limit(model, coeffs, setup.compensator);
  RemainderAccumulator acc(coeffs, setup.q0, setup.noise_sign);

  PathSummary out;
  out.K_obs.reserve(setup.observation_times.size());
  FullState x{grid.nodes.front(), setup.q0, setup.p0};
  Vec q = setup.q0;
  double K_prev = full.kinetic(x);
  out.sup_p = x.p.norm();
  out.sup_K = K_prev;

  std::size_t obs = 0;
  auto record_row = [&](const FullState& s, const Vec& ql) {
    if (rows) rows->push_back({path_index, setup.epsilon, setup.observation_times[obs], s.q, s.p, ql});
  };
  FullState x_prev = x;
  Vec q_prev = q;

  std::size_t next_jump = 0;
  FullDriftTerms drift;
  FullJumpTerms jump;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t = grid.nodes[i - 1];
    const double dt = grid.nodes[i] - t;
    const bool is_jump = next_jump < grid.jump_nodes.size() && grid.jump_nodes[next_jump] == i;
    const Vec* mark = is_jump ? &jumps.events[grid.jump_events[next_jump]].mark : nullptr;

    full.step(x, grid.nodes[i], mark, &drift, is_jump ? &jump : nullptr);
    acc.add_drift(drift, dt);
    if (is_jump) {
      acc.add_jump(jump);
      ++next_jump;
    }
    limit.step(t, q, grid.nodes[i], mark);

    if (exploded(x) || !q.allFinite() || q.norm() > kBlowupNorm) {
      out.blowup = true;
      return out;
    }
    const double K = full.kinetic(x);
    while (obs < setup.observation_times.size() && setup.observation_times[obs] < grid.nodes[i]) {
      out.K_obs.push_back(K_prev);
      record_row(x_prev, q_prev);
      ++obs;
    }
    K_prev = K;
    if (rows) {
      x_prev = x;
      q_prev = q;
    }

    out.sup_q_diff = std::max(out.sup_q_diff, (x.q - q).norm());
    out.sup_p = std::max(out.sup_p, x.p.norm());
    out.sup_K = std::max(out.sup_K, K);
    out.sup_remainder = std::max(out.sup_remainder, acc.remainder(x.q).norm());
  }
  while (obs < setup.observation_times.size()) {
    out.K_obs.push_back(K_prev);
    record_row(x, q);
    ++obs;
  }
  out.q_diff_T = (x.q - q).norm();
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& f) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

std::vector<PathSummary> simulate_ensemble(const PathSetup& setup, std::uint64_t master_seed,
                                           std::size_t n_paths, int threads) {
  std::vector<PathSummary> out(n_paths);
  parallel_for(n_paths, threads,
               [&](std::size_t i) { out[i] = simulate_path(setup, path_seed(master_seed, i)); });
  return out;
}

std::vector<SweepResult> build_sweeps(const std::vector<double>& epsilons,
                                      const std::vector<std::vector<PathSummary>>& ensembles,
                                      const std::vector<double>& thetas,
                                      const std::vector<double>& deltas) {
  if (epsilons.size() != ensembles.size())
    throw std::invalid_argument("one ensemble per epsilon is required");
  std::vector<SweepResult> sweeps;

  auto sweep_of = [&](QuantityTag tag, double theta, auto&& per_path) {
    SweepResult s;
    s.quantity = tag;
    s.theta = theta;
    s.epsilons = epsilons;
    for (const auto& ens : ensembles) {
      std::vector<double> samples;
      samples.reserve(ens.size());
      std::size_t excluded = 0;
      for (const auto& p : ens) {
        if (p.blowup)
          ++excluded;
        else
          samples.push_back(per_path(p));
      }
      Estimate e = mean_estimate(samples);
      e.excluded_paths = excluded;
      s.estimates.push_back(e);
    }
    sweeps.push_back(std::move(s));
  };

  for (double th : thetas) {
    sweep_of(QuantityTag::sup_moment_q_diff, th, [th](const PathSummary& p) { return std::pow(p.sup_q_diff, th); });
    sweep_of(QuantityTag::sup_moment_p, th, [th](const PathSummary& p) { return std::pow(p.sup_p, th); });
    sweep_of(QuantityTag::sup_moment_K, th, [th](const PathSummary& p) { return std::pow(p.sup_K, th); });
    sweep_of(QuantityTag::sup_moment_remainder, th,
             [th](const PathSummary& p) { return std::pow(p.sup_remainder, th); });

    // sup over observation times of the ensemble mean of K^theta
    SweepResult s;
    s.quantity = QuantityTag::sup_expectation_K;
    s.theta = th;
    s.epsilons = epsilons;
    for (const auto& ens : ensembles) {
      std::size_t m = 0;
      std::size_t excluded = 0;
      for (const auto& p : ens) {
        if (p.blowup) ++excluded;
        else m = std::max(m, p.K_obs.size());
      }
      Estimate best;
      bool have = false;
      for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> samples;
        samples.reserve(ens.size());
        for (const auto& p : ens)
          if (!p.blowup) samples.push_back(std::pow(p.K_obs[k], th));
        const Estimate e = mean_estimate(samples);
        if (!have || e.value > best.value) {
          best = e;
          have = true;
        }
      }
      best.excluded_paths = excluded;
      s.estimates.push_back(best);
    }
    sweeps.push_back(std::move(s));
  }

  for (double delta : deltas) {
    SweepResult s;
    s.quantity = QuantityTag::prob_exceed;
    s.theta = delta;
    s.epsilons = epsilons;
    for (const auto& ens : ensembles) {
      std::vector<double> sups;
      std::size_t excluded = 0;
      for (const auto& p : ens) {
        if (p.blowup) ++excluded;
        else sups.push_back(p.sup_q_diff);
      }
      Estimate e;
      e.n_paths = sups.size();
      e.excluded_paths = excluded;
      if (!sups.empty()) {
        const Probability pr = probability_exceed(sups, delta);
        e.value = pr.prob;
        e.std_error = pr.std_error;
      }
      s.estimates.push_back(e);
    }
    sweeps.push_back(std::move(s));
  }
  return sweeps;
}

std::vector<LabeledFit> fit_sweeps(const std::vector<SweepResult>& sweeps, double eta,
                                   double tolerance) {
  std::vector<LabeledFit> fits;
  for (const auto& s : sweeps) {
    std::optional<double> theory;
    switch (s.quantity) {
      case QuantityTag::sup_moment_q_diff:
      case QuantityTag::sup_moment_remainder:
        if (s.theta < eta) theory = beta_exponent(s.theta, eta);
        break;
      case QuantityTag::sup_moment_p:
        theory = p_sup_exponent(s.theta, eta);
        break;
      case QuantityTag::sup_moment_K:
        theory = k_sup_exponent(s.theta);
        break;
      case QuantityTag::sup_expectation_K:
        theory = k_moment_exponent(s.theta);
        break;
      case QuantityTag::prob_exceed:
        break;
    }
    if (!theory) continue;
    try {
      fits.push_back({s.quantity, s.theta, fit_rate(s, *theory, tolerance)});
    } catch (const std::invalid_argument& e) {
      std::cerr << "warning: no rate fit for " << to_string(s.quantity) << " theta=" << s.theta
                << ": " << e.what() << "\n";
    }
  }
  return fits;
}

ojson RunManifest::to_json() const {
  ojson doc;
  doc["config_hash"] = config_hash;
  doc["version"] = version;
  doc["output_dir"] = output_dir;
  doc["master_seed"] = master_seed;
  doc["flags"] = flags;
  ojson stages = ojson::object();
  for (const auto& [name, secs] : stage_seconds) stages[name] = secs;
  doc["stage_seconds"] = stages;
  ojson eps = ojson::array();
  for (const auto& e : per_epsilon)
    eps.push_back({{"epsilon", e.epsilon},
                   {"base_step", e.base_step},
                   {"n_paths", e.n_paths},
                   {"excluded", e.excluded},
                   {"seconds", e.seconds}});
  doc["per_epsilon"] = eps;
  doc["assumptions"] = assumptions;
  doc["files"] = files;
  return doc;
}

std::string resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& cli_out) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return cfg.output_dir;
}

namespace {

// Makes `dir` ready for a run. A directory left by an earlier run is
// cleared of the files its manifest lists; anything else must be empty.
bool prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::exists(dir)) {
    fs::create_directories(dir, ec);
    if (ec) throw RunError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return true;
  }
  if (!fs::is_directory(dir)) throw RunError("output path '" + dir.string() + "' is not a directory");
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    try {
      const auto doc = nlohmann::json::parse(in);
      for (const auto& f : doc.at("files")) {
        const fs::path p = dir / f.get<std::string>();
        if (p.parent_path() == dir) fs::remove(p, ec);
      }
    } catch (const std::exception& e) {
      throw RunError("cannot read previous manifest '" + manifest.string() + "': " + e.what());
    }
  }
  if (!fs::is_empty(dir))
    throw RunError("output directory '" + dir.string() +
                   "' contains files not produced by a previous run; refusing to mix outputs");
  return false;
}

ojson assumptions_json(const ValidationReport& report) {
  ojson doc;
  doc["all_pass"] = report.all_pass();
  doc["detected_eta"] = report.detected_eta;
  ojson failed = ojson::array();
  for (const auto& c : report.clauses)
    if (!c.pass) failed.push_back({{"clause", c.name}, {"informational", c.informational}, {"detail", c.detail}});
  doc["failed_clauses"] = failed;
  return doc;
}

}  // namespace

double convergence_theta_max(const std::vector<double>& thetas, double eta) {
  double best = 0.0;
  for (double th : thetas)
    if (th < eta) best = std::max(best, th);
  if (best == 0.0 && !thetas.empty()) best = *std::min_element(thetas.begin(), thetas.end());
  return best;
}

RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.config_hash = config_hash(cfg.source);
  manifest.version = version_tag();
  manifest.master_seed = opts.seed.value_or(cfg.master_seed);
  manifest.flags = opts.flags;
  manifest.output_dir = resolve_output_dir(cfg, opts.out_dir);
  const bool plots = cfg.emit_plots && !opts.no_plots;
  const fs::path dir(manifest.output_dir);

  const bool created = prepare_output_dir(dir);
  std::vector<std::string> written;
  try {
    auto t0 = std::chrono::steady_clock::now();
    const PresetModel preset = make_preset(cfg.preset, cfg.preset_params);
    ProbeGrid probes;
    probes.horizon = cfg.horizon;
    const ValidationReport report = validate_assumptions(
        preset.model, preset.coeffs, probes, convergence_theta_max(cfg.thetas, preset.model.eta()),
        &cfg.measure);
    manifest.assumptions = assumptions_json(report);
    if (!report.all_pass()) {
      std::cerr << "warning: model assumptions not all satisfied:";
      for (const auto& c : report.clauses)
        if (!c.pass && !c.informational) std::cerr << ' ' << c.name;
      std::cerr << "\n";
    }
    manifest.stage_seconds.emplace_back("validate", seconds_since(t0));

    t0 = std::chrono::steady_clock::now();
    PathSetup setup;
    setup.preset = &preset;
    setup.measure = &cfg.measure;
    setup.compensator = compensator_drift(cfg.measure);
    setup.horizon = cfg.horizon;
    setup.q0 = to_vec(cfg.initial_q);
    setup.p0 = to_vec(cfg.initial_p);
    for (int k = 0; k <= cfg.observation_points; ++k)
      setup.observation_times.push_back(cfg.horizon * k / cfg.observation_points);

    std::vector<std::vector<PathSummary>> ensembles;
    std::vector<PathRow> rows;
    for (double eps : cfg.epsilons) {
      const auto te = std::chrono::steady_clock::now();
      setup.epsilon = eps;
      setup.base_step = cfg.step_for(eps);
      ensembles.push_back(simulate_ensemble(setup, manifest.master_seed, cfg.n_paths, opts.threads));
      EpsilonSummary es;
      es.epsilon = eps;
      es.base_step = setup.base_step;
      es.n_paths = cfg.n_paths;
      for (const auto& p : ensembles.back())
        if (p.blowup) ++es.excluded;
      es.seconds = seconds_since(te);
      manifest.per_epsilon.push_back(es);
      if (es.excluded > 0)
        std::cerr << "warning: " << es.excluded << " blown-up path(s) excluded at eps=" << eps << "\n";
      if (static_cast<double>(es.excluded) > kMaxBlowupFraction * static_cast<double>(cfg.n_paths))
        throw RunError("blow-up in " + std::to_string(es.excluded) + " of " + std::to_string(cfg.n_paths) +
                       " paths at eps=" + format_double(eps) + " exceeds 1%");
      if (cfg.export_paths) {
        const std::size_t n_export = std::min<std::size_t>(cfg.n_paths, 8);
        for (std::size_t i = 0; i < n_export; ++i)
          simulate_path(setup, path_seed(manifest.master_seed, i), &rows, i);
      }
    }
    manifest.stage_seconds.emplace_back("simulate", seconds_since(t0));

    t0 = std::chrono::steady_clock::now();
    manifest.sweeps = build_sweeps(cfg.epsilons, ensembles, cfg.thetas, cfg.deltas);
    manifest.fits = fit_sweeps(manifest.sweeps, preset.model.eta(), cfg.rate_tolerance);
    manifest.stage_seconds.emplace_back("analyze", seconds_since(t0));

    t0 = std::chrono::steady_clock::now();
    written = emit_report(manifest.sweeps, manifest.fits, dir, plots);
    if (cfg.export_paths) {
      write_paths_csv(rows, dir / "paths.csv");
      written.push_back("paths.csv");
    }
    manifest.stage_seconds.emplace_back("report", seconds_since(t0));
    manifest.stage_seconds.emplace_back("total", seconds_since(t_start));
    manifest.files = written;
    manifest.files.push_back("manifest.json");
    write_text_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    written.push_back("manifest.json");
  } catch (...) {
    std::error_code ec;
    for (const auto& f : {"sweep.csv", "rates.json", "rates.svg", "paths.csv", "manifest.json"})
      fs::remove(dir / f, ec);
    if (created) fs::remove(dir, ec);
    throw;
  }
  return manifest;
}

}  // namespace levyhom
