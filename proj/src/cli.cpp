#include "cavity/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cavity/config.hpp"
#include "cavity/dynamics.hpp"
#include "cavity/heatmap.hpp"
#include "cavity/spectra.hpp"
#include "cavity/steady_state.hpp"
#include "cavity/tabular.hpp"

namespace cavity::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  bool image = false;
  bool overlay = false;
};

int resolve_threads(const CommonArgs& args) {
  if (args.threads > 0) return args.threads;
  if (const char* env = std::getenv("CAVITY_DRESSED_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;  // hardware concurrency
}

struct Bundle {
  std::vector<std::pair<fs::path, std::string>> files;  // path -> content

  void add(const fs::path& p, std::string content) { files.emplace_back(p, std::move(content)); }
};

void write_bundle(const Bundle& bundle, const io::RunConfig& cfg, const std::string& command) {
  json meta;
  meta["tool"] = "cavity-dressed";
  meta["version"] = kVersion;
  meta["command"] = command;
  meta["resolved_config"] = io::render_config(cfg);
  json outputs = json::array();
  for (const auto& [path, content] : bundle.files) {
    io::write_text_atomic(path, content);
    outputs.push_back({{"file", path.filename().string()}, {"git_blob_sha1", io::git_blob_sha1(content)}});
    std::cout << "wrote " << path.string() << "\n";
  }
  meta["outputs"] = std::move(outputs);
  const fs::path meta_path = bundle.files.empty()
                                 ? fs::path("run.meta.json")
                                 : bundle.files.front().first.parent_path() /
                                       (cfg.output.prefix + ".meta.json");
  io::write_text_atomic(meta_path, meta.dump(2) + "\n");
  std::cout << "wrote " << meta_path.string() << "\n";
}

EnsembleBins bins_for(const io::RunConfig& cfg, double delta_p) {
  if (cfg.bins.strategy == BinStrategy::adaptive_lorentzian)
    return build_adaptive_bins(cfg.params.delta_omega, cfg.bins.nodes, delta_p,
                               cfg.params.coherence_halfwidth());
  if (cfg.bins.strategy == BinStrategy::delta) return build_bins(cfg.params.delta_omega, 1, BinStrategy::delta);
  return build_bins(cfg.params.delta_omega, std::max<std::size_t>(cfg.bins.nodes, 2),
                    BinStrategy::gauss_hermite);
}

fs::path out_path(const io::RunConfig& cfg, const std::string& suffix) {
  return fs::path(cfg.output.dir) / (cfg.output.prefix + suffix);
}

void emit_map(const SpectralMap& map, const io::RunConfig& cfg, const std::string& command,
              bool image, bool overlay) {
  Bundle bundle;
  if (cfg.output.format == "csv" || cfg.output.format == "both")
    bundle.add(out_path(cfg, ".csv"), io::csv_from_map(map));
  if (cfg.output.format == "json" || cfg.output.format == "both") {
    json j = io::json_from_map(map);
    j["meta"] = {{"resolved_config", io::render_config(cfg)}, {"version", kVersion}};
    bundle.add(out_path(cfg, ".json"), j.dump() + "\n");
  }
  write_bundle(bundle, cfg, command);
  if (image) {
    for (const io::MapChannel ch :
         {io::MapChannel::t_norm, io::MapChannel::f_norm, io::MapChannel::root_count}) {
      const fs::path p = out_path(cfg, std::string(".") + io::to_string(ch) + ".bmp");
      io::render_heatmap(map, ch, p, overlay);
      std::cout << "wrote " << p.string() << "\n";
    }
  }
}

int cmd_sweep(const io::RunConfig& cfg, const CommonArgs& args) {
  const GridSpec grid = make_grid(
      angular_from_linear_khz(cfg.sweep.c_min_khz), angular_from_linear_khz(cfg.sweep.c_max_khz),
      cfg.sweep.c_points, angular_from_linear_khz(cfg.sweep.p_min_khz),
      angular_from_linear_khz(cfg.sweep.p_max_khz), cfg.sweep.p_points);
  SweepOptions opts;
  opts.solve = cfg.solve;
  opts.strategy = cfg.bins.strategy;
  opts.bins_m = cfg.bins.nodes;
  opts.threads = resolve_threads(args);
  const SpectralMap map = sweep_map(grid, cfg.params, opts);
  emit_map(map, cfg, "sweep", cfg.output.image || args.image, cfg.output.overlay_dressed || args.overlay);
  return 0;
}

int cmd_spectrum(const io::RunConfig& cfg, const CommonArgs& args) {
  const double dc = angular_from_linear_khz(cfg.spectrum.delta_c_khz);
  const GridSpec grid =
      make_grid(dc, dc, 1, angular_from_linear_khz(cfg.spectrum.p_min_khz),
                angular_from_linear_khz(cfg.spectrum.p_max_khz), cfg.spectrum.p_points);
  SweepOptions opts;
  opts.solve = cfg.solve;
  opts.strategy = cfg.bins.strategy;
  opts.bins_m = cfg.bins.nodes;
  opts.threads = resolve_threads(args);
  const SpectralMap map = sweep_map(grid, cfg.params, opts);
  emit_map(map, cfg, "spectrum", cfg.output.image || args.image,
           cfg.output.overlay_dressed || args.overlay);
  return 0;
}

int cmd_dynamics(const io::RunConfig& cfg) {
  const Detuning det{angular_from_linear_khz(cfg.dynamics.delta_c_khz),
                     angular_from_linear_khz(cfg.dynamics.delta_p_khz)};
  const EnsembleBins bins = bins_for(cfg, det.delta_p);

  EnsembleState initial = ground_state(bins);
  if (cfg.dynamics.initial == io::InitialState::saturated) {
    // Bare-cavity field with fully saturated atoms: the high-field seed.
    const std::complex<double> alpha_bare =
        0.5 * cfg.params.eta / std::complex<double>(det.delta_p - det.delta_c, 0.5 * cfg.params.kappa);
    initial.alpha = alpha_bare;
    std::fill(initial.z.begin(), initial.z.end(), 0.0);
  }

  StepOptions step;
  step.rtol = cfg.dynamics.rtol;
  step.atol = cfg.dynamics.atol;

  Trajectory traj;
  if (cfg.dynamics.settle)
    traj = settle(initial, det, cfg.params, bins, cfg.dynamics.horizon_s, cfg.dynamics.criterion, step);
  else
    traj = evolve(initial, det, cfg.params, bins, cfg.dynamics.t_end_s, step);

  Bundle bundle;
  if (cfg.output.format == "csv" || cfg.output.format == "both")
    bundle.add(out_path(cfg, ".csv"), io::csv_from_trajectory(traj));
  if (cfg.output.format == "json" || cfg.output.format == "both") {
    json j = io::json_from_trajectory(traj);
    j["meta"] = {{"resolved_config", io::render_config(cfg)}, {"version", kVersion}};
    bundle.add(out_path(cfg, ".json"), j.dump() + "\n");
  }
  write_bundle(bundle, cfg, "dynamics");
  if (cfg.dynamics.settle)
    std::cout << (traj.settled ? "settled" : "did not settle within horizon") << "\n";
  return 0;
}

int cmd_roots(const io::RunConfig& cfg) {
  const Detuning det{angular_from_linear_khz(cfg.roots.delta_c_khz),
                     angular_from_linear_khz(cfg.roots.delta_p_khz)};
  const EnsembleBins bins = bins_for(cfg, det.delta_p);
  const SteadyStateResult result = steady_state(det, cfg.params, bins, cfg.solve);

  Bundle bundle;
  if (cfg.output.format == "csv" || cfg.output.format == "both")
    bundle.add(out_path(cfg, ".csv"), io::csv_from_roots(result, det));
  if (cfg.output.format == "json" || cfg.output.format == "both") {
    json j = io::json_from_roots(result, det);
    j["meta"] = {{"resolved_config", io::render_config(cfg)}, {"version", kVersion}};
    bundle.add(out_path(cfg, ".json"), j.dump() + "\n");
  }
  write_bundle(bundle, cfg, "roots");
  return 0;
}

// Built-in invariant suite on reference parameters: empty-cavity line shape,
// unsaturated collective response, Bloch-ball preservation.
int cmd_check() {
  int failures = 0;
  const auto report = [&](const char* name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  };

  SystemParams p;
  p.g0 = angular_from_linear_khz(66.0);
  p.kappa = angular_from_linear_khz(70.0);
  p.gamma = angular_from_linear_khz(182.4);
  p.eta = angular_from_linear_khz(1000.0);

  {
    SystemParams empty = p;
    empty.n_atoms = 0.0;
    const EnsembleBins bins = build_bins(0.0, 1, BinStrategy::delta);
    double worst = 0.0;
    for (int i = -8; i <= 8; ++i) {
      const Detuning det{0.0, i * 0.25 * empty.kappa};
      const SteadyStateResult r = steady_state(det, empty, bins);
      const double d = det.delta_p - det.delta_c;
      const double expect = 0.25 * empty.kappa * empty.kappa / (d * d + 0.25 * empty.kappa * empty.kappa);
      worst = std::max(worst, std::abs(r.t_norm - expect));
    }
    report("empty-cavity line shape", worst <= 1e-10, "max dev " + io::format_full(worst));
  }
  {
    SystemParams res = p;
    res.n_atoms = 25000.0;
    const EnsembleBins bins = build_bins(0.0, 1, BinStrategy::delta);
    const double got = collective_gamma(0.0, 0.0, res, bins).gamma_coll.real();
    const double expect = res.n_atoms * res.g0 * res.g0 / res.gamma;
    report("unsaturated collective response", std::abs(got - expect) <= 1e-12 * expect);
  }
  {
    SystemParams dyn = p;
    dyn.n_atoms = 500.0;
    dyn.eta = 20.0 * dyn.kappa;
    const EnsembleBins bins = build_bins(0.0, 1, BinStrategy::delta);
    const Detuning det{0.0, 2.0 * dyn.kappa};
    bool ok = true;
    std::string detail;
    try {
      const Trajectory traj = evolve(ground_state(bins), det, dyn, bins, 40.0 / dyn.kappa);
      detail = "max excess " + io::format_full(traj.max_bloch_excess);
      ok = traj.max_bloch_excess <= 1e-9;
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report("Bloch-ball preservation", ok, detail);
  }
  return failures == 0 ? 0 : 3;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Mean-field simulator of collectively coupled two-level atoms in a driven cavity"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", args.config_path, "run configuration file");
    if (config_required) opt->required();
    sub->add_option("--out", args.out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--threads", args.threads, "worker threads (env CAVITY_DRESSED_THREADS)");
    sub->add_flag("--image", args.image, "also render heatmap images");
    sub->add_flag("--overlay-dressed", args.overlay, "overlay the coupled-state resonance curve");
  };

  CLI::App* sweep = app.add_subcommand("sweep", "2D detuning map of transmission and fluorescence");
  CLI::App* spectrum = app.add_subcommand("spectrum", "1D probe scan at fixed cavity detuning");
  CLI::App* dynamics = app.add_subcommand("dynamics", "time evolution of the mean-field equations");
  CLI::App* roots = app.add_subcommand("roots", "all self-consistent intensities at one detuning");
  CLI::App* check = app.add_subcommand("check", "built-in invariant suite");
  for (CLI::App* sub : {sweep, spectrum, dynamics, roots}) add_common(sub, true);
  add_common(check, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    if (check->parsed()) return cmd_check();

    io::RunConfig cfg = io::parse_config_file(args.config_path);
    if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
    std::filesystem::create_directories(cfg.output.dir);

    const auto match = [&](CLI::App* sub, io::Command cmd) {
      if (sub->parsed() && cfg.command != cmd)
        throw ConfigError(std::string("config defines a [") + io::to_string(cfg.command) +
                          "] block but the '" + sub->get_name() + "' subcommand was invoked");
    };
    match(sweep, io::Command::sweep);
    match(spectrum, io::Command::spectrum);
    match(dynamics, io::Command::dynamics);
    match(roots, io::Command::roots);

    if (sweep->parsed()) return cmd_sweep(cfg, args);
    if (spectrum->parsed()) return cmd_spectrum(cfg, args);
    if (dynamics->parsed()) return cmd_dynamics(cfg);
    if (roots->parsed()) return cmd_roots(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace cavity::cli
