#include "dirmap/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "dirmap/csv.hpp"
#include "dirmap/eval.hpp"
#include "dirmap/grid_map.hpp"
#include "dirmap/plot.hpp"
#include "dirmap/synth.hpp"

namespace dirmap {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmFlags {
  double epsilon = 1e-6;
  double dbscan_eps = 0.5;
  std::size_t max_iterations = 100;
  std::uint64_t seed = 0;

  [[nodiscard]] EmConfig config() const {
    EmConfig c;
    c.epsilon = epsilon;
    c.dbscan_eps = dbscan_eps;
    c.max_iterations = max_iterations;
    c.seed = seed;
    return c;
  }
};

void add_em_flags(CLI::App* cmd, EmFlags& f) {
  cmd->add_option("--epsilon", f.epsilon, "EM stop threshold on mean movement")->capture_default_str();
  cmd->add_option("--dbscan-eps", f.dbscan_eps, "DBSCAN neighbourhood radius in radians")->capture_default_str();
  cmd->add_option("--max-iterations", f.max_iterations, "EM iteration cap")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
}

GridSpec parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    parts.push_back(part);
  }
  if (parts.size() != 6) {
    throw UsageError("--grid expects x_min,y_min,x_max,y_max,n_cols,n_rows");
  }
  double v[4];
  for (int i = 0; i < 4; ++i) {
    const auto& p = parts[static_cast<std::size_t>(i)];
    const auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), v[i]);
    if (ec != std::errc() || end != p.data() + p.size()) {
      throw UsageError("--grid: '" + p + "' is not a number");
    }
  }
  std::size_t n[2];
  for (int i = 0; i < 2; ++i) {
    const auto& p = parts[static_cast<std::size_t>(4 + i)];
    const auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), n[i]);
    if (ec != std::errc() || end != p.data() + p.size()) {
      throw UsageError("--grid: '" + p + "' is not a cell count");
    }
  }
  GridSpec spec{v[0], v[1], v[2], v[3], n[0], n[1]};
  try {
    spec.validate();
  } catch (const std::domain_error& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
  return spec;
}

std::string default_grid() {
  const GridSpec g = scene_grid();
  return fmt::format("{},{},{},{},{},{}", g.x_min, g.y_min, g.x_max, g.y_max, g.n_cols, g.n_rows);
}

FitMode parse_mode(const std::string& m) { return m == "vm" ? FitMode::vm : FitMode::vmm; }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw DataError("cannot open " + path + " for writing");
  }
  return f;
}

void finish(std::ofstream& f, const std::string& path) {
  f.close();
  if (!f) {
    throw DataError("write to " + path + " failed");
  }
}

DirectionalGridMap read_map(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw DataError("cannot open " + path);
  }
  return load_map(f);
}

std::vector<Observation> read_observations(const std::string& path, double min_step, std::ostream& err) {
  const CsvData data = load_csv(path);
  for (const auto& d : data.diagnostics) {
    err << d << '\n';
  }
  return to_observations(data, min_step);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Directional grid maps: per-cell von Mises mixtures of motion headings", "dirmap"};
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.require_subcommand(1);

  // synth
  std::string scene_arg;
  std::string synth_out;
  std::string truth_out;
  SceneSpec scene;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene as a track CSV");
  std::vector<std::string> scene_names;
  for (Scene s : {Scene::unimodal, Scene::multimodal, Scene::kuka_loop, Scene::human_l_path}) {
    scene_names.emplace_back(scene_name(s));
  }
  synth->add_option("--scene", scene_arg, "Scene name")->required()->check(CLI::IsMember(scene_names));
  synth->add_option("--out", synth_out, "Track CSV path")->required();
  synth->add_option("--truth", truth_out, "Ground-truth sidecar path (default <out>.truth.csv)");
  synth->add_option("--agents", scene.n_agents, "Number of agents or laps")->capture_default_str();
  synth->add_option("--steps", scene.steps_per_agent, "Points per agent")->capture_default_str();
  synth->add_option("--noise", scene.noise_sigma, "Heading noise sigma in radians")->capture_default_str();
  synth->add_option("--seed", scene.seed, "Random seed")->capture_default_str();

  // build
  std::string build_in;
  std::string build_out;
  std::string build_grid = default_grid();
  std::string build_mode = "vmm";
  double build_min_step = kDefaultMinStep;
  EmFlags build_em;
  auto* build_cmd = app.add_subcommand("build", "Fit a directional grid map from a CSV");
  build_cmd->add_option("--in", build_in, "Input CSV (tracks or observations)")->required();
  build_cmd->add_option("--out", build_out, "Output map path")->required();
  build_cmd->add_option("--grid", build_grid, "x_min,y_min,x_max,y_max,n_cols,n_rows")->capture_default_str();
  build_cmd->add_option("--mode", build_mode, "vm or vmm")->check(CLI::IsMember({"vm", "vmm"}))->capture_default_str();
  build_cmd->add_option("--min-step", build_min_step, "Minimum step length for track headings")
      ->capture_default_str();
  add_em_flags(build_cmd, build_em);

  // query
  std::string query_map;
  double qx = 0.0;
  double qy = 0.0;
  double qtheta = 0.0;
  bool qmodes = false;
  bool qexact = false;
  auto* query_cmd = app.add_subcommand("query", "Density or modes at a location");
  query_cmd->add_option("--map", query_map, "Map file")->required();
  query_cmd->add_option("--x", qx, "x coordinate")->required();
  query_cmd->add_option("--y", qy, "y coordinate")->required();
  auto* theta_opt = query_cmd->add_option("--theta", qtheta, "Heading in radians");
  auto* modes_flag = query_cmd->add_flag("--modes", qmodes, "List the modes of the cell");
  theta_opt->excludes(modes_flag);
  query_cmd->add_flag("--exact", qexact, "Print shortest round-trip numbers instead of 10 decimals");

  // eval
  std::string eval_in;
  std::string eval_grid = default_grid();
  std::string eval_scope = "cell";
  std::size_t folds = 10;
  bool timing = false;
  double eval_min_step = kDefaultMinStep;
  EmFlags eval_em;
  auto* eval_cmd = app.add_subcommand("eval", "Cross-validated comparison of VM and VMM fits");
  eval_cmd->add_option("--in", eval_in, "Input CSV")->required();
  eval_cmd->add_option("--grid", eval_grid, "x_min,y_min,x_max,y_max,n_cols,n_rows")->capture_default_str();
  eval_cmd->add_option("--scope", eval_scope, "cell or global")
      ->check(CLI::IsMember({"cell", "global"}))
      ->capture_default_str();
  eval_cmd->add_option("--folds", folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000000));
  eval_cmd->add_flag("--timing", timing, "Report fit times (not reproducible between runs)");
  eval_cmd->add_option("--min-step", eval_min_step, "Minimum step length for track headings")
      ->capture_default_str();
  add_em_flags(eval_cmd, eval_em);

  // plot
  std::string plot_map;
  std::string plot_out;
  std::string plot_norm = "per-cell";
  PlotSpec plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render the map as a grid of polar lobes (SVG)");
  plot_cmd->add_option("--map", plot_map, "Map file")->required();
  plot_cmd->add_option("--out", plot_out, "SVG path")->required();
  plot_cmd->add_option("--cell-size", plot.cell_size_px, "Cell size in pixels")->capture_default_str();
  plot_cmd->add_option("--samples", plot.samples_per_lobe, "Samples per lobe (>= 36)")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{36}, std::size_t{1000000}));
  plot_cmd->add_option("--normalize", plot_norm, "per-cell or global")
      ->check(CLI::IsMember({"per-cell", "global"}))
      ->capture_default_str();
  plot_cmd->add_option("--stroke", plot.stroke, "Lobe outline colour")->capture_default_str();
  plot_cmd->add_option("--fill", plot.fill, "Lobe fill colour")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      scene.scene = *parse_scene(scene_arg);
      try {
        scene.validate();
      } catch (const std::domain_error& e) {
        throw UsageError(e.what());
      }
      const SceneData data = generate(scene);
      auto f = open_out(synth_out);
      write_tracks_csv(f, data.points);
      finish(f, synth_out);
      const std::string truth_path = truth_out.empty() ? synth_out + ".truth.csv" : truth_out;
      auto t = open_out(truth_path);
      write_truth_csv(t, data.truth);
      finish(t, truth_path);
      err << fmt::format("wrote {} points, {} segments\n", data.points.size(), data.truth.size());
    } else if (build_cmd->parsed()) {
      const GridSpec grid = parse_grid(build_grid);
      const EmConfig config = build_em.config();
      try {
        config.validate();
      } catch (const std::domain_error& e) {
        throw UsageError(e.what());
      }
      const auto obs = read_observations(build_in, build_min_step, err);
      const auto map = build(std::span<const Observation>(obs), grid, parse_mode(build_mode), config);
      for (const auto& c : map.cells()) {
        if (c.observed() && c.report) {
          err << fmt::format("cell {} {}: n={} M={} iterations={} converged={}\n", c.index.col, c.index.row,
                             c.n_obs, c.mixture->size(), c.report->iterations, c.report->converged);
        }
      }
      if (map.no_observations()) {
        err << "warning: no observations inside the grid\n";
      }
      if (map.outside_count() > 0) {
        err << fmt::format("{} observations outside the grid\n", map.outside_count());
      }
      auto f = open_out(build_out);
      save_map(f, map);
      finish(f, build_out);
    } else if (query_cmd->parsed()) {
      if (theta_opt->count() == 0 && !qmodes) {
        throw UsageError("query needs --theta or --modes");
      }
      const auto map = read_map(query_map);
      const auto num = [&](double v) { return qexact ? fmt::format("{}", v) : fmt::format("{:.10f}", v); };
      if (qmodes) {
        const auto cell = cell_of(map.spec(), qx, qy);
        if (!cell || !map.cell(*cell).mixture) {
          err << "location unobserved: uniform, no modes\n";
        } else {
          const auto& mix = *map.cell(*cell).mixture;
          const auto found = find_modes(mix);
          if (found.uniform) {
            err << "uniform mixture: no modes\n";
          }
          for (Angle m : found.modes) {
            out << num(m.radians()) << ',' << num(vmm_pdf(mix, m)) << '\n';
          }
        }
      } else {
        const auto r = query(map, qx, qy, Angle(qtheta));
        out << num(r.density) << ',' << (r.observed ? "true" : "false") << '\n';
      }
    } else if (eval_cmd->parsed()) {
      const GridSpec grid = parse_grid(eval_grid);
      const EmConfig config = eval_em.config();
      try {
        config.validate();
      } catch (const std::domain_error& e) {
        throw UsageError(e.what());
      }
      const auto obs = read_observations(eval_in, eval_min_step, err);
      Comparison result;
      if (eval_scope == "cell") {
        const ObservationStore store(grid, obs);
        const auto cells = compare_cells(store, config, eval_em.seed, folds);
        err << fmt::format("cells evaluated {}, skipped {}\n", cells.cells_evaluated, cells.cells_skipped);
        if (cells.cells_evaluated == 0) {
          throw DataError("no cell has at least " + std::to_string(folds) + " observations");
        }
        result = cells.totals;
      } else {
        std::vector<Angle> thetas;
        thetas.reserve(obs.size());
        for (const auto& o : obs) {
          thetas.push_back(o.theta);
        }
        result = compare(thetas, config, eval_em.seed, folds);
      }
      out << "method,enll,apd,mse_closest_mode,fit_ms_mean,fit_ms_sd\n";
      for (const MetricReport* r : {&result.vm, &result.vmm}) {
        const std::string t = timing ? fmt::format("{:.6f},{:.6f}", r->fit_ms_mean(), r->fit_ms_sd()) : "NA,NA";
        out << fmt::format("{},{:.10f},{:.10f},{:.10f},{}\n", method_name(r->method), r->enll, r->apd,
                           r->mse_closest_mode, t);
      }
    } else if (plot_cmd->parsed()) {
      plot.normalize = *parse_lobe_scale(plot_norm);
      try {
        plot.validate();
      } catch (const std::domain_error& e) {
        throw UsageError(e.what());
      }
      const auto map = read_map(plot_map);
      auto f = open_out(plot_out);
      write_svg(f, map, plot);
      finish(f, plot_out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace dirmap
