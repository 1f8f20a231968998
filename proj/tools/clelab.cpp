// clelab: sampling, fields, renewal checks, acceptance criteria, rendering and
// reports from the command line. Exit status 0 on success, 1 when a criterion
// fails, 2 on usage or input errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <utility>

#include "cle/criteria.hpp"
#include "cle/ensemble.hpp"
#include "cle/error.hpp"
#include "cle/harness.hpp"
#include "cle/loop_io.hpp"
#include "cle/renewal.hpp"
#include "cle/rng.hpp"
#include "cle/stats.hpp"

using namespace cle;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out;
  std::string config;
};

ExperimentConfig base_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig::from_json(json::object()) : ExperimentConfig::load(c.config);
  if (c.seed_set) {
    cfg.seed = c.seed;
    cfg.criteria.seed = c.seed;
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

void emit(const Common& c, const std::string& text, const std::string& fallback_name = "") {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    return;
  }
  std::filesystem::path path = c.out;
  if (!fallback_name.empty() && (std::filesystem::is_directory(path) || !path.has_extension())) {
    std::filesystem::create_directories(path);
    path /= fallback_name;
  }
  write_file_atomic(path, text);
}

std::string rows_csv(const ordered_json& rows) {
  std::ostringstream out;
  out.precision(10);
  bool header = true;
  for (const auto& row : rows) {
    if (header) {
      const char* sep = "";
      for (const auto& [key, value] : row.items()) out << std::exchange(sep, ",") << key;
      out << '\n';
      header = false;
    }
    const char* sep = "";
    for (const auto& [key, value] : row.items()) out << std::exchange(sep, ",") << value.get<double>();
    out << '\n';
  }
  return out.str();
}

LatticeSpec model_from(const std::string& model, int radius, double q) {
  return geometry_from_string(model) == Geometry::TriangularSite ? LatticeSpec::percolation(radius)
                                                                 : LatticeSpec::fk(radius, q);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nesting statistics of lattice loop ensembles"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { common.seed = s, common.seed_set = true; }, "Base seed");
    sub->add_option("--out", common.out, "Output file or directory");
    sub->add_option("--config", common.config, "Experiment config (JSON)");
  };

  // sample
  auto* sample = app.add_subcommand("sample", "Sample loop configurations");
  add_common(sample);
  std::string model = "perc", format = "bin";
  int radius = 64, sweeps = 200;
  double q = 2.0;
  std::size_t replicas = 1;
  sample->add_option("--model", model, "perc or fk")->check(CLI::IsMember({"perc", "fk", "triangular-site", "square-fk"}));
  sample->add_option("--radius", radius, "Disk radius in cells")->check(CLI::Range(4, 1 << 14));
  sample->add_option("--q", q, "FK cluster weight");
  sample->add_option("--sweeps", sweeps, "FK sweeps")->check(CLI::PositiveNumber);
  sample->add_option("--replicas", replicas, "Number of configurations")->check(CLI::PositiveNumber);
  sample->add_option("--format", format, "bin or json")->check(CLI::IsMember({"bin", "json"}));

  // field
  auto* field = app.add_subcommand("field", "Weighted or step nesting field of a loop file");
  add_common(field);
  std::string loops_path, mu_text = "unit", field_format = "csv";
  double eps = 0.0625;
  int grid_n = 32, step = -1;
  std::size_t calibration = 100;
  bool raw = false;
  field->add_option("--loops,--in", loops_path, "Loop file")->required()->check(CLI::ExistingFile);
  field->add_option("--eps", eps, "Ball radius (unit disk)");
  field->add_option("--mu", mu_text, "Weight law: unit, bern, gauss[:SCALE]");
  field->add_option("--grid", grid_n, "Grid points per side")->check(CLI::Range(2, 4096));
  field->add_option("--step", step, "Step field with the n outermost loops instead");
  field->add_option("--calibration-replicas", calibration, "Replicas for the mean table (unit weights)");
  field->add_flag("--raw", raw, "Write S instead of the centred field");
  field->add_option("--format", field_format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));

  // renewal
  auto* renewal = app.add_subcommand("renewal", "Renewal process estimates");
  add_common(renewal);
  std::string dist_text = "exp", mode = "passage";
  double level = 10.0;
  std::size_t paths = 100000;
  renewal->add_option("--dist", dist_text, "exp[:RATE], gamma[:SHAPE:RATE], ssw:KAPPA");
  renewal->add_option("--op,--mode", mode, "passage, overshoot, taumoments, couple")
      ->transform(CLI::Transformer({{"moments", "taumoments"}, {"coupling", "couple"}}))
      ->check(CLI::IsMember({"passage", "overshoot", "taumoments", "couple"}));
  renewal->add_option("--x", level, "Level");
  renewal->add_option("--paths", paths, "Monte Carlo paths")->check(CLI::PositiveNumber);

  // verify
  auto* verify = app.add_subcommand("verify", "Run acceptance criteria");
  add_common(verify);
  std::vector<std::string> names;
  verify->add_option("criteria", names, "Criterion names or numbers (default: the config's tests, else all)");

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline of a config");
  add_common(run);

  // render
  auto* render = app.add_subcommand("render", "Render nesting depth as PNG");
  add_common(render);
  std::string palette = "heat";
  int ppc = 2;
  bool overlay = false;
  render->add_option("--loops,--in", loops_path, "Loop file")->required()->check(CLI::ExistingFile);
  render->add_option("--palette", palette, "heat or gray")->check(CLI::IsMember({"heat", "gray", "grey"}));
  render->add_option("--pixels-per-cell", ppc, "Pixel block size")->check(CLI::Range(1, 16));
  render->add_flag("--overlay", overlay, "Outline the chain around the deepest cell");

  // report
  auto* rep = app.add_subcommand("report", "Summarise a run directory");
  add_common(rep);
  std::string run_dir;
  rep->add_option("run", run_dir, "Run directory (default: --out or the config's output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sample) {
      EnsembleSpec ens;
      if (!common.config.empty()) {
        const auto cfg = base_config(common);
        ens.lattice = cfg.lattice;
        ens.replicas = cfg.replicas;
        ens.seed = cfg.seed;
        ens.sweeps = cfg.sweeps;
      } else {
        ens.lattice = model_from(model, radius, q);
        ens.replicas = replicas;
        ens.seed = common.seed;
        ens.sweeps = sweeps;
      }
      const std::filesystem::path dir = common.out.empty() ? "samples" : common.out;
      if (ens.replicas == 1 && dir.has_extension()) {
        const auto loops = sample_member(ens, 0);
        save_loops(loops, dir);
        std::cout << dir.string() << ": " << loops.loops.size() << " loops\n";
        return 0;
      }
      for (std::size_t r = 0; r < ens.replicas; ++r) {
        char name[64];
        std::snprintf(name, sizeof name, "member_%05zu.%s", r, format == "json" ? "json" : "loops");
        const auto loops = sample_member(ens, r);
        save_loops(loops, dir / name);
        std::cout << (dir / name).string() << ": " << loops.loops.size() << " loops\n";
      }
      return 0;
    }

    if (*field) {
      const auto loops = load_loops(loops_path);
      const MuSpec mu = MuSpec::parse(mu_text);
      const FieldGrid grid{grid_n, 0.5};
      const std::uint64_t xi = derive_seed(common.seed, "field/weights", 0);
      GridHeader header{grid, eps, step, mu.name(), xi, loops.seed};
      std::vector<double> values;
      if (step >= 0) {
        values = step_nesting_field(loops, mu, xi, step, grid);
      } else if (raw) {
        values = weighted_field(loops, mu, xi, eps, nullptr, grid, false).S;
      } else {
        EnsembleSpec cal;
        cal.lattice = loops.spec;
        cal.replicas = calibration;
        cal.seed = common.seed;
        cal.stage = "calibration";
        cal.sweeps = loops.sweep_count > 0 ? loops.sweep_count : 200;
        const MeanTable table = mu.zero_mean() ? exact_zero_table(loops.spec, mu, eps, grid)
                                               : calibrate_mean(cal, mu, eps, grid);
        values = weighted_field(loops, mu, xi, eps, &table, grid).h;
      }
      emit(common, field_format == "csv" ? field_csv(grid, values) : field_binary(header, values),
           field_format == "csv" ? "field.csv" : "field.grid");
      return 0;
    }

    if (*renewal) {
      const auto dist = IncrementDistribution::parse(dist_text);
      ordered_json rows = ordered_json::array();
      if (mode == "passage") {
        Engine engine = make_engine(common.seed);
        std::vector<double> tau(paths), over(paths);
        for (std::size_t i = 0; i < paths; ++i) {
          const auto p = first_passage_summary(dist, level, engine);
          tau[i] = static_cast<double>(p.tau);
          over[i] = p.overshoot;
        }
        rows.push_back({{"x", level},
                        {"tau_mean", stats::mean(tau)},
                        {"tau_se", paths > 1 ? stats::standard_error(tau) : 0.0},
                        {"overshoot_mean", stats::mean(over)},
                        {"nu", dist.typical_nesting_constant()}});
      } else if (mode == "overshoot") {
        std::vector<double> alpha;
        for (int i = 0; i <= 10; ++i) alpha.push_back(0.5 * i);
        for (const auto& p : overshoot_tail_estimate(dist, level, alpha, paths, common.seed))
          rows.push_back({{"alpha", p.alpha}, {"survival", p.survival}, {"lo", p.band.lo}, {"hi", p.band.hi}});
      } else if (mode == "taumoments") {
        const std::vector<double> xs{5.0, 10.0, 20.0, 40.0};
        for (int j = 1; j <= 3; ++j) {
          const auto t = tau_moment_check(dist, xs, j, paths, derive_seed(common.seed, "moments", j));
          for (const auto& r : t.rows)
            rows.push_back({{"j", j},
                            {"x", r.x},
                            {"moment", r.moment},
                            {"se", r.se},
                            {"residual", r.residual},
                            {"growth_slope", t.growth.slope}});
        }
      } else {
        const double theta = default_coupling_window(dist, common.seed);
        const auto est = estimate_non_coalescence(dist, 0.0, 0.5, level, paths, common.seed, theta);
        rows.push_back({{"M", level},
                        {"gap", 0.5},
                        {"theta", theta},
                        {"direct", est.direct},
                        {"direct_se", est.direct_se},
                        {"weighted", est.weighted},
                        {"weighted_se", est.weighted_se}});
      }
      if (std::filesystem::path(common.out).extension() == ".csv") {
        emit(common, rows_csv(rows));
      } else {
        const ordered_json out = {{"dist", dist.name()}, {"op", mode},         {"x", level},
                                  {"paths", paths},      {"seed", common.seed}, {"rows", rows}};
        emit(common, out.dump(2) + "\n", "renewal.json");
      }
      return 0;
    }

    if (*verify) {
      ExperimentConfig cfg = base_config(common);
      std::vector<int> ids;
      for (const auto& n : names) ids.push_back(criterion_id(n));
      if (ids.empty()) ids = cfg.tests;
      if (ids.empty())
        for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
      CriteriaRunner runner(cfg.criteria);
      std::vector<CriterionResult> results;
      for (int id : ids) {
        results.push_back(runner.run(id));
        std::cout << format_result_line(results.back()) << std::endl;
      }
      const auto r = report(ids, results);
      if (!common.out.empty()) emit(common, r.json.dump(2) + "\n", "report.json");
      return r.exit_code();
    }

    if (*run) {
      const auto cfg = base_config(common);
      const auto m = run_experiment(cfg, [](std::string_view s) { std::cerr << s << '\n'; });
      const auto r = report(m);
      std::cout << r.text;
      if (!m.completed()) return 2;
      return r.exit_code();
    }

    if (*render) {
      const auto loops = load_loops(loops_path);
      RenderOptions opts;
      opts.palette = palette_from_string(palette);
      opts.pixels_per_cell = ppc;
      opts.overlay_chain = overlay;
      const std::string png = render_nesting(nesting_depth(loops), opts, &loops);
      if (common.out.empty()) throw ArgumentError("render needs --out");
      emit(common, png, "nesting.png");
      return 0;
    }

    if (*rep) {
      std::filesystem::path dir = run_dir;
      if (dir.empty()) dir = common.out.empty() ? base_config(common).output_dir : std::filesystem::path(common.out);
      const auto m = RunManifest::load(dir);
      const auto r = report(m);
      write_file_atomic(dir / "report.json", r.json.dump(2) + "\n");
      std::cout << r.text;
      return r.exit_code();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
