#include "cle/harness.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <optional>
#include <sstream>

#include "cle/ensemble.hpp"
#include "cle/error.hpp"
#include "cle/loop_io.hpp"
#include "cle/renewal.hpp"

namespace cle {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw ConfigurationError(path + ": " + what);
}

const json& object_at(const json& j, const char* key, const json& empty) {
  if (!j.contains(key)) return empty;
  if (!j[key].is_object()) config_error(key, "expected an object");
  return j[key];
}

void known_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) config_error(where.empty() ? key : where + "." + key, "unknown key");
  }
}

long long integer_at(const json& j, const char* key, const std::string& path, long long fallback, long long min) {
  if (!j.contains(key)) return fallback;
  const auto& v = j[key];
  if (!v.is_number_integer() && !v.is_number_unsigned()) config_error(path, "expected an integer");
  const long long x = v.get<long long>();
  if (x < min) config_error(path, "must be at least " + std::to_string(min));
  return x;
}

double number_at(const json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) config_error(path, "expected a number");
  return j[key].get<double>();
}

std::string string_at(const json& j, const char* key, const std::string& path, std::string fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) config_error(path, "expected a string");
  return j[key].get<std::string>();
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string member_path(std::size_t r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "samples/member_%05zu.loops", r);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// Writes into the run directory and records digests.
class ArtifactWriter {
 public:
  ArtifactWriter(RunManifest& manifest) : manifest_(manifest) {}
  void write(const std::string& rel, std::string_view bytes, const std::string& stage, bool data = true) {
    write_file_atomic(manifest_.output_dir / rel, bytes);
    record(rel, bytes, stage, data);
  }
  void record(const std::string& rel, std::string_view bytes, const std::string& stage, bool data = true) {
    manifest_.artifacts.push_back({rel, sha256_hex(bytes), bytes.size(), stage, data});
  }

 private:
  RunManifest& manifest_;
};

void save_manifest(const RunManifest& m) {
  write_file_atomic(m.output_dir / "manifest.json", m.to_json().dump(2) + "\n");
}

std::string csv_number(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

}  // namespace

// ---- config ----

void ExperimentConfig::validate() const {
  try {
    lattice.validate();
  } catch (const ConfigurationError& e) {
    config_error("model", e.what());
  }
  if (sweeps < 1) config_error("model.sweeps", "must be at least 1");
  if (replicas < 1) config_error("ensemble.replicas", "must be at least 1");
  if (eps_ladder.empty()) config_error("fields.eps", "must not be empty");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    const std::string path = "fields.eps[" + std::to_string(i) + "]";
    if (!(eps_ladder[i] > 0.0)) config_error(path, "must be positive");
    if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1])) config_error(path, "ladder must be strictly decreasing");
  }
  // The field grid covers [-1/2, 1/2]^2; balls around its corners must stay in the disk.
  if (eps_ladder.front() + std::sqrt(0.5) >= 1.0) config_error("fields.eps[0]", "must be below 1 - sqrt(1/2)");
  if (grid_n < 2) config_error("fields.grid", "must be at least 2");
  if (!mu.zero_mean() && calibration_replicas < 100) config_error("fields.calibration_replicas", "must be at least 100");
}

json ExperimentConfig::to_json() const {
  json tests_json = json::array();
  for (int id : tests) tests_json.push_back(std::string(criterion_name(id)));
  json model = {{"geometry", to_string(lattice.geometry)},
                {"radius", lattice.radius_cells},
                {"p", lattice.params.p},
                {"q", lattice.params.q},
                {"critical", lattice.critical},
                {"sweeps", sweeps}};
  return {{"model", model},
          {"ensemble", {{"replicas", replicas}, {"seed", seed}}},
          {"fields",
           {{"eps", eps_ladder},
            {"mu", mu.name()},
            {"grid", grid_n},
            {"calibration_replicas", calibration_replicas}}},
          {"tests", tests_json},
          {"criteria", criteria.to_json()},
          {"output", output_dir.string()}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigurationError("config: expected a JSON object");
  known_keys(j, "", {"model", "ensemble", "fields", "tests", "criteria", "output"});
  const json empty = json::object();
  ExperimentConfig c;

  const json& model = object_at(j, "model", empty);
  known_keys(model, "model", {"geometry", "radius", "p", "q", "critical", "sweeps"});
  Geometry geometry = Geometry::TriangularSite;
  try {
    geometry = geometry_from_string(string_at(model, "geometry", "model.geometry", "triangular-site"));
  } catch (const ConfigurationError& e) {
    config_error("model.geometry", e.what());
  }
  const int radius = static_cast<int>(integer_at(model, "radius", "model.radius", 64, 4));
  if (geometry == Geometry::TriangularSite) {
    c.lattice = LatticeSpec::percolation(radius);
  } else {
    c.lattice = LatticeSpec::fk(radius, number_at(model, "q", "model.q", 2.0));
  }
  if (model.contains("critical")) {
    if (!model["critical"].is_boolean()) config_error("model.critical", "expected true or false");
    c.lattice.critical = model["critical"].get<bool>();
  }
  c.lattice.params.p = number_at(model, "p", "model.p", c.lattice.params.p);
  c.sweeps = static_cast<int>(integer_at(model, "sweeps", "model.sweeps", c.sweeps, 1));

  const json& ens = object_at(j, "ensemble", empty);
  known_keys(ens, "ensemble", {"replicas", "seed"});
  c.replicas = static_cast<std::size_t>(integer_at(ens, "replicas", "ensemble.replicas", 10, 1));
  if (ens.contains("seed")) {
    if (!ens["seed"].is_number_unsigned() && !ens["seed"].is_number_integer())
      config_error("ensemble.seed", "expected a non-negative integer");
    if (ens["seed"].is_number_integer() && ens["seed"].get<long long>() < 0)
      config_error("ensemble.seed", "expected a non-negative integer");
    c.seed = ens["seed"].get<std::uint64_t>();
  }

  const json& fields = object_at(j, "fields", empty);
  known_keys(fields, "fields", {"eps", "mu", "grid", "calibration_replicas"});
  if (fields.contains("eps")) {
    if (!fields["eps"].is_array()) config_error("fields.eps", "expected an array of numbers");
    c.eps_ladder.clear();
    for (std::size_t i = 0; i < fields["eps"].size(); ++i) {
      if (!fields["eps"][i].is_number()) config_error("fields.eps[" + std::to_string(i) + "]", "expected a number");
      c.eps_ladder.push_back(fields["eps"][i].get<double>());
    }
  }
  try {
    c.mu = MuSpec::parse(string_at(fields, "mu", "fields.mu", "unit"));
  } catch (const ConfigurationError& e) {
    config_error("fields.mu", e.what());
  }
  c.grid_n = static_cast<int>(integer_at(fields, "grid", "fields.grid", c.grid_n, 2));
  c.calibration_replicas =
      static_cast<std::size_t>(integer_at(fields, "calibration_replicas", "fields.calibration_replicas", 100, 1));

  if (j.contains("tests")) {
    const auto& t = j["tests"];
    if (t.is_string() && t.get<std::string>() == "all") {
      for (int i = 1; i <= kCriterionCount; ++i) c.tests.push_back(i);
    } else if (t.is_array()) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string path = "tests[" + std::to_string(i) + "]";
        std::string text;
        if (t[i].is_string()) {
          text = t[i].get<std::string>();
        } else if (t[i].is_number_integer()) {
          text = std::to_string(t[i].get<long long>());
        } else {
          config_error(path, "expected a criterion name or number");
        }
        try {
          c.tests.push_back(criterion_id(text));
        } catch (const ConfigurationError& e) {
          config_error(path, e.what());
        }
      }
    } else {
      config_error("tests", "expected \"all\" or an array");
    }
  }

  json crit = object_at(j, "criteria", empty);
  if (!crit.contains("seed")) crit["seed"] = c.seed;
  c.criteria = CriteriaSettings::from_json(crit, "criteria");
  c.output_dir = string_at(j, "output", "output", "run");
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigurationError(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

// ---- manifest ----

bool RunManifest::completed() const {
  for (const auto& s : stages)
    if (!s.completed) return false;
  return !stages.empty();
}

const ArtifactRecord* RunManifest::artifact(std::string_view path) const {
  for (const auto& a : artifacts)
    if (a.path == path) return &a;
  return nullptr;
}

json RunManifest::to_json() const {
  json arts = json::array();
  for (const auto& a : artifacts)
    arts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}, {"stage", a.stage}, {"data", a.data}});
  json st = json::array();
  for (const auto& s : stages) {
    json e = {{"name", s.name}, {"completed", s.completed}, {"seconds", s.seconds}, {"info", s.info}};
    if (!s.error.empty()) e["error"] = s.error;
    st.push_back(std::move(e));
  }
  return {{"config", config},   {"seed", seed},     {"versions", versions},
          {"artifacts", arts},  {"stages", st},     {"replicas", replicas},
          {"wall_clock_seconds", wall_clock_seconds}, {"created", created}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.versions = j.value("versions", json::object());
    for (const auto& a : j.at("artifacts"))
      m.artifacts.push_back({a.at("path").get<std::string>(), a.at("sha256").get<std::string>(),
                             a.at("bytes").get<std::uintmax_t>(), a.at("stage").get<std::string>(),
                             a.value("data", true)});
    for (const auto& s : j.at("stages")) {
      StageRecord r;
      r.name = s.at("name").get<std::string>();
      r.completed = s.at("completed").get<bool>();
      r.seconds = s.value("seconds", 0.0);
      r.error = s.value("error", "");
      r.info = s.value("info", json::object());
      m.stages.push_back(std::move(r));
    }
    m.replicas = j.value("replicas", std::size_t{0});
    m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    m.created = j.value("created", "");
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

RunManifest RunManifest::load(const std::filesystem::path& output_dir) {
  const auto path = output_dir / "manifest.json";
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  auto m = from_json(j);
  m.output_dir = output_dir;
  return m;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// ---- pipeline ----

RunManifest run_experiment(const ExperimentConfig& config, const std::function<void(std::string_view)>& log) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };

  RunManifest m;
  m.output_dir = config.output_dir;
  m.config = config.to_json();
  m.seed = config.seed;
  m.replicas = config.replicas;
  m.created = utc_now();
  m.versions = {{"clelab", kVersion},        {"lattice-models", kVersion}, {"loop-topology", kVersion},
                {"renewal-engine", kVersion}, {"field-analysis", kVersion}, {"harness-cli", kVersion}};
  std::filesystem::create_directories(m.output_dir);

  // Digests of an earlier run with the same model and ensemble.
  std::optional<RunManifest> previous;
  if (std::filesystem::exists(m.output_dir / "manifest.json")) {
    try {
      auto p = RunManifest::load(m.output_dir);
      if (p.config.value("model", json()) == m.config["model"] &&
          p.config.value("ensemble", json()) == m.config["ensemble"])
        previous = std::move(p);
    } catch (const Error&) {
    }
  }

  ArtifactWriter out(m);
  EnsembleSpec ens;
  ens.lattice = config.lattice;
  ens.replicas = config.replicas;
  ens.seed = config.seed;
  ens.sweeps = config.sweeps;
  const FieldGrid grid{config.grid_n, 0.5};
  std::vector<CriterionResult> results;

  auto stage = [&](const std::string& name, auto&& body) {
    if (!m.stages.empty() && !m.stages.back().completed) return;
    StageRecord rec;
    rec.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    say("stage " + name);
    try {
      body(rec.info);
      rec.completed = true;
    } catch (const std::exception& e) {
      rec.error = e.what();
      say("stage " + name + " failed: " + rec.error);
    }
    rec.seconds = seconds_since(t0);
    m.stages.push_back(std::move(rec));
    m.wall_clock_seconds = seconds_since(start);
    save_manifest(m);
  };

  auto load_member = [&](std::size_t r) { return load_loops(m.output_dir / member_path(r)); };

  stage("sample", [&](json& info) {
    std::size_t reused = 0;
    for (std::size_t r = 0; r < config.replicas; ++r) {
      const std::string rel = member_path(r);
      const auto path = m.output_dir / rel;
      if (previous && std::filesystem::exists(path)) {
        const std::string bytes = read_file(path);
        const auto* a = previous->artifact(rel);
        if (a && a->sha256 == sha256_hex(bytes)) {
          out.record(rel, bytes, "sample");
          ++reused;
          continue;
        }
      }
      std::ostringstream bytes;
      write_loops_binary(sample_member(ens, r), bytes);
      out.write(rel, bytes.str(), "sample");
    }
    info["reused"] = reused;
    info["generated"] = config.replicas - reused;
  });

  stage("topology", [&](json& info) {
    std::ostringstream csv;
    csv << "replica,loops,max_depth,center_depth";
    for (std::size_t e = 0; e < config.eps_ladder.size(); ++e) csv << ",N_center_eps" << e;
    csv << '\n';
    for (std::size_t r = 0; r < config.replicas; ++r) {
      const auto loops = load_member(r);
      const auto depth = nesting_depth(loops);
      csv << r << ',' << loops.loops.size() << ',' << depth.max_depth << ','
          << depth.at(cell_at(loops, {0, 0}));
      for (double e : config.eps_ladder) csv << ',' << count_surrounding_ball(loops, {0, 0}, e);
      csv << '\n';
      if (r == 0) {
        RenderOptions opts;
        opts.overlay_chain = true;
        out.write("topology/nesting_00000.png", render_nesting(depth, opts, &loops), "topology");
      }
    }
    out.write("topology/summary.csv", csv.str(), "topology");
    info["rows"] = config.replicas;
  });

  stage("analysis", [&](json& info) {
    std::vector<MeanTable> tables;
    if (config.mu.zero_mean()) {
      for (double e : config.eps_ladder) tables.push_back(exact_zero_table(ens.lattice, config.mu, e, grid));
    } else {
      EnsembleSpec cal = ens;
      cal.replicas = config.calibration_replicas;
      cal.stage = "calibration";
      tables = calibrate_means(cal, config.mu, config.eps_ladder, grid);
    }
    const std::size_t ne = config.eps_ladder.size();
    std::vector<std::vector<double>> center(ne), second(ne);
    for (std::size_t r = 0; r < config.replicas; ++r) {
      const auto loops = load_member(r);
      for (std::size_t e = 0; e < ne; ++e) {
        const auto f = weighted_field(loops, config.mu, ens.weight_seed(r), config.eps_ladder[e], &tables[e], grid);
        center[e].push_back(static_cast<double>(count_surrounding_ball(loops, {0, 0}, config.eps_ladder[e])));
        double s2 = 0.0;
        for (double h : f.h) s2 += h * h;
        second[e].push_back(s2 / static_cast<double>(f.h.size()));
        if (r == 0) {
          char name[64];
          std::snprintf(name, sizeof name, "analysis/h_r00000_eps%zu.csv", e);
          out.write(name, field_csv(grid, f.h), "analysis");
        }
      }
    }
    json rows = json::array();
    std::vector<double> x, y;
    for (std::size_t e = 0; e < ne; ++e) {
      x.push_back(std::log(1.0 / config.eps_ladder[e]));
      y.push_back(stats::mean(center[e]));
      rows.push_back({{"eps", config.eps_ladder[e]},
                      {"mean_center_count", y.back()},
                      {"mean_center_count_se", config.replicas > 1 ? stats::standard_error(center[e]) : 0.0},
                      {"mean_h_squared", stats::mean(second[e])}});
    }
    json summary = {{"mu", config.mu.name()}, {"replicas", config.replicas}, {"rows", rows}};
    if (ne >= 3) {
      const auto fit = stats::fit_line(x, y);
      summary["mean_count_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
    }
    if (config.lattice.geometry == Geometry::TriangularSite && config.lattice.critical)
      summary["nu"] = IncrementDistribution::ssw_cle(6.0).typical_nesting_constant();
    std::ostringstream csv;
    csv << "eps,mean_center_count,mean_h_squared\n";
    for (const auto& row : rows)
      csv << csv_number(row["eps"]) << ',' << csv_number(row["mean_center_count"]) << ','
          << csv_number(row["mean_h_squared"]) << '\n';
    out.write("analysis/summary.json", summary.dump(2) + "\n", "analysis");
    out.write("analysis/mean_counts.csv", csv.str(), "analysis");
    info["eps"] = ne;
  });

  stage("criteria", [&](json& info) {
    CriteriaRunner runner(config.criteria);
    json arr = json::array();
    for (int id : config.tests) {
      say("criterion " + std::to_string(id) + " " + std::string(criterion_name(id)));
      results.push_back(runner.run(id));
      say(format_result_line(results.back()));
      arr.push_back(results.back().to_json());
    }
    out.write("criteria/results.json", arr.dump(2) + "\n", "criteria", false);
    info["run"] = results.size();
  });

  stage("report", [&](json& info) {
    const auto rep = report(config.tests, results);
    out.write("report.json", rep.json.dump(2) + "\n", "report", false);
    out.write("report.txt", rep.text, "report", false);
    info["failed"] = rep.failed;
  });

  m.wall_clock_seconds = seconds_since(start);
  save_manifest(m);
  return m;
}

// ---- report ----

Report report(std::span<const int> selected, std::span<const CriterionResult> results) {
  Report rep;
  json rows = json::array();
  std::ostringstream text;
  int passed = 0;
  std::ostringstream lines;
  for (int id : selected) {
    const CriterionResult* r = nullptr;
    for (const auto& x : results)
      if (x.id == id) r = &x;
    if (!r) {
      ++rep.not_run;
      rows.push_back({{"id", id}, {"name", std::string(criterion_name(id))}, {"status", "not run"}});
      char buf[96];
      std::snprintf(buf, sizeof buf, "NOT RUN %2d %s\n", id, std::string(criterion_name(id)).c_str());
      lines << buf;
      continue;
    }
    (r->passed ? passed : rep.failed) += 1;
    json row = r->to_json();
    row["status"] = r->passed ? "pass" : "fail";
    rows.push_back(std::move(row));
    lines << format_result_line(*r) << '\n';
  }
  text << "criteria: " << selected.size() << " selected, " << passed << " passed, " << rep.failed << " failed, "
       << rep.not_run << " not run\n"
       << lines.str();
  rep.json = {{"criteria", rows},
              {"selected", selected.size()},
              {"passed", passed},
              {"failed", rep.failed},
              {"not_run", rep.not_run}};
  rep.text = text.str();
  return rep;
}

Report report(const RunManifest& manifest) {
  std::vector<int> selected;
  for (const auto& t : manifest.config.value("tests", json::array())) selected.push_back(criterion_id(t.get<std::string>()));
  std::vector<CriterionResult> results;
  const auto* a = manifest.artifact("criteria/results.json");
  const auto path = manifest.output_dir / "criteria/results.json";
  if (a && std::filesystem::exists(path)) {
    const std::string bytes = read_file(path);
    if (sha256_hex(bytes) == a->sha256) {
      try {
        for (const auto& r : json::parse(bytes)) results.push_back(CriterionResult::from_json(r));
      } catch (const json::exception&) {
        results.clear();
      }
    }
  }
  auto rep = report(selected, results);
  rep.json["created"] = manifest.created;
  rep.json["seed"] = manifest.seed;
  json stages = json::array();
  for (const auto& s : manifest.stages) {
    stages.push_back({{"name", s.name}, {"completed", s.completed}, {"error", s.error}});
    if (!s.completed) rep.text += "stage " + s.name + " failed: " + s.error + "\n";
  }
  rep.json["stages"] = stages;
  return rep;
}

}  // namespace cle
