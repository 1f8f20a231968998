#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <png.h>

#include <chrono>
#include <cmath>
#include <filesystem>

#include "cle/error.hpp"
#include "cle/harness.hpp"
#include "cle/loop_io.hpp"

using namespace cle;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("cle_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_config(const fs::path& out) {
  return ExperimentConfig::from_json({{"model", {{"radius", 16}}},
                                      {"ensemble", {{"replicas", 10}, {"seed", 7}}},
                                      {"fields", {{"eps", {0.25, 0.125}}, {"mu", "bern"}, {"grid", 16}}},
                                      {"tests", json::array()},
                                      {"output", out.string()}});
}

std::string message_of(const json& j) {
  try {
    ExperimentConfig::from_json(j);
  } catch (const ConfigurationError& e) {
    return e.what();
  }
  return "";
}

struct Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;
  std::array<int, 3> at(int x, int y) const {
    const auto* p = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
    return {p[0], p[1], p[2]};
  }
};

Image decode(const std::string& bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  REQUIRE(png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()));
  img.format = PNG_FORMAT_RGB;
  Image out{static_cast<int>(img.width), static_cast<int>(img.height), {}};
  out.rgb.resize(PNG_IMAGE_SIZE(img));
  REQUIRE(png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr));
  return out;
}

double luminance(std::array<int, 3> c) { return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2]; }

}  // namespace

TEST_CASE("config parsing and validation") {
  const auto cfg = ExperimentConfig::from_json(json::object());
  CHECK(cfg.replicas == 10);
  CHECK(cfg.criteria.seed == cfg.seed);
  const auto again = ExperimentConfig::from_json(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());

  CHECK(message_of({{"ensemble", {{"replicas", 0}}}}).find("ensemble.replicas") != std::string::npos);
  CHECK(message_of({{"fields", {{"eps", {0.1, 0.2}}}}}).find("fields.eps") != std::string::npos);
  CHECK(message_of({{"fields", {{"eps", {0.4}}}}}).find("fields.eps") != std::string::npos);
  CHECK(message_of({{"model", {{"geometry", "hexagonal"}}}}).find("model.geometry") != std::string::npos);
  CHECK(message_of({{"ensemble", {{"replica", 3}}}}).find("replica") != std::string::npos);
  CHECK(message_of({{"tests", {"no_such_test"}}}).find("tests") != std::string::npos);
  CHECK(message_of({{"fields", {{"mu", "unit"}, {"calibration_replicas", 10}}}}).find("calibration_replicas") !=
        std::string::npos);

  const auto sel = ExperimentConfig::from_json({{"tests", {"sobolev", 4}}});
  CHECK(sel.tests == std::vector<int>{10, 4});
  CHECK(ExperimentConfig::from_json({{"tests", "all"}}).tests.size() == static_cast<std::size_t>(kCriterionCount));
}

TEST_CASE("pipeline is reproducible and reuses samples") {
  const auto dir_a = temp_dir("a"), dir_b = temp_dir("b");
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = run_experiment(small_config(dir_a));
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 60.0);
  const auto b = run_experiment(small_config(dir_b));
  REQUIRE(a.completed());
  REQUIRE(b.completed());
  CHECK(a.replicas == 10);

  int data = 0;
  for (const auto& art : a.artifacts) {
    if (!art.data) continue;
    ++data;
    const auto* other = b.artifact(art.path);
    REQUIRE(other != nullptr);
    CHECK_MESSAGE(other->sha256 == art.sha256, art.path);
    CHECK(sha256_hex(read_file(dir_a / art.path)) == art.sha256);
  }
  CHECK(data >= 10 + 4);
  CHECK(a.artifact("samples/member_00009.loops") != nullptr);
  CHECK(a.artifact("topology/nesting_00000.png") != nullptr);

  const auto loaded = RunManifest::load(dir_a);
  CHECK(loaded.to_json() == a.to_json());

  // Remove downstream outputs; the rerun regenerates them from cached samples.
  fs::remove_all(dir_a / "analysis");
  const auto c = run_experiment(small_config(dir_a));
  REQUIRE(c.completed());
  CHECK(c.stages.front().info["reused"] == 10);
  CHECK(c.artifact("analysis/summary.json")->sha256 == a.artifact("analysis/summary.json")->sha256);

  // A corrupted sample is regenerated rather than trusted.
  write_file_atomic(dir_a / "samples/member_00003.loops", "junk");
  const auto d = run_experiment(small_config(dir_a));
  CHECK(d.stages.front().info["reused"] == 9);
  CHECK(d.artifact("samples/member_00003.loops")->sha256 == a.artifact("samples/member_00003.loops")->sha256);

  // A different seed invalidates the cache.
  auto other = small_config(dir_a);
  other.seed = 8;
  other.criteria.seed = 8;
  CHECK(run_experiment(other).stages.front().info["reused"] == 0);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("reports and exit codes") {
  const auto dir = temp_dir("report");
  auto cfg = small_config(dir);
  const auto m = run_experiment(cfg);
  auto r = report(m);
  CHECK(r.failed == 0);
  CHECK(r.exit_code() == 0);

  const std::vector<int> selected{10, 3};
  CriterionResult ok{10, "sobolev", true, "fine", json::object(), 0.1};
  CriterionResult bad{3, "coupling", false, "slope positive", json::object(), 0.2};
  r = report(selected, std::vector<CriterionResult>{ok, bad});
  CHECK(r.failed == 1);
  CHECK(r.exit_code() == 1);
  CHECK(r.text.find("FAIL  3 coupling") != std::string::npos);

  r = report(selected, std::vector<CriterionResult>{ok});
  CHECK(r.not_run == 1);
  CHECK(r.exit_code() == 0);
  CHECK(r.text.find("NOT RUN") != std::string::npos);

  // Selected tests without stored results are listed as not run.
  cfg.tests = {10};
  auto manifest = m;
  manifest.config = cfg.to_json();
  r = report(manifest);
  CHECK(r.not_run == 1);

  // A reduced runner still produces a well-formed result line.
  CriteriaSettings s;
  s.sobolev_fields = 3;
  CriteriaRunner runner(s);
  const auto res = runner.run(10);
  CHECK(res.passed);
  CHECK(format_result_line(res).rfind("PASS 10 sobolev", 0) == 0);
  CHECK_THROWS_AS(criterion_id("nope"), ConfigurationError);
  CHECK(criterion_id("7") == 7);
  CHECK(criterion_id("fields_equal") == 9);
  fs::remove_all(dir);
}

TEST_CASE("rendering") {
  const auto lat = std::make_shared<const CellLattice>(LatticeSpec::percolation(20));
  NestingDepthGrid flat{lat, std::vector<int>(static_cast<std::size_t>(lat->size()), 0), 0};
  const auto blank = decode(render_nesting(flat));
  CHECK(blank.width == blank.height);
  const auto first = blank.at(0, 0);
  bool uniform = true;
  for (int y = 0; y < blank.height; ++y)
    for (int x = 0; x < blank.width; ++x) uniform = uniform && blank.at(x, y) == first;
  CHECK(uniform);

  // Concentric rings of depth 1..5 render as bands darkening towards the centre.
  NestingDepthGrid rings{lat, std::vector<int>(static_cast<std::size_t>(lat->size()), 0), 5};
  for (CellIndex c = 0; c < lat->size(); ++c) {
    if (!lat->in_domain(c)) continue;
    const auto e = lat->position(c);
    rings.depth[static_cast<std::size_t>(c)] = 5 - std::min(4, static_cast<int>(std::hypot(e[0], e[1]) / 4.0));
  }
  for (auto palette : {Palette::Gray, Palette::Heat}) {
    RenderOptions opts;
    opts.palette = palette;
    opts.pixels_per_cell = 3;
    const std::string bytes = render_nesting(rings, opts);
    CHECK(bytes.compare(0, 8, "\x89PNG\r\n\x1a\n") == 0);
    const auto img = decode(bytes);
    const int mid = img.height / 2;
    double prev = -1;
    int bands = 0;
    for (int x = 3; x <= img.width / 2; ++x) {
      const double l = luminance(img.at(x, mid));
      if (prev >= 0 && std::abs(l - prev) > 1e-9) {
        CHECK(l < prev);
        ++bands;
      }
      prev = l;
    }
    CHECK(bands >= 4);
  }
  CHECK_THROWS_AS(palette_from_string("rainbow"), ConfigurationError);
}
