#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "cle/ensemble.hpp"
#include "cle/error.hpp"
#include "cle/loop_io.hpp"

using namespace cle;

namespace {

LoopConfiguration sample() {
  EnsembleSpec ens;
  ens.lattice = LatticeSpec::percolation(16);
  ens.replicas = 1;
  ens.seed = 21;
  return sample_member(ens, 0);
}

void check_same(const LoopConfiguration& a, const LoopConfiguration& b) {
  CHECK(a.spec == b.spec);
  CHECK(a.seed == b.seed);
  CHECK(a.sweep_count == b.sweep_count);
  CHECK(a.boundary_note == b.boundary_note);
  REQUIRE(a.loops.size() == b.loops.size());
  for (std::size_t i = 0; i < a.loops.size(); ++i) {
    CHECK(a.loops[i].parent == b.loops[i].parent);
    CHECK(a.loops[i].depth == b.loops[i].depth);
    CHECK(a.loops[i].key == b.loops[i].key);
    CHECK(a.loops[i].vertices == b.loops[i].vertices);
  }
  CHECK(a.cell_loop == b.cell_loop);
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "cle_loop_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("loop files round-trip") {
  const auto loops = sample();
  REQUIRE(loops.loops.size() > 3);

  std::stringstream bin;
  write_loops_binary(loops, bin);
  check_same(loops, read_loops_binary(bin));

  std::stringstream js;
  write_loops_json(loops, js);
  check_same(loops, read_loops_json(js));

  const auto dir = temp_dir();
  save_loops(loops, dir / "a.loops");
  save_loops(loops, dir / "a.json");
  check_same(loops, load_loops(dir / "a.loops"));
  check_same(loops, load_loops(dir / "a.json"));
  CHECK(!std::filesystem::exists(dir / "a.loops.tmp"));
}

TEST_CASE("malformed loop files") {
  const auto loops = sample();
  std::stringstream bin;
  write_loops_binary(loops, bin);
  const std::string bytes = bin.str();

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_loops_binary(truncated), FormatError);
  std::istringstream junk("CLELOOPX" + bytes.substr(8));
  CHECK_THROWS_AS(read_loops_binary(junk), FormatError);
  std::istringstream trailing(bytes + "x");
  CHECK_THROWS_AS(read_loops_binary(trailing), FormatError);

  auto cyclic = loops;
  cyclic.loops[0].parent = 1;
  cyclic.loops[1].parent = 0;
  std::stringstream cyc;
  write_loops_binary(cyclic, cyc);
  CHECK_THROWS_AS(read_loops_binary(cyc), FormatError);

  std::istringstream bad_json(R"({"format": "cle-loops", "version": 1})");
  CHECK_THROWS_AS(read_loops_json(bad_json), FormatError);
  std::istringstream not_json("{");
  CHECK_THROWS_AS(read_loops_json(not_json), FormatError);
}

TEST_CASE("field grid files") {
  GridHeader h;
  h.grid = FieldGrid{4, 0.5, 0.4};
  h.eps = 0.125;
  h.mu = "bern";
  h.xi_seed = 77;
  h.ensemble_seed = 5;
  std::vector<double> v(h.grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 0.1 * static_cast<double>(k) - 0.3;
  const std::string bytes = field_binary(h, v);
  GridHeader back;
  CHECK(read_field_binary(bytes, back) == v);
  CHECK(back.grid == h.grid);
  CHECK(back.eps == h.eps);
  CHECK(back.step_n == -1);
  CHECK(back.mu == "bern");
  CHECK(back.xi_seed == 77);
  CHECK(back.ensemble_seed == 5);
  CHECK_THROWS_AS(read_field_binary(bytes.substr(0, bytes.size() - 1), back), FormatError);

  const std::string csv = field_csv(h.grid, v);
  CHECK(csv.rfind("z_x,z_y,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
  CHECK_THROWS_AS(field_csv(FieldGrid{3, 0.5}, v), ArgumentError);
}
