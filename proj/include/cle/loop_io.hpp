#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "cle/fields.hpp"
#include "cle/loops.hpp"

namespace cle {

// Loop files. Both formats carry the lattice spec, the seed, the sweep count,
// the boundary note, every loop as its polygon (integer polygon coordinates of
// CellLattice, counterclockwise) and the containment-tree parent array. The
// cell index is rebuilt on reading.
//
// Binary layout, little-endian:
//   "CLELOOP1"
//   u8 geometry, u8 critical, u16 zero, i32 radius, f64 p, f64 q,
//   u64 seed, i32 sweeps, u32 note length, note bytes, u32 loop count,
//   per loop: i32 parent (-1 for none), u32 vertex count, (i32 x, i32 y)...
void write_loops_binary(const LoopConfiguration& loops, std::ostream& out);
LoopConfiguration read_loops_binary(std::istream& in);

// {"format": "cle-loops", "version": 1, "spec": {...}, "seed", "sweeps",
//  "boundary_note", "loops": [{"parent": p, "vertices": [[x, y], ...]}, ...]}
void write_loops_json(const LoopConfiguration& loops, std::ostream& out);
LoopConfiguration read_loops_json(std::istream& in);

// By extension: ".json" is JSON, anything else binary. Writes are atomic.
void save_loops(const LoopConfiguration& loops, const std::filesystem::path& path);
LoopConfiguration load_loops(const std::filesystem::path& path);

// Field grids: CSV with columns z_x,z_y,value, or binary
//   "CLEGRID1", u32 n, f64 half_width, f64 support_radius, f64 eps, i32 step n,
//   u32 mu length, mu name, u64 xi seed, u64 ensemble seed, n*n f64 values.
struct GridHeader {
  FieldGrid grid;
  double eps = 0;
  int step_n = -1;  // -1 for weighted fields
  std::string mu;
  std::uint64_t xi_seed = 0;
  std::uint64_t ensemble_seed = 0;
};
std::string field_csv(const FieldGrid& grid, std::span<const double> values);
std::string field_binary(const GridHeader& header, std::span<const double> values);
std::vector<double> read_field_binary(std::string_view bytes, GridHeader& header);

// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace cle
