#include "cle/loop_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cle/error.hpp"

namespace cle {
namespace {

constexpr char kLoopMagic[8] = {'C', 'L', 'E', 'L', 'O', 'O', 'P', '1'};
constexpr char kGridMagic[8] = {'C', 'L', 'E', 'G', 'R', 'I', 'D', '1'};

class Writer {
 public:
  template <class T>
  void put(T v) {
    std::uint64_t bits;
    if constexpr (std::is_floating_point_v<T>) {
      bits = std::bit_cast<std::uint64_t>(static_cast<double>(v));
    } else {
      bits = static_cast<std::uint64_t>(v);
    }
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
  void bytes(std::string_view s) { buf_.append(s); }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  template <class T>
  T get() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    if constexpr (std::is_floating_point_v<T>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(bits);
    }
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    const auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError("truncated file");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

LatticeSpec spec_from(Geometry g, int radius, double p, double q, bool critical) {
  LatticeSpec spec;
  spec.geometry = g;
  spec.radius_cells = radius;
  spec.params = {p, q};
  spec.critical = critical;
  try {
    spec.validate();
  } catch (const ConfigurationError& e) {
    throw FormatError(std::string("invalid lattice spec in loop file: ") + e.what());
  }
  return spec;
}

void finish(LoopConfiguration& loops) {
  for (auto& l : loops.loops) {
    if (l.vertices.size() < 3) throw FormatError("loop with fewer than three vertices");
    l.key = *std::min_element(l.vertices.begin(), l.vertices.end());
  }
  loops.lattice = std::make_shared<const CellLattice>(loops.spec);
  rebuild_cell_index(loops);
}

}  // namespace

void write_loops_binary(const LoopConfiguration& loops, std::ostream& out) {
  Writer w;
  w.bytes({kLoopMagic, 8});
  w.put<std::uint8_t>(static_cast<std::uint8_t>(loops.spec.geometry));
  w.put<std::uint8_t>(loops.spec.critical ? 1 : 0);
  w.put<std::uint16_t>(0);
  w.put<std::int32_t>(loops.spec.radius_cells);
  w.put<double>(loops.spec.params.p);
  w.put<double>(loops.spec.params.q);
  w.put<std::uint64_t>(loops.seed);
  w.put<std::int32_t>(loops.sweep_count);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(loops.boundary_note.size()));
  w.bytes(loops.boundary_note);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(loops.loops.size()));
  for (const Loop& l : loops.loops) {
    w.put<std::int32_t>(l.parent);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.vertices.size()));
    for (const PolyPoint p : l.vertices) {
      w.put<std::int32_t>(p.x);
      w.put<std::int32_t>(p.y);
    }
  }
  out.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
}

LoopConfiguration read_loops_binary(std::istream& in) {
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(data);
  if (r.bytes(8) != std::string_view(kLoopMagic, 8)) throw FormatError("not a loop file");
  const auto g = r.get<std::uint8_t>();
  if (g > 1) throw FormatError("unknown geometry in loop file");
  const bool critical = r.get<std::uint8_t>() != 0;
  r.get<std::uint16_t>();
  const auto radius = r.get<std::int32_t>();
  const double p = r.get<double>();
  const double q = r.get<double>();
  LoopConfiguration loops;
  loops.spec = spec_from(static_cast<Geometry>(g), radius, p, q, critical);
  loops.seed = r.get<std::uint64_t>();
  loops.sweep_count = r.get<std::int32_t>();
  loops.boundary_note = std::string(r.bytes(r.get<std::uint32_t>()));
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    Loop l;
    l.parent = r.get<std::int32_t>();
    const auto nv = r.get<std::uint32_t>();
    if (nv > data.size() / 8) throw FormatError("vertex count exceeds file size");
    l.vertices.resize(nv);
    for (auto& v : l.vertices) {
      v.x = r.get<std::int32_t>();
      v.y = r.get<std::int32_t>();
    }
    loops.loops.push_back(std::move(l));
  }
  if (!r.done()) throw FormatError("trailing bytes in loop file");
  finish(loops);
  return loops;
}

void write_loops_json(const LoopConfiguration& loops, std::ostream& out) {
  nlohmann::json j;
  j["format"] = "cle-loops";
  j["version"] = 1;
  j["spec"] = {{"geometry", to_string(loops.spec.geometry)},
               {"radius", loops.spec.radius_cells},
               {"p", loops.spec.params.p},
               {"q", loops.spec.params.q},
               {"critical", loops.spec.critical}};
  j["seed"] = loops.seed;
  j["sweeps"] = loops.sweep_count;
  j["boundary_note"] = loops.boundary_note;
  auto& arr = j["loops"] = nlohmann::json::array();
  for (const Loop& l : loops.loops) {
    nlohmann::json v = nlohmann::json::array();
    for (const PolyPoint p : l.vertices) v.push_back({p.x, p.y});
    arr.push_back({{"parent", l.parent}, {"vertices", std::move(v)}});
  }
  out << j.dump();
}

LoopConfiguration read_loops_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format") != "cle-loops" || j.at("version") != 1) throw FormatError("not a version 1 loop file");
    const auto& s = j.at("spec");
    LoopConfiguration loops;
    loops.spec = spec_from(geometry_from_string(s.at("geometry").get<std::string>()), s.at("radius").get<int>(),
                           s.at("p").get<double>(), s.at("q").get<double>(), s.at("critical").get<bool>());
    loops.seed = j.at("seed").get<std::uint64_t>();
    loops.sweep_count = j.at("sweeps").get<int>();
    loops.boundary_note = j.value("boundary_note", "");
    for (const auto& jl : j.at("loops")) {
      Loop l;
      l.parent = jl.at("parent").get<LoopIndex>();
      for (const auto& v : jl.at("vertices")) l.vertices.push_back({v.at(0).get<std::int32_t>(), v.at(1).get<std::int32_t>()});
      loops.loops.push_back(std::move(l));
    }
    finish(loops);
    return loops;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed loop JSON: ") + e.what());
  } catch (const ConfigurationError& e) {
    throw FormatError(std::string("malformed loop JSON: ") + e.what());
  }
}

void save_loops(const LoopConfiguration& loops, const std::filesystem::path& path) {
  std::ostringstream out;
  if (path.extension() == ".json") {
    write_loops_json(loops, out);
  } else {
    write_loops_binary(loops, out);
  }
  write_file_atomic(path, out.str());
}

LoopConfiguration load_loops(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return path.extension() == ".json" ? read_loops_json(in) : read_loops_binary(in);
}

std::string field_csv(const FieldGrid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw ArgumentError("field size does not match the grid");
  std::ostringstream out;
  out << "z_x,z_y,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point z = grid.point(k);
    out << z.x << ',' << z.y << ',' << values[k] << '\n';
  }
  return out.str();
}

std::string field_binary(const GridHeader& header, std::span<const double> values) {
  if (values.size() != header.grid.size()) throw ArgumentError("field size does not match the grid");
  Writer w;
  w.bytes({kGridMagic, 8});
  w.put<std::uint32_t>(static_cast<std::uint32_t>(header.grid.n));
  w.put<double>(header.grid.half_width);
  w.put<double>(header.grid.support_radius);
  w.put<double>(header.eps);
  w.put<std::int32_t>(header.step_n);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(header.mu.size()));
  w.bytes(header.mu);
  w.put<std::uint64_t>(header.xi_seed);
  w.put<std::uint64_t>(header.ensemble_seed);
  for (double v : values) w.put<double>(v);
  return w.str();
}

std::vector<double> read_field_binary(std::string_view bytes, GridHeader& header) {
  Reader r(bytes);
  if (r.bytes(8) != std::string_view(kGridMagic, 8)) throw FormatError("not a field grid file");
  header.grid.n = static_cast<int>(r.get<std::uint32_t>());
  header.grid.half_width = r.get<double>();
  header.grid.support_radius = r.get<double>();
  header.eps = r.get<double>();
  header.step_n = r.get<std::int32_t>();
  header.mu = std::string(r.bytes(r.get<std::uint32_t>()));
  header.xi_seed = r.get<std::uint64_t>();
  header.ensemble_seed = r.get<std::uint64_t>();
  if (header.grid.n <= 0 || header.grid.size() > bytes.size() / 8) throw FormatError("bad grid size");
  std::vector<double> values(header.grid.size());
  for (auto& v : values) v = r.get<double>();
  if (!r.done()) throw FormatError("trailing bytes in field grid file");
  return values;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace cle
