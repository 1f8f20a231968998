#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "cle/error.hpp"
#include "cle/harness.hpp"

namespace cle {
namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kBackground{250, 250, 250};

Rgb lerp(Rgb a, Rgb b, double t) {
  Rgb c;
  for (int i = 0; i < 3; ++i) c[i] = static_cast<std::uint8_t>(std::lround(a[i] + (b[i] - a[i]) * t));
  return c;
}

// t in (0, 1]. Both ramps are strictly monotone in luminance.
Rgb colour(Palette p, double t) {
  if (p == Palette::Gray) return lerp({215, 215, 215}, {20, 20, 20}, t);
  static constexpr std::array<Rgb, 4> stops{Rgb{255, 236, 160}, Rgb{245, 160, 60}, Rgb{190, 50, 50}, Rgb{50, 20, 70}};
  const double s = t * (stops.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(s), stops.size() - 2);
  return lerp(stops[i], stops[i + 1], s - static_cast<double>(i));
}

void write_png(std::string& out, int w, int h, const std::vector<std::uint8_t>& rgb) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encoding failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        static_cast<std::string*>(png_get_io_ptr(p))->append(reinterpret_cast<const char*>(data), n);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y)
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * w * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Palette palette_from_string(std::string_view name) {
  if (name == "gray" || name == "grey") return Palette::Gray;
  if (name == "heat") return Palette::Heat;
  throw ConfigurationError("unknown palette '" + std::string(name) + "'");
}

std::string render_nesting(const NestingDepthGrid& depth, const RenderOptions& options, const LoopConfiguration* loops) {
  if (!depth.lattice) throw ArgumentError("depth grid has no lattice");
  if (options.pixels_per_cell < 1) throw ArgumentError("pixels_per_cell must be at least 1");
  const CellLattice& lat = *depth.lattice;
  const double extent = lat.radius() + 1.0;
  const double ppc = options.pixels_per_cell;
  const int size = static_cast<int>(std::ceil(2 * extent * ppc));
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(size) * size * 3);

  auto to_lattice = [&](double px) { return (px + 0.5) / ppc - extent; };
  for (int py = 0; py < size; ++py) {
    const double y = -to_lattice(py);  // image rows run downwards
    for (int px = 0; px < size; ++px) {
      const CellIndex c = lat.nearest_cell(to_lattice(px), y);
      const int d = lat.in_domain(c) ? depth.at(c) : 0;
      const Rgb col = d == 0 ? kBackground : colour(options.palette, static_cast<double>(d) / depth.max_depth);
      std::copy(col.begin(), col.end(), rgb.begin() + (static_cast<std::ptrdiff_t>(py) * size + px) * 3);
    }
  }

  if (options.overlay_chain && loops && depth.max_depth > 0) {
    const auto deepest = std::max_element(depth.depth.begin(), depth.depth.end()) - depth.depth.begin();
    const Rgb ink = options.palette == Palette::Gray ? Rgb{200, 30, 30} : Rgb{20, 90, 220};
    auto plot = [&](double x, double y) {
      const auto px = static_cast<long>(std::floor((x + extent) * ppc));
      const auto py = static_cast<long>(std::floor((extent - y) * ppc));
      if (px < 0 || py < 0 || px >= size || py >= size) return;
      std::copy(ink.begin(), ink.end(), rgb.begin() + (py * size + px) * 3);
    };
    for (LoopIndex l : loops->chain(loops->loop_of_cell(static_cast<CellIndex>(deepest)))) {
      const auto& v = loops->loops[static_cast<std::size_t>(l)].vertices;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto a = lat.polygon_to_euclid(v[i]);
        const auto b = lat.polygon_to_euclid(v[(i + 1) % v.size()]);
        const int steps = std::max(1, static_cast<int>(std::ceil(std::hypot(b[0] - a[0], b[1] - a[1]) * ppc * 2)));
        for (int s = 0; s <= steps; ++s) {
          const double t = static_cast<double>(s) / steps;
          plot(a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t);
        }
      }
    }
  }

  std::string out;
  write_png(out, size, size, rgb);
  return out;
}

}  // namespace cle
