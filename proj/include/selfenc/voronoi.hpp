#pragma once

// Region diagrams over a 2-D grid: each pixel is assigned to its nearest
// anchor point (Euclidean) or to the anchor with the highest model output.
// Maps can be rendered to binary PPM or SVG with a fixed palette, so the
// same seed always produces byte-identical images.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfenc/matrix.hpp"
#include "selfenc/network.hpp"
#include "selfenc/self_encoder.hpp"

namespace selfenc {

struct GridSpec {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  std::size_t width = 400, height = 400;

  void validate() const {
    if (width < 2 || height < 2)
      throw std::invalid_argument("GridSpec: need at least 2x2 pixels");
    if (!(x_max > x_min) || !(y_max > y_min))
      throw std::invalid_argument("GridSpec: empty extent");
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) ||
        !std::isfinite(y_max))
      throw std::invalid_argument("GridSpec: non-finite extent");
  }

  // Pixel centres; row 0 is the top of the image.
  double pixel_x(std::size_t ix) const {
    return x_min + (static_cast<double>(ix) + 0.5) * (x_max - x_min) / static_cast<double>(width);
  }
  double pixel_y(std::size_t iy) const {
    return y_max - (static_cast<double>(iy) + 0.5) * (y_max - y_min) / static_cast<double>(height);
  }

  // Bounding box of the points, padded on every side by `pad` times the span
  // of that axis (a zero span pads by `pad` directly).
  static GridSpec around_points(const Matrix& points, double pad = 0.2, std::size_t width = 400,
                                std::size_t height = 400) {
    if (points.cols != 2) throw std::invalid_argument("GridSpec: points must be 2-D");
    GridSpec g;
    g.width = width;
    g.height = height;
    g.x_min = g.x_max = points(0, 0);
    g.y_min = g.y_max = points(0, 1);
    for (std::size_t i = 1; i < points.rows; ++i) {
      g.x_min = std::min(g.x_min, points(i, 0));
      g.x_max = std::max(g.x_max, points(i, 0));
      g.y_min = std::min(g.y_min, points(i, 1));
      g.y_max = std::max(g.y_max, points(i, 1));
    }
    const double x_pad = pad * (g.x_max > g.x_min ? g.x_max - g.x_min : 1.0);
    const double y_pad = pad * (g.y_max > g.y_min ? g.y_max - g.y_min : 1.0);
    g.x_min -= x_pad;
    g.x_max += x_pad;
    g.y_min -= y_pad;
    g.y_max += y_pad;
    g.validate();
    return g;
  }
};

struct RegionMap {
  GridSpec grid;
  Matrix points;                      // anchors, n x 2, drawn as dots
  std::vector<std::uint32_t> region;  // width*height, row-major, row 0 = top
};

// All pixel centres as a (width*height) x 2 matrix, row-major with row 0 at
// the top, matching RegionMap::region.
inline Matrix pixel_centers(const GridSpec& grid) {
  grid.validate();
  Matrix centers(grid.width * grid.height, 2);
  for (std::size_t iy = 0; iy < grid.height; ++iy)
    for (std::size_t ix = 0; ix < grid.width; ++ix) {
      const std::size_t r = iy * grid.width + ix;
      centers(r, 0) = grid.pixel_x(ix);
      centers(r, 1) = grid.pixel_y(iy);
    }
  return centers;
}

// Index of the nearest point for every query row; ties go to the lowest
// index. Query and point dimensions must agree.
inline std::vector<std::uint32_t> assign_euclidean(const Matrix& points, const Matrix& queries) {
  if (points.cols != queries.cols)
    throw std::invalid_argument("assign_euclidean: points are " + shape_str(points) +
                                ", queries are " + shape_str(queries));
  std::vector<std::uint32_t> out(queries.rows);
  for (std::size_t q = 0; q < queries.rows; ++q) {
    std::size_t best = 0;
    double best_d = 0.0;
    for (std::size_t p = 0; p < points.rows; ++p) {
      double d = 0.0;
      for (std::size_t j = 0; j < points.cols; ++j) {
        const double diff = queries(q, j) - points(p, j);
        d += diff * diff;
      }
      if (p == 0 || d < best_d) {
        best = p;
        best_d = d;
      }
    }
    out[q] = static_cast<std::uint32_t>(best);
  }
  return out;
}

// Index of the anchor with the highest model output for every query row;
// ties go to the lowest anchor position.
inline std::vector<std::uint32_t> assign_self_encoder(const SelfEncoderModel& model,
                                                      const Matrix& queries) {
  if (queries.cols != model.network.input_dim())
    throw std::invalid_argument("assign_self_encoder: model expects dimension " +
                                std::to_string(model.network.input_dim()) + ", queries are " +
                                shape_str(queries));
  std::vector<std::uint32_t> out(queries.rows);
  constexpr std::size_t kChunk = 4096;
  for (std::size_t start = 0; start < queries.rows; start += kChunk) {
    const std::size_t stop = std::min(queries.rows, start + kChunk);
    Matrix chunk(stop - start, queries.cols);
    for (std::size_t i = start; i < stop; ++i)
      std::copy(queries.row_ptr(i), queries.row_ptr(i) + queries.cols,
                chunk.row_ptr(i - start));
    const Matrix probs = predict(model.network, chunk);
    for (std::size_t i = 0; i < probs.rows; ++i) {
      std::size_t best = 0;
      for (std::size_t p = 1; p < probs.cols; ++p)
        if (probs(i, p) > probs(i, best)) best = p;
      out[start + i] = static_cast<std::uint32_t>(best);
    }
  }
  return out;
}

inline RegionMap region_map_euclidean(const Matrix& points, const GridSpec& grid) {
  if (points.cols != 2) throw std::invalid_argument("region_map_euclidean: points must be 2-D");
  RegionMap map;
  map.grid = grid;
  map.points = points;
  map.region = assign_euclidean(points, pixel_centers(grid));
  return map;
}

inline RegionMap region_map_self_encoder(const SelfEncoderModel& model, const GridSpec& grid) {
  if (model.anchor_features.cols != 2)
    throw std::invalid_argument("region_map_self_encoder: model anchors must be 2-D");
  RegionMap map;
  map.grid = grid;
  map.points = model.anchor_features;
  map.region = assign_self_encoder(model, pixel_centers(grid));
  return map;
}

// Fraction of pixels assigned to the same region in both maps.
inline double region_agreement(const RegionMap& a, const RegionMap& b) {
  if (a.region.size() != b.region.size() || a.grid.width != b.grid.width)
    throw std::invalid_argument("region_agreement: grids differ");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.region.size(); ++i)
    if (a.region[i] == b.region[i]) ++same;
  return static_cast<double>(same) / static_cast<double>(a.region.size());
}

// ---------------------------------------------------------------------------
// Rendering.

struct Rgb {
  std::uint8_t r, g, b;
};

// Light, well-separated fills; regions past twelve wrap around.
inline constexpr std::array<Rgb, 12> kRegionPalette = {{
    {166, 206, 227},
    {178, 223, 138},
    {251, 154, 153},
    {253, 191, 111},
    {202, 178, 214},
    {255, 255, 153},
    {141, 211, 199},
    {188, 128, 189},
    {217, 217, 217},
    {204, 235, 197},
    {255, 237, 111},
    {190, 186, 218},
}};

inline constexpr Rgb kAnchorColor = {33, 33, 33};

namespace detail {

inline std::vector<Rgb> rasterize(const RegionMap& map) {
  std::vector<Rgb> px(map.region.size());
  for (std::size_t i = 0; i < map.region.size(); ++i)
    px[i] = kRegionPalette[map.region[i] % kRegionPalette.size()];
  // Anchor dots.
  const GridSpec& g = map.grid;
  const double sx = static_cast<double>(g.width) / (g.x_max - g.x_min);
  const double sy = static_cast<double>(g.height) / (g.y_max - g.y_min);
  const long radius = std::max<long>(3, static_cast<long>(std::min(g.width, g.height)) / 100);
  for (std::size_t p = 0; p < map.points.rows; ++p) {
    const double cx = (map.points(p, 0) - g.x_min) * sx - 0.5;
    const double cy = (g.y_max - map.points(p, 1)) * sy - 0.5;
    const long icx = static_cast<long>(std::lround(cx));
    const long icy = static_cast<long>(std::lround(cy));
    for (long dy = -radius; dy <= radius; ++dy)
      for (long dx = -radius; dx <= radius; ++dx) {
        if (dx * dx + dy * dy > radius * radius) continue;
        const long x = icx + dx, y = icy + dy;
        if (x < 0 || y < 0 || x >= static_cast<long>(g.width) || y >= static_cast<long>(g.height))
          continue;
        px[static_cast<std::size_t>(y) * g.width + static_cast<std::size_t>(x)] = kAnchorColor;
      }
  }
  return px;
}

inline std::string hex_color(Rgb c) {
  static const char* digits = "0123456789abcdef";
  std::string s = "#000000";
  s[1] = digits[c.r >> 4];
  s[2] = digits[c.r & 15];
  s[3] = digits[c.g >> 4];
  s[4] = digits[c.g & 15];
  s[5] = digits[c.b >> 4];
  s[6] = digits[c.b & 15];
  return s;
}

}  // namespace detail

inline void render_ppm(const RegionMap& map, std::ostream& os) {
  const std::vector<Rgb> px = detail::rasterize(map);
  os << "P6\n" << map.grid.width << ' ' << map.grid.height << "\n255\n";
  for (const Rgb& c : px) {
    os.put(static_cast<char>(c.r));
    os.put(static_cast<char>(c.g));
    os.put(static_cast<char>(c.b));
  }
}

inline void render_svg(const RegionMap& map, std::ostream& os) {
  const std::vector<Rgb> px = detail::rasterize(map);
  const std::size_t w = map.grid.width, h = map.grid.height;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\" shape-rendering=\"crispEdges\">\n";
  // Run-length encode each row into rects.
  for (std::size_t y = 0; y < h; ++y) {
    std::size_t x = 0;
    while (x < w) {
      const Rgb c = px[y * w + x];
      std::size_t run = 1;
      while (x + run < w) {
        const Rgb n = px[y * w + x + run];
        if (n.r != c.r || n.g != c.g || n.b != c.b) break;
        ++run;
      }
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << run
         << "\" height=\"1\" fill=\"" << detail::hex_color(c) << "\"/>\n";
      x += run;
    }
  }
  os << "</svg>\n";
}

// Writes .ppm or .svg based on the file extension.
inline void save_region_map(const RegionMap& map, const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_region_map: cannot open " + path);
  if (ext == "ppm")
    render_ppm(map, os);
  else if (ext == "svg")
    render_svg(map, os);
  else
    throw std::invalid_argument("save_region_map: unsupported extension '" + ext +
                                "' (use .ppm or .svg)");
  if (!os) throw std::runtime_error("save_region_map: failed writing " + path);
}

}  // namespace selfenc
