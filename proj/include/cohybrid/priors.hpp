#pragma once

// Feature-pyramid geometry and the anchors/points laid out on it.
//
// Level j (counted from 1) has stride 2^(2+j), so a J-level pyramid covers
// strides 8, 16, 32, ... Grids use ceil division of the image size so every
// pixel belongs to some cell.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cohybrid/error.hpp"
#include "cohybrid/geometry.hpp"

namespace cohybrid {

struct PyramidLevel {
  int index = 1;  // j, starting at 1
  int stride = 8;
  int height = 0;
  int width = 0;

  [[nodiscard]] std::size_t cells() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
};

struct PyramidSpec {
  int image_h = 0;
  int image_w = 0;
  std::vector<PyramidLevel> levels;

  [[nodiscard]] const PyramidLevel& level(int j) const {
    for (const auto& l : levels)
      if (l.index == j) return l;
    throw ValidationError("pyramid has no level " + std::to_string(j));
  }
};

// Largest J accepted; 2^(2+J) must stay far from int overflow.
inline constexpr int kMaxPyramidLevels = 24;

[[nodiscard]] inline int level_stride(int j) {
  if (j < 1 || j > kMaxPyramidLevels)
    throw ValidationError("pyramid level out of range: " + std::to_string(j));
  return 1 << (2 + j);
}

[[nodiscard]] inline PyramidSpec build_pyramid_spec(int image_h, int image_w, int num_levels) {
  if (image_h <= 0 || image_w <= 0)
    throw ValidationError("image dimensions must be positive");
  if (num_levels < 1 || num_levels > kMaxPyramidLevels)
    throw ValidationError("number of pyramid levels must be in [1, " +
                          std::to_string(kMaxPyramidLevels) + "]");
  PyramidSpec spec{image_h, image_w, {}};
  for (int j = 1; j <= num_levels; ++j) {
    const int s = level_stride(j);
    spec.levels.push_back({j, s, (image_h + s - 1) / s, (image_w + s - 1) / s});
  }
  return spec;
}

enum class PriorKind { anchor, point, proposal };

inline const char* to_string(PriorKind k) {
  switch (k) {
    case PriorKind::anchor: return "anchor";
    case PriorKind::point: return "point";
    case PriorKind::proposal: return "proposal";
  }
  return "unknown";
}

struct Prior {
  int level = 1;
  int row = 0;
  int col = 0;
  // Index within the level. For anchors: (row * width + col) * A + a.
  int location = 0;
  int stride = 8;
  Box box;       // zero-size at the point for point priors
  Point center;  // cell center for anchors and points, box center for proposals
};

struct PriorSet {
  PriorKind kind = PriorKind::anchor;
  std::vector<double> scales;
  std::vector<double> ratios;
  std::vector<Prior> entries;  // ordered by level, then location

  [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }

  [[nodiscard]] std::vector<Box> boxes() const {
    std::vector<Box> out;
    out.reserve(entries.size());
    for (const auto& p : entries) out.push_back(p.box);
    return out;
  }
};

[[nodiscard]] inline Point cell_center(int row, int col, int stride) noexcept {
  return {(col + 0.5) * stride, (row + 0.5) * stride};
}

// One anchor per (cell, scale, ratio): area (scale * stride)^2, w / h = ratio.
[[nodiscard]] inline PriorSet generate_anchors(const PyramidSpec& spec,
                                               std::span<const double> scales,
                                               std::span<const double> ratios) {
  if (scales.empty() || ratios.empty())
    throw ValidationError("anchor scales and ratios must be nonempty");
  for (double s : scales)
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("anchor scale must be positive");
  for (double r : ratios)
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("anchor ratio must be positive");

  PriorSet set{PriorKind::anchor, {scales.begin(), scales.end()},
               {ratios.begin(), ratios.end()}, {}};
  const int per_cell = static_cast<int>(scales.size() * ratios.size());
  for (const auto& lvl : spec.levels) {
    for (int r = 0; r < lvl.height; ++r) {
      for (int c = 0; c < lvl.width; ++c) {
        const Point ctr = cell_center(r, c, lvl.stride);
        int a = 0;
        for (double s : scales) {
          const double side = s * lvl.stride;
          for (double ratio : ratios) {
            const double root = std::sqrt(ratio);
            const double w = side * root;
            const double h = side / root;
            set.entries.push_back(
                {lvl.index, r, c, (r * lvl.width + c) * per_cell + a, lvl.stride,
                 Box{ctr.x - 0.5 * w, ctr.y - 0.5 * h, ctr.x + 0.5 * w, ctr.y + 0.5 * h},
                 ctr});
            ++a;
          }
        }
      }
    }
  }
  return set;
}

[[nodiscard]] inline PriorSet generate_anchors(const PyramidSpec& spec, double scale,
                                               std::span<const double> ratios) {
  const double scales[] = {scale};
  return generate_anchors(spec, scales, ratios);
}

[[nodiscard]] inline PriorSet generate_points(const PyramidSpec& spec) {
  PriorSet set{PriorKind::point, {}, {}, {}};
  for (const auto& lvl : spec.levels) {
    for (int r = 0; r < lvl.height; ++r) {
      for (int c = 0; c < lvl.width; ++c) {
        const Point p = cell_center(r, c, lvl.stride);
        set.entries.push_back(
            {lvl.index, r, c, r * lvl.width + c, lvl.stride, Box{p.x, p.y, p.x, p.y}, p});
      }
    }
  }
  return set;
}

struct TaggedBox {
  int level = 1;
  Box box;
};

// Wraps externally supplied boxes (e.g. region proposals) as a prior set.
// Entries are grouped by level; location is the running index within that
// level in input order.
[[nodiscard]] inline PriorSet make_proposal_set(std::span<const TaggedBox> boxes) {
  PriorSet set{PriorKind::proposal, {}, {}, {}};
  std::vector<TaggedBox> sorted(boxes.begin(), boxes.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TaggedBox& a, const TaggedBox& b) { return a.level < b.level; });
  int prev_level = -1;
  int loc = 0;
  for (const auto& tb : sorted) {
    validate(tb.box);
    if (tb.level != prev_level) {
      prev_level = tb.level;
      loc = 0;
    }
    set.entries.push_back({tb.level, 0, loc, loc, level_stride(tb.level), tb.box,
                           Point{tb.box.center_x(), tb.box.center_y()}});
    ++loc;
  }
  return set;
}

// Pyramid level for a region of interest, using the FPN rule with a
// canonical scale of 56 px at the finest level: j = floor(log2(sqrt(area)/56)) + 1,
// clamped to [1, num_levels].
[[nodiscard]] inline int roi_level(const Box& b, int num_levels) {
  const double scale = std::sqrt(std::max(b.area(), 0.0));
  const int j = static_cast<int>(std::floor(std::log2(scale / 56.0 + 1e-6))) + 1;
  return std::clamp(j, 1, std::max(num_levels, 1));
}

// RetinaNet-style anchor layout: octave scales {2^0, 2^(1/3), 2^(2/3)} * 4 and
// ratios {0.5, 1, 2}.
inline std::vector<double> retinanet_scales() {
  return {4.0, 4.0 * std::pow(2.0, 1.0 / 3.0), 4.0 * std::pow(2.0, 2.0 / 3.0)};
}
inline std::vector<double> retinanet_ratios() { return {0.5, 1.0, 2.0}; }

struct ScalarMap {
  int level = 1;
  int height = 0;
  int width = 0;
  std::vector<double> values;  // row-major

  ScalarMap() = default;
  ScalarMap(int lvl, int h, int w, std::vector<double> v)
      : level(lvl), height(h), width(w), values(std::move(v)) {
    if (h <= 0 || w <= 0) throw ValidationError("scalar map dimensions must be positive");
    if (values.size() != static_cast<std::size_t>(h) * static_cast<std::size_t>(w))
      throw ValidationError("scalar map has " + std::to_string(values.size()) +
                            " values for a " + std::to_string(h) + "x" +
                            std::to_string(w) + " grid");
  }

  [[nodiscard]] double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * width + c];
  }
};

// Bilinear resampling with half-pixel centers (align_corners = false).
// Source coordinates falling outside the grid clamp to the border.
[[nodiscard]] inline ScalarMap bilinear_resize(const ScalarMap& m, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw ValidationError("output dimensions must be positive");
  if (m.height <= 0 || m.width <= 0) throw ValidationError("empty scalar map");

  const double sy = static_cast<double>(m.height) / out_h;
  const double sx = static_cast<double>(m.width) / out_w;

  auto axis = [](int dst, double scale, int in) {
    double src = (dst + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    const int hi = std::min(lo + 1, in - 1);
    return std::tuple{lo, hi, src - lo};
  };

  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w);
  for (int y = 0; y < out_h; ++y) {
    const auto [y0, y1, fy] = axis(y, sy, m.height);
    for (int x = 0; x < out_w; ++x) {
      const auto [x0, x1, fx] = axis(x, sx, m.width);
      const double top = std::lerp(m.at(y0, x0), m.at(y0, x1), fx);
      const double bot = std::lerp(m.at(y1, x0), m.at(y1, x1), fx);
      out[static_cast<std::size_t>(y) * out_w + x] = std::lerp(top, bot, fy);
    }
  }
  return {m.level, out_h, out_w, std::move(out)};
}

}  // namespace cohybrid
