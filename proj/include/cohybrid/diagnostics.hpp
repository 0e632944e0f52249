#pragma once

// Training diagnostics: the discriminability score map built from per-level
// feature norms, foreground/background activation ratios (IoF / IoB) and
// their threshold sweep, and the epoch-to-epoch instability of one-to-one
// matching.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cohybrid/error.hpp"
#include "cohybrid/geometry.hpp"
#include "cohybrid/matcher.hpp"
#include "cohybrid/priors.hpp"

namespace cohybrid {

struct ScoreMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // row-major, in [0, 1]

  [[nodiscard]] double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * width + c];
  }
};

struct ForegroundMask {
  int height = 0;
  int width = 0;
  std::vector<unsigned char> values;  // 1 = foreground
};

// Mean over levels of each level's map divided by its own maximum and
// resized to the image. A level whose maximum is 0 contributes 0.
[[nodiscard]] inline ScoreMap discriminability_map(std::span<const ScalarMap> levels,
                                                   int image_h, int image_w) {
  if (levels.empty()) throw ValidationError("discriminability map needs at least one level");
  if (image_h <= 0 || image_w <= 0) throw ValidationError("image dimensions must be positive");

  ScoreMap out{image_h, image_w,
               std::vector<double>(static_cast<std::size_t>(image_h) * image_w, 0.0)};
  for (const auto& lvl : levels) {
    for (double v : lvl.values)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError("feature norm map for level " + std::to_string(lvl.level) +
                              " has a negative or non-finite value");
    const double mx = *std::max_element(lvl.values.begin(), lvl.values.end());
    if (!(mx > 0.0)) continue;
    ScalarMap normalized = lvl;
    for (double& v : normalized.values) v /= mx;
    const ScalarMap resized = bilinear_resize(normalized, image_h, image_w);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += resized.values[k];
  }
  const double inv = 1.0 / static_cast<double>(levels.size());
  for (double& v : out.values) v = std::clamp(v * inv, 0.0, 1.0);
  return out;
}

// Pixel (r, c) is foreground when its center (c + 0.5, r + 0.5) lies in
// [x1, x2) x [y1, y2) of any box.
[[nodiscard]] inline ForegroundMask foreground_mask(std::span<const Box> boxes, int image_h,
                                                    int image_w) {
  if (image_h <= 0 || image_w <= 0) throw ValidationError("image dimensions must be positive");
  ForegroundMask m{image_h, image_w,
                   std::vector<unsigned char>(static_cast<std::size_t>(image_h) * image_w, 0)};
  for (const auto& b : boxes) {
    validate(b);
    for (int r = 0; r < image_h; ++r) {
      const double y = r + 0.5;
      if (y < b.y1 || y >= b.y2) continue;
      for (int c = 0; c < image_w; ++c) {
        const double x = c + 0.5;
        if (x >= b.x1 && x < b.x2) m.values[static_cast<std::size_t>(r) * image_w + c] = 1;
      }
    }
  }
  return m;
}

struct CurvePoint {
  double threshold = 0.0;
  double iof = 0.0;
  double iob = 0.0;
};

// Both ratios use the activation D > S. A ratio over an empty region is 0.
[[nodiscard]] inline CurvePoint iof_iob_at_threshold(const ScoreMap& d, const ForegroundMask& fg,
                                                     double threshold) {
  if (d.height != fg.height || d.width != fg.width || d.values.size() != fg.values.size())
    throw ValidationError("score map and foreground mask shapes differ");
  std::size_t fg_total = 0, bg_total = 0, fg_hit = 0, bg_hit = 0;
  for (std::size_t k = 0; k < d.values.size(); ++k) {
    const bool on = d.values[k] > threshold;
    if (fg.values[k]) {
      ++fg_total;
      fg_hit += on;
    } else {
      ++bg_total;
      bg_hit += on;
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  return {threshold, ratio(fg_hit, fg_total), ratio(bg_hit, bg_total)};
}

inline constexpr int kDefaultThresholdCount = 256;

// `count` evenly spaced thresholds covering [0, 1].
[[nodiscard]] inline std::vector<double> uniform_thresholds(int count = kDefaultThresholdCount) {
  if (count < 2) throw ConfigError("threshold sweep needs at least two points");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = static_cast<double>(k) / (count - 1);
  return out;
}

[[nodiscard]] inline std::vector<CurvePoint> iof_iob_curve(const ScoreMap& d,
                                                           const ForegroundMask& fg,
                                                           std::span<const double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw ValidationError("thresholds must be sorted ascending");
  std::vector<CurvePoint> out;
  out.reserve(thresholds.size());
  for (double s : thresholds) out.push_back(iof_iob_at_threshold(d, fg, s));
  return out;
}

// Pointwise mean of per-image curves sharing the same thresholds.
[[nodiscard]] inline std::vector<CurvePoint> mean_curve(
    std::span<const std::vector<CurvePoint>> curves) {
  if (curves.empty()) return {};
  std::vector<CurvePoint> out = curves.front();
  for (auto& p : out) p.iof = p.iob = 0.0;
  for (const auto& c : curves) {
    if (c.size() != out.size()) throw ValidationError("curves have different threshold counts");
    for (std::size_t k = 0; k < c.size(); ++k) {
      out[k].iof += c[k].iof;
      out[k].iob += c[k].iob;
    }
  }
  for (auto& p : out) {
    p.iof /= static_cast<double>(curves.size());
    p.iob /= static_cast<double>(curves.size());
  }
  return out;
}

struct RegionSizes {
  std::size_t foreground = 0;
  std::size_t background = 0;
};

[[nodiscard]] inline RegionSizes region_sizes(const ForegroundMask& fg) {
  RegionSizes r;
  for (auto v : fg.values) (v ? r.foreground : r.background) += 1;
  return r;
}

// Like mean_curve, but IoF is averaged only over images with foreground
// pixels and IoB only over images with background pixels.
[[nodiscard]] inline std::vector<CurvePoint> mean_curve(
    std::span<const std::vector<CurvePoint>> curves, std::span<const RegionSizes> regions) {
  if (curves.size() != regions.size()) throw ValidationError("one region size per curve required");
  if (curves.empty()) return {};
  std::vector<CurvePoint> out = curves.front();
  for (auto& p : out) p.iof = p.iob = 0.0;
  std::size_t n_fg = 0, n_bg = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    if (c.size() != out.size()) throw ValidationError("curves have different threshold counts");
    n_fg += regions[i].foreground > 0;
    n_bg += regions[i].background > 0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (regions[i].foreground > 0) out[k].iof += c[k].iof;
      if (regions[i].background > 0) out[k].iob += c[k].iob;
    }
  }
  for (auto& p : out) {
    if (n_fg > 0) p.iof /= static_cast<double>(n_fg);
    if (n_bg > 0) p.iob /= static_cast<double>(n_bg);
  }
  return out;
}

// ---------------------------------------------------------------- instability

// gt index -> matched query (nullopt when unmatched) for one image.
using GtQueryMap = std::vector<std::optional<int>>;

[[nodiscard]] inline GtQueryMap gt_to_query(const MatchResult& m, std::size_t num_gts) {
  GtQueryMap out(num_gts);
  for (const auto& p : m.pairs) {
    if (p.gt < 0 || static_cast<std::size_t>(p.gt) >= num_gts)
      throw ValidationError("match refers to gt " + std::to_string(p.gt) + " of " +
                            std::to_string(num_gts));
    out[static_cast<std::size_t>(p.gt)] = p.query;
  }
  return out;
}

// Fraction of gts whose matched query differs between two epochs, averaged
// over images that have at least one gt.
[[nodiscard]] inline double instability(std::span<const GtQueryMap> before,
                                        std::span<const GtQueryMap> after) {
  if (before.size() != after.size())
    throw ValidationError("epochs cover different numbers of images");
  double sum = 0.0;
  std::size_t images = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].size() != after[i].size())
      throw ValidationError("image " + std::to_string(i) + " has different gt sets across epochs");
    if (before[i].empty()) continue;
    std::size_t changed = 0;
    for (std::size_t g = 0; g < before[i].size(); ++g) changed += before[i][g] != after[i][g];
    sum += static_cast<double>(changed) / static_cast<double>(before[i].size());
    ++images;
  }
  return images == 0 ? 0.0 : sum / static_cast<double>(images);
}

struct InstabilityReport {
  std::vector<double> per_pair;  // entry e compares epoch e with e + 1
  double mean = 0.0;
};

// epochs[e][image] is the gt -> query map of that image at epoch e.
[[nodiscard]] inline InstabilityReport matching_instability(
    std::span<const std::vector<GtQueryMap>> epochs) {
  InstabilityReport r;
  for (std::size_t e = 0; e + 1 < epochs.size(); ++e)
    r.per_pair.push_back(instability(epochs[e], epochs[e + 1]));
  if (!r.per_pair.empty()) {
    double s = 0.0;
    for (double x : r.per_pair) s += x;
    r.mean = s / static_cast<double>(r.per_pair.size());
  }
  return r;
}

}  // namespace cohybrid
