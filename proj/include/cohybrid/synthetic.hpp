#pragma once

// Reproducible synthetic scene corpora for demos and end-to-end checks.

#include <cstdint>
#include <random>

#include "cohybrid/pipeline.hpp"
#include "cohybrid/scene_io.hpp"

namespace cohybrid {

struct SyntheticOptions {
  int num_images = 100;
  int num_classes = 4;
  int min_side = 96;
  int max_side = 160;
  int max_objects = 4;
  int queries = 20;
  int levels = 3;  // feature-norm levels emitted per image
  bool with_proposals = false;
};

[[nodiscard]] inline SceneFile make_synthetic_scene(const SyntheticOptions& opt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); };
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };

  SceneFile scene;
  scene.num_classes = opt.num_classes;
  for (int i = 0; i < opt.num_images; ++i) {
    SceneImage im;
    im.id = i;
    im.width = pick(opt.min_side, opt.max_side);
    im.height = pick(opt.min_side, opt.max_side);
    const int n_obj = pick(0, opt.max_objects);
    for (int k = 0; k < n_obj; ++k) {
      const double w = uni(16.0, 0.6 * im.width);
      const double h = uni(16.0, 0.6 * im.height);
      const double x1 = uni(0.0, im.width - w);
      const double y1 = uni(0.0, im.height - h);
      im.objects.push_back({pick(0, opt.num_classes - 1), Box{x1, y1, x1 + w, y1 + h}});
    }

    std::vector<QueryPrediction> preds;
    for (int q = 0; q < opt.queries; ++q) {
      QueryPrediction p;
      for (int c = 0; c < opt.num_classes; ++c) p.class_scores.push_back(uni(0.0, 0.3));
      if (!im.objects.empty() && q % 3 == 0) {
        const auto& o = im.objects[static_cast<std::size_t>(q / 3) % im.objects.size()];
        const CenterBox c = to_center(normalize_box(o.box, im.width, im.height));
        p.box = {std::clamp(c.cx + uni(-0.05, 0.05), 0.0, 1.0), std::clamp(c.cy + uni(-0.05, 0.05), 0.0, 1.0),
                 c.w * uni(0.8, 1.2), c.h * uni(0.8, 1.2)};
        p.class_scores[static_cast<std::size_t>(o.label)] = uni(0.4, 0.95);
      } else {
        p.box = {uni(0.1, 0.9), uni(0.1, 0.9), uni(0.05, 0.5), uni(0.05, 0.5)};
      }
      preds.push_back(std::move(p));
    }
    im.predictions = std::move(preds);

    if (opt.with_proposals)
      im.proposals = synthetic_proposals(im, static_cast<std::size_t>(i), seed, 32, 8);

    for (int j = 1; j <= opt.levels; ++j) {
      const int stride = level_stride(j);
      const int h = (im.height + stride - 1) / stride;
      const int w = (im.width + stride - 1) / stride;
      std::vector<double> vals;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          const Point p = cell_center(r, c, stride);
          bool fg = false;
          for (const auto& o : im.objects) fg = fg || (p.x >= o.box.x1 && p.x < o.box.x2 && p.y >= o.box.y1 && p.y < o.box.y2);
          vals.push_back(fg ? uni(0.5, 1.0) : uni(0.0, 0.6));
        }
      }
      im.feature_norms.emplace_back(j, h, w, std::move(vals));
    }
    scene.images.push_back(std::move(im));
  }
  return scene;
}

}  // namespace cohybrid
