#pragma once

// One-to-many label assignment: ATSS, FCOS center sampling and max-IoU
// (RetinaNet anchors / Faster-RCNN proposals). Each assigner partitions a
// prior set into positive, negative and ignored samples and attaches the
// regression targets and positive boxes of every positive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cohybrid/error.hpp"
#include "cohybrid/geometry.hpp"
#include "cohybrid/priors.hpp"

namespace cohybrid {

struct GtObject {
  int label = 0;
  Box box;
};

struct GroundTruth {
  std::vector<GtObject> objects;
  int image_w = 0;
  int image_h = 0;
  int num_classes = 0;  // 0 disables the label range check

  [[nodiscard]] bool empty() const noexcept { return objects.empty(); }
};

// Clamps every box into the image and checks labels. Boxes that collapse to
// zero width or height after clamping are rejected: they admit no regression
// target.
[[nodiscard]] inline GroundTruth sanitize(GroundTruth gt) {
  if (gt.image_w <= 0 || gt.image_h <= 0)
    throw ValidationError("ground truth needs positive image dimensions");
  for (std::size_t i = 0; i < gt.objects.size(); ++i) {
    auto& o = gt.objects[i];
    validate(o.box);
    if (o.label < 0 || (gt.num_classes > 0 && o.label >= gt.num_classes))
      throw ValidationError("object " + std::to_string(i) + " label " + std::to_string(o.label) +
                            " out of range");
    o.box = clamp_to(o.box, gt.image_w, gt.image_h);
    if (!(o.box.width() > 0.0 && o.box.height() > 0.0))
      throw ValidationError("object " + std::to_string(i) + " box " + to_string(o.box) +
                            " is empty inside the image");
  }
  return gt;
}

struct SampleRef {
  int level = 1;
  int location = 0;
  int index = 0;  // position in the prior set

  friend bool operator==(const SampleRef&, const SampleRef&) = default;
};

using RegressionTarget = std::variant<DeltaTarget, LtrbTarget>;

struct PositiveSample {
  SampleRef ref;
  int gt = 0;
  int label = 0;
  Box gt_box;
  RegressionTarget target;
  std::optional<double> centerness;
};

struct Assignment {
  PriorKind prior_kind = PriorKind::anchor;
  std::size_t num_priors = 0;
  std::vector<PositiveSample> pos;  // ascending prior index
  std::vector<SampleRef> neg;       // ascending prior index
  std::vector<SampleRef> ignored;   // ascending prior index
  std::vector<Box> pos_boxes;       // parallel to pos
};

namespace detail {

enum class Label : std::int8_t { negative, ignored, positive };

inline SampleRef ref_of(const PriorSet& priors, std::size_t i) {
  const auto& p = priors.entries[i];
  return {p.level, p.location, static_cast<int>(i)};
}

inline Assignment all_negative(const PriorSet& priors) {
  Assignment a;
  a.prior_kind = priors.kind;
  a.num_priors = priors.size();
  a.neg.reserve(priors.size());
  for (std::size_t i = 0; i < priors.size(); ++i) a.neg.push_back(ref_of(priors, i));
  return a;
}

inline std::vector<int> level_list(const PriorSet& priors) {
  std::vector<int> levels;
  for (const auto& p : priors.entries)
    if (std::find(levels.begin(), levels.end(), p.level) == levels.end())
      levels.push_back(p.level);
  std::sort(levels.begin(), levels.end());
  return levels;
}

}  // namespace detail

// ---------------------------------------------------------------- ATSS

struct AtssOptions {
  int topk = 9;
};

// IoUs within this of the threshold count as meeting it. Equal candidate IoUs
// give a mean and deviation that are off by a few ulps otherwise.
inline constexpr double kAtssThresholdSlack = 1e-12;

// Sample standard deviation (n - 1 denominator), 0 for a single value.
[[nodiscard]] inline double sample_stddev(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

[[nodiscard]] inline Assignment assign_atss(const PriorSet& priors, const GroundTruth& gt_in,
                                            const AtssOptions& opt = {}) {
  if (opt.topk < 1) throw ConfigError("ATSS topk must be >= 1");
  if (priors.kind != PriorKind::anchor) throw ConfigError("ATSS needs anchor priors");
  if (gt_in.empty()) return detail::all_negative(priors);
  const GroundTruth gt = sanitize(gt_in);

  const std::size_t n = priors.size();
  const auto levels = detail::level_list(priors);

  // Best claim per prior: (iou, gt index); ties go to the lower gt index.
  std::vector<double> best_iou(n, -1.0);
  std::vector<int> best_gt(n, -1);

  for (std::size_t g = 0; g < gt.objects.size(); ++g) {
    const Box& gbox = gt.objects[g].box;
    const double gcx = gbox.center_x();
    const double gcy = gbox.center_y();

    std::vector<std::size_t> candidates;
    for (int lvl : levels) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if (priors.entries[i].level == lvl) idx.push_back(i);
      auto dist2 = [&](std::size_t i) {
        const double dx = priors.entries[i].center.x - gcx;
        const double dy = priors.entries[i].center.y - gcy;
        return dx * dx + dy * dy;
      };
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(opt.topk), idx.size());
      std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                        [&](std::size_t a, std::size_t b) {
                          const double da = dist2(a);
                          const double db = dist2(b);
                          if (da != db) return da < db;
                          return priors.entries[a].location < priors.entries[b].location;
                        });
      candidates.insert(candidates.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    }
    if (candidates.empty()) continue;

    std::vector<double> ious;
    ious.reserve(candidates.size());
    for (std::size_t i : candidates) ious.push_back(iou(priors.entries[i].box, gbox));
    const double mean =
        std::accumulate(ious.begin(), ious.end(), 0.0) / static_cast<double>(ious.size());
    const double threshold = mean + sample_stddev(ious, mean);

    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const std::size_t i = candidates[c];
      if (ious[c] < threshold - kAtssThresholdSlack) continue;
      if (!strictly_inside(priors.entries[i].center, gbox)) continue;
      if (ious[c] > best_iou[i]) {
        best_iou[i] = ious[c];
        best_gt[i] = static_cast<int>(g);
      }
    }
  }

  Assignment out;
  out.prior_kind = priors.kind;
  out.num_priors = n;
  for (std::size_t i = 0; i < n; ++i) {
    const SampleRef ref = detail::ref_of(priors, i);
    if (best_gt[i] < 0) {
      out.neg.push_back(ref);
      continue;
    }
    const auto& obj = gt.objects[static_cast<std::size_t>(best_gt[i])];
    const Prior& p = priors.entries[i];
    const LtrbTarget lt = encode_ltrb(p.center, obj.box);
    out.pos.push_back({ref, best_gt[i], obj.label, obj.box, encode_deltas(p.box, obj.box),
                       lt.centerness});
    out.pos_boxes.push_back(p.box);
  }
  return out;
}

// ---------------------------------------------------------------- FCOS

struct RegressRange {
  double lo = 0.0;  // exclusive
  double hi = std::numeric_limits<double>::infinity();  // inclusive
};

struct FcosOptions {
  double center_radius = 1.5;
  // Empty: derive (0,64], (64,128], (128,256], ... with the top level open.
  std::vector<RegressRange> regress_ranges;
};

[[nodiscard]] inline RegressRange default_regress_range(int level, int num_levels) {
  RegressRange r;
  r.lo = level <= 1 ? 0.0 : 64.0 * std::ldexp(1.0, level - 2);
  r.hi = level >= num_levels ? std::numeric_limits<double>::infinity()
                             : 64.0 * std::ldexp(1.0, level - 1);
  return r;
}

// Side of the positive box emitted for an FCOS point at level j: 8 * 2^(2+j).
[[nodiscard]] inline double fcos_pos_box_side(int level) { return 8.0 * std::ldexp(1.0, 2 + level); }

[[nodiscard]] inline Assignment assign_fcos(const PriorSet& priors, const GroundTruth& gt_in,
                                            const FcosOptions& opt = {}) {
  if (!(opt.center_radius > 0.0)) throw ConfigError("FCOS center radius must be positive");
  if (priors.kind != PriorKind::point) throw ConfigError("FCOS needs point priors");
  if (gt_in.empty()) return detail::all_negative(priors);
  const GroundTruth gt = sanitize(gt_in);

  const auto levels = detail::level_list(priors);
  const int num_levels = levels.empty() ? 1 : levels.back();
  auto range_for = [&](int level) {
    if (opt.regress_ranges.empty()) return default_regress_range(level, num_levels);
    if (level < 1 || static_cast<std::size_t>(level) > opt.regress_ranges.size())
      throw ConfigError("no regress range configured for level " + std::to_string(level));
    return opt.regress_ranges[static_cast<std::size_t>(level - 1)];
  };

  Assignment out;
  out.prior_kind = priors.kind;
  out.num_priors = priors.size();
  for (std::size_t i = 0; i < priors.size(); ++i) {
    const Prior& p = priors.entries[i];
    const RegressRange range = range_for(p.level);
    const double radius = opt.center_radius * p.stride;

    int best = -1;
    double best_area = 0.0;
    for (std::size_t g = 0; g < gt.objects.size(); ++g) {
      const Box& b = gt.objects[g].box;
      const Box center{std::max(b.center_x() - radius, b.x1), std::max(b.center_y() - radius, b.y1),
                       std::min(b.center_x() + radius, b.x2), std::min(b.center_y() + radius, b.y2)};
      if (!strictly_inside(p.center, center)) continue;
      const double reach = std::max({p.center.x - b.x1, p.center.y - b.y1, b.x2 - p.center.x,
                                     b.y2 - p.center.y});
      if (!(reach > range.lo && reach <= range.hi)) continue;
      if (best < 0 || b.area() < best_area) {
        best = static_cast<int>(g);
        best_area = b.area();
      }
    }

    const SampleRef ref = detail::ref_of(priors, i);
    if (best < 0) {
      out.neg.push_back(ref);
      continue;
    }
    const auto& obj = gt.objects[static_cast<std::size_t>(best)];
    const LtrbTarget lt = encode_ltrb(p.center, obj.box);
    out.pos.push_back({ref, best, obj.label, obj.box, lt, lt.centerness});
    const double half = 0.5 * fcos_pos_box_side(p.level);
    out.pos_boxes.push_back(
        {p.center.x - half, p.center.y - half, p.center.x + half, p.center.y + half});
  }
  return out;
}

// ---------------------------------------------------------------- max-IoU

struct MaxIouOptions {
  double pos_thr = 0.5;
  double neg_thr = 0.4;
  // Force each gt's single best-overlapping prior positive.
  bool rescue_low_quality = true;
};

inline MaxIouOptions retinanet_max_iou() { return {0.5, 0.4, true}; }
inline MaxIouOptions faster_rcnn_max_iou() { return {0.5, 0.5, true}; }

[[nodiscard]] inline Assignment assign_max_iou(const PriorSet& priors, const GroundTruth& gt_in,
                                               const MaxIouOptions& opt = {}) {
  if (!(opt.pos_thr >= opt.neg_thr)) throw ConfigError("max-IoU needs pos_thr >= neg_thr");
  if (gt_in.empty()) return detail::all_negative(priors);
  const GroundTruth gt = sanitize(gt_in);

  const std::size_t n = priors.size();
  const std::size_t m = gt.objects.size();
  std::vector<double> overlaps(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t g = 0; g < m; ++g)
      overlaps[i * m + g] = iou(priors.entries[i].box, gt.objects[g].box);

  std::vector<detail::Label> label(n, detail::Label::ignored);
  std::vector<int> owner(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    int arg = 0;
    double best = overlaps[i * m];
    for (std::size_t g = 1; g < m; ++g) {
      if (overlaps[i * m + g] > best) {
        best = overlaps[i * m + g];
        arg = static_cast<int>(g);
      }
    }
    if (best > opt.pos_thr) {
      label[i] = detail::Label::positive;
      owner[i] = arg;
    } else if (best < opt.neg_thr) {
      label[i] = detail::Label::negative;
    }
  }

  if (opt.rescue_low_quality) {
    // Later gts overwrite earlier ones on a shared best prior.
    for (std::size_t g = 0; g < m; ++g) {
      int arg = -1;
      double best = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (overlaps[i * m + g] > best) {
          best = overlaps[i * m + g];
          arg = static_cast<int>(i);
        }
      }
      if (arg >= 0) {
        label[static_cast<std::size_t>(arg)] = detail::Label::positive;
        owner[static_cast<std::size_t>(arg)] = static_cast<int>(g);
      }
    }
  }

  Assignment out;
  out.prior_kind = priors.kind;
  out.num_priors = n;
  for (std::size_t i = 0; i < n; ++i) {
    const SampleRef ref = detail::ref_of(priors, i);
    switch (label[i]) {
      case detail::Label::negative: out.neg.push_back(ref); break;
      case detail::Label::ignored: out.ignored.push_back(ref); break;
      case detail::Label::positive: {
        const auto& obj = gt.objects[static_cast<std::size_t>(owner[i])];
        const Box& pb = priors.entries[i].box;
        out.pos.push_back({ref, owner[i], obj.label, obj.box, encode_deltas(pb, obj.box),
                           std::nullopt});
        out.pos_boxes.push_back(pb);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- sampling

struct SamplerOptions {
  std::size_t num = 512;
  double pos_fraction = 0.25;
  std::uint64_t seed = 0;
};

// Random subsampling for loss parity with two-stage heads. Dropped positives
// and negatives move to the ignored set, so the partition stays exhaustive.
[[nodiscard]] inline Assignment sample_assignment(Assignment a, const SamplerOptions& opt) {
  if (!(opt.pos_fraction >= 0.0 && opt.pos_fraction <= 1.0))
    throw ConfigError("sampler pos_fraction must lie in [0, 1]");
  std::mt19937_64 rng(opt.seed);
  auto pick = [&rng](std::size_t count, std::size_t keep) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < std::min(keep, count); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (count - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(std::min(keep, count));
    std::sort(idx.begin(), idx.end());
    return idx;
  };

  const auto max_pos = static_cast<std::size_t>(std::floor(opt.num * opt.pos_fraction));
  const auto keep_pos = pick(a.pos.size(), max_pos);
  const std::size_t max_neg = opt.num - keep_pos.size();
  const auto keep_neg = pick(a.neg.size(), max_neg);

  Assignment out;
  out.prior_kind = a.prior_kind;
  out.num_priors = a.num_priors;
  out.ignored = a.ignored;
  std::size_t k = 0;
  for (std::size_t i = 0; i < a.pos.size(); ++i) {
    if (k < keep_pos.size() && keep_pos[k] == i) {
      out.pos.push_back(a.pos[i]);
      out.pos_boxes.push_back(a.pos_boxes[i]);
      ++k;
    } else {
      out.ignored.push_back(a.pos[i].ref);
    }
  }
  k = 0;
  for (std::size_t i = 0; i < a.neg.size(); ++i) {
    if (k < keep_neg.size() && keep_neg[k] == i) {
      out.neg.push_back(a.neg[i]);
      ++k;
    } else {
      out.ignored.push_back(a.neg[i]);
    }
  }
  std::sort(out.ignored.begin(), out.ignored.end(),
            [](const SampleRef& x, const SampleRef& y) { return x.index < y.index; });
  return out;
}

}  // namespace cohybrid
