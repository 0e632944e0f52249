#pragma once

// Collaborative hybrid assignment: K auxiliary heads each label the same
// pyramid with their own one-to-many assigner, their positives seed extra
// decoder queries, and the decoder input is laid out as K + 1 query groups
// (the learnable set-matching group first, then one pre-bound group per head).
//
// Only the deterministic parts live here. The learned projections applied to
// the positional encodings and gathered features belong to the trainer; each
// seed carries the (level, location) pair it needs for the gather.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cohybrid/assigners.hpp"
#include "cohybrid/error.hpp"
#include "cohybrid/geometry.hpp"
#include "cohybrid/priors.hpp"

namespace cohybrid {

enum class HeadKind { atss, fcos, retinanet, faster_rcnn };

inline std::string_view to_string(HeadKind k) {
  switch (k) {
    case HeadKind::atss: return "atss";
    case HeadKind::fcos: return "fcos";
    case HeadKind::retinanet: return "retinanet";
    case HeadKind::faster_rcnn: return "faster_rcnn";
  }
  return "unknown";
}

inline HeadKind parse_head_kind(std::string_view s) {
  if (s == "atss") return HeadKind::atss;
  if (s == "fcos") return HeadKind::fcos;
  if (s == "retinanet") return HeadKind::retinanet;
  if (s == "faster_rcnn" || s == "faster-rcnn") return HeadKind::faster_rcnn;
  throw ConfigError("unknown head kind '" + std::string(s) + "'");
}

struct HeadConfig {
  HeadKind kind = HeadKind::atss;
  AtssOptions atss;
  FcosOptions fcos;
  MaxIouOptions max_iou = retinanet_max_iou();
  // Anchor layout for ATSS / RetinaNet.
  std::vector<double> anchor_scales{8.0};
  std::vector<double> anchor_ratios{1.0};
  // Optional negative capping for the proposal head.
  bool use_sampler = false;
  SamplerOptions sampler;

  [[nodiscard]] PriorKind prior_kind() const noexcept {
    switch (kind) {
      case HeadKind::atss:
      case HeadKind::retinanet: return PriorKind::anchor;
      case HeadKind::fcos: return PriorKind::point;
      case HeadKind::faster_rcnn: return PriorKind::proposal;
    }
    return PriorKind::anchor;
  }
};

inline HeadConfig atss_head(int topk = 9) {
  HeadConfig h;
  h.kind = HeadKind::atss;
  h.atss.topk = topk;
  return h;
}

inline HeadConfig fcos_head(double center_radius = 1.5) {
  HeadConfig h;
  h.kind = HeadKind::fcos;
  h.fcos.center_radius = center_radius;
  return h;
}

inline HeadConfig retinanet_head() {
  HeadConfig h;
  h.kind = HeadKind::retinanet;
  h.max_iou = retinanet_max_iou();
  h.anchor_scales = retinanet_scales();
  h.anchor_ratios = retinanet_ratios();
  return h;
}

inline HeadConfig faster_rcnn_head() {
  HeadConfig h;
  h.kind = HeadKind::faster_rcnn;
  h.max_iou = faster_rcnn_max_iou();
  return h;
}

// K = 2: ATSS then Faster-RCNN.
inline std::vector<HeadConfig> default_heads() { return {atss_head(), faster_rcnn_head()}; }

// Builds the prior set a head consumes. Proposal heads wrap `proposals`.
[[nodiscard]] inline PriorSet make_head_priors(const HeadConfig& head, const PyramidSpec& spec,
                                               std::span<const TaggedBox> proposals = {}) {
  switch (head.kind) {
    case HeadKind::atss:
    case HeadKind::retinanet:
      return generate_anchors(spec, head.anchor_scales, head.anchor_ratios);
    case HeadKind::fcos: return generate_points(spec);
    case HeadKind::faster_rcnn: return make_proposal_set(proposals);
  }
  throw ConfigError("unknown head kind");
}

[[nodiscard]] inline Assignment build_head_targets(const HeadConfig& head, const PriorSet& priors,
                                                   const GroundTruth& gt) {
  if (priors.kind != head.prior_kind())
    throw ConfigError(std::string("head ") + std::string(to_string(head.kind)) + " expects " +
                      to_string(head.prior_kind()) + " priors, got " + to_string(priors.kind));
  switch (head.kind) {
    case HeadKind::atss: return assign_atss(priors, gt, head.atss);
    case HeadKind::fcos: return assign_fcos(priors, gt, head.fcos);
    case HeadKind::retinanet: return assign_max_iou(priors, gt, head.max_iou);
    case HeadKind::faster_rcnn: {
      Assignment a = assign_max_iou(priors, gt, head.max_iou);
      return head.use_sampler ? sample_assignment(std::move(a), head.sampler) : a;
    }
  }
  throw ConfigError("unknown head kind");
}

// ---------------------------------------------------------------- seeds

struct PeOptions {
  int dim = 256;  // C, divisible by 8
  double temperature = 10000.0;
};

// Sine/cosine encoding of a normalized (cx, cy, w, h) box. Each coordinate
// gets C/4 channels laid out as interleaved (sin, cos) pairs; pair t uses
// frequency temperature^(-2t / (C/4)) on the coordinate scaled by 2*pi.
[[nodiscard]] inline std::vector<double> sinusoidal_pe(const CenterBox& box,
                                                       const PeOptions& opt = {}) {
  if (opt.dim <= 0 || opt.dim % 8 != 0)
    throw ConfigError("positional encoding width must be a positive multiple of 8, got " +
                      std::to_string(opt.dim));
  if (!(opt.temperature > 0.0)) throw ConfigError("positional encoding temperature must be > 0");

  const int per_coord = opt.dim / 4;
  const double coords[4] = {box.cx, box.cy, box.w, box.h};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(opt.dim));
  for (double c : coords) {
    const double scaled = c * 2.0 * std::numbers::pi;
    for (int t = 0; t < per_coord / 2; ++t) {
      const double freq = std::pow(opt.temperature, -2.0 * t / per_coord);
      out.push_back(std::sin(scaled * freq));
      out.push_back(std::cos(scaled * freq));
    }
  }
  return out;
}

struct QuerySeed {
  int head = 0;  // 1-based auxiliary head index
  int gt = 0;
  int label = 0;
  Box box;  // positive box clamped to the image, normalized to [0,1]
  SampleRef ref;
  std::vector<double> encoding;
};

[[nodiscard]] inline Box normalize_box(const Box& b, double image_w, double image_h) {
  const Box c = clamp_to(b, image_w, image_h);
  return {c.x1 / image_w, c.y1 / image_h, c.x2 / image_w, c.y2 / image_h};
}

[[nodiscard]] inline std::vector<QuerySeed> extract_query_seeds(const Assignment& a, int head,
                                                                int image_w, int image_h,
                                                                const PeOptions& pe = {}) {
  if (image_w <= 0 || image_h <= 0) throw ValidationError("image dimensions must be positive");
  if (a.pos.size() != a.pos_boxes.size())
    throw ValidationError("assignment has mismatched positive lists");
  std::vector<QuerySeed> seeds;
  seeds.reserve(a.pos.size());
  for (std::size_t i = 0; i < a.pos.size(); ++i) {
    QuerySeed s;
    s.head = head;
    s.gt = a.pos[i].gt;
    s.label = a.pos[i].label;
    s.box = normalize_box(a.pos_boxes[i], image_w, image_h);
    s.ref = a.pos[i].ref;
    s.encoding = sinusoidal_pe(to_center(s.box), pe);
    seeds.push_back(std::move(s));
  }
  return seeds;
}

// ---------------------------------------------------------------- layout

enum class GroupRole { set_matching, auxiliary };

inline std::string_view to_string(GroupRole r) {
  return r == GroupRole::set_matching ? "set_matching" : "auxiliary";
}

struct QueryGroup {
  int id = 0;
  std::size_t offset = 0;
  std::size_t count = 0;
  GroupRole role = GroupRole::set_matching;
  // Auxiliary groups only: gt index bound to each query (no matching).
  std::vector<int> gt_binding;
};

struct QueryGroupLayout {
  std::vector<QueryGroup> groups;

  [[nodiscard]] std::size_t total_queries() const noexcept {
    return groups.empty() ? 0 : groups.back().offset + groups.back().count;
  }
};

inline constexpr int kDefaultLearnableQueries = 300;

[[nodiscard]] inline QueryGroupLayout layout_query_groups(int n_learnable,
                                                          std::span<const Assignment> heads) {
  if (n_learnable < 1) throw ConfigError("need at least one learnable query");
  QueryGroupLayout layout;
  layout.groups.push_back(
      {0, 0, static_cast<std::size_t>(n_learnable), GroupRole::set_matching, {}});
  std::size_t offset = static_cast<std::size_t>(n_learnable);
  for (std::size_t i = 0; i < heads.size(); ++i) {
    QueryGroup g{static_cast<int>(i + 1), offset, heads[i].pos.size(), GroupRole::auxiliary, {}};
    g.gt_binding.reserve(heads[i].pos.size());
    for (const auto& p : heads[i].pos) g.gt_binding.push_back(p.gt);
    offset += g.count;
    layout.groups.push_back(std::move(g));
  }
  return layout;
}

}  // namespace cohybrid
