#pragma once

// Batch commands behind the command-line tool. Each command maps a loaded
// scene file and a run configuration to a set of output files (name + text);
// writing them is left to the caller so runs can be compared in memory.
// Per-image work runs on a bounded worker pool; outputs follow input order.

#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cohybrid/assigners.hpp"
#include "cohybrid/collab.hpp"
#include "cohybrid/diagnostics.hpp"
#include "cohybrid/error.hpp"
#include "cohybrid/log.hpp"
#include "cohybrid/losses.hpp"
#include "cohybrid/matcher.hpp"
#include "cohybrid/priors.hpp"
#include "cohybrid/scene_io.hpp"

namespace cohybrid {

struct RunConfig {
  int levels = 5;  // strides 8 ... 128
  std::vector<HeadConfig> heads = default_heads();
  MatcherWeights matcher;
  LossWeights loss;
  int num_thresholds = kDefaultThresholdCount;
  int n_learnable = kDefaultLearnableQueries;
  PeOptions pe;
  int synthetic_proposals = 32;  // random boxes added per image when none are supplied
  int proposal_jitters = 8;      // jittered copies of each gt in synthetic proposals
  std::optional<int> num_classes;
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path matchings;
  std::uint64_t seed = 0;
  int threads = 1;
};

namespace detail {

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T cfg_get(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": key '" + key + "' has the wrong type");
  }
}

inline HeadConfig parse_head(const json& h, std::size_t idx) {
  const std::string where = "heads[" + std::to_string(idx) + "]";
  if (!h.is_object() || !h.contains("kind")) throw ConfigError(where + ": missing 'kind'");
  const HeadKind kind = parse_head_kind(cfg_get<std::string>(h, "kind", "", where));
  HeadConfig head;
  switch (kind) {
    case HeadKind::atss: head = atss_head(); break;
    case HeadKind::fcos: head = fcos_head(); break;
    case HeadKind::retinanet: head = retinanet_head(); break;
    case HeadKind::faster_rcnn: head = faster_rcnn_head(); break;
  }
  check_keys(h,
             {"kind", "topk", "center_radius", "regress_ranges", "pos_thr", "neg_thr",
              "rescue_low_quality", "scales", "ratios", "sampler"},
             where);
  head.atss.topk = cfg_get(h, "topk", head.atss.topk, where);
  head.fcos.center_radius = cfg_get(h, "center_radius", head.fcos.center_radius, where);
  if (h.contains("regress_ranges")) {
    const auto ranges = cfg_get<std::vector<std::vector<double>>>(h, "regress_ranges", {}, where);
    for (const auto& r : ranges) {
      if (r.size() != 2) throw ConfigError(where + ": regress range needs [lo, hi]");
      head.fcos.regress_ranges.push_back({r[0], r[1] < 0 ? std::numeric_limits<double>::infinity() : r[1]});
    }
  }
  head.max_iou.pos_thr = cfg_get(h, "pos_thr", head.max_iou.pos_thr, where);
  head.max_iou.neg_thr = cfg_get(h, "neg_thr", head.max_iou.neg_thr, where);
  head.max_iou.rescue_low_quality =
      cfg_get(h, "rescue_low_quality", head.max_iou.rescue_low_quality, where);
  head.anchor_scales = cfg_get(h, "scales", head.anchor_scales, where);
  head.anchor_ratios = cfg_get(h, "ratios", head.anchor_ratios, where);
  if (h.contains("sampler")) {
    const json& s = h["sampler"];
    check_keys(s, {"num", "pos_fraction"}, where + ".sampler");
    head.use_sampler = true;
    head.sampler.num = cfg_get<std::size_t>(s, "num", head.sampler.num, where);
    head.sampler.pos_fraction = cfg_get(s, "pos_fraction", head.sampler.pos_fraction, where);
  }
  if (head.atss.topk < 1) throw ConfigError(where + ": topk must be >= 1");
  if (!(head.max_iou.pos_thr >= head.max_iou.neg_thr))
    throw ConfigError(where + ": pos_thr must be >= neg_thr");
  return head;
}

}  // namespace detail

[[nodiscard]] inline RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  detail::check_keys(doc,
                     {"levels", "heads", "matcher", "lambda1", "lambda2", "encoder_placement",
                      "num_thresholds", "n_learnable", "pe_dim", "pe_temperature",
                      "synthetic_proposals", "proposal_jitters", "num_classes", "input", "output",
                      "matchings", "seed", "threads"},
                     "config");
  RunConfig c;
  const std::string w = "config";
  c.levels = detail::cfg_get(doc, "levels", c.levels, w);
  if (doc.contains("heads")) {
    if (!doc["heads"].is_array()) throw ConfigError("config: 'heads' must be an array");
    c.heads.clear();
    for (std::size_t i = 0; i < doc["heads"].size(); ++i)
      c.heads.push_back(detail::parse_head(doc["heads"][i], i));
  }
  if (doc.contains("matcher")) {
    const json& m = doc["matcher"];
    detail::check_keys(m, {"cls", "l1", "giou", "alpha", "gamma"}, "config.matcher");
    c.matcher.cls = detail::cfg_get(m, "cls", c.matcher.cls, w);
    c.matcher.l1 = detail::cfg_get(m, "l1", c.matcher.l1, w);
    c.matcher.giou = detail::cfg_get(m, "giou", c.matcher.giou, w);
    c.matcher.alpha = detail::cfg_get(m, "alpha", c.matcher.alpha, w);
    c.matcher.gamma = detail::cfg_get(m, "gamma", c.matcher.gamma, w);
  }
  c.loss.lambda1 = detail::cfg_get(doc, "lambda1", c.loss.lambda1, w);
  c.loss.lambda2 = detail::cfg_get(doc, "lambda2", c.loss.lambda2, w);
  const auto placement = detail::cfg_get<std::string>(doc, "encoder_placement", "per_layer", w);
  if (placement == "per_layer") {
    c.loss.placement = EncoderPlacement::per_layer;
  } else if (placement == "once") {
    c.loss.placement = EncoderPlacement::once;
  } else {
    throw ConfigError("config: encoder_placement must be 'per_layer' or 'once'");
  }
  c.num_thresholds = detail::cfg_get(doc, "num_thresholds", c.num_thresholds, w);
  c.n_learnable = detail::cfg_get(doc, "n_learnable", c.n_learnable, w);
  c.pe.dim = detail::cfg_get(doc, "pe_dim", c.pe.dim, w);
  c.pe.temperature = detail::cfg_get(doc, "pe_temperature", c.pe.temperature, w);
  c.synthetic_proposals = detail::cfg_get(doc, "synthetic_proposals", c.synthetic_proposals, w);
  c.proposal_jitters = detail::cfg_get(doc, "proposal_jitters", c.proposal_jitters, w);
  if (doc.contains("num_classes")) c.num_classes = detail::cfg_get<int>(doc, "num_classes", 1, w);
  c.input = detail::cfg_get<std::string>(doc, "input", "", w);
  c.output = detail::cfg_get<std::string>(doc, "output", "", w);
  c.matchings = detail::cfg_get<std::string>(doc, "matchings", "", w);
  c.seed = detail::cfg_get<std::uint64_t>(doc, "seed", c.seed, w);
  c.threads = detail::cfg_get(doc, "threads", c.threads, w);

  if (c.levels < 1 || c.levels > kMaxPyramidLevels) throw ConfigError("config: levels out of range");
  if (c.num_thresholds < 2) throw ConfigError("config: num_thresholds must be >= 2");
  if (c.n_learnable < 1) throw ConfigError("config: n_learnable must be >= 1");
  if (c.pe.dim <= 0 || c.pe.dim % 8 != 0) throw ConfigError("config: pe_dim must be a positive multiple of 8");
  if (c.synthetic_proposals < 0 || c.proposal_jitters < 0)
    throw ConfigError("config: synthetic proposal counts must be nonnegative");
  if (c.num_classes && *c.num_classes < 1) throw ConfigError("config: num_classes must be >= 1");
  return c;
}

[[nodiscard]] inline RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(parse_json_text(read_text_file(path), path.string()));
}

// ---------------------------------------------------------------- helpers

// Shortest round-trip decimal text.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results keep index
// order; the exception of the lowest failing index is rethrown.
template <typename Fn>
auto parallel_map(std::size_t n, int threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

template <typename Fn>
auto with_image_context(const SceneImage& im, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (what.rfind("image ", 0) == 0) throw;
    throw ValidationError("image " + im.id_text() + ": " + what);
  }
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Proposals for images that bring none: jittered copies of each gt plus
// uniformly placed boxes. Deterministic in (seed, image index).
[[nodiscard]] inline std::vector<Box> synthetic_proposals(const SceneImage& im, std::size_t index,
                                                          std::uint64_t seed, int random_count,
                                                          int jitters) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + index + 1);
  const double W = im.width;
  const double H = im.height;
  std::vector<Box> out;
  auto push = [&](Box b) {
    b = clamp_to(b, W, H);
    if (b.width() > 0.0 && b.height() > 0.0) out.push_back(b);
  };
  for (const auto& o : im.objects) {
    const Box g = clamp_to(o.box, W, H);
    for (int k = 0; k < jitters; ++k) {
      const double jw = 0.2 * g.width();
      const double jh = 0.2 * g.height();
      push({g.x1 + (2.0 * unit_uniform(rng) - 1.0) * jw, g.y1 + (2.0 * unit_uniform(rng) - 1.0) * jh,
            g.x2 + (2.0 * unit_uniform(rng) - 1.0) * jw, g.y2 + (2.0 * unit_uniform(rng) - 1.0) * jh});
    }
  }
  for (int k = 0; k < random_count; ++k) {
    const double ax = unit_uniform(rng) * W, bx = unit_uniform(rng) * W;
    const double ay = unit_uniform(rng) * H, by = unit_uniform(rng) * H;
    push({std::min(ax, bx), std::min(ay, by), std::max(ax, bx), std::max(ay, by)});
  }
  return out;
}

struct ImageHeads {
  PyramidSpec spec;
  std::vector<PriorSet> priors;
  std::vector<Assignment> assignments;
};

[[nodiscard]] inline ImageHeads run_heads(const SceneImage& im, std::size_t index, int num_classes,
                                          const RunConfig& cfg) {
  ImageHeads out;
  out.spec = build_pyramid_spec(im.height, im.width, cfg.levels);
  const GroundTruth gt = im.ground_truth(num_classes);
  for (const auto& head : cfg.heads) {
    std::vector<TaggedBox> tagged;
    if (head.kind == HeadKind::faster_rcnn) {
      const std::vector<Box> boxes =
          im.proposals ? *im.proposals
                       : synthetic_proposals(im, index, cfg.seed, cfg.synthetic_proposals,
                                             cfg.proposal_jitters);
      for (const auto& b : boxes) tagged.push_back({roi_level(b, cfg.levels), b});
    }
    out.priors.push_back(make_head_priors(head, out.spec, tagged));
    out.assignments.push_back(build_head_targets(head, out.priors.back(), gt));
  }
  return out;
}

[[nodiscard]] inline int resolve_num_classes(const SceneFile& scene, const RunConfig& cfg) {
  return cfg.num_classes ? *cfg.num_classes : scene.num_classes;
}

inline json box_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

inline json target_json(const RegressionTarget& t) {
  if (const auto* d = std::get_if<DeltaTarget>(&t))
    return {{"type", "delta"}, {"dx", d->dx}, {"dy", d->dy}, {"dw", d->dw}, {"dh", d->dh}};
  const auto& l = std::get<LtrbTarget>(t);
  return {{"type", "ltrb"}, {"l", l.l}, {"t", l.t}, {"r", l.r}, {"b", l.b}};
}

inline json positive_json(const PositiveSample& p, const Box& pos_box) {
  json j{{"index", p.ref.index}, {"level", p.ref.level}, {"location", p.ref.location},
         {"gt", p.gt},           {"label", p.label},     {"target", target_json(p.target)},
         {"box", box_json(pos_box)}};
  if (p.centerness) j["centerness"] = *p.centerness;
  return j;
}

struct OutputFile {
  std::string name;
  std::string text;
};

inline void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& f : files) write_text_file(dir / f.name, f.text);
}

// ---------------------------------------------------------------- commands

[[nodiscard]] inline std::vector<OutputFile> cmd_assign(const SceneFile& scene, const RunConfig& cfg) {
  const int num_classes = resolve_num_classes(scene, cfg);
  auto per_image = parallel_map(scene.images.size(), cfg.threads, [&](std::size_t i) {
    const auto& im = scene.images[i];
    return with_image_context(im, [&] {
      const ImageHeads heads = run_heads(im, i, num_classes, cfg);
      json j{{"id", im.id}, {"heads", json::array()}};
      for (std::size_t h = 0; h < heads.assignments.size(); ++h) {
        const Assignment& a = heads.assignments[h];
        json hj{{"head", h + 1},
                {"kind", to_string(cfg.heads[h].kind)},
                {"num_priors", a.num_priors},
                {"num_pos", a.pos.size()},
                {"num_neg", a.neg.size()},
                {"num_ignored", a.ignored.size()},
                {"positives", json::array()}};
        for (std::size_t k = 0; k < a.pos.size(); ++k)
          hj["positives"].push_back(positive_json(a.pos[k], a.pos_boxes[k]));
        j["heads"].push_back(std::move(hj));
      }
      log::debug("assign: image " + im.id_text() + " done");
      return j;
    });
  });
  json doc{{"images", std::move(per_image)}};
  log::info("assign: " + std::to_string(scene.images.size()) + " images");
  return {{"assignments.json", doc.dump(1) + "\n"}};
}

[[nodiscard]] inline std::vector<OutputFile> cmd_match(const SceneFile& scene, const RunConfig& cfg) {
  auto per_image = parallel_map(scene.images.size(), cfg.threads, [&](std::size_t i) {
    const auto& im = scene.images[i];
    return with_image_context(im, [&] {
      if (!im.predictions) throw ValidationError("field 'predictions' is missing (required by match)");
      json j{{"id", im.id}, {"pairs", json::array()}, {"total_cost", 0.0}};
      if (im.objects.empty() || im.predictions->empty()) return j;
      std::vector<GtTarget> gts;
      for (const auto& o : im.objects) gts.push_back({o.label, normalize_box(o.box, im.width, im.height)});
      const MatchResult m = match_one_to_one(*im.predictions, gts, cfg.matcher);
      for (const auto& p : m.pairs) j["pairs"].push_back({p.query, p.gt});
      j["total_cost"] = m.total_cost;
      return j;
    });
  });
  json doc{{"images", std::move(per_image)}};
  log::info("match: " + std::to_string(scene.images.size()) + " images");
  return {{"matches.json", doc.dump(1) + "\n"}};
}

[[nodiscard]] inline std::vector<OutputFile> cmd_targets(const SceneFile& scene, const RunConfig& cfg) {
  const int num_classes = resolve_num_classes(scene, cfg);
  auto per_image = parallel_map(scene.images.size(), cfg.threads, [&](std::size_t i) {
    const auto& im = scene.images[i];
    return with_image_context(im, [&] {
      const ImageHeads heads = run_heads(im, i, num_classes, cfg);
      const QueryGroupLayout layout = layout_query_groups(cfg.n_learnable, heads.assignments);
      json groups = json::array();
      for (const auto& g : layout.groups) {
        json gj{{"id", g.id}, {"offset", g.offset}, {"count", g.count}, {"role", to_string(g.role)}};
        if (g.role == GroupRole::auxiliary) gj["gt_binding"] = g.gt_binding;
        groups.push_back(std::move(gj));
      }
      json head_list = json::array();
      for (std::size_t h = 0; h < heads.assignments.size(); ++h) {
        const Assignment& a = heads.assignments[h];
        json hj{{"head", h + 1}, {"kind", to_string(cfg.heads[h].kind)}, {"num_priors", a.num_priors}};
        json pos = json::array();
        for (std::size_t k = 0; k < a.pos.size(); ++k) pos.push_back(positive_json(a.pos[k], a.pos_boxes[k]));
        hj["positives"] = std::move(pos);
        json ign = json::array();
        for (const auto& r : a.ignored) ign.push_back(r.index);
        hj["ignored"] = std::move(ign);
        json dec = json::array();
        for (const auto& t : aux_group_targets(a, im.width, im.height))
          dec.push_back({{"label", t.label}, {"box", box_json(t.box)}});
        hj["decoder_targets"] = std::move(dec);
        json seeds = json::array();
        for (const auto& s : extract_query_seeds(a, static_cast<int>(h + 1), im.width, im.height, cfg.pe))
          seeds.push_back({{"gt", s.gt},
                           {"label", s.label},
                           {"box", box_json(s.box)},
                           {"level", s.ref.level},
                           {"location", s.ref.location},
                           {"encoding", s.encoding}});
        hj["seeds"] = std::move(seeds);
        head_list.push_back(std::move(hj));
      }
      return json{{"id", im.id}, {"groups", std::move(groups)}, {"heads", std::move(head_list)}};
    });
  });
  json doc{{"n_learnable", cfg.n_learnable},
           {"pe_dim", cfg.pe.dim},
           {"pe_temperature", cfg.pe.temperature},
           {"lambda1", cfg.loss.lambda1},
           {"lambda2", cfg.loss.lambda2},
           {"images", std::move(per_image)}};
  log::info("targets: " + std::to_string(scene.images.size()) + " images");
  return {{"targets.json", doc.dump(1) + "\n"}};
}

// epochs[e][image] from {"epochs": [{"images": [{"id": .., "gt_to_query": [q or null, ...]}]}]}
[[nodiscard]] inline std::vector<std::vector<GtQueryMap>> parse_matchings(const json& doc) {
  if (!doc.is_object() || !doc.contains("epochs") || !doc["epochs"].is_array())
    throw ValidationError("matchings file: top-level 'epochs' array is missing");
  std::vector<std::vector<GtQueryMap>> epochs;
  std::vector<json> ids;
  for (std::size_t e = 0; e < doc["epochs"].size(); ++e) {
    const json& ep = doc["epochs"][e];
    const std::string where = "matchings epoch " + std::to_string(e);
    if (!ep.is_object() || !ep.contains("images") || !ep["images"].is_array())
      throw ValidationError(where + ": 'images' array is missing");
    std::vector<GtQueryMap> images;
    for (std::size_t i = 0; i < ep["images"].size(); ++i) {
      const json& im = ep["images"][i];
      if (!im.is_object() || !im.contains("gt_to_query") || !im["gt_to_query"].is_array())
        throw ValidationError(where + " image " + std::to_string(i) + ": 'gt_to_query' is missing");
      const json id = im.contains("id") ? im["id"] : json(i);
      if (e == 0) {
        ids.push_back(id);
      } else if (i >= ids.size() || ids[i] != id) {
        throw ValidationError(where + ": image " + id.dump() + " does not line up with epoch 0");
      }
      GtQueryMap m;
      for (const auto& q : im["gt_to_query"]) {
        if (q.is_null()) {
          m.push_back(std::nullopt);
        } else if (q.is_number_integer()) {
          m.push_back(q.get<int>());
        } else {
          throw ValidationError(where + ": gt_to_query entries must be integers or null");
        }
      }
      images.push_back(std::move(m));
    }
    epochs.push_back(std::move(images));
  }
  return epochs;
}

[[nodiscard]] inline std::string instability_csv(const InstabilityReport& r) {
  std::string out = "epoch_pair,IS\n";
  for (std::size_t e = 0; e < r.per_pair.size(); ++e)
    out += std::to_string(e) + "-" + std::to_string(e + 1) + "," + format_double(r.per_pair[e]) + "\n";
  out += "mean," + format_double(r.mean) + "\n";
  return out;
}

[[nodiscard]] inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "S,iof,iob\n";
  for (const auto& p : curve)
    out += format_double(p.threshold) + "," + format_double(p.iof) + "," + format_double(p.iob) + "\n";
  return out;
}

[[nodiscard]] inline std::vector<OutputFile> cmd_diagnose(
    const SceneFile& scene, const RunConfig& cfg,
    const std::optional<std::vector<std::vector<GtQueryMap>>>& matchings = std::nullopt) {
  const std::vector<double> thresholds = uniform_thresholds(cfg.num_thresholds);
  struct ImageResult {
    ScoreMap map;
    std::vector<CurvePoint> curve;
    RegionSizes regions;
  };
  auto per_image = parallel_map(scene.images.size(), cfg.threads, [&](std::size_t i) {
    const auto& im = scene.images[i];
    return with_image_context(im, [&] {
      if (im.feature_norms.empty())
        throw ValidationError("field 'feature_norms' is missing (required by diagnose)");
      ImageResult r;
      r.map = discriminability_map(im.feature_norms, im.height, im.width);
      std::vector<Box> boxes;
      for (const auto& o : im.objects) boxes.push_back(clamp_to(o.box, im.width, im.height));
      const ForegroundMask fg = foreground_mask(boxes, im.height, im.width);
      r.curve = iof_iob_curve(r.map, fg, thresholds);
      r.regions = region_sizes(fg);
      return r;
    });
  });

  std::vector<std::vector<CurvePoint>> curves;
  std::vector<RegionSizes> regions;
  json maps = json::array();
  for (std::size_t i = 0; i < per_image.size(); ++i) {
    curves.push_back(per_image[i].curve);
    regions.push_back(per_image[i].regions);
    maps.push_back({{"id", scene.images[i].id},
                    {"height", per_image[i].map.height},
                    {"width", per_image[i].map.width},
                    {"values", per_image[i].map.values}});
  }
  std::vector<CurvePoint> mean;
  if (curves.empty()) {
    for (double s : thresholds) mean.push_back({s, 0.0, 0.0});
  } else {
    mean = mean_curve(curves, regions);
  }

  std::vector<OutputFile> files{{"curves.csv", curve_csv(mean)},
                                {"score_maps.json", json{{"images", std::move(maps)}}.dump() + "\n"}};
  if (matchings) files.push_back({"instability.csv", instability_csv(matching_instability(*matchings))});
  log::info("diagnose: " + std::to_string(scene.images.size()) + " images");
  return files;
}

}  // namespace cohybrid
