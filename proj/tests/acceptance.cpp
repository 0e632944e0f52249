// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// usage: acceptance [path-to-cohybrid-cli]
// Without the CLI path criterion 9 runs the pipeline in-process.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "assigner_oracles.hpp"
#include "cohybrid/cohybrid.hpp"
#include "matching_oracle.hpp"
#include "test_support.hpp"

namespace {

using namespace cohybrid;
using testing::Rng;
namespace fs = std::filesystem;

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Records the first failure; later checks keep running but do not overwrite it.
struct Check {
  Outcome out;
  bool operator()(bool cond, const std::string& what) {
    if (!cond && out.ok) {
      out.ok = false;
      out.detail = what;
    }
    return cond;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// ---- 1

Outcome hungarian_exactness() {
  Check check;
  Rng rng(101);
  double solver_time = 0.0;
  const auto t_all = std::chrono::steady_clock::now();
  for (int it = 0; it < 1000 && check.out.ok; ++it) {
    const bool rect = it % 2 == 1;
    const int rows = rng.integer(1, 6);
    const int cols = rect ? rng.integer(1, 4) : rng.integer(1, 6);
    const bool integral = rng.coin();
    CostMatrix c(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k < cols; ++k)
        c(static_cast<std::size_t>(r), static_cast<std::size_t>(k)) =
            integral ? rng.integer(0, 3) : rng.uniform(-5.0, 5.0);
    const auto t0 = std::chrono::steady_clock::now();
    const MatchResult got = hungarian_solve(c);
    solver_time += seconds_since(t0);
    const MatchResult want = testing::brute_force_match(c);
    check(got.total_cost == want.total_cost,
          "matrix " + std::to_string(it) + ": cost " + fmt(got.total_cost) + " vs " + fmt(want.total_cost));
    check(got.pairs.size() == static_cast<std::size_t>(std::min(rows, cols)),
          "matrix " + std::to_string(it) + ": wrong cardinality");
  }
  const double total = seconds_since(t_all);
  check(total < 5.0, "took " + fmt(total) + " s");
  if (check.out.ok)
    check.out.detail = "1000 matrices exact, solver " + fmt(solver_time) + " s, with brute force " + fmt(total) + " s";
  return check.out;
}

// ---- 2

Outcome assigner_oracles() {
  Check check;
  Rng rng(202);
  std::size_t pos[3] = {0, 0, 0};
  for (int it = 0; it < 500; ++it) {
    const bool three = rng.coin();
    const auto scene = testing::random_small_scene(rng, three ? 3 : 1);
    const double r3[] = {0.5, 1.0, 2.0};
    const double r1[] = {1.0};
    const double scale = rng.uniform(0.5, 8.0);
    const auto anchors = three ? generate_anchors(scene.spec, scale, r3)
                               : generate_anchors(scene.spec, scale, r1);
    const int k = rng.integer(1, 9);
    const auto a = assign_atss(anchors, scene.gt, {k});
    check(testing::labels_of(a) == testing::oracle_atss(anchors, scene.gt, k),
          "atss differs on scene " + std::to_string(it));
    pos[0] += a.pos.size();
  }
  for (int it = 0; it < 500; ++it) {
    const auto scene = testing::random_small_scene(rng, 1);
    const auto points = generate_points(scene.spec);
    FcosOptions opt;
    opt.center_radius = rng.coin() ? 1.5 : rng.uniform(0.3, 3.0);
    std::vector<std::pair<double, double>> ranges;
    if (rng.coin()) {
      opt.regress_ranges = {{0, 16}, {16, 1e9}};
      ranges = {{0, 16}, {16, 1e9}};
    } else {
      const int top = static_cast<int>(scene.spec.levels.size());
      for (int j = 1; j <= top; ++j) {
        const auto r = default_regress_range(j, top);
        ranges.push_back({r.lo, r.hi});
      }
    }
    const auto a = assign_fcos(points, scene.gt, opt);
    check(testing::labels_of(a) == testing::oracle_fcos(points, scene.gt, opt.center_radius, ranges),
          "fcos differs on scene " + std::to_string(it));
    pos[1] += a.pos.size();
  }
  for (int it = 0; it < 500; ++it) {
    const bool three = rng.coin();
    const auto scene = testing::random_small_scene(rng, three ? 3 : 1);
    const double r3[] = {0.5, 1.0, 2.0};
    const double r1[] = {1.0};
    const double scale = rng.uniform(0.5, 4.0);
    const auto anchors = three ? generate_anchors(scene.spec, scale, r3)
                               : generate_anchors(scene.spec, scale, r1);
    MaxIouOptions opt = rng.coin() ? retinanet_max_iou() : faster_rcnn_max_iou();
    opt.rescue_low_quality = rng.coin(0.8);
    const auto a = assign_max_iou(anchors, scene.gt, opt);
    check(testing::labels_of(a) ==
              testing::oracle_max_iou(anchors, scene.gt, opt.pos_thr, opt.neg_thr, opt.rescue_low_quality),
          "max-iou differs on scene " + std::to_string(it));
    pos[2] += a.pos.size();
  }
  check(pos[0] > 0 && pos[1] > 0 && pos[2] > 0, "an assigner produced no positives at all");
  if (check.out.ok)
    check.out.detail = "3 x 500 scenes identical (positives atss " + std::to_string(pos[0]) + ", fcos " +
                       std::to_string(pos[1]) + ", max-iou " + std::to_string(pos[2]) + ")";
  return check.out;
}

// ---- 3

Outcome geometry_and_gradients() {
  Check check;
  Rng rng(303);
  for (int i = 0; i < 10000; ++i) {
    const Box a = rng.box(100.0), b = rng.box(100.0);
    const double u = iou(a, b), g = giou(a, b);
    check(u >= 0.0 && u <= 1.0, "iou out of range");
    check(g >= -1.0 && g <= 1.0, "giou out of range");
    check(g <= u, "giou above iou for " + to_string(a) + " " + to_string(b));
  }
  double worst_focal = 0.0;
  for (int i = 0; i < 1000;) {
    const double x = rng.uniform(-8.0, 8.0);
    const int label = rng.integer(0, 1);
    const double alpha = rng.uniform(0.05, 0.95), gamma = rng.uniform(0.0, 4.0);
    const double h = 1e-5;
    const double fd = (focal_loss(x + h, label, alpha, gamma).value -
                       focal_loss(x - h, label, alpha, gamma).value) / (2 * h);
    const double an = focal_loss(x, label, alpha, gamma).grad;
    const double scale = std::max(std::abs(an), std::abs(fd));
    if (scale < 1e-9) continue;  // saturated tail, not a usable sample
    const double err = std::abs(an - fd) / scale;
    worst_focal = std::max(worst_focal, err);
    check(err <= 1e-4, "focal gradient rel err " + fmt(err));
    ++i;
  }
  double worst_giou = 0.0;
  for (int i = 0; i < 1000;) {
    const Box a = rng.box(50.0, 0.5), b = rng.box(50.0, 0.5);
    if (!testing::well_separated(a, b, 1e-3)) continue;
    const auto fd = testing::central_difference([&](const Box& x) { return giou(x, b); }, a, 1e-5);
    const double err = testing::relative_error(giou_with_grad(a, b).grad, fd);
    worst_giou = std::max(worst_giou, err);
    check(err <= 1e-4, "giou gradient rel err " + fmt(err));
    ++i;
  }
  if (check.out.ok)
    check.out.detail = "10000 pairs in bounds, worst rel err focal " + fmt(worst_focal) + ", giou " +
                       fmt(worst_giou);
  return check.out;
}

// ---- 4

Outcome global_loss_arithmetic() {
  Check check;
  LossComponents unit;
  unit.main_dec = {1.0, 1.0};
  unit.aux_dec = {{1.0, 1.0}};
  unit.enc = 1.0;
  const double worked = global_loss(unit, {1.0, 2.0}, 2);
  check(worked == 8.0, "worked substitution gave " + fmt(worked));

  Rng rng(404);
  for (int it = 0; it < 100; ++it) {
    const int L = rng.integer(1, 6), K = rng.integer(0, 4);
    LossComponents c;
    for (int l = 0; l < L; ++l) c.main_dec.push_back(rng.uniform(0, 5));
    for (int i = 0; i < K; ++i) {
      c.aux_dec.emplace_back();
      for (int l = 0; l < L; ++l) c.aux_dec.back().push_back(rng.uniform(0, 5));
    }
    c.enc = rng.uniform(0, 5);
    const LossWeights w{rng.uniform(0, 3), rng.uniform(0, 3)};
    const double base = global_loss(c, w, L);
    const double d = rng.uniform(-1, 1);
    const auto l = static_cast<std::size_t>(rng.integer(0, L - 1));
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };

    auto bumped = c;
    bumped.main_dec[l] += d;
    check(close(global_loss(bumped, w, L) - base, d), "main term not unit slope");
    if (K > 0) {
      bumped = c;
      bumped.aux_dec[static_cast<std::size_t>(rng.integer(0, K - 1))][l] += d;
      check(close(global_loss(bumped, w, L) - base, w.lambda1 * d), "aux term slope is not lambda1");
    }
    bumped = c;
    bumped.enc += d;
    check(close(global_loss(bumped, w, L) - base, w.lambda2 * L * d), "encoder slope is not lambda2 * L");
    // value at zero components is zero
    LossComponents zero = c;
    for (double& v : zero.main_dec) v = 0;
    for (auto& h : zero.aux_dec)
      for (double& v : h) v = 0;
    zero.enc = 0;
    check(global_loss(zero, w, L) == 0.0, "not linear: nonzero at origin");
  }
  if (check.out.ok) check.out.detail = "worked value 8, 100 perturbation sets affine";
  return check.out;
}

// ---- 5

GroundTruth random_gt(Rng& rng, int w, int h, int max_objects, double min_side, double max_side) {
  GroundTruth gt;
  gt.image_w = w;
  gt.image_h = h;
  const int n = rng.integer(1, max_objects);
  for (int g = 0; g < n; ++g) {
    const double bw = rng.uniform(min_side, std::min<double>(max_side, w));
    const double bh = rng.uniform(min_side, std::min<double>(max_side, h));
    const double x = rng.uniform(0, w - bw), y = rng.uniform(0, h - bh);
    gt.objects.push_back({rng.integer(0, 2), {x, y, x + bw, y + bh}});
  }
  return gt;
}

Outcome fcos_box_sizing() {
  Check check;
  Rng rng(505);
  std::map<int, std::size_t> per_level;
  for (int it = 0; it < 100; ++it) {
    const int w = rng.integer(64, 320), h = rng.integer(64, 320);
    const int levels = rng.integer(1, 5);
    const auto spec = build_pyramid_spec(h, w, levels);
    const auto gt = random_gt(rng, w, h, 6, 4.0, 300.0);
    const auto a = assign_fcos(generate_points(spec), gt, {});
    for (std::size_t k = 0; k < a.pos.size(); ++k) {
      const int j = a.pos[k].ref.level;
      const double side = 8.0 * std::pow(2.0, 2 + j);
      const Box& b = a.pos_boxes[k];
      check(b.x2 - b.x1 == side && b.y2 - b.y1 == side,
            "scene " + std::to_string(it) + " level " + std::to_string(j) + " box " + to_string(b));
      ++per_level[j];
    }
  }
  check(!per_level.empty(), "no FCOS positives in 100 scenes");
  if (check.out.ok) {
    std::string d = "positives per level:";
    for (const auto& [j, n] : per_level) d += " " + std::to_string(j) + ":" + std::to_string(n);
    check.out.detail = d;
  }
  return check.out;
}

// ---- 6

SceneImage scene_image(Rng& rng, int index) {
  SceneImage im;
  im.id = index;
  im.width = rng.integer(96, 256);
  im.height = rng.integer(96, 256);
  im.objects = random_gt(rng, im.width, im.height, 4, 24.0, 96.0).objects;
  return im;
}

std::vector<HeadConfig> all_heads() {
  return {atss_head(), fcos_head(), retinanet_head(), faster_rcnn_head()};
}

Outcome query_group_contract() {
  Check check;
  Rng rng(606);
  const std::size_t before = solve_call_count().load();
  std::size_t groups_seen = 0;
  for (int it = 0; it < 100; ++it) {
    const SceneImage im = scene_image(rng, it);
    RunConfig cfg;
    cfg.levels = 3;
    const auto pool = all_heads();
    cfg.heads.clear();
    const int K = rng.integer(0, 4);
    for (int i = 0; i < K; ++i) cfg.heads.push_back(pool[static_cast<std::size_t>(rng.integer(0, 3))]);
    const ImageHeads heads = run_heads(im, static_cast<std::size_t>(it), 3, cfg);
    const auto layout = layout_query_groups(cfg.n_learnable, heads.assignments);
    check(layout.groups.size() == static_cast<std::size_t>(K + 1),
          "scene " + std::to_string(it) + ": " + std::to_string(layout.groups.size()) + " groups for K=" +
              std::to_string(K));
    check(layout.groups[0].count == static_cast<std::size_t>(cfg.n_learnable), "main group size");
    for (int i = 0; i < K; ++i) {
      const auto& a = heads.assignments[static_cast<std::size_t>(i)];
      const auto& g = layout.groups[static_cast<std::size_t>(i + 1)];
      check(g.count == a.pos.size(), "aux group size differs from positive count");
      const auto targets = aux_group_targets(a, im.width, im.height);
      std::vector<QueryOutput> outputs;
      for (std::size_t q = 0; q < g.count; ++q) {
        QueryOutput o;
        for (int c = 0; c < 3; ++c) o.logits.push_back(rng.uniform(-3, 3));
        o.box = {rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)};
        outputs.push_back(o);
      }
      const double loss = decoder_aux_loss(outputs, targets);
      check(std::isfinite(loss) && loss >= 0.0, "aux loss not finite");
      ++groups_seen;
    }
  }
  const std::size_t calls = solve_call_count().load() - before;
  check(calls == 0, std::to_string(calls) + " matching calls on the auxiliary path");
  check(groups_seen > 0, "no auxiliary groups exercised");
  if (check.out.ok)
    check.out.detail = "100 layouts with K+1 groups, " + std::to_string(groups_seen) +
                       " auxiliary losses, 0 matching calls";
  return check.out;
}

// ---- 7

Outcome diagnostics_contract() {
  Check check;
  Rng rng(707);
  const auto thresholds = uniform_thresholds();
  for (int it = 0; it < 100; ++it) {
    const int h = rng.integer(1, 40), w = rng.integer(1, 40);
    ScoreMap d{h, w, {}};
    ForegroundMask fg{h, w, {}};
    for (int k = 0; k < h * w; ++k) {
      d.values.push_back(rng.uniform(0, 1));
      fg.values.push_back(rng.coin() ? 1 : 0);
    }
    const auto c = iof_iob_curve(d, fg, thresholds);
    for (std::size_t k = 1; k < c.size(); ++k) {
      check(c[k].iof <= c[k - 1].iof, "iof increased on map " + std::to_string(it));
      check(c[k].iob <= c[k - 1].iob, "iob increased on map " + std::to_string(it));
    }
  }
  // foreground scores 1, background 0
  const ForegroundMask fg{3, 4, {1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0}};
  ScoreMap d{3, 4, {}};
  for (auto v : fg.values) d.values.push_back(v ? 1.0 : 0.0);
  const auto p = iof_iob_at_threshold(d, fg, 0.5);
  check(p.iof == 1.0 && p.iob == 0.0, "separable map gave (" + fmt(p.iof) + ", " + fmt(p.iob) + ")");

  const std::vector<GtQueryMap> a{{3, 7}}, b{{3, 5}};
  const double same = instability(a, a), half = instability(a, b);
  check(same == 0.0, "IS of identical matchings is " + fmt(same));
  check(half == 0.5, "IS of half-churn example is " + fmt(half));
  if (check.out.ok) check.out.detail = "100 maps monotone, separable (1, 0), IS 0 and 0.5";
  return check.out;
}

// ---- 8

Outcome encoder_negative_invariance() {
  Check check;
  Rng rng(808);
  std::size_t perturbed = 0;
  for (int it = 0; it < 100; ++it) {
    const SceneImage im = scene_image(rng, it);
    RunConfig cfg;
    cfg.levels = 3;
    cfg.heads = all_heads();
    const int classes = 3;
    const ImageHeads heads = run_heads(im, static_cast<std::size_t>(it), classes, cfg);
    for (std::size_t h = 0; h < heads.assignments.size(); ++h) {
      const auto& a = heads.assignments[h];
      const auto spec = loss_spec_for(cfg.heads[h].kind, classes);
      HeadPredictions pred;
      const std::size_t cols = static_cast<std::size_t>(classes) + (spec.cls == ClsLossKind::cross_entropy);
      pred.cls_logits = Matrix<double>(a.num_priors, cols);
      for (std::size_t r = 0; r < a.num_priors; ++r)
        for (std::size_t c = 0; c < cols; ++c) pred.cls_logits(r, c) = rng.uniform(-4, 4);
      for (std::size_t r = 0; r < a.num_priors; ++r) {
        pred.boxes.push_back(rng.box(im.width, 1.0));
        if (spec.centerness) pred.centerness_logits.push_back(rng.uniform(-2, 2));
      }
      const double base = head_encoder_loss(a, pred, spec);
      for (int trial = 0; trial < 5; ++trial) {
        auto moved = pred;
        for (const auto& n : a.neg) moved.boxes[static_cast<std::size_t>(n.index)] = rng.box(1000.0);
        const double after = head_encoder_loss(a, moved, spec);
        check(after == base, "head " + std::string(to_string(cfg.heads[h].kind)) + " loss moved from " +
                                 fmt(base) + " to " + fmt(after));
        perturbed += a.neg.size();
      }
      // sanity: a positive box does matter
      if (!a.pos.empty()) {
        auto moved = pred;
        moved.boxes[static_cast<std::size_t>(a.pos[0].ref.index)] = {0, 0, 1, 1};
        auto far = moved;
        far.boxes[static_cast<std::size_t>(a.pos[0].ref.index)] = {0, 0, 500, 500};
        check(head_encoder_loss(a, moved, spec) != head_encoder_loss(a, far, spec),
              "positive boxes do not reach the loss");
      }
    }
  }
  if (check.out.ok)
    check.out.detail = std::to_string(perturbed) + " negative boxes perturbed, loss bit-identical";
  return check.out;
}

// ---- 9

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[e.path().filename().string()] = s.str();
  }
  return out;
}

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome cli_determinism(const std::string& cli) {
  Check check;
  const fs::path work = fs::temp_directory_path() / "cohybrid_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  double pipeline_seconds = 0.0;
  std::map<std::string, std::string> runs[2];
  if (!cli.empty()) {
    auto sh = [&](const std::string& args) {
      const std::string cmd = shell_quote(cli) + " " + args + " >/dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      check(rc == 0, "command failed: " + args);
      return rc == 0;
    };
    if (!sh("synth --images 100 --seed 11 --output " + shell_quote(work / "corpus"))) return check.out;
    const fs::path scene = work / "corpus" / "scene.json";
    for (int r = 0; r < 2; ++r) {
      const fs::path out = work / ("run" + std::to_string(r));
      const std::string common =
          " --input " + shell_quote(scene) + " --output " + shell_quote(out) + (r == 1 ? " --threads 3" : "");
      const auto t0 = std::chrono::steady_clock::now();
      sh("assign" + common);
      sh("targets" + common);
      sh("diagnose" + common);
      const double t = seconds_since(t0);
      if (r == 0) pipeline_seconds = t;
      if (check.out.ok) runs[r] = read_dir(out);
    }
  } else {
    SyntheticOptions so;
    so.num_images = 100;
    const SceneFile scene = make_synthetic_scene(so, 11);
    for (int r = 0; r < 2; ++r) {
      RunConfig cfg;
      cfg.threads = r == 0 ? 1 : 3;
      const auto t0 = std::chrono::steady_clock::now();
      for (auto files : {cmd_assign(scene, cfg), cmd_targets(scene, cfg), cmd_diagnose(scene, cfg)})
        for (auto& f : files) runs[r][f.name] = std::move(f.text);
      if (r == 0) pipeline_seconds = seconds_since(t0);
    }
  }
  if (!check.out.ok) return check.out;
  check(runs[0].size() >= 4, "expected at least 4 output files, got " + std::to_string(runs[0].size()));
  check(runs[0] == runs[1], "outputs differ between runs");
  check(pipeline_seconds < 60.0, "pipeline took " + fmt(pipeline_seconds) + " s");
  if (check.out.ok) {
    std::size_t bytes = 0;
    for (const auto& [_, t] : runs[0]) bytes += t.size();
    check.out.detail = std::string(cli.empty() ? "in-process" : "cli") + ", " +
                       std::to_string(runs[0].size()) + " files (" + std::to_string(bytes) +
                       " bytes) identical, assign+targets+diagnose " + fmt(pipeline_seconds) + " s";
  }
  fs::remove_all(work);
  return check.out;
}

// ---- 10

// Level-1 cell centers strictly inside gt `g` and inside no other gt.
int own_centers(const PriorSet& points, const std::vector<GtObject>& objects, std::size_t g) {
  auto inside = [](const Point& c, const Box& b) { return c.x > b.x1 && c.x < b.x2 && c.y > b.y1 && c.y < b.y2; };
  int n = 0;
  for (const auto& p : points.entries) {
    if (p.level != 1 || !inside(p.center, objects[g].box)) continue;
    bool shared = false;
    for (std::size_t o = 0; o < objects.size(); ++o) shared = shared || (o != g && inside(p.center, objects[o].box));
    n += !shared;
  }
  return n;
}

Outcome positive_multiplicity() {
  Check check;
  Rng rng(1010);
  RunConfig cfg;  // default 5-level pyramid
  cfg.heads = all_heads();
  std::size_t gts = 0, rejected = 0;
  std::vector<std::size_t> totals(cfg.heads.size(), 0);
  for (int it = 0; it < 100; ++it) {
    SceneImage im;
    PriorSet points;
    for (;;) {
      im = scene_image(rng, it);
      points = generate_points(build_pyramid_spec(im.height, im.width, cfg.levels));
      bool covered = true;
      for (std::size_t g = 0; g < im.objects.size(); ++g) covered = covered && own_centers(points, im.objects, g) >= 4;
      if (covered) break;
      ++rejected;
    }
    const ImageHeads heads = run_heads(im, static_cast<std::size_t>(it), 3, cfg);
    gts += im.objects.size();
    for (std::size_t h = 0; h < heads.assignments.size(); ++h) {
      const auto& a = heads.assignments[h];
      std::vector<int> per(im.objects.size(), 0);
      for (const auto& p : a.pos) ++per[static_cast<std::size_t>(p.gt)];
      for (std::size_t g = 0; g < per.size(); ++g)
        check(per[g] >= 1, std::string(to_string(cfg.heads[h].kind)) + " left gt " + std::to_string(g) +
                               " of scene " + std::to_string(it) + " without a positive");
      totals[h] += a.pos.size();
      const auto kind = cfg.heads[h].kind;
      if (kind == HeadKind::atss || kind == HeadKind::faster_rcnn)
        check(a.pos.size() > im.objects.size(),
              std::string(to_string(kind)) + " has " + std::to_string(a.pos.size()) + " positives for " +
                  std::to_string(im.objects.size()) + " gts in scene " + std::to_string(it));
    }
  }
  if (check.out.ok) {
    std::string d = std::to_string(gts) + " gts (" + std::to_string(rejected) + " scenes redrawn); positives per gt:";
    for (std::size_t h = 0; h < totals.size(); ++h)
      d += " " + std::string(to_string(cfg.heads[h].kind)) + " " +
           fmt(static_cast<double>(totals[h]) / static_cast<double>(gts));
    check.out.detail = d;
  }
  return check.out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"hungarian exactness", hungarian_exactness},
      {"assigner oracle equivalence", assigner_oracles},
      {"geometry bounds and gradients", geometry_and_gradients},
      {"global loss arithmetic", global_loss_arithmetic},
      {"fcos positive box sizing", fcos_box_sizing},
      {"query group contract", query_group_contract},
      {"diagnostics monotonicity and extremes", diagnostics_contract},
      {"encoder loss ignores negative boxes", encoder_negative_invariance},
      {"cli determinism", [&] { return cli_determinism(cli); }},
      {"positive multiplicity", positive_multiplicity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
