#pragma once

// Loss primitives with analytic gradients, and the aggregation used for
// collaborative training: per-head encoder losses over one-to-many
// assignments, matching-free decoder losses for the auxiliary query groups,
// and the global objective combining them across decoder layers.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cohybrid/assigners.hpp"
#include "cohybrid/collab.hpp"
#include "cohybrid/error.hpp"
#include "cohybrid/geometry.hpp"
#include "cohybrid/matcher.hpp"
#include "cohybrid/matrix.hpp"

namespace cohybrid {

struct ValueGrad {
  double value = 0.0;
  double grad = 0.0;
};

struct FocalOptions {
  double alpha = 0.25;
  double gamma = 2.0;
};

// log(1 + exp(x)) without overflow.
[[nodiscard]] inline double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

[[nodiscard]] inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Sigmoid focal loss for one binary target.
[[nodiscard]] inline ValueGrad focal_loss(double logit, int label, double alpha = 0.25,
                                          double gamma = 2.0) {
  const double p = sigmoid(logit);
  if (label == 1) {
    const double log_p = -softplus(-logit);
    const double q = 1.0 - p;
    const double mod = std::pow(q, gamma);
    return {-alpha * mod * log_p, alpha * mod * (gamma * p * log_p - q)};
  }
  const double log_q = -softplus(logit);
  const double mod = std::pow(p, gamma);
  return {-(1.0 - alpha) * mod * log_q, (1.0 - alpha) * mod * (p - gamma * (1.0 - p) * log_q)};
}

[[nodiscard]] inline ValueGrad focal_loss(double logit, int label, const FocalOptions& o) {
  return focal_loss(logit, label, o.alpha, o.gamma);
}

// Binary cross-entropy on a logit against a soft target in [0, 1].
[[nodiscard]] inline ValueGrad bce_with_logits(double logit, double target) {
  return {target * softplus(-logit) + (1.0 - target) * softplus(logit), sigmoid(logit) - target};
}

struct CrossEntropy {
  double value = 0.0;
  std::vector<double> grad;
};

[[nodiscard]] inline CrossEntropy cross_entropy(std::span<const double> logits, int label) {
  if (logits.empty()) throw ValidationError("cross entropy needs at least one logit");
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
    throw ValidationError("cross entropy label out of range");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double log_z = mx + std::log(z);
  CrossEntropy out{log_z - logits[static_cast<std::size_t>(label)], {}};
  out.grad.reserve(logits.size());
  for (double l : logits) out.grad.push_back(std::exp(l - log_z));
  out.grad[static_cast<std::size_t>(label)] -= 1.0;
  return out;
}

struct BoxLoss {
  double value = 0.0;
  std::array<double, 4> grad{};  // w.r.t. pred (x1, y1, x2, y2)
};

[[nodiscard]] inline BoxLoss giou_loss(const Box& pred, const Box& gt) {
  validate(pred);
  validate(gt);
  const auto g = giou_with_grad(pred, gt);
  return {1.0 - g.value, {-g.grad[0], -g.grad[1], -g.grad[2], -g.grad[3]}};
}

[[nodiscard]] inline double l1_loss(const CenterBox& a, const CenterBox& b) noexcept {
  return std::abs(a.cx - b.cx) + std::abs(a.cy - b.cy) + std::abs(a.w - b.w) +
         std::abs(a.h - b.h);
}

// ---------------------------------------------------------------- encoder

enum class ClsLossKind { focal, cross_entropy };

struct HeadLossSpec {
  ClsLossKind cls = ClsLossKind::focal;
  bool centerness = false;
  int num_classes = 1;
  double w_cls = 1.0;
  double w_reg = 1.0;
  double w_ctr = 1.0;
  FocalOptions focal;
};

[[nodiscard]] inline HeadLossSpec loss_spec_for(HeadKind kind, int num_classes) {
  HeadLossSpec s;
  s.num_classes = num_classes;
  switch (kind) {
    case HeadKind::atss:
    case HeadKind::fcos: s.centerness = true; break;
    case HeadKind::retinanet: break;
    case HeadKind::faster_rcnn: s.cls = ClsLossKind::cross_entropy; break;
  }
  return s;
}

// Raw head outputs for every prior of one image.
struct HeadPredictions {
  // num_priors x num_classes for focal heads, num_classes + 1 (last column
  // background) for cross-entropy heads.
  Matrix<double> cls_logits;
  std::vector<Box> boxes;                // decoded, absolute pixels
  std::vector<double> centerness_logits; // empty unless the head predicts it
};

// Classification loss for one prior. label < 0 means background.
[[nodiscard]] inline double classification_term(const HeadLossSpec& spec,
                                                std::span<const double> logits, int label) {
  if (spec.cls == ClsLossKind::cross_entropy)
    return cross_entropy(logits, label < 0 ? spec.num_classes : label).value;
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c)
    sum += focal_loss(logits[c], static_cast<int>(c) == label ? 1 : 0, spec.focal).value;
  return sum;
}

// cls + reg (+ centerness) over positives, cls only over negatives, summed and
// divided by max(1, #positives). Ignored samples contribute nothing.
[[nodiscard]] inline double head_encoder_loss(const Assignment& a, const HeadPredictions& pred,
                                              const HeadLossSpec& spec) {
  const std::size_t want_cols =
      static_cast<std::size_t>(spec.num_classes) + (spec.cls == ClsLossKind::cross_entropy ? 1 : 0);
  if (pred.cls_logits.rows() != a.num_priors || pred.cls_logits.cols() != want_cols)
    throw ValidationError("classification logits have shape " +
                          std::to_string(pred.cls_logits.rows()) + "x" +
                          std::to_string(pred.cls_logits.cols()) + ", expected " +
                          std::to_string(a.num_priors) + "x" + std::to_string(want_cols));
  if (pred.boxes.size() != a.num_priors)
    throw ValidationError("box predictions do not cover every prior");
  if (spec.centerness && pred.centerness_logits.size() != a.num_priors)
    throw ValidationError("centerness predictions do not cover every prior");

  auto check = [&](int index) {
    if (index < 0 || static_cast<std::size_t>(index) >= a.num_priors)
      throw ValidationError("sample index " + std::to_string(index) + " out of range");
  };

  double total = 0.0;
  for (const auto& p : a.pos) {
    check(p.ref.index);
    const auto i = static_cast<std::size_t>(p.ref.index);
    total += spec.w_cls * classification_term(spec, pred.cls_logits.row(i), p.label);
    total += spec.w_reg * giou_loss(pred.boxes[i], p.gt_box).value;
    if (spec.centerness && p.centerness)
      total += spec.w_ctr * bce_with_logits(pred.centerness_logits[i], *p.centerness).value;
  }
  for (const auto& n : a.neg) {
    check(n.index);
    total += spec.w_cls *
             classification_term(spec, pred.cls_logits.row(static_cast<std::size_t>(n.index)), -1);
  }
  return total / static_cast<double>(std::max<std::size_t>(1, a.pos.size()));
}

struct EncoderLoss {
  std::vector<double> per_head;
  double total = 0.0;
};

[[nodiscard]] inline EncoderLoss encoder_loss(std::span<const Assignment> assignments,
                                              std::span<const HeadPredictions> predictions,
                                              std::span<const HeadLossSpec> specs) {
  if (assignments.size() != predictions.size() || assignments.size() != specs.size())
    throw ValidationError("encoder loss needs one prediction set and spec per head");
  EncoderLoss out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    out.per_head.push_back(head_encoder_loss(assignments[i], predictions[i], specs[i]));
    out.total += out.per_head.back();
  }
  return out;
}

// ---------------------------------------------------------------- decoder

struct QueryOutput {
  std::vector<double> logits;  // per class, sigmoid
  CenterBox box;               // normalized
};

struct DecoderLossWeights {
  double cls = 1.0;
  double l1 = 1.0;
  double giou = 1.0;
  FocalOptions focal;
};

// Loss of one auxiliary group at one decoder layer. Query q is supervised by
// targets[q]; there is no matching step.
[[nodiscard]] inline double decoder_aux_loss(std::span<const QueryOutput> outputs,
                                             std::span<const GtTarget> targets,
                                             const DecoderLossWeights& w = {}) {
  if (outputs.size() != targets.size())
    throw ValidationError("auxiliary group has " + std::to_string(outputs.size()) +
                          " outputs for " + std::to_string(targets.size()) + " bound targets");
  double total = 0.0;
  for (std::size_t q = 0; q < outputs.size(); ++q) {
    const auto& o = outputs[q];
    const auto& t = targets[q];
    if (t.label < 0 || static_cast<std::size_t>(t.label) >= o.logits.size())
      throw ValidationError("bound target label out of range for query " + std::to_string(q));
    for (std::size_t c = 0; c < o.logits.size(); ++c)
      total += w.cls * focal_loss(o.logits[c], static_cast<int>(c) == t.label ? 1 : 0, w.focal).value;
    total += w.l1 * l1_loss(o.box, to_center(t.box));
    total += w.giou * giou_loss(clamp_unit(to_corners(o.box)), t.box).value;
  }
  return total / static_cast<double>(std::max<std::size_t>(1, outputs.size()));
}

// Normalized gt box and label bound to each positive of a head, in the order
// of the auxiliary query group.
[[nodiscard]] inline std::vector<GtTarget> aux_group_targets(const Assignment& a, int image_w,
                                                             int image_h) {
  std::vector<GtTarget> out;
  out.reserve(a.pos.size());
  for (const auto& p : a.pos) out.push_back({p.label, normalize_box(p.gt_box, image_w, image_h)});
  return out;
}

// ---------------------------------------------------------------- global

enum class EncoderPlacement {
  per_layer,  // lambda2 * L_enc added inside the sum over decoder layers
  once,       // lambda2 * L_enc added a single time
};

struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 2.0;
  EncoderPlacement placement = EncoderPlacement::per_layer;
};

struct LossComponents {
  std::vector<double> main_dec;              // [l], one-to-one branch
  std::vector<std::vector<double>> aux_dec;  // [i][l], auxiliary branches
  double enc = 0.0;                          // sum over heads
};

// total = sum_l ( main[l] + lambda1 * sum_i aux[i][l] + lambda2 * enc )
[[nodiscard]] inline double global_loss(const LossComponents& c, const LossWeights& w,
                                        int num_layers) {
  if (num_layers < 1) throw ValidationError("need at least one decoder layer");
  const auto layers = static_cast<std::size_t>(num_layers);
  if (c.main_dec.size() != layers)
    throw ValidationError("missing one-to-one decoder loss: have " +
                          std::to_string(c.main_dec.size()) + " layers, expected " +
                          std::to_string(layers));
  for (std::size_t i = 0; i < c.aux_dec.size(); ++i)
    if (c.aux_dec[i].size() != layers)
      throw ValidationError("missing auxiliary decoder loss for head " + std::to_string(i + 1));

  double total = 0.0;
  for (std::size_t l = 0; l < layers; ++l) {
    double aux = 0.0;
    for (const auto& head : c.aux_dec) aux += head[l];
    total += c.main_dec[l] + w.lambda1 * aux;
    if (w.placement == EncoderPlacement::per_layer) total += w.lambda2 * c.enc;
  }
  if (w.placement == EncoderPlacement::once) total += w.lambda2 * c.enc;
  return total;
}

struct LossReport {
  std::vector<double> enc_per_head;
  LossComponents components;
  LossWeights weights;
  double global = 0.0;
};

[[nodiscard]] inline LossReport make_loss_report(std::vector<double> enc_per_head,
                                                 std::vector<double> main_dec,
                                                 std::vector<std::vector<double>> aux_dec,
                                                 const LossWeights& w = {}) {
  LossReport r;
  r.components.enc = std::accumulate(enc_per_head.begin(), enc_per_head.end(), 0.0);
  r.enc_per_head = std::move(enc_per_head);
  r.components.main_dec = std::move(main_dec);
  r.components.aux_dec = std::move(aux_dec);
  r.weights = w;
  r.global = global_loss(r.components, w, static_cast<int>(r.components.main_dec.size()));
  return r;
}

}  // namespace cohybrid
