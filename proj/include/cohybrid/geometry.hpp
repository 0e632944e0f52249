#pragma once

// Axis-aligned boxes, overlap measures and the regression encodings used as
// assigner targets. Boxes are continuous and half-open: area is
// (x2 - x1) * (y2 - y1) with no +1 pixel convention.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <sstream>
#include <string>

#include "cohybrid/error.hpp"
#include "cohybrid/matrix.hpp"

namespace cohybrid {

struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  [[nodiscard]] double width() const noexcept { return x2 - x1; }
  [[nodiscard]] double height() const noexcept { return y2 - y1; }
  [[nodiscard]] double area() const noexcept { return width() * height(); }
  [[nodiscard]] double center_x() const noexcept { return 0.5 * (x1 + x2); }
  [[nodiscard]] double center_y() const noexcept { return 0.5 * (y1 + y2); }

  friend bool operator==(const Box&, const Box&) = default;
};

struct CenterBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const CenterBox&, const CenterBox&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Distances from a point to the four sides of its box, plus the FCOS quality
// target sqrt(min(l,r)/max(l,r) * min(t,b)/max(t,b)).
struct LtrbTarget {
  double l = 0.0;
  double t = 0.0;
  double r = 0.0;
  double b = 0.0;
  double centerness = 0.0;
};

struct DeltaTarget {
  double dx = 0.0;
  double dy = 0.0;
  double dw = 0.0;
  double dh = 0.0;

  friend bool operator==(const DeltaTarget&, const DeltaTarget&) = default;
};

inline std::string to_string(const Box& b) {
  std::ostringstream os;
  os.precision(17);
  os << '[' << b.x1 << ',' << b.y1 << ',' << b.x2 << ',' << b.y2 << ']';
  return os.str();
}

[[nodiscard]] inline bool is_valid(const Box& b) noexcept {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
         std::isfinite(b.y2) && b.x1 <= b.x2 && b.y1 <= b.y2;
}

inline const Box& validate(const Box& b) {
  if (!is_valid(b)) throw ValidationError("invalid box " + to_string(b));
  return b;
}

inline const CenterBox& validate(const CenterBox& c) {
  if (!std::isfinite(c.cx) || !std::isfinite(c.cy) || !std::isfinite(c.w) ||
      !std::isfinite(c.h) || c.w < 0.0 || c.h < 0.0)
    throw ValidationError("invalid center box");
  return c;
}

[[nodiscard]] inline CenterBox to_center(const Box& b) {
  validate(b);
  return {b.center_x(), b.center_y(), b.width(), b.height()};
}

[[nodiscard]] inline Box to_corners(const CenterBox& c) {
  validate(c);
  return {c.cx - 0.5 * c.w, c.cy - 0.5 * c.h, c.cx + 0.5 * c.w,
          c.cy + 0.5 * c.h};
}

[[nodiscard]] inline Box clamp_to(const Box& b, double width, double height) {
  return {std::clamp(b.x1, 0.0, width), std::clamp(b.y1, 0.0, height),
          std::clamp(b.x2, 0.0, width), std::clamp(b.y2, 0.0, height)};
}

[[nodiscard]] inline bool strictly_inside(const Point& p, const Box& b) noexcept {
  return p.x > b.x1 && p.x < b.x2 && p.y > b.y1 && p.y < b.y2;
}

[[nodiscard]] inline double intersection_area(const Box& a, const Box& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  return (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
}

// Zero union (two degenerate boxes) yields 0.
[[nodiscard]] inline double iou(const Box& a, const Box& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

struct GiouWithGrad {
  double value = 0.0;
  // d GIoU / d (x1, y1, x2, y2) of the first box.
  std::array<double, 4> grad{};
};

// Generalized IoU and its analytic gradient with respect to `a`. Where an
// edge of `a` coincides with the matching edge of `b` the edge is treated as
// owned by `b` (zero contribution). A zero-area enclosing box gives value 0
// and zero gradient.
[[nodiscard]] inline GiouWithGrad giou_with_grad(const Box& a, const Box& b) noexcept {
  GiouWithGrad out;

  const double aw = a.width();
  const double ah = a.height();

  const double ix1 = std::max(a.x1, b.x1);
  const double iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2);
  const double iy2 = std::min(a.y2, b.y2);
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  const bool overlap = iw > 0.0 && ih > 0.0;
  const double inter = overlap ? iw * ih : 0.0;

  const double uni = aw * ah + b.area() - inter;

  const double cw = std::max(a.x2, b.x2) - std::min(a.x1, b.x1);
  const double ch = std::max(a.y2, b.y2) - std::min(a.y1, b.y1);
  const double enclose = cw * ch;
  if (!(enclose > 0.0)) return out;

  const double iou_v = uni > 0.0 ? inter / uni : 0.0;
  // enclose >= union exactly, but rounding can flip the sign when nested
  out.value = iou_v - std::max(0.0, enclose - uni) / enclose;

  // Partial derivatives of intersection, own area and enclosing area.
  std::array<double, 4> d_inter{};
  if (overlap) {
    d_inter[0] = a.x1 > b.x1 ? -ih : 0.0;
    d_inter[1] = a.y1 > b.y1 ? -iw : 0.0;
    d_inter[2] = a.x2 < b.x2 ? ih : 0.0;
    d_inter[3] = a.y2 < b.y2 ? iw : 0.0;
  }
  const std::array<double, 4> d_area{-ah, -aw, ah, aw};
  const std::array<double, 4> d_enclose{
      a.x1 < b.x1 ? -ch : 0.0, a.y1 < b.y1 ? -cw : 0.0,
      a.x2 > b.x2 ? ch : 0.0, a.y2 > b.y2 ? cw : 0.0};

  for (std::size_t k = 0; k < 4; ++k) {
    const double d_uni = d_area[k] - d_inter[k];
    double d_iou = 0.0;
    if (uni > 0.0) d_iou = (d_inter[k] * uni - inter * d_uni) / (uni * uni);
    // GIoU = IoU - 1 + U / C
    const double d_ratio = (d_uni * enclose - uni * d_enclose[k]) / (enclose * enclose);
    out.grad[k] = d_iou + d_ratio;
  }
  return out;
}

[[nodiscard]] inline double giou(const Box& a, const Box& b) noexcept {
  return giou_with_grad(a, b).value;
}

[[nodiscard]] inline Matrix<double> pairwise_iou(std::span<const Box> a,
                                                 std::span<const Box> b) {
  for (const auto& x : a) validate(x);
  for (const auto& x : b) validate(x);
  Matrix<double> out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = iou(a[i], b[j]);
  return out;
}

[[nodiscard]] inline Matrix<double> pairwise_giou(std::span<const Box> a,
                                                  std::span<const Box> b) {
  for (const auto& x : a) validate(x);
  for (const auto& x : b) validate(x);
  Matrix<double> out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = giou(a[i], b[j]);
  return out;
}

[[nodiscard]] inline double centerness(double l, double t, double r, double b) noexcept {
  if (l <= 0.0 || t <= 0.0 || r <= 0.0 || b <= 0.0) return 0.0;
  return std::sqrt((std::min(l, r) / std::max(l, r)) *
                   (std::min(t, b) / std::max(t, b)));
}

[[nodiscard]] inline LtrbTarget encode_ltrb(const Point& p, const Box& gt) {
  validate(gt);
  if (!strictly_inside(p, gt))
    throw ValidationError("point is not strictly inside box " + to_string(gt));
  LtrbTarget out{p.x - gt.x1, p.y - gt.y1, gt.x2 - p.x, gt.y2 - p.y, 0.0};
  out.centerness = centerness(out.l, out.t, out.r, out.b);
  return out;
}

[[nodiscard]] inline DeltaTarget encode_deltas(const Box& anchor, const Box& gt) {
  validate(anchor);
  validate(gt);
  if (!(anchor.width() > 0.0 && anchor.height() > 0.0))
    throw ValidationError("zero-size anchor " + to_string(anchor));
  if (!(gt.width() > 0.0 && gt.height() > 0.0))
    throw ValidationError("zero-size target " + to_string(gt));
  const double aw = anchor.width();
  const double ah = anchor.height();
  return {(gt.center_x() - anchor.center_x()) / aw,
          (gt.center_y() - anchor.center_y()) / ah, std::log(gt.width() / aw),
          std::log(gt.height() / ah)};
}

[[nodiscard]] inline Box decode_deltas(const Box& anchor, const DeltaTarget& d) {
  validate(anchor);
  if (!(anchor.width() > 0.0 && anchor.height() > 0.0))
    throw ValidationError("zero-size anchor " + to_string(anchor));
  const double aw = anchor.width();
  const double ah = anchor.height();
  const double cx = anchor.center_x() + d.dx * aw;
  const double cy = anchor.center_y() + d.dy * ah;
  const double w = aw * std::exp(d.dw);
  const double h = ah * std::exp(d.dh);
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

}  // namespace cohybrid
