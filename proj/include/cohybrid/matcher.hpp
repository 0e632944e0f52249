#pragma once

// One-to-one set matching between queries (rows) and ground truth (cols).
//
// hungarian_solve runs a shortest-augmenting-path solver with dual potentials
// on the rectangular matrix, then picks the lexicographically smallest pair
// list among all optimal assignments. Optimal assignments are exactly the
// matchings inside the tight-edge graph of the final potentials that saturate
// the smaller side and every large-side vertex with a nonzero potential, so
// the tie-break is a greedy walk over that graph with bipartite feasibility
// checks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cohybrid/error.hpp"
#include "cohybrid/geometry.hpp"
#include "cohybrid/matrix.hpp"

namespace cohybrid {

using CostMatrix = Matrix<double>;

struct MatchPair {
  int query = 0;
  int gt = 0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
  friend auto operator<=>(const MatchPair&, const MatchPair&) = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // sorted by query index
  double total_cost = 0.0;
};

namespace detail {

// Kuhn's augmenting-path matcher over an explicit adjacency list.
class BipartiteMatcher {
 public:
  BipartiteMatcher(const std::vector<std::vector<int>>& adj, std::size_t right_size)
      : adj_(adj), match_right_(right_size, -1), seen_(right_size, 0) {}

  // Size of a maximum matching of `left` into right vertices allowed by
  // `right_ok`.
  std::size_t max_matching(std::span<const int> left, const std::vector<char>& right_ok) {
    std::fill(match_right_.begin(), match_right_.end(), -1);
    right_ok_ = &right_ok;
    std::size_t size = 0;
    for (int u : left) {
      ++stamp_;
      if (augment(u)) ++size;
    }
    return size;
  }

 private:
  bool augment(int u) {
    for (int v : adj_[u]) {
      if (!(*right_ok_)[v] || seen_[v] == stamp_) continue;
      seen_[v] = stamp_;
      if (match_right_[v] < 0 || augment(match_right_[v])) {
        match_right_[v] = u;
        return true;
      }
    }
    return false;
  }

  const std::vector<std::vector<int>>& adj_;
  std::vector<int> match_right_;
  std::vector<unsigned> seen_;
  unsigned stamp_ = 0;
  const std::vector<char>* right_ok_ = nullptr;
};

struct DualSolution {
  std::vector<double> u;        // small side
  std::vector<double> v;        // large side
  std::vector<int> small_to_large;
};

// Shortest augmenting path with potentials; requires rows <= cols.
inline DualSolution solve_dual(const CostMatrix& a) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  DualSolution out;
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  out.small_to_large.assign(n, -1);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) out.small_to_large[p[j] - 1] = static_cast<int>(j - 1);
  return out;
}

}  // namespace detail

inline void validate_costs(const CostMatrix& c) {
  if (c.rows() == 0 || c.cols() == 0)
    throw ValidationError("cost matrix needs at least one row and one column");
  for (std::size_t r = 0; r < c.rows(); ++r)
    for (std::size_t k = 0; k < c.cols(); ++k)
      if (!std::isfinite(c(r, k)))
        throw ValidationError("non-finite cost at (" + std::to_string(r) + ", " +
                              std::to_string(k) + ")");
}

// Number of hungarian_solve calls in this process.
inline std::atomic<std::size_t>& solve_call_count() {
  static std::atomic<std::size_t> n{0};
  return n;
}

[[nodiscard]] inline MatchResult hungarian_solve(const CostMatrix& cost) {
  solve_call_count().fetch_add(1, std::memory_order_relaxed);
  validate_costs(cost);

  const std::size_t rows = cost.rows();
  const std::size_t cols = cost.cols();
  const bool transposed = rows > cols;
  const CostMatrix small_major = transposed ? cost.transposed() : cost;
  const detail::DualSolution dual = detail::solve_dual(small_major);

  double max_abs = 0.0;
  for (double x : cost.data()) max_abs = std::max(max_abs, std::abs(x));
  const double tol = 1e-9 * (1.0 + max_abs);

  // Potentials expressed per query / per gt.
  std::vector<double> q_pot(rows), g_pot(cols);
  for (std::size_t r = 0; r < rows; ++r) q_pot[r] = transposed ? dual.v[r] : dual.u[r];
  for (std::size_t c = 0; c < cols; ++c) g_pot[c] = transposed ? dual.u[c] : dual.v[c];

  // Vertices every optimal matching must cover.
  std::vector<char> q_required(rows), g_required(cols);
  for (std::size_t r = 0; r < rows; ++r)
    q_required[r] = transposed ? (q_pot[r] < -tol) : 1;
  for (std::size_t c = 0; c < cols; ++c)
    g_required[c] = transposed ? 1 : (g_pot[c] < -tol);

  std::vector<std::vector<int>> q_adj(rows), g_adj(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (cost(r, c) - q_pot[r] - g_pot[c] <= tol) {
        q_adj[r].push_back(static_cast<int>(c));
        g_adj[c].push_back(static_cast<int>(r));
      }
    }
  }
  // The solver's own matching is always tight; guard against rounding.
  for (std::size_t s = 0; s < dual.small_to_large.size(); ++s) {
    const int l = dual.small_to_large[s];
    const int q = transposed ? l : static_cast<int>(s);
    const int g = transposed ? static_cast<int>(s) : l;
    if (std::find(q_adj[q].begin(), q_adj[q].end(), g) == q_adj[q].end()) {
      q_adj[q].push_back(g);
      std::sort(q_adj[q].begin(), q_adj[q].end());
      g_adj[g].push_back(q);
      std::sort(g_adj[g].begin(), g_adj[g].end());
    }
  }

  detail::BipartiteMatcher q_side(q_adj, cols);
  detail::BipartiteMatcher g_side(g_adj, rows);
  std::vector<char> g_free(cols, 1);

  // Can the queries after `next_q` still cover every required vertex?
  auto feasible = [&](std::size_t next_q) {
    std::vector<int> need_q;
    for (std::size_t r = next_q; r < rows; ++r)
      if (q_required[r]) need_q.push_back(static_cast<int>(r));
    if (q_side.max_matching(need_q, g_free) != need_q.size()) return false;
    std::vector<int> need_g;
    for (std::size_t c = 0; c < cols; ++c)
      if (g_free[c] && g_required[c]) need_g.push_back(static_cast<int>(c));
    std::vector<char> q_open(rows, 0);
    for (std::size_t r = next_q; r < rows; ++r) q_open[r] = 1;
    return g_side.max_matching(need_g, q_open) == need_g.size();
  };

  MatchResult result;
  const std::size_t target = std::min(rows, cols);
  for (std::size_t q = 0; q < rows && result.pairs.size() < target; ++q) {
    for (int g : q_adj[q]) {
      if (!g_free[g]) continue;
      g_free[g] = 0;
      if (feasible(q + 1)) {
        result.pairs.push_back({static_cast<int>(q), g});
        break;
      }
      g_free[g] = 1;
    }
  }

  for (const auto& pr : result.pairs) result.total_cost += cost(pr.query, pr.gt);
  return result;
}

// Deformable-DETR style matching cost.
struct MatcherWeights {
  double cls = 2.0;
  double l1 = 5.0;
  double giou = 2.0;
  double alpha = 0.25;
  double gamma = 2.0;
};

// Per-query output: class probabilities and a normalized (cx, cy, w, h) box.
struct QueryPrediction {
  std::vector<double> class_scores;
  CenterBox box;
};

// Ground-truth object with a box normalized by image size.
struct GtTarget {
  int label = 0;
  Box box;
};

// Focal-style classification cost; 1e-8 keeps the logs finite at p in {0, 1}.
[[nodiscard]] inline double focal_class_cost(double p, double alpha, double gamma) {
  constexpr double eps = 1e-8;
  const double pos = alpha * std::pow(1.0 - p, gamma) * -std::log(p + eps);
  const double neg = (1.0 - alpha) * std::pow(p, gamma) * -std::log(1.0 - p + eps);
  return pos - neg;
}

inline Box clamp_unit(const Box& b) { return clamp_to(b, 1.0, 1.0); }

[[nodiscard]] inline CostMatrix build_detr_cost(std::span<const QueryPrediction> preds,
                                                std::span<const GtTarget> gts,
                                                const MatcherWeights& w = {}) {
  if (preds.empty()) throw ValidationError("no query predictions");
  if (gts.empty()) throw ValidationError("no ground-truth objects");
  const std::size_t num_classes = preds.front().class_scores.size();
  for (std::size_t q = 0; q < preds.size(); ++q) {
    const auto& s = preds[q].class_scores;
    if (s.size() != num_classes)
      throw ValidationError("query " + std::to_string(q) + " has " + std::to_string(s.size()) +
                            " class scores, expected " + std::to_string(num_classes));
    for (double p : s)
      if (!(p >= 0.0 && p <= 1.0))
        throw ValidationError("query " + std::to_string(q) + " has a class score outside [0,1]");
    validate(preds[q].box);
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (gts[g].label < 0 || static_cast<std::size_t>(gts[g].label) >= num_classes)
      throw ValidationError("gt " + std::to_string(g) + " label " +
                            std::to_string(gts[g].label) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    validate(gts[g].box);
  }

  CostMatrix cost(preds.size(), gts.size());
  for (std::size_t q = 0; q < preds.size(); ++q) {
    const CenterBox& pc = preds[q].box;
    const Box pb = clamp_unit(to_corners(pc));
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const CenterBox gc = to_center(gts[g].box);
      const double cls = focal_class_cost(preds[q].class_scores[gts[g].label], w.alpha, w.gamma);
      const double l1 = std::abs(pc.cx - gc.cx) + std::abs(pc.cy - gc.cy) +
                        std::abs(pc.w - gc.w) + std::abs(pc.h - gc.h);
      cost(q, g) = w.cls * cls + w.l1 * l1 - w.giou * giou(pb, gts[g].box);
    }
  }
  return cost;
}

[[nodiscard]] inline MatchResult match_one_to_one(std::span<const QueryPrediction> preds,
                                                  std::span<const GtTarget> gts,
                                                  const MatcherWeights& w = {}) {
  return hungarian_solve(build_detr_cost(preds, gts, w));
}

}  // namespace cohybrid
