#pragma once

// Reference implementations written separately from the library, used only
// to cross-check it.

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "brgy/analytics.hpp"
#include "brgy/geo.hpp"

namespace brgy::oracle {

/// Posterior by direct counting over the raw records, multiplying plain
/// probabilities (no log space, no stored tallies).
inline std::vector<double> enumerate_posterior(const analytics::Dataset& d, double alpha, const std::vector<int>& x) {
  const auto& s = d.schema;
  std::vector<double> joint(s.classes.size(), 0.0);
  double n = static_cast<double>(d.records.size());
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    double in_class = 0;
    for (const auto& r : d.records) in_class += r.label == static_cast<int>(c);
    double p = (in_class + alpha) / (n + alpha * static_cast<double>(s.classes.size()));
    for (std::size_t f = 0; f < x.size(); ++f) {
      if (x[f] < 0) continue;
      double match = 0, known = 0;
      for (const auto& r : d.records) {
        if (r.label != static_cast<int>(c) || r.values[f] < 0) continue;
        known += 1;
        match += r.values[f] == x[f];
      }
      p *= (match + alpha) / (known + alpha * static_cast<double>(s.features[f].values.size()));
    }
    joint[c] = p;
  }
  double z = 0;
  for (double p : joint) z += p;
  for (double& p : joint) p /= z;
  return joint;
}

/// Greedy ID3 with the same stopping and tie rules, built as a pointer tree.
struct GreedyNode {
  int feature = -1;
  std::vector<std::uint64_t> support;
  int majority = 0;
  int missing_route = 0;
  std::map<int, std::unique_ptr<GreedyNode>> kids;
};

class GreedyTree {
 public:
  GreedyTree(const analytics::Schema& s, int max_depth, std::size_t min_leaf)
      : s_(s), max_depth_(max_depth), min_leaf_(min_leaf) {}

  std::unique_ptr<GreedyNode> fit(const std::vector<analytics::Record>& rows) {
    return grow(rows, 0, std::vector<char>(s_.features.size(), 0));
  }

 private:
  static double H(const std::vector<std::uint64_t>& counts) {
    double n = 0, h = 0;
    for (auto c : counts) n += static_cast<double>(c);
    for (auto c : counts)
      if (c) {
        double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
      }
    return h;
  }

  std::vector<std::uint64_t> tally(const std::vector<analytics::Record>& rows) const {
    std::vector<std::uint64_t> t(s_.classes.size(), 0);
    for (const auto& r : rows) ++t[static_cast<std::size_t>(r.label)];
    return t;
  }

  /// Most common known value, smallest on ties; -1 if all missing.
  int commonest(const std::vector<analytics::Record>& rows, std::size_t f) const {
    std::vector<std::uint64_t> n(s_.features[f].values.size(), 0);
    for (const auto& r : rows)
      if (r.values[f] >= 0) ++n[static_cast<std::size_t>(r.values[f])];
    int best = -1;
    for (std::size_t v = 0; v < n.size(); ++v)
      if (n[v] > 0 && (best < 0 || n[v] > n[static_cast<std::size_t>(best)])) best = static_cast<int>(v);
    return best;
  }

  std::map<int, std::vector<analytics::Record>> partition(const std::vector<analytics::Record>& rows, std::size_t f,
                                                          int route) const {
    std::map<int, std::vector<analytics::Record>> parts;
    for (const auto& r : rows) parts[r.values[f] < 0 ? route : r.values[f]].push_back(r);
    return parts;
  }

  std::unique_ptr<GreedyNode> grow(const std::vector<analytics::Record>& rows, int depth, std::vector<char> used) {
    auto node = std::make_unique<GreedyNode>();
    node->support = tally(rows);
    for (std::size_t c = 1; c < node->support.size(); ++c)
      if (node->support[c] > node->support[static_cast<std::size_t>(node->majority)]) node->majority = static_cast<int>(c);
    int classes_present = 0;
    for (auto c : node->support) classes_present += c > 0;
    if (classes_present < 2 || depth >= max_depth_) return node;

    double base = H(node->support);
    double best_gain = -1;
    int best = -1;
    for (std::size_t f = 0; f < s_.features.size(); ++f) {
      if (used[f]) continue;
      int route = commonest(rows, f);
      double g = 0;
      if (route >= 0) {
        double rem = 0;
        for (const auto& [v, part] : partition(rows, f, route))
          rem += static_cast<double>(part.size()) / static_cast<double>(rows.size()) * H(tally(part));
        g = std::max(0.0, base - rem);
      }
      if (g > best_gain + 1e-12) {
        best_gain = g;
        best = static_cast<int>(f);
      }
    }
    if (best < 0 || best_gain <= 1e-12) return node;

    auto f = static_cast<std::size_t>(best);
    int route = commonest(rows, f);
    auto parts = partition(rows, f, route);
    for (const auto& [v, part] : parts)
      if (part.size() < min_leaf_) return node;
    node->feature = best;
    node->missing_route = route;
    used[f] = 1;
    for (const auto& [v, part] : parts) node->kids[v] = grow(part, depth + 1, used);
    return node;
  }

  const analytics::Schema& s_;
  int max_depth_;
  std::size_t min_leaf_;
};

/// Node-for-node comparison in preorder; returns a description of the first
/// difference, or empty when identical.
inline std::string compare_trees(const analytics::DecisionTreeModel& m, const GreedyNode& o, std::size_t at = 0) {
  const auto& n = m.nodes.at(at);
  auto where = "node " + std::to_string(at);
  if (n.support != o.support) return where + ": support differs";
  if (n.majority != o.majority) return where + ": majority differs";
  int feature = n.feature ? static_cast<int>(*n.feature) : -1;
  if (feature != o.feature) return where + ": split feature differs";
  if (feature < 0) return n.children.empty() ? "" : where + ": leaf has children";
  if (n.missing_route != o.missing_route) return where + ": missing route differs";
  if (n.children.size() != o.kids.size()) return where + ": child count differs";
  auto it = o.kids.begin();
  for (const auto& [v, child] : n.children) {
    if (v != it->first) return where + ": child value differs";
    auto sub = compare_trees(m, *it->second, child);
    if (!sub.empty()) return sub;
    ++it;
  }
  return "";
}

/// Spherical great-circle distance via the atan2 (Vincenty sphere) form.
inline double great_circle(GeoPoint a, GeoPoint b, double radius = 6'371'000.0) {
  constexpr double rad = M_PI / 180.0;
  double p1 = a.lat * rad, p2 = b.lat * rad, dl = (b.lon - a.lon) * rad;
  double y = std::hypot(std::cos(p2) * std::sin(dl), std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl));
  double x = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return radius * std::atan2(y, x);
}

/// Counts per cell by testing every point against every cell's bounds.
inline std::vector<std::uint64_t> brute_force_cells(const geo::GridFrame& g, const std::vector<GeoPoint>& pts) {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(g.rows * g.cols), 0);
  double dlat = g.cell_size_m / 111'320.0;
  double dlon = g.cell_size_m / (111'320.0 * std::cos(g.reference_lat * M_PI / 180.0));
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      double lat0 = g.origin.lat + r * dlat, lon0 = g.origin.lon + c * dlon;
      for (const auto& p : pts)
        if (p.lat >= lat0 && p.lat < lat0 + dlat && p.lon >= lon0 && p.lon < lon0 + dlon)
          ++out[static_cast<std::size_t>(r * g.cols + c)];
    }
  return out;
}

/// Random categorical dataset; roughly `missing_rate` of cells are missing.
inline analytics::Dataset random_dataset(std::mt19937_64& rng, std::size_t max_rows = 200, std::size_t max_features = 6,
                                         std::size_t max_values = 4, double missing_rate = 0.0) {
  auto u = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  analytics::Dataset d;
  auto nf = u(1, max_features);
  for (std::size_t f = 0; f < nf; ++f) {
    analytics::Feature feat{"f" + std::to_string(f), {}};
    auto nv = u(2, max_values);
    for (std::size_t v = 0; v < nv; ++v) feat.values.push_back("v" + std::to_string(v));
    d.schema.features.push_back(std::move(feat));
  }
  auto nc = u(2, 3);
  for (std::size_t c = 0; c < nc; ++c) d.schema.classes.push_back("c" + std::to_string(c));
  auto n = u(1, max_rows);
  std::bernoulli_distribution miss(missing_rate);
  for (std::size_t i = 0; i < n; ++i) {
    analytics::Record r;
    for (const auto& f : d.schema.features)
      r.values.push_back(miss(rng) ? analytics::kMissing : static_cast<int>(u(0, f.values.size() - 1)));
    // Labels lean on the first feature so trees have something to find.
    r.label = std::bernoulli_distribution(0.7)(rng) && r.values[0] >= 0
                  ? r.values[0] % static_cast<int>(nc)
                  : static_cast<int>(u(0, nc - 1));
    d.records.push_back(std::move(r));
  }
  return d;
}

}  // namespace brgy::oracle
