#include "vsn/regions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "vsn/filters.hpp"

namespace vsn {

void ProposerParams::validate() const {
  if (scales.empty()) throw DataError("ProposerParams: scales must be nonempty");
  for (std::size_t i = 1; i < scales.size(); ++i) {
    if (scales[i] <= scales[i - 1]) {
      throw DataError("ProposerParams: scales must be strictly increasing");
    }
  }
  if (min_region_px < 1) throw DataError("ProposerParams: min_region_px must be >= 1");
  if (edge_weight < 0.0 || edge_weight > 1.0) {
    throw DataError("ProposerParams: edge_weight must be in [0,1]");
  }
}

namespace {

struct Edge {
  int a;
  int b;
  double weight;
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Merge components below min_px into the neighbor across their cheapest
// boundary edge. Edges are sorted, so a single ascending pass suffices to
// absorb every undersized component that has any neighbor.
void absorb_small_components(UnionFind& uf, const std::vector<Edge>& edges, int min_px, int n) {
  std::vector<int> size(n, 0);
  for (int v = 0; v < n; ++v) size[uf.find(v)]++;
  for (const Edge& e : edges) {
    const int ra = uf.find(e.a);
    const int rb = uf.find(e.b);
    if (ra == rb) continue;
    if (size[ra] < min_px || size[rb] < min_px) {
      uf.unite(ra, rb);
      size[uf.find(ra)] = size[ra] + size[rb];
    }
  }
}

std::vector<BinaryMask> components_as_masks(UnionFind& uf, int h, int w) {
  const int n = h * w;
  std::unordered_map<int, std::vector<std::uint8_t>> comps;
  for (int v = 0; v < n; ++v) {
    auto& mask = comps[uf.find(v)];
    if (mask.empty()) mask.assign(static_cast<std::size_t>(n), 0);
    mask[static_cast<std::size_t>(v)] = 1;
  }
  std::vector<BinaryMask> out;
  out.reserve(comps.size());
  // deterministic order: by smallest member index
  std::vector<std::pair<int, const std::vector<std::uint8_t>*>> keyed;
  keyed.reserve(comps.size());
  for (const auto& [root, mask] : comps) {
    const auto first = std::find(mask.begin(), mask.end(), 1);
    keyed.emplace_back(static_cast<int>(first - mask.begin()), &mask);
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [idx, mask] : keyed) out.emplace_back(h, w, *mask);
  return out;
}

}  // namespace

RegionSet propose_regions(const ImageTensor& image, const ProposerParams& params) {
  params.validate();
  const int h = image.height(), w = image.width();
  const int n = h * w;

  RegionSet rs;
  rs.height = h;
  rs.width = w;

  if (n == 1) {
    rs.regions.emplace_back(1, 1, std::vector<std::uint8_t>{1});
    return rs;
  }

  const std::vector<double> gray = to_gray(image);
  const int channels = image.channels();
  const double color_norm = 1.0 / std::sqrt(static_cast<double>(channels));

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2) * n);
  // gradient term = gray finite difference across the edge itself, so flat
  // areas stay mergeable at any threshold regardless of nearby boundaries
  auto edge_between = [&](int y0, int x0, int y1, int x1) {
    double d2 = 0.0;
    for (int c = 0; c < channels; ++c) {
      const double d = image.at(c, y0, x0) - image.at(c, y1, x1);
      d2 += d * d;
    }
    const double color = std::sqrt(d2) * color_norm;
    const double gdiff = std::abs(gray[static_cast<std::size_t>(y0) * w + x0] -
                                  gray[static_cast<std::size_t>(y1) * w + x1]);
    const double weight = (1.0 - params.edge_weight) * color + params.edge_weight * gdiff;
    edges.push_back({y0 * w + x0, y1 * w + x1, weight});
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) edge_between(y, x, y, x + 1);
      if (y + 1 < h) edge_between(y, x, y + 1, x);
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return a.weight < b.weight; });

  // Thresholds ascend, so merging continues incrementally across scales.
  UnionFind uf(n);
  std::size_t next_edge = 0;
  std::unordered_set<std::string> seen;
  for (double threshold : params.scales) {
    while (next_edge < edges.size() && edges[next_edge].weight < threshold) {
      uf.unite(edges[next_edge].a, edges[next_edge].b);
      ++next_edge;
    }
    UnionFind snapshot = uf;
    absorb_small_components(snapshot, edges, params.min_region_px, n);
    for (BinaryMask& mask : components_as_masks(snapshot, h, w)) {
      std::string key(mask.data().begin(), mask.data().end());
      if (seen.insert(std::move(key)).second) rs.regions.push_back(std::move(mask));
    }
  }
  rs.validate();
  return rs;
}

ProbMap project(const ProbMap& a, const RegionSet& r) {
  if (a.height() != r.height || a.width() != r.width) {
    throw DataError("project: map and region set dimensions differ");
  }
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (const BinaryMask& region : r.regions) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (region[i]) {
        sum += a[i];
        ++count;
      }
    }
    if (count == 0) continue;
    const double mean = sum / static_cast<double>(count);
    for (std::size_t i = 0; i < n; ++i) {
      if (region[i] && mean > out[i]) out[i] = mean;
    }
  }
  return ProbMap(a.height(), a.width(), std::move(out));
}

}  // namespace vsn
