#include "contourlab/endpoint_detector.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>

#include "contourlab/raster.hpp"

namespace contourlab {

namespace {

// Clockwise from north: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kDx{0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kDy{-1, -1, 0, 1, 1, 1, 0, -1};

std::array<bool, 8> ring(const BinaryMask& m, int x, int y) {
  std::array<bool, 8> r{};
  for (int k = 0; k < 8; ++k) r[k] = m.get(x + kDx[k], y + kDy[k]);
  return r;
}

int transitions(const std::array<bool, 8>& r) {
  int a = 0;
  for (int k = 0; k < 8; ++k)
    if (!r[k] && r[(k + 1) % 8]) ++a;
  return a;
}

// True if the set neighbors form one 8-connected group within the ring.
bool ring_connected(const std::array<bool, 8>& r) {
  int first = -1, total = 0;
  for (int k = 0; k < 8; ++k)
    if (r[k]) {
      ++total;
      if (first < 0) first = k;
    }
  if (total == 0) return false;
  std::array<bool, 8> seen{};
  std::vector<int> stack{first};
  seen[first] = true;
  int reached = 0;
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    ++reached;
    for (int j = 0; j < 8; ++j) {
      if (!r[j] || seen[j]) continue;
      const int dx = std::abs(kDx[j] - kDx[k]);
      const int dy = std::abs(kDy[j] - kDy[k]);
      if (dx <= 1 && dy <= 1) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  return reached == total;
}

void zhang_suen(BinaryMask& m) {
  std::vector<std::size_t> remove;
  for (bool changed = true; changed;) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      remove.clear();
      for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
          if (!m.get(x, y)) continue;
          const auto r = ring(m, x, y);
          const int b = static_cast<int>(std::count(r.begin(), r.end(), true));
          if (b < 2 || b > 6 || transitions(r) != 1) continue;
          const bool n = r[0], e = r[2], s = r[4], w = r[6];
          if (pass == 0 ? (n && e && s) || (e && s && w) : (n && e && w) || (n && s && w)) continue;
          remove.push_back(static_cast<std::size_t>(y) * m.width + x);
        }
      for (auto i : remove) m.bits[i] = 0;
      changed = changed || !remove.empty();
    }
  }
}

void remove_staircases(BinaryMask& m) {
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      if (!m.get(x, y)) continue;
      const auto r = ring(m, x, y);
      const bool corner = (r[0] && r[2]) || (r[2] && r[4]) || (r[4] && r[6]) || (r[6] && r[0]);
      if (corner && std::count(r.begin(), r.end(), true) >= 2 && ring_connected(r)) m.set(x, y, false);
    }
}

std::vector<PixelPos> raw_endpoints(const BinaryMask& m) {
  std::vector<PixelPos> out;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.get(x, y) && neighbor_count(m, x, y) == 1) out.push_back({x, y});
  return out;
}

void drop_small_components(BinaryMask& m, int min_size) {
  std::vector<std::uint8_t> seen(m.bits.size(), 0);
  std::vector<PixelPos> component, stack;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * m.width + x;
      if (!m.bits[i] || seen[i]) continue;
      component.clear();
      stack = {{x, y}};
      seen[i] = 1;
      while (!stack.empty()) {
        const PixelPos p = stack.back();
        stack.pop_back();
        component.push_back(p);
        for (int k = 0; k < 8; ++k) {
          const int nx = p.x + kDx[k], ny = p.y + kDy[k];
          if (!m.get(nx, ny)) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * m.width + nx;
          if (seen[j]) continue;
          seen[j] = 1;
          stack.push_back({nx, ny});
        }
      }
      if (static_cast<int>(component.size()) < min_size)
        for (const auto& p : component) m.set(p.x, p.y, false);
    }
}

// Walks from an endpoint; if a junction is reached within max_len pixels the
// walked branch is erased.
bool prune_spur(BinaryMask& m, PixelPos start, int max_len) {
  std::vector<PixelPos> path{start};
  PixelPos prev{-1, -1}, cur = start;
  while (static_cast<int>(path.size()) <= max_len) {
    std::vector<PixelPos> next;
    for (int k = 0; k < 8; ++k) {
      const PixelPos q{cur.x + kDx[k], cur.y + kDy[k]};
      if (m.get(q.x, q.y) && !(q == prev) && std::find(path.begin(), path.end(), q) == path.end()) next.push_back(q);
    }
    if (next.empty()) return false;
    if (next.size() > 1 || neighbor_count(m, next[0].x, next[0].y) > 2) {
      for (const auto& p : path) m.set(p.x, p.y, false);
      return true;
    }
    prev = cur;
    cur = next[0];
    path.push_back(cur);
  }
  return false;
}

}  // namespace

std::size_t BinaryMask::count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }

BinaryMask line_mask(const Canvas& image, int deviation) {
  const Canvas gray = to_gray(image);
  BinaryMask m{gray.width, gray.height, std::vector<std::uint8_t>(gray.data.size(), 0)};
  for (std::size_t i = 0; i < gray.data.size(); ++i)
    m.bits[i] = std::abs(static_cast<int>(gray.data[i]) - kBackgroundGray) > deviation;
  return m;
}

int neighbor_count(const BinaryMask& m, int x, int y) {
  int n = 0;
  for (int k = 0; k < 8; ++k) n += m.get(x + kDx[k], y + kDy[k]);
  return n;
}

BinaryMask thin(BinaryMask m) {
  zhang_suen(m);
  remove_staircases(m);
  return m;
}

std::vector<PixelPos> find_endpoints(const Canvas& image, const EndpointOptions& opts) {
  BinaryMask skel = thin(line_mask(image, opts.deviation));
  drop_small_components(skel, opts.min_component);
  bool pruned = true;
  for (int round = 0; pruned && round < 3; ++round) {
    pruned = false;
    for (const auto& e : raw_endpoints(skel))
      if (skel.get(e.x, e.y) && prune_spur(skel, e, opts.spur_length)) pruned = true;
    if (pruned) skel = thin(std::move(skel));
  }
  drop_small_components(skel, opts.min_component);
  return raw_endpoints(skel);
}

PatchLogitGrid endpoint_grid(const std::vector<PixelPos>& endpoints, int width, int height,
                             const EndpointOptions& opts) {
  PatchLogitGrid g;
  g.patch = opts.patch;
  g.stride = opts.stride;
  g.rows = grid_extent(height, opts.patch, opts.stride);
  g.cols = grid_extent(width, opts.patch, opts.stride);
  g.values.assign(static_cast<std::size_t>(g.rows) * g.cols, 0.0);
  for (const auto& e : endpoints) {
    for (int r = 0; r < g.rows; ++r) {
      const int y0 = r * g.stride;
      if (e.y < y0 || e.y >= y0 + g.patch) continue;
      for (int c = 0; c < g.cols; ++c) {
        const int x0 = c * g.stride;
        if (e.x >= x0 && e.x < x0 + g.patch) g.at(r, c) += opts.gain;
      }
    }
  }
  return g;
}

EndpointDetector::EndpointDetector(EndpointOptions opts) : opts_(opts) {
  info_.name = "endpoint";
  info_.scores = true;
  info_.patch_logits = true;
  info_.class_count = 1;
  info_.positive_label = 0;
  info_.thread_safe = true;
}

Scores EndpointDetector::do_classify(const Canvas& image) { return {{do_patch_logits(image).sum()}}; }

PatchLogitGrid EndpointDetector::do_patch_logits(const Canvas& image) {
  return endpoint_grid(find_endpoints(image, opts_), image.width, image.height, opts_);
}

}  // namespace contourlab
