#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace dirmap {

inline constexpr int kNoise = -1;

/// Density-based clustering over n points addressed by index.
/// `neighbors(i, out)` must fill `out` with every j (including i) whose
/// distance to i is <= eps. Points are scanned in index order; a border point
/// reachable from several clusters joins the first cluster that reaches it.
/// Returns one label per point: cluster id >= 0, or kNoise.
template <class NeighborFn>
std::vector<int> dbscan(std::size_t n, std::size_t min_pts, NeighborFn&& neighbors) {
  constexpr int kUnvisited = -2;
  std::vector<int> labels(n, kUnvisited);
  std::vector<std::size_t> hood;
  std::deque<std::size_t> frontier;
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) {
      continue;
    }
    hood.clear();
    neighbors(i, hood);
    if (hood.size() < min_pts) {
      labels[i] = kNoise;
      continue;
    }
    labels[i] = cluster;
    frontier.clear();
    const auto absorb = [&] {
      for (std::size_t j : hood) {
        if (labels[j] == kNoise) {
          labels[j] = cluster;
        } else if (labels[j] == kUnvisited) {
          labels[j] = cluster;
          frontier.push_back(j);
        }
      }
    };
    absorb();
    while (!frontier.empty()) {
      const std::size_t q = frontier.front();
      frontier.pop_front();
      hood.clear();
      neighbors(q, hood);
      if (hood.size() >= min_pts) {
        absorb();
      }
    }
    ++cluster;
  }
  return labels;
}

}  // namespace dirmap
