#include "dirmap/synth.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace dirmap {

namespace {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Path = std::vector<Point>;

void line_to(Path& path, Point p) {
  path.push_back(p);
}

// Quarter arc around `centre` from angle a0 to a1 (radians), excluding the
// start point which is already on the path.
void arc_to(Path& path, Point centre, double radius, double a0, double a1) {
  constexpr int kPieces = 24;
  for (int i = 1; i <= kPieces; ++i) {
    const double a = a0 + (a1 - a0) * i / kPieces;
    path.push_back({centre.x + radius * std::cos(a), centre.y + radius * std::sin(a)});
  }
}

Path eastbound() {
  Path p{{0.0, 1.0}};
  line_to(p, {4.5, 1.0});
  arc_to(p, {4.5, 1.5}, 0.5, -kPi / 2, 0.0);
  line_to(p, {5.0, 6.5});
  arc_to(p, {5.5, 6.5}, 0.5, kPi, kPi / 2);
  line_to(p, {10.0, 7.0});
  return p;
}

Path westbound() {
  Path p{{10.0, 1.0}};
  line_to(p, {5.5, 1.0});
  arc_to(p, {5.5, 1.5}, 0.5, -kPi / 2, -kPi);
  line_to(p, {5.0, 6.5});
  arc_to(p, {4.5, 6.5}, 0.5, 0.0, kPi / 2);
  line_to(p, {0.0, 7.0});
  return p;
}

Path southbound() {
  return {{5.0, 8.0}, {5.0, 0.0}};
}

Path l_path() {
  return {{2.0, 1.0}, {8.0, 1.0}, {8.0, 7.0}};
}

// `count` points at equal arc length along the polyline, ends included.
Path resample(const Path& path, std::size_t count) {
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < path.size(); ++i) {
    cumulative.push_back(cumulative.back() +
                         std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y));
  }
  const double length = cumulative.back();
  Path out;
  std::size_t seg = 1;
  for (std::size_t k = 0; k < count; ++k) {
    if (count == 1) {
      out.push_back(path.front());
      break;
    }
    if (k + 1 == count) {
      out.push_back(path.back());
      break;
    }
    const double s = length * static_cast<double>(k) / static_cast<double>(count - 1);
    while (seg + 1 < path.size() && cumulative[seg] < s) {
      ++seg;
    }
    const Point a = path[seg - 1];
    const Point b = path[seg];
    const double span = cumulative[seg] - cumulative[seg - 1];
    const double u = span > 0.0 ? (s - cumulative[seg - 1]) / span : 0.0;
    out.push_back({a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u});
  }
  return out;
}

struct Agent {
  std::string track_id;
  Path path;
  bool heading_noise = true;
};

}  // namespace

std::optional<Scene> parse_scene(std::string_view name) {
  for (Scene s : {Scene::unimodal, Scene::multimodal, Scene::kuka_loop, Scene::human_l_path}) {
    if (scene_name(s) == name) {
      return s;
    }
  }
  return std::nullopt;
}

std::string_view scene_name(Scene scene) {
  switch (scene) {
    case Scene::unimodal:
      return "unimodal";
    case Scene::multimodal:
      return "multimodal";
    case Scene::kuka_loop:
      return "kuka_loop";
    case Scene::human_l_path:
      return "human_l_path";
  }
  return "unknown";
}

void SceneSpec::validate() const {
  if (n_agents < 1 || steps_per_agent < 1) {
    throw std::domain_error("scene: n_agents and steps_per_agent must be at least 1");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw std::domain_error("scene: noise_sigma must be a non-negative finite number");
  }
}

GridSpec scene_grid() {
  return {0.0, 0.0, 10.0, 8.0, 5, 4};
}

std::string region_of(Scene scene, double x, double y) {
  const auto cell = cell_of(scene_grid(), x, y);
  if (!cell) {
    return "outside";
  }
  if (scene == Scene::kuka_loop || scene == Scene::human_l_path) {
    return "path";
  }
  if (cell->col != 2) {
    return "roadside";
  }
  return cell->row == 1 || cell->row == 2 ? "crosswalk" : "junction";
}

SceneData generate(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  std::vector<Agent> agents;
  auto add_group = [&](char tag, std::size_t count, const Path& path) {
    for (std::size_t i = 0; i < count; ++i) {
      agents.push_back({fmt::format("{}{}", tag, i), path, true});
    }
  };
  switch (spec.scene) {
    case Scene::unimodal: {
      const std::size_t a = (spec.n_agents + 1) / 2;
      add_group('A', a, eastbound());
      add_group('B', spec.n_agents - a, westbound());
      break;
    }
    case Scene::multimodal: {
      const std::size_t third = spec.n_agents / 3;
      const std::size_t extra = spec.n_agents % 3;
      add_group('A', third + (extra > 0 ? 1 : 0), eastbound());
      add_group('B', third + (extra > 1 ? 1 : 0), westbound());
      add_group('C', third, southbound());
      break;
    }
    case Scene::kuka_loop: {
      const Point corners[4] = {{2.0, 2.0}, {8.0, 2.0}, {8.0, 6.0}, {2.0, 6.0}};
      for (std::size_t lap = 0; lap < spec.n_agents; ++lap) {
        Path path;
        for (const Point& c : corners) {
          path.push_back({c.x + spec.noise_sigma * unit_normal(rng), c.y + spec.noise_sigma * unit_normal(rng)});
        }
        path.push_back(path.front());
        agents.push_back({fmt::format("lap{}", lap), path, false});
      }
      break;
    }
    case Scene::human_l_path:
      agents.push_back({"human", l_path(), true});
      break;
  }

  SceneData data;
  std::size_t tick = 0;
  for (const Agent& agent : agents) {
    const Path targets = resample(agent.path, spec.steps_per_agent);
    Point p = targets.front();
    data.points.push_back({static_cast<double>(tick++), agent.track_id, p.x, p.y});
    for (std::size_t k = 1; k < targets.size(); ++k) {
      const Point target = targets[k];
      const double bearing = std::atan2(target.y - p.y, target.x - p.x);
      data.truth.push_back({data.truth.size(), agent.track_id, data.points.back().t, p.x, p.y, Angle(bearing),
                            region_of(spec.scene, p.x, p.y)});
      if (agent.heading_noise && spec.noise_sigma > 0.0) {
        const double heading = bearing + spec.noise_sigma * unit_normal(rng);
        const double step = std::hypot(target.x - p.x, target.y - p.y);
        p = {p.x + step * std::cos(heading), p.y + step * std::sin(heading)};
      } else {
        p = target;
      }
      data.points.push_back({static_cast<double>(tick++), agent.track_id, p.x, p.y});
    }
  }
  return data;
}

void write_truth_csv(std::ostream& out, std::span<const SegmentTruth> truth) {
  out << "segment_id,true_theta\n";
  for (const SegmentTruth& s : truth) {
    out << fmt::format("{},{}\n", s.segment_id, s.true_theta.radians());
  }
}

}  // namespace dirmap
