#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dirmap/angle.hpp"
#include "dirmap/grid.hpp"
#include "dirmap/ingest.hpp"

namespace dirmap {

enum class Scene { unimodal, multimodal, kuka_loop, human_l_path };

std::optional<Scene> parse_scene(std::string_view name);
std::string_view scene_name(Scene scene);

struct SceneSpec {
  Scene scene = Scene::unimodal;
  std::size_t n_agents = 20;
  std::size_t steps_per_agent = 120;
  /// Heading noise in radians. The kuka loop uses it as the goal perturbation
  /// in meters instead.
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Noise-free bearing of one emitted step, keyed to the step's first point.
struct SegmentTruth {
  std::size_t segment_id = 0;
  std::string track_id;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  Angle true_theta;
  std::string region;
};

struct SceneData {
  std::vector<TrackPoint> points;
  std::vector<SegmentTruth> truth;
};

/// Street scenes live on [0,10] x [0,8]: a road along y = 1 and y = 7 joined by
/// a crosswalk along x = 5. Unimodal agents walk east-north-east or
/// west-north-west; the multimodal scene adds agents walking south along the
/// crosswalk. Groups move one after another in time. The kuka loop repeats a
/// perturbed rectangle, one track per lap; the human path is a single L.
/// Every agent emits exactly steps_per_agent points.
SceneData generate(const SceneSpec& spec);

/// The 5 x 4 grid the street scenes are laid out on.
GridSpec scene_grid();

/// "crosswalk", "junction" or "roadside" for the street scenes, "path" for
/// the others, "outside" off the grid.
std::string region_of(Scene scene, double x, double y);

void write_truth_csv(std::ostream& out, std::span<const SegmentTruth> truth);

}  // namespace dirmap
