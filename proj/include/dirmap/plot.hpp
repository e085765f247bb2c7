#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dirmap/grid_map.hpp"

namespace dirmap {

enum class LobeScale { per_cell, global };

std::optional<LobeScale> parse_lobe_scale(std::string_view name);

struct PlotSpec {
  double cell_size_px = 80.0;
  std::size_t samples_per_lobe = 360;
  /// per_cell scales each lobe by its own peak; global uses the peak over all cells.
  LobeScale normalize = LobeScale::per_cell;
  std::string stroke = "#1f4e79";
  std::string fill = "#9ecae1";

  /// Throws std::domain_error for a non-positive cell size or fewer than 36 samples.
  void validate() const;
};

struct LobePoint {
  double dx = 0.0;  // offset from the cell centre in SVG pixels (y grows downward)
  double dy = 0.0;
};

/// Samples the mixture at samples_per_lobe headings starting at -pi. The
/// radius is max_radius * pdf / exp(log_peak).
std::vector<LobePoint> lobe_polygon(const VonMisesMixture& mix, double log_peak, double max_radius,
                                    std::size_t samples);

/// One polar lobe per observed cell laid out on the grid, row 0 at the bottom.
/// Unobserved cells get a faint dashed circle.
void write_svg(std::ostream& out, const DirectionalGridMap& map, const PlotSpec& spec);
std::string render_svg(const DirectionalGridMap& map, const PlotSpec& spec);

}  // namespace dirmap
