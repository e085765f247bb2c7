#include "dirmap/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace dirmap {

namespace {

constexpr double kLobeFraction = 0.45;

Angle sample_angle(std::size_t i, std::size_t samples) {
  return Angle(-kPi + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(samples));
}

double log_peak(const VonMisesMixture& mix, std::size_t samples) {
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    peak = std::max(peak, mix.log_pdf(sample_angle(i, samples)));
  }
  return peak;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::optional<LobeScale> parse_lobe_scale(std::string_view name) {
  if (name == "per-cell") {
    return LobeScale::per_cell;
  }
  if (name == "global") {
    return LobeScale::global;
  }
  return std::nullopt;
}

void PlotSpec::validate() const {
  if (!(cell_size_px > 0.0) || !std::isfinite(cell_size_px)) {
    throw std::domain_error("PlotSpec: cell_size_px must be positive");
  }
  if (samples_per_lobe < 36) {
    throw std::domain_error("PlotSpec: samples_per_lobe must be at least 36");
  }
}

std::vector<LobePoint> lobe_polygon(const VonMisesMixture& mix, double log_peak, double max_radius,
                                    std::size_t samples) {
  std::vector<LobePoint> out;
  out.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const Angle theta = sample_angle(i, samples);
    const double r = max_radius * std::exp(mix.log_pdf(theta) - log_peak);
    out.push_back({r * std::cos(theta.radians()), -r * std::sin(theta.radians())});
  }
  return out;
}

void write_svg(std::ostream& out, const DirectionalGridMap& map, const PlotSpec& spec) {
  spec.validate();
  const GridSpec& grid = map.spec();
  const double cell = spec.cell_size_px;
  const double width = cell * static_cast<double>(grid.n_cols);
  const double height = cell * static_cast<double>(grid.n_rows);
  const double max_radius = kLobeFraction * cell;
  const double uniform_log = -std::log(2.0 * kPi);

  double global_peak = uniform_log;
  if (spec.normalize == LobeScale::global) {
    for (const auto& c : map.cells()) {
      if (c.mixture) {
        global_peak = std::max(global_peak, log_peak(*c.mixture, spec.samples_per_lobe));
      }
    }
  }

  const std::string stroke = escape(spec.stroke);
  const std::string fill = escape(spec.fill);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.3f}\" height=\"{:.3f}\" "
      "viewBox=\"0 0 {:.3f} {:.3f}\">\n",
      width, height, width, height);
  out << fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"white\"/>\n", width, height);

  for (const auto& c : map.cells()) {
    const double x0 = cell * static_cast<double>(c.index.col);
    const double y0 = cell * static_cast<double>(grid.n_rows - 1 - c.index.row);
    const double cx = x0 + cell / 2.0;
    const double cy = y0 + cell / 2.0;
    out << fmt::format("<g id=\"cell-{}-{}\">\n", c.index.col, c.index.row);
    out << fmt::format(
        "<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"none\" stroke=\"#cccccc\" "
        "stroke-width=\"0.5\"/>\n",
        x0, y0, cell, cell);
    if (!c.mixture) {
      const double r = spec.normalize == LobeScale::global ? max_radius * std::exp(uniform_log - global_peak)
                                                           : max_radius;
      out << fmt::format(
          "<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{:.3f}\" fill=\"none\" stroke=\"#bbbbbb\" "
          "stroke-dasharray=\"2,2\" stroke-width=\"0.5\"/>\n",
          cx, cy, r);
      out << "</g>\n";
      continue;
    }
    const double peak =
        spec.normalize == LobeScale::global ? global_peak : log_peak(*c.mixture, spec.samples_per_lobe);
    out << "<polygon points=\"";
    bool first = true;
    for (const auto& p : lobe_polygon(*c.mixture, peak, max_radius, spec.samples_per_lobe)) {
      out << (first ? "" : " ") << fmt::format("{:.3f},{:.3f}", cx + p.dx, cy + p.dy);
      first = false;
    }
    out << fmt::format("\" fill=\"{}\" fill-opacity=\"0.6\" stroke=\"{}\" stroke-width=\"1\"/>\n", fill, stroke);
    out << fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"1.000\" fill=\"{}\"/>\n", cx, cy, stroke);
    out << "</g>\n";
  }
  out << "</svg>\n";
}

std::string render_svg(const DirectionalGridMap& map, const PlotSpec& spec) {
  std::ostringstream out;
  write_svg(out, map, spec);
  return out.str();
}

}  // namespace dirmap
