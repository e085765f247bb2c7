#include <doctest.h>

#include <cmath>
#include <regex>

#include "dirmap/plot.hpp"
#include "dirmap/synth.hpp"

using namespace dirmap;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

std::vector<double> radii(const std::vector<LobePoint>& pts) {
  std::vector<double> r;
  for (const auto& p : pts) {
    r.push_back(std::hypot(p.dx, p.dy));
  }
  return r;
}

// Circular local maxima rising above a fraction of the peak.
std::size_t lobes(const std::vector<double>& r) {
  const double peak = *std::max_element(r.begin(), r.end());
  std::size_t n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double prev = r[(i + r.size() - 1) % r.size()];
    const double next = r[(i + 1) % r.size()];
    if (r[i] > prev && r[i] >= next && r[i] > 0.2 * peak) {
      ++n;
    }
  }
  return n;
}

}  // namespace

TEST_CASE("plot spec validation") {
  PlotSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.samples_per_lobe = 35;
  CHECK_THROWS_AS(spec.validate(), std::domain_error);
  spec.samples_per_lobe = 36;
  spec.cell_size_px = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::domain_error);
  CHECK(parse_lobe_scale("global") == LobeScale::global);
  CHECK(parse_lobe_scale("per-cell") == LobeScale::per_cell);
  CHECK(!parse_lobe_scale("cell").has_value());
}

TEST_CASE("narrow lobe points at the mean") {
  const GridSpec grid{0, 0, 1, 1, 1, 1};
  for (double mu : {1.0, -2.5, 3.1}) {
    std::vector<Observation> obs;
    for (int i = 0; i < 50; ++i) {
      obs.push_back({static_cast<double>(i), std::nullopt, 0.5, 0.5, Angle(mu + 1e-4 * std::sin(i))});
    }
    const auto map = build(obs, grid, FitMode::vm, EmConfig{});
    const auto& mix = *map.cell({0, 0}).mixture;
    CHECK(mix[0].dist.kappa() > 1e4);
    PlotSpec spec;
    const auto pts = lobe_polygon(mix, mix.log_pdf(mix[0].dist.mu()), 36.0, spec.samples_per_lobe);
    const auto r = radii(pts);
    const auto apex = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    // SVG y grows downward, so the heading is atan2(-dy, dx).
    const double angle = std::atan2(-pts[apex].dy, pts[apex].dx);
    const double step = 2 * kPi / static_cast<double>(spec.samples_per_lobe);
    CHECK(std::abs(std::remainder(angle - mu, 2 * kPi)) <= step);
    CHECK(lobes(r) == 1);

    const auto svg = render_svg(map, spec);
    CHECK(count(svg, "<polygon") == 1);
    CHECK(count(svg, "stroke-dasharray") == 0);
  }
}

TEST_CASE("multimodal crosswalk cells render two lobes") {
  SceneSpec scene;
  scene.scene = Scene::multimodal;
  scene.n_agents = 30;
  scene.noise_sigma = 0.1;
  scene.seed = 3;
  const auto map = build(headings_from_tracks(generate(scene).points), scene_grid(), FitMode::vmm, EmConfig{});
  const PlotSpec spec;
  for (std::size_t row : {1, 2}) {
    const auto& mix = *map.cell({2, row}).mixture;
    double peak = -1e300;
    for (std::size_t i = 0; i < 360; ++i) {
      peak = std::max(peak, mix.log_pdf(Angle(-kPi + 2 * kPi * static_cast<double>(i) / 360.0)));
    }
    CHECK(lobes(radii(lobe_polygon(mix, peak, 36.0, 360))) == 2);
  }
  const auto& road = *map.cell({0, 0}).mixture;
  CHECK(lobes(radii(lobe_polygon(road, road.log_pdf(road[0].dist.mu()), 36.0, 360))) == 1);

  const auto svg = render_svg(map, spec);
  CHECK(count(svg, "<polygon") == map.observed_count());
  CHECK(count(svg, "stroke-dasharray") == 20 - map.observed_count());
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>\n") == svg.size() - 7);
  CHECK(render_svg(map, spec) == svg);

  // Every coordinate carries three decimals.
  const std::regex number(R"(points="([0-9.,\- ]+)\")");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, number));
  const std::regex coord(R"(^-?\d+\.\d{3},-?\d+\.\d{3}$)");
  std::stringstream ss(m[1].str());
  std::string tok;
  std::size_t n = 0;
  while (ss >> tok) {
    CHECK(std::regex_match(tok, coord));
    ++n;
  }
  CHECK(n == spec.samples_per_lobe);
}

TEST_CASE("global normalization shrinks broad lobes") {
  const GridSpec grid{0, 0, 2, 1, 2, 1};
  std::vector<Observation> obs;
  for (int i = 0; i < 200; ++i) {
    obs.push_back({0.0, std::nullopt, 0.5, 0.5, Angle(0.05 * std::sin(i))});
    obs.push_back({0.0, std::nullopt, 1.5, 0.5, Angle(1.0 * std::sin(i))});
  }
  const auto map = build(obs, grid, FitMode::vm, EmConfig{});
  PlotSpec per;
  PlotSpec global;
  global.normalize = LobeScale::global;
  const auto a = render_svg(map, per);
  const auto b = render_svg(map, global);
  CHECK(a != b);
  // The sharp cell is drawn the same either way.
  const auto first_polygon = [](const std::string& s) {
    const auto p = s.find("<polygon");
    return s.substr(p, s.find("/>", p) - p);
  };
  CHECK(first_polygon(a) == first_polygon(b));
}

TEST_CASE("colours are escaped") {
  const DirectionalGridMap empty(GridSpec{0, 0, 1, 1, 1, 1}, FitMode::vm);
  CHECK(count(render_svg(empty, PlotSpec{}), "<circle") == 1);

  const std::vector<Observation> obs{{0.0, std::nullopt, 0.5, 0.5, Angle(0.2)}, {1.0, std::nullopt, 0.5, 0.5, Angle(0.4)}};
  const auto map = build(obs, GridSpec{0, 0, 1, 1, 1, 1}, FitMode::vm, EmConfig{});
  PlotSpec spec;
  spec.stroke = "a\"<b>&";
  const auto svg = render_svg(map, spec);
  CHECK(svg.find("<b>") == std::string::npos);
  CHECK(svg.find("stroke=\"a&quot;&lt;b&gt;&amp;\"") != std::string::npos);
}
