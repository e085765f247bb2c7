#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dirmap/csv.hpp"
#include "dirmap/ingest.hpp"
#include "dirmap/synth.hpp"
#include "dirmap/vmm.hpp"
#include "oracles.hpp"

using namespace dirmap;

namespace {

std::vector<TrackPoint> track(std::initializer_list<std::pair<double, double>> xy) {
  std::vector<TrackPoint> out;
  double t = 0.0;
  for (auto [x, y] : xy) {
    out.push_back({t, "1", x, y});
    t += 1.0;
  }
  return out;
}

CsvData parse(const std::string& text, CsvOptions options = {}) {
  std::istringstream in(text);
  return parse_csv(in, options);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const LoadError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("headings_from_track examples") {
  auto obs = headings_from_track(track({{0, 0}, {1, 1}}));
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].theta.radians() == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK(obs[0].x == 0.0);
  CHECK(obs[0].t == 0.0);

  obs = headings_from_track(track({{0, 0}, {0, -1}}));
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].theta.radians() == -kPi / 2);

  CHECK(headings_from_track(track({{0, 0}, {1e-6, 0}}), 0.01).empty());
  CHECK(headings_from_track(track({{0, 0}})).empty());
  CHECK(headings_from_track(std::vector<TrackPoint>{}).empty());

  std::vector<TrackPoint> backwards{{1.0, "1", 0, 0}, {1.0, "1", 1, 0}};
  CHECK_THROWS_AS(headings_from_track(backwards), std::domain_error);
}

TEST_CASE("headings_from_track output length counts pairs passing the gate") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> step(-0.1, 0.1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TrackPoint> pts;
    double x = 0, y = 0;
    for (int i = 0; i < 100; ++i) {
      pts.push_back({static_cast<double>(i), "a", x, y});
      x += step(rng);
      y += step(rng);
    }
    std::size_t passing = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      passing += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y) >= 0.05 ? 1 : 0;
    }
    CHECK(headings_from_track(pts, 0.05).size() == passing);
  }
}

TEST_CASE("headings_from_tracks groups and orders by track") {
  const std::vector<TrackPoint> pts{{2, "b", 0, 2}, {0, "a", 0, 0}, {1, "b", 0, 0}, {1, "a", 1, 0}};
  const auto obs = headings_from_tracks(pts);
  REQUIRE(obs.size() == 2);
  CHECK(*obs[0].track_id == "b");
  CHECK(obs[0].theta.radians() == kPi / 2);
  CHECK(*obs[1].track_id == "a");
  CHECK(obs[1].theta.radians() == 0.0);
}

TEST_CASE("load_csv schema A and B") {
  auto data = parse("t,track_id,x,y\n0,1,0,0\n1,1,1,0\n2,1,2,0\n");
  const auto* pts = std::get_if<std::vector<TrackPoint>>(&data.records);
  REQUIRE(pts != nullptr);
  CHECK(pts->size() == 3);
  CHECK((*pts)[2] == TrackPoint{2.0, "1", 2.0, 0.0});

  data = parse("t,track_id,x,y,theta\n0,,1.5,2,4.0\n1,7,1,1,-1\n");
  const auto* obs = std::get_if<std::vector<Observation>>(&data.records);
  REQUIRE(obs != nullptr);
  REQUIRE(obs->size() == 2);
  CHECK(!(*obs)[0].track_id.has_value());
  CHECK((*obs)[0].theta.radians() == wrap(4.0));
  CHECK((*obs)[0].theta.radians() == doctest::Approx(4.0 - 2 * kPi).epsilon(1e-15));
  CHECK(*(*obs)[1].track_id == "7");
  CHECK(to_observations(data) == *obs);

  // Windows line endings, a byte-order mark and blank lines are tolerated.
  data = parse("\xEF\xBB\xBFt,track_id,x,y\r\n0,1,0,0\r\n\r\n1,1,1,0\r\n");
  CHECK(std::get<std::vector<TrackPoint>>(data.records).size() == 2);
}

TEST_CASE("load_csv errors name the first offending line") {
  CHECK(error_of("t,track_id,x,y\n0,1,abc,0\n") == "line 2: x not numeric");
  CHECK(error_of("t,track_id,x,y\n0,1,0,0\n1,1,0\n") == "line 3: expected 4 fields, got 3");
  CHECK(error_of("t,track_id,x,y\n0,,0,0\n") == "line 2: track_id empty");
  CHECK(error_of("t,track_id,x,y,theta\n0,1,0,0,nan\n") == "line 2: theta not numeric");
  CHECK(error_of("time,id,x,y\n").find("line 1: unknown schema") == 0);
  CHECK(error_of("") == "line 1: missing header");

  // Budget: skip up to N bad rows, report them, fail past that.
  const std::string two_bad = "t,track_id,x,y\n0,1,0,0\n1,1,x,0\n2,1,2,0\n3,1,3,q\n";
  const auto data = parse(two_bad, CsvOptions{2});
  CHECK(std::get<std::vector<TrackPoint>>(data.records).size() == 2);
  REQUIRE(data.diagnostics.size() == 2);
  CHECK(data.diagnostics[1] == "line 5: y not numeric");
  try {
    parse(two_bad, CsvOptions{1});
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(e.line() == 3);
  }

  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), LoadError);
}

TEST_CASE("CSV writers round-trip exactly") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<Observation> obs;
  for (int i = 0; i < 200; ++i) {
    obs.push_back({u(rng), i % 3 == 0 ? std::nullopt : std::optional<std::string>(std::to_string(i % 5)), u(rng),
                   u(rng), Angle(u(rng))});
  }
  std::ostringstream out;
  write_observations_csv(out, obs);
  CHECK(to_observations(parse(out.str())) == obs);

  std::vector<TrackPoint> pts;
  for (int i = 0; i < 50; ++i) {
    pts.push_back({static_cast<double>(i) / 7.0, "x", u(rng), u(rng)});
  }
  std::ostringstream tracks;
  write_tracks_csv(tracks, pts);
  CHECK(std::get<std::vector<TrackPoint>>(parse(tracks.str()).records) == pts);
}

TEST_CASE("ObservationStore slices") {
  const GridSpec grid{0, 0, 10, 8, 5, 4};
  std::vector<Observation> obs{
      {0.0, "a", 1.0, 1.0, Angle(0.1)}, {1.0, "a", 3.0, 1.0, Angle(0.2)},
      {2.0, "b", 9.0, 7.0, Angle(3.0)}, {3.0, std::nullopt, 20.0, 1.0, Angle(-1.0)},
  };
  const ObservationStore store(grid, obs);
  CHECK(store.slice_spatial(-1.0, 10.0).size() == 4);
  CHECK(store.slice_spatial(0.5, 0.9).empty());
  CHECK(store.slice_spatial(1.0, 2.0).size() == 2);
  CHECK_THROWS_AS((void)store.slice_spatial(2.0, 1.0), std::domain_error);
  CHECK(store.slice_track("a") == std::vector<Angle>{Angle(0.1), Angle(0.2)});
  try {
    (void)store.slice_track("zzz");
    FAIL("expected unknown track error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("known tracks: a, b") != std::string::npos);
  }
  CHECK(store.slice_cell(0, 0) == std::vector<Angle>{Angle(0.1)});
  CHECK(store.slice_cell(1, 2).empty());
  CHECK_THROWS_AS((void)store.slice_cell(5, 0), std::domain_error);
  CHECK_THROWS_AS((void)store.slice_cell(0, 4), std::domain_error);
  CHECK(store.outside_count() == 1);

  const ObservationStore single(grid, {{0.0, "only", 1, 1, Angle(0.5)}, {1.0, "only", 2, 2, Angle(0.6)}});
  CHECK(single.slice_track("only").size() == single.size());
}

TEST_CASE("ObservationStore partition and order invariance") {
  SceneSpec spec;
  spec.scene = Scene::multimodal;
  spec.n_agents = 12;
  spec.noise_sigma = 0.2;
  spec.seed = 4;
  auto obs = headings_from_tracks(generate(spec).points);
  // Push a few observations off the grid.
  for (std::size_t i = 0; i < obs.size(); i += 97) {
    obs[i].x += 30.0;
  }
  const ObservationStore store(GridSpec{0, 0, 10, 8, 5, 4}, obs);
  std::size_t total = store.outside_count();
  for (std::size_t c = 0; c < 5; ++c) {
    for (std::size_t r = 0; r < 4; ++r) {
      total += store.slice_cell(c, r).size();
    }
  }
  CHECK(total == obs.size());

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    auto shuffled = obs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const ObservationStore other(GridSpec{0, 0, 10, 8, 5, 4}, shuffled);
    CHECK(other.slice_spatial(-1e9, 1e9) == store.slice_spatial(-1e9, 1e9));
    CHECK(other.slice_cell(2, 1) == store.slice_cell(2, 1));
    CHECK(other.slice_track("C1") == store.slice_track("C1"));
  }
}

TEST_CASE("slices against generator ground truth") {
  SceneSpec spec;
  spec.scene = Scene::multimodal;
  spec.n_agents = 30;
  spec.noise_sigma = 0.1;
  spec.seed = 11;
  const auto scene = generate(spec);
  const ObservationStore store(scene_grid(), headings_from_tracks(scene.points));

  // Southbound phase: the time span of the C group.
  double t_lo = 1e300, t_hi = -1e300;
  for (const auto& p : scene.points) {
    if (p.track_id.starts_with("C")) {
      t_lo = std::min(t_lo, p.t);
      t_hi = std::max(t_hi, p.t);
    }
  }
  const auto south = store.slice_spatial(t_lo, t_hi);
  REQUIRE(!south.empty());
  CHECK(angular_distance(circular_stats(south).mean_dir, Angle(-kPi / 2)) < 0.05);

  // Crosswalk cell: two opposite heading populations.
  const auto cross = store.slice_cell(2, 1);
  const auto north = std::count_if(cross.begin(), cross.end(), [](Angle t) { return angular_distance(t, Angle(kPi / 2)) < 0.5; });
  const auto southward = std::count_if(cross.begin(), cross.end(), [](Angle t) { return angular_distance(t, Angle(-kPi / 2)) < 0.5; });
  CHECK(static_cast<double>(north) > 0.3 * static_cast<double>(cross.size()));
  CHECK(static_cast<double>(southward) > 0.3 * static_cast<double>(cross.size()));
  CHECK(static_cast<std::size_t>(north + southward) == cross.size());

  // Straight-line track: fit_vm recovers its bearing.
  const auto straight = headings_from_tracks(
      std::vector<TrackPoint>{{0, "s", 1.0, 1.0}, {1, "s", 1.3, 1.2}, {2, "s", 1.6, 1.4}, {3, "s", 1.9, 1.6}});
  const ObservationStore line_store(scene_grid(), straight);
  CHECK(std::abs(oracle::circ_diff(fit_vm(line_store.slice_track("s")).dist.mu().radians(), std::atan2(0.2, 0.3))) <
        1e-6);

  // L-shaped track: two modes at the legs' bearings.
  SceneSpec l_spec;
  l_spec.scene = Scene::human_l_path;
  l_spec.steps_per_agent = 200;
  l_spec.noise_sigma = 0.05;
  l_spec.seed = 2;
  const ObservationStore l_store(scene_grid(), headings_from_tracks(generate(l_spec).points));
  const auto modes = find_modes(fit_vmm(l_store.slice_track("human"), EmConfig{}).mixture).modes;
  REQUIRE(modes.size() == 2);
  CHECK(angular_distance(modes[0], Angle(0.0)) < 0.05);
  CHECK(angular_distance(modes[1], Angle(kPi / 2)) < 0.05);
}
