#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dirmap/csv.hpp"
#include "dirmap/synth.hpp"
#include "oracles.hpp"

using namespace dirmap;

TEST_CASE("scene names") {
  for (Scene s : {Scene::unimodal, Scene::multimodal, Scene::kuka_loop, Scene::human_l_path}) {
    CHECK(parse_scene(scene_name(s)) == s);
  }
  CHECK(!parse_scene("crosswalk").has_value());
}

TEST_CASE("scene validation") {
  SceneSpec spec;
  spec.n_agents = 0;
  CHECK_THROWS_AS(generate(spec), std::domain_error);
  spec.n_agents = 3;
  spec.noise_sigma = -0.1;
  CHECK_THROWS_AS(generate(spec), std::domain_error);
}

TEST_CASE("point counts and determinism") {
  for (Scene s : {Scene::unimodal, Scene::multimodal, Scene::kuka_loop}) {
    SceneSpec spec;
    spec.scene = s;
    spec.n_agents = 7;
    spec.steps_per_agent = 50;
    spec.seed = 3;
    const auto a = generate(spec);
    CHECK(a.points.size() == 7 * 50);
    CHECK(a.truth.size() == 7 * 49);
    const auto b = generate(spec);
    CHECK(a.points == b.points);
    spec.seed = 4;
    CHECK(generate(spec).points != a.points);
  }
  SceneSpec human;
  human.scene = Scene::human_l_path;
  human.steps_per_agent = 80;
  CHECK(generate(human).points.size() == 80);

  SceneSpec one;
  one.steps_per_agent = 1;
  one.n_agents = 2;
  const auto tiny = generate(one);
  CHECK(tiny.points.size() == 2);
  CHECK(tiny.truth.empty());
}

TEST_CASE("noise-free headings equal ground truth exactly") {
  for (Scene s : {Scene::unimodal, Scene::multimodal, Scene::kuka_loop, Scene::human_l_path}) {
    SceneSpec spec;
    spec.scene = s;
    spec.n_agents = 6;
    spec.noise_sigma = 0.0;
    const auto scene = generate(spec);
    const auto obs = headings_from_tracks(scene.points, 0.0);
    REQUIRE(obs.size() == scene.truth.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      CHECK(obs[i].theta == scene.truth[i].true_theta);
      CHECK(obs[i].t == scene.truth[i].t);
    }
  }
}

TEST_CASE("crosswalk truth takes two opposite values") {
  SceneSpec spec;
  spec.scene = Scene::multimodal;
  spec.n_agents = 9;
  spec.noise_sigma = 0.0;
  std::set<double> values;
  for (const auto& seg : generate(spec).truth) {
    if (seg.region == "crosswalk") {
      values.insert(seg.true_theta.radians());
    }
  }
  REQUIRE(values.size() == 2);
  CHECK(*values.begin() == -kPi / 2);
  CHECK(*values.rbegin() == kPi / 2);

  spec.scene = Scene::unimodal;
  values.clear();
  for (const auto& seg : generate(spec).truth) {
    if (seg.region == "crosswalk") {
      values.insert(seg.true_theta.radians());
    }
  }
  CHECK(values == std::set<double>{kPi / 2});
}

TEST_CASE("heading noise dispersion matches sigma") {
  for (double sigma : {0.1, 0.3}) {
    SceneSpec spec;
    spec.scene = Scene::multimodal;
    spec.n_agents = 90;
    spec.noise_sigma = sigma;
    spec.seed = 21;
    const auto scene = generate(spec);
    const auto obs = headings_from_tracks(scene.points, 0.0);
    REQUIRE(obs.size() == scene.truth.size());
    REQUIRE(obs.size() >= 10000);
    double ss = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const double d = oracle::circ_diff(obs[i].theta.radians(), scene.truth[i].true_theta.radians());
      ss += d * d;
    }
    const double rms = std::sqrt(ss / static_cast<double>(obs.size()));
    CHECK(std::abs(rms - sigma) < 0.1 * sigma);
  }
}

TEST_CASE("kuka laps differ and close on themselves") {
  SceneSpec spec;
  spec.scene = Scene::kuka_loop;
  spec.n_agents = 4;
  spec.noise_sigma = 0.2;
  spec.steps_per_agent = 100;
  const auto scene = generate(spec);
  std::set<std::string> ids;
  for (const auto& p : scene.points) {
    ids.insert(p.track_id);
  }
  CHECK(ids.size() == 4);
  for (std::size_t lap = 0; lap < 4; ++lap) {
    const auto& first = scene.points[lap * 100];
    const auto& last = scene.points[lap * 100 + 99];
    CHECK(first.x == last.x);
    CHECK(first.y == last.y);
  }
  CHECK(scene.points[0].x != scene.points[100].x);
}

TEST_CASE("truth sidecar format") {
  SceneSpec spec;
  spec.n_agents = 1;
  spec.steps_per_agent = 3;
  spec.noise_sigma = 0.0;
  const auto truth = generate(spec).truth;
  std::ostringstream out;
  write_truth_csv(out, truth);
  CHECK(out.str() == "segment_id,true_theta\n0," + format_double(truth[0].true_theta.radians()) + "\n1," +
                         format_double(truth[1].true_theta.radians()) + "\n");
}
