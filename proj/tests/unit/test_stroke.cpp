#include <cmath>
#include <numbers>

#include "copaint/stroke.hpp"
#include "doctest.h"

using namespace copaint;

namespace {

StrokeRecord line(double x0, double y0, double x1, double y1, double p, double size = 10.0) {
  StrokeRecord r;
  r.base_size = size;
  r.smoothing = false;
  r.color = {0, 0, 0};
  r.samples = {{x0, y0, p, 0}, {x1, y1, p, 16}};
  return r;
}

}  // namespace

TEST_CASE("pressure config from brush diameter") {
  const PressureConfig c = pressure_config_for(12.0);
  CHECK(c.r_max == 6.0);
  CHECK(c.r_min == doctest::Approx(0.6));
}

TEST_CASE("catmull-rom passes through the inner controls") {
  const SplineSegment seg{{SplinePoint{0, 0, 0.1}, {1, 2, 0.2}, {3, 1, 0.4}, {4, 4, 0.9}}};
  const SplinePoint a = eval_catmull_rom(seg, 0.0);
  const SplinePoint b = eval_catmull_rom(seg, 1.0);
  CHECK(a.x == doctest::Approx(1));
  CHECK(a.y == doctest::Approx(2));
  CHECK(a.pressure == doctest::Approx(0.2));
  CHECK(b.x == doctest::Approx(3));
  CHECK(b.y == doctest::Approx(1));
  // Midpoint of the uniform basis: (-P0 + 9 P1 + 9 P2 - P3) / 16.
  const SplinePoint m = eval_catmull_rom(seg, 0.5);
  CHECK(m.x == doctest::Approx((-0 + 9 * 1 + 9 * 3 - 4) / 16.0));
  CHECK(m.y == doctest::Approx((-0 + 9 * 2 + 9 * 1 - 4) / 16.0));
}

TEST_CASE("straight stroke at constant pressure yields 1 + floor(L / tau) collinear stamps") {
  const PressureConfig cfg = pressure_config_for(10.0);
  for (double len : {20.1, 7.3, 33.33}) {
    const auto stamps = plan_stamps(line(3, 4, 3 + len, 4, 1.0), cfg);
    const double tau = kSpacingFraction * radius_from_pressure(1.0, cfg);
    CHECK(stamps.size() == 1 + static_cast<std::size_t>(std::floor(len / tau)));
    for (std::size_t i = 0; i < stamps.size(); ++i) {
      CHECK(stamps[i].y == doctest::Approx(4.0).epsilon(1e-12));
      if (i > 0) {
        CHECK(stamps[i].x - stamps[i - 1].x == doctest::Approx(tau).epsilon(1e-9));
        CHECK(stamps[i].theta == doctest::Approx(0.0).scale(1));
      }
    }
    CHECK(stamps.front().theta == 0.0);
  }
}

TEST_CASE("orientation follows canvas axes") {
  const auto up = plan_stamps(line(10, 20, 10, 5, 0.8), pressure_config_for(6.0));
  REQUIRE(up.size() > 2);
  CHECK(up[1].theta == doctest::Approx(-std::numbers::pi / 2));
  const auto left = plan_stamps(line(20, 5, 5, 5, 0.8), pressure_config_for(6.0));
  CHECK(std::abs(left[1].theta) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("stamps carry the mapped radius and pressure") {
  const PressureConfig cfg = pressure_config_for(8.0);
  const auto stamps = plan_stamps(line(0, 0, 10, 0, 0.4), cfg);
  for (const Stamp& s : stamps) {
    CHECK(s.radius == doctest::Approx(radius_from_pressure(0.4, cfg)));
    CHECK(s.pressure == doctest::Approx(0.4));
  }
}

TEST_CASE("smoothing filters pressure along the samples") {
  StrokeRecord r = line(0, 0, 1, 0, 1.0);
  r.samples = {{0, 0, 1.0, 0}, {10, 0, 0.0, 1}, {20, 0, 0.0, 2}};
  r.smoothing = true;
  const auto s = plan_stamps(r, pressure_config_for(10.0));
  // Pressure at the last sample after smoothing: 0.7 * 0.7 = 0.49.
  CHECK(s.back().pressure == doctest::Approx(0.49).epsilon(0.02));
  r.smoothing = false;
  CHECK(plan_stamps(r, pressure_config_for(10.0)).back().pressure < 0.05);
}

TEST_CASE("single-sample stroke renders one disk") {
  StrokeRecord r;
  r.base_size = 10.0;
  r.smoothing = false;
  r.color = {0, 0, 0};
  r.samples = {{16, 16, 1.0, 0}};
  Canvas c(32, 32, Rgb{1, 1, 1});
  render_stroke(c, r, pressure_config_for(r.base_size));
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const double d = std::hypot(x + 0.5 - 16, y + 0.5 - 16);
      if (std::abs(d - 5.0) < 1e-9) continue;
      CHECK(c(x, y) == (d < 5.0 ? Rgb{0, 0, 0} : Rgb{1, 1, 1}));
    }
}

TEST_CASE("stroke validation") {
  StrokeRecord r = line(0, 0, 1, 1, 0.5);
  r.samples.clear();
  CHECK_THROWS_AS(validate(r), std::invalid_argument);
  r = line(0, 0, 1, 1, 0.5);
  r.samples[1].t_ms = -1;
  CHECK_THROWS_AS(validate(r), std::invalid_argument);
  r = line(0, 0, 1, 1, 0.5, 0.0);
  CHECK_THROWS_AS(validate(r), std::invalid_argument);
}

TEST_CASE("mouse sessions are detected from the modal pressure") {
  auto session_with = [](int modal, int total) {
    StrokeRecord r;
    for (int i = 0; i < total; ++i)
      r.samples.push_back({double(i), 0, i < modal ? 0.5 : 0.1 + 0.0001 * i, double(i)});
    return std::vector<StrokeRecord>{r};
  };
  CHECK(is_mouse_session(session_with(1000, 1000)));
  CHECK(is_mouse_session(session_with(995, 1000)));
  CHECK_FALSE(is_mouse_session(session_with(990, 1000)));
  CHECK_FALSE(is_mouse_session(session_with(500, 1000)));
  CHECK_THROWS(is_mouse_session(std::vector<StrokeRecord>{}));
}
