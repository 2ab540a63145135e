#include <cmath>
#include <numbers>
#include <random>

#include "copaint/brush.hpp"
#include "doctest.h"

using namespace copaint;

TEST_CASE("pressure curve hits its frozen values and endpoints") {
  const PressureConfig cfg{1.0, 10.0};
  // log10(5.5) = 0.740362689...
  CHECK(radius_from_pressure(0.5, cfg) == doctest::Approx(1.0 + 9.0 * 0.7403626894942439).epsilon(1e-14));
  CHECK(opacity_from_pressure(0.5) == doctest::Approx(0.17677669529663687).epsilon(1e-14));
  CHECK(radius_from_pressure(0.0, cfg) == 1.0);
  CHECK(radius_from_pressure(1.0, cfg) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(opacity_from_pressure(0.0) == 0.0);
  CHECK(opacity_from_pressure(1.0) == 1.0);
  CHECK_THROWS_AS(radius_from_pressure(1.5, cfg), std::invalid_argument);
  CHECK_THROWS_AS(opacity_from_pressure(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(radius_from_pressure(0.5, PressureConfig{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("pressure curves are monotone") {
  const PressureConfig cfg{0.5, 7.0};
  double r = -1.0, a = -1.0;
  for (int i = 0; i <= 200; ++i) {
    const double p = i / 200.0;
    CHECK(radius_from_pressure(p, cfg) > r);
    CHECK(opacity_from_pressure(p) >= a);
    r = radius_from_pressure(p, cfg);
    a = opacity_from_pressure(p);
  }
}

TEST_CASE("pressure smoothing is a 0.7/0.3 blend") {
  CHECK(smooth_pressure(1.0, 0.0) == doctest::Approx(0.7));
  CHECK(smooth_pressure(0.2, 0.6) == doctest::Approx(0.32));
  CHECK_THROWS(smooth_pressure(0.2, 1.2));
}

TEST_CASE("stamp validation and mode names") {
  CHECK_THROWS_AS(validate(Stamp::tip(HardRound{}, 0, 0, -1.0, 0, 0.5, {})), std::invalid_argument);
  CHECK_THROWS_AS(validate(Stamp::gaussian(0, 0, 1.0, 0.0, 0, {})), std::invalid_argument);
  CHECK_NOTHROW(validate(Stamp::gaussian(0, 0, 1.0, 2.0, 0.3, {0.1, 0.2, 0.3})));
  for (const BrushMode& m : {BrushMode{HardRound{}}, BrushMode{BrushTip{"abc"}}, BrushMode{Gaussian2D{}}})
    CHECK(mode_from_name(mode_name(m), "abc") == m);
}

TEST_CASE("gaussian alpha follows exp(-q/2) in the core and vanishes past 4 sigma") {
  const Stamp s = Stamp::gaussian(10, 10, 2.0, 1.0, 0.0, {});
  CHECK(gaussian_alpha(s, 10, 10) == 1.0);
  CHECK(gaussian_alpha(s, 11, 10) == doctest::Approx(std::exp(-0.125)).epsilon(1e-14));
  CHECK(gaussian_alpha(s, 10, 11) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(gaussian_alpha(s, 10 + 2 * 4.0, 10) == 0.0);
  CHECK(gaussian_alpha(s, 10, 10 + 4.5) == 0.0);
  // A quarter turn swaps the axes.
  const Stamp r = Stamp::gaussian(10, 10, 2.0, 1.0, std::numbers::pi / 2, {});
  CHECK(gaussian_alpha(r, 11, 10) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  // The taper stays within 1e-3 of the untruncated value.
  for (double q = 0.0; q < 16.0; q += 0.01) {
    const double x = 10 + 2.0 * std::sqrt(q);
    CHECK(std::abs(gaussian_alpha(s, x, 10) - std::exp(-q / 2)) <= 1.2e-3);
  }
}

TEST_CASE("hard round alpha is a disk scaled by p^2.5") {
  const Stamp s = Stamp::tip(HardRound{}, 5, 5, 3.0, 0.0, 0.5, {});
  CHECK(hard_round_alpha(s, 0, 5, 5) == doctest::Approx(std::pow(0.5, 2.5)));
  CHECK(hard_round_alpha(s, 0, 7.9, 5) == doctest::Approx(std::pow(0.5, 2.5)));
  CHECK(hard_round_alpha(s, 0, 8.1, 5) == 0.0);
  CHECK(hard_round_alpha(s, 0, 5, 1.5) == 0.0);
}

TEST_CASE("footprint covers every nonzero pixel") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const Stamp s = k % 2 ? Stamp::gaussian(20 * u(rng), 20 * u(rng), 0.5 + 3 * u(rng), 0.5 + 3 * u(rng),
                                            6 * u(rng) - 3, {})
                          : Stamp::tip(HardRound{}, 20 * u(rng), 20 * u(rng), 0.5 + 5 * u(rng), 0,
                                       0.2 + 0.8 * u(rng), {});
    const Rect fp = stamp_footprint(s, nullptr, 1.0);
    for (int y = -10; y < 40; ++y)
      for (int x = -10; x < 40; ++x)
        if (stamp_alpha_at(s, nullptr, 1.0, x + 0.5, y + 0.5) > 0.0) CHECK(fp.contains(x, y));
  }
}

namespace {

void check_alpha_grad(const Stamp& s, const TextureLibrary* tex, double soften, double qx, double qy) {
  const AlphaGrad g = stamp_alpha_grad_at(s, tex, soften, qx, qy);
  CHECK(g.value == doctest::Approx(stamp_alpha_at(s, tex, soften, qx, qy)).epsilon(1e-12));
  const double h = 1e-6;
  auto fd = [&](auto mutate) {
    Stamp a = s, b = s;
    mutate(a, h);
    mutate(b, -h);
    return (stamp_alpha_at(a, tex, soften, qx, qy) - stamp_alpha_at(b, tex, soften, qx, qy)) / (2 * h);
  };
  const bool tip = is_tip_mode(s.mode);
  CHECK(g.d_x == doctest::Approx(fd([](Stamp& t, double e) { t.x += e; })).epsilon(1e-5).scale(1));
  CHECK(g.d_y == doctest::Approx(fd([](Stamp& t, double e) { t.y += e; })).epsilon(1e-5).scale(1));
  CHECK(g.d_theta == doctest::Approx(fd([](Stamp& t, double e) { t.theta += e; })).epsilon(1e-5).scale(1));
  if (tip) {
    CHECK(g.d_size_a == doctest::Approx(fd([](Stamp& t, double e) { t.radius += e; })).epsilon(1e-5).scale(1));
    CHECK(g.d_pressure == doctest::Approx(fd([](Stamp& t, double e) { t.pressure += e; })).epsilon(1e-5).scale(1));
  } else {
    CHECK(g.d_size_a == doctest::Approx(fd([](Stamp& t, double e) { t.sigma_x += e; })).epsilon(1e-5).scale(1));
    CHECK(g.d_size_b == doctest::Approx(fd([](Stamp& t, double e) { t.sigma_y += e; })).epsilon(1e-5).scale(1));
  }
}

}  // namespace

TEST_CASE("per-point alpha gradients match finite differences") {
  SUBCASE("gaussian") {
    const Stamp s = Stamp::gaussian(8.2, 7.7, 2.5, 1.3, 0.4, {});
    for (auto [qx, qy] : {std::pair{8.5, 8.5}, {10.5, 7.5}, {6.5, 9.5}, {13.5, 8.5}})
      check_alpha_grad(s, nullptr, 0, qx, qy);
  }
  SUBCASE("soft hard round") {
    const Stamp s = Stamp::tip(HardRound{}, 8.2, 7.7, 4.0, 0.0, 0.6, {});
    for (auto [qx, qy] : {std::pair{8.5, 8.5}, {12.0, 7.9}, {11.5, 10.5}})
      check_alpha_grad(s, nullptr, 1.0, qx, qy);
  }
  SUBCASE("textured") {
    TextureLibrary lib;
    GrayImage t(9, 9);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 9; ++x) t(x, y) = std::exp(-((x - 4) * (x - 4) + (y - 4) * (y - 4)) / 8.0);
    lib.add("t", t);
    const Stamp s = Stamp::tip(BrushTip{"t"}, 8.23, 7.71, 4.0, 0.3, 0.7, {});
    for (auto [qx, qy] : {std::pair{8.5, 8.5}, {9.5, 6.5}, {6.5, 9.5}}) check_alpha_grad(s, &lib, 0, qx, qy);
  }
}

TEST_CASE("alpha-over compositing") {
  Canvas c(3, 1, Rgb{1, 1, 1});
  AlphaMap a{{1, 0}, Grid<double>(2, 1)};
  a.values(0, 0) = 1.0;
  a.values(1, 0) = 0.25;
  composite_over(c, a, Rgb{0, 0.5, 0});
  CHECK(c(0, 0) == Rgb{1, 1, 1});
  CHECK(c(1, 0) == Rgb{0, 0.5, 0});
  CHECK(c(2, 0).r == doctest::Approx(0.75));
  CHECK(c(2, 0).g == doctest::Approx(0.875));
}

TEST_CASE("weighted-sum compositing is order independent with unit background weight") {
  const Canvas bg(1, 1, Rgb{1, 1, 1});
  AlphaMap a{{0, 0}, Grid<double>(1, 1, 0.5)};
  AlphaMap b{{0, 0}, Grid<double>(1, 1, 0.25)};
  const Canvas ab = composite_weighted_sum({{a, Rgb{1, 0, 0}}, {b, Rgb{0, 0, 1}}}, bg);
  const Canvas ba = composite_weighted_sum({{b, Rgb{0, 0, 1}}, {a, Rgb{1, 0, 0}}}, bg);
  CHECK(ab(0, 0).r == doctest::Approx((0.5 + 1.0) / 1.75));
  CHECK(ab(0, 0).g == doctest::Approx(1.0 / 1.75));
  CHECK(ab(0, 0).b == doctest::Approx((0.25 + 1.0) / 1.75));
  CHECK(ab(0, 0).r == doctest::Approx(ba(0, 0).r).epsilon(1e-15));
  CHECK(ab(0, 0).b == doctest::Approx(ba(0, 0).b).epsilon(1e-15));
}

TEST_CASE("texture lookups") {
  TextureLibrary lib;
  CHECK_THROWS_AS(lib.get("missing"), std::out_of_range);
  lib.add("x", GrayImage(4, 4, 1.0));
  CHECK(lib.contains("x"));
  const Stamp s = Stamp::tip(BrushTip{"x"}, 10, 10, 4.0, 0.0, 1.0, {});
  CHECK(stamp_alpha_at(s, &lib, 0, 10, 10) == doctest::Approx(1.0));
  CHECK(stamp_alpha_at(s, &lib, 0, 20, 10) == 0.0);
}
