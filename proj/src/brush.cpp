#include "copaint/brush.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace copaint {
namespace {

constexpr double kGaussianCutoff = 16.0;      // q at 4 sigma
constexpr double kGaussianTaperStart = 9.0;   // taper over q in [9, 16] (3 to 4 sigma)

double smootherstep(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }
double smootherstep_deriv(double t) { return 30.0 * t * t * (t - 1.0) * (t - 1.0); }

bool finite(double v) { return std::isfinite(v); }

// Pixels whose centers fall in [x0, x1] x [y0, y1].
Rect pixel_cover(double x0, double y0, double x1, double y1) {
  const int i0 = static_cast<int>(std::ceil(x0 - 0.5));
  const int i1 = static_cast<int>(std::floor(x1 - 0.5));
  const int j0 = static_cast<int>(std::ceil(y0 - 0.5));
  const int j1 = static_cast<int>(std::floor(y1 - 0.5));
  if (i1 < i0 || j1 < j0) return {};
  return {i0, j0, i1 - i0 + 1, j1 - j0 + 1};
}

double texel(const GrayImage& t, int i, int j) {
  return t.in_bounds(i, j) ? t(i, j) : 0.0;
}

struct Bilinear {
  double value;
  double d_lx;
  double d_ly;
};

Bilinear sample_bilinear(const GrayImage& t, double lx, double ly) {
  const double fx = lx - 0.5;
  const double fy = ly - 0.5;
  const double flx = std::floor(fx);
  const double fly = std::floor(fy);
  if (flx < -1.0 || fly < -1.0 || flx >= t.width() || fly >= t.height()) return {0.0, 0.0, 0.0};
  const int i0 = static_cast<int>(flx);
  const int j0 = static_cast<int>(fly);
  const double ax = fx - flx;
  const double ay = fy - fly;
  const double t00 = texel(t, i0, j0);
  const double t10 = texel(t, i0 + 1, j0);
  const double t01 = texel(t, i0, j0 + 1);
  const double t11 = texel(t, i0 + 1, j0 + 1);
  const double v = (1 - ax) * (1 - ay) * t00 + ax * (1 - ay) * t10 + (1 - ax) * ay * t01 +
                   ax * ay * t11;
  const double dlx = (1 - ay) * (t10 - t00) + ay * (t11 - t01);
  const double dly = (1 - ax) * (t01 - t00) + ax * (t11 - t10);
  return {v, dlx, dly};
}

Rect textured_footprint(const GrayImage& t, const Stamp& s) {
  const double c = std::abs(std::cos(s.theta));
  const double sn = std::abs(std::sin(s.theta));
  const double k = 2.0 * s.radius / std::max(t.width(), t.height());
  const double a = (0.5 * t.width() + 0.5) * k;
  const double b = (0.5 * t.height() + 0.5) * k;
  const double hx = c * a + sn * b;
  const double hy = sn * a + c * b;
  return pixel_cover(s.x - hx, s.y - hy, s.x + hx, s.y + hy);
}

template <class Fn>
AlphaMap rasterize(const Rect& r, Fn&& alpha_at) {
  AlphaMap map{{r.x, r.y}, Grid<double>(std::max(r.w, 0), std::max(r.h, 0))};
  for (int j = 0; j < map.values.height(); ++j)
    for (int i = 0; i < map.values.width(); ++i)
      map.values(i, j) = alpha_at(r.x + i + 0.5, r.y + j + 0.5);
  return map;
}

}  // namespace

std::string mode_name(const BrushMode& m) {
  if (std::holds_alternative<HardRound>(m)) return "hard_round";
  if (std::holds_alternative<BrushTip>(m)) return "brush_tip";
  return "gaussian";
}

BrushMode mode_from_name(const std::string& name, const std::string& texture_id) {
  if (name == "hard_round") return HardRound{};
  if (name == "gaussian") return Gaussian2D{};
  if (name == "brush_tip") {
    if (texture_id.empty()) throw std::invalid_argument("brush_tip mode requires a texture id");
    return BrushTip{texture_id};
  }
  throw std::invalid_argument("unknown brush mode '" + name + "'");
}

Stamp Stamp::tip(BrushMode mode, double x, double y, double radius, double theta,
                 double pressure, Rgb color) {
  Stamp s;
  s.mode = std::move(mode);
  s.x = x;
  s.y = y;
  s.radius = radius;
  s.theta = theta;
  s.pressure = pressure;
  s.color = color;
  return s;
}

Stamp Stamp::gaussian(double x, double y, double sigma_x, double sigma_y, double theta,
                      Rgb color) {
  Stamp s;
  s.mode = Gaussian2D{};
  s.x = x;
  s.y = y;
  s.sigma_x = sigma_x;
  s.sigma_y = sigma_y;
  s.theta = theta;
  s.color = color;
  return s;
}

void validate(const Stamp& s) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid stamp: " + what); };
  if (!finite(s.x) || !finite(s.y) || !finite(s.theta)) fail("non-finite position or angle");
  if (s.theta < -std::numbers::pi || s.theta > std::numbers::pi) fail("theta outside [-pi, pi]");
  for (int ch = 0; ch < 3; ++ch)
    if (!(s.color[ch] >= 0.0 && s.color[ch] <= 1.0)) fail("color channel outside [0, 1]");
  if (is_tip_mode(s.mode)) {
    if (!(s.radius > 0.0) || !finite(s.radius)) fail("tip radius must be positive");
    if (!(s.pressure >= 0.0 && s.pressure <= 1.0)) fail("pressure outside [0, 1]");
    if (s.sigma_x != 0.0 || s.sigma_y != 0.0) fail("tip stamp carries sigma values");
    if (auto* tip = std::get_if<BrushTip>(&s.mode); tip && tip->texture_id.empty())
      fail("brush tip without texture id");
  } else {
    if (!(s.sigma_x > 0.0) || !(s.sigma_y > 0.0) || !finite(s.sigma_x) || !finite(s.sigma_y))
      fail("sigma must be positive");
    if (s.radius != 0.0 || s.pressure != 0.0) fail("gaussian stamp carries radius or pressure");
  }
}

double radius_from_pressure(double p, const PressureConfig& cfg) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("pressure outside [0, 1]");
  if (!(cfg.r_min > 0.0) || !(cfg.r_min <= cfg.r_max))
    throw std::invalid_argument("pressure config requires 0 < r_min <= r_max");
  return cfg.r_min + (cfg.r_max - cfg.r_min) * std::log1p(9.0 * p) / std::numbers::ln10;
}

double opacity_from_pressure(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("pressure outside [0, 1]");
  return std::pow(p, 2.5);
}

double smooth_pressure(double prev_smoothed, double raw) {
  if (!(prev_smoothed >= 0.0 && prev_smoothed <= 1.0) || !(raw >= 0.0 && raw <= 1.0))
    throw std::invalid_argument("pressure outside [0, 1]");
  return std::clamp(PressureConfig::kSmoothPrevious * prev_smoothed +
                        PressureConfig::kSmoothCurrent * raw,
                    0.0, 1.0);
}

void TextureLibrary::add(const std::string& id, GrayImage texture) {
  if (texture.empty()) throw std::invalid_argument("empty brush texture");
  for (double v : texture.data())
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("texture values must lie in [0, 1]");
  textures_[id] = std::move(texture);
}

const GrayImage& TextureLibrary::get(const std::string& id) const {
  auto it = textures_.find(id);
  if (it == textures_.end()) throw std::out_of_range("unknown brush texture '" + id + "'");
  return it->second;
}

double AlphaMap::at(int px, int py) const {
  const int i = px - origin.x;
  const int j = py - origin.y;
  return values.in_bounds(i, j) ? values(i, j) : 0.0;
}

AlphaGrad hard_round_alpha_grad(const Stamp& s, double soften, double qx, double qy) {
  AlphaGrad g;
  const double dx = qx - s.x;
  const double dy = qy - s.y;
  const double d = std::sqrt(dx * dx + dy * dy);
  const double opacity = std::pow(s.pressure, 2.5);
  const double d_opacity = s.pressure > 0.0 ? 2.5 * std::pow(s.pressure, 1.5) : 0.0;
  if (soften <= 0.0) {
    const double cover = d <= s.radius ? 1.0 : 0.0;
    g.value = cover * opacity;
    g.d_pressure = cover * d_opacity;
    return g;
  }
  const double t = (s.radius + 0.5 * soften - d) / soften;
  if (t <= 0.0) return g;
  if (t >= 1.0) {
    g.value = opacity;
    g.d_pressure = d_opacity;
    return g;
  }
  const double cover = smootherstep(t);
  const double slope = opacity * smootherstep_deriv(t) / soften;  // d alpha / d r
  g.value = opacity * cover;
  g.d_pressure = d_opacity * cover;
  g.d_size_a = slope;
  if (d > 0.0) {
    g.d_x = slope * dx / d;
    g.d_y = slope * dy / d;
  }
  return g;
}

double hard_round_alpha(const Stamp& s, double soften, double qx, double qy) {
  return hard_round_alpha_grad(s, soften, qx, qy).value;
}

AlphaGrad gaussian_alpha_grad(const Stamp& s, double qx, double qy) {
  AlphaGrad g;
  const double dx = qx - s.x;
  const double dy = qy - s.y;
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const double u = c * dx + sn * dy;
  const double v = -sn * dx + c * dy;
  const double sx2 = s.sigma_x * s.sigma_x;
  const double sy2 = s.sigma_y * s.sigma_y;
  const double q = u * u / sx2 + v * v / sy2;
  if (q >= kGaussianCutoff) return g;
  const double e = std::exp(-0.5 * q);
  double w = 1.0;
  double dw = 0.0;
  if (q > kGaussianTaperStart) {
    const double t = (kGaussianCutoff - q) / (kGaussianCutoff - kGaussianTaperStart);
    w = smootherstep(t);
    dw = -smootherstep_deriv(t) / (kGaussianCutoff - kGaussianTaperStart);
  }
  g.value = e * w;
  const double da_dq = e * (dw - 0.5 * w);
  const double dq_du = 2.0 * u / sx2;
  const double dq_dv = 2.0 * v / sy2;
  g.d_x = da_dq * (-c * dq_du + sn * dq_dv);
  g.d_y = da_dq * (-sn * dq_du - c * dq_dv);
  g.d_theta = da_dq * (v * dq_du - u * dq_dv);
  g.d_size_a = da_dq * (-2.0 * u * u / (sx2 * s.sigma_x));
  g.d_size_b = da_dq * (-2.0 * v * v / (sy2 * s.sigma_y));
  return g;
}

double gaussian_alpha(const Stamp& s, double qx, double qy) {
  return gaussian_alpha_grad(s, qx, qy).value;
}

AlphaGrad textured_alpha_grad(const GrayImage& texture, const Stamp& s, double qx, double qy) {
  AlphaGrad g;
  const double extent = std::max(texture.width(), texture.height());
  const double k = 2.0 * s.radius / extent;  // canvas pixels per texel
  const double dx = qx - s.x;
  const double dy = qy - s.y;
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const double u = (c * dx + sn * dy) / k;
  const double v = (-sn * dx + c * dy) / k;
  const Bilinear b = sample_bilinear(texture, u + 0.5 * texture.width(), v + 0.5 * texture.height());
  if (b.value == 0.0 && b.d_lx == 0.0 && b.d_ly == 0.0) return g;
  const double opacity = std::pow(s.pressure, 2.5);
  const double d_opacity = s.pressure > 0.0 ? 2.5 * std::pow(s.pressure, 1.5) : 0.0;
  g.value = b.value * opacity;
  g.d_pressure = b.value * d_opacity;
  const double gx = b.d_lx * opacity;
  const double gy = b.d_ly * opacity;
  g.d_x = gx * (-c / k) + gy * (sn / k);
  g.d_y = gx * (-sn / k) + gy * (-c / k);
  g.d_theta = gx * v - gy * u;
  g.d_size_a = -(gx * u + gy * v) / s.radius;
  return g;
}

double textured_alpha(const GrayImage& texture, const Stamp& s, double qx, double qy) {
  return textured_alpha_grad(texture, s, qx, qy).value;
}

double stamp_alpha_at(const Stamp& s, const TextureLibrary* textures, double soften, double qx,
                      double qy) {
  return stamp_alpha_grad_at(s, textures, soften, qx, qy).value;
}

AlphaGrad stamp_alpha_grad_at(const Stamp& s, const TextureLibrary* textures, double soften,
                              double qx, double qy) {
  if (std::holds_alternative<Gaussian2D>(s.mode)) return gaussian_alpha_grad(s, qx, qy);
  if (const auto* tip = std::get_if<BrushTip>(&s.mode)) {
    if (!textures) throw std::invalid_argument("brush tip stamp rendered without textures");
    return textured_alpha_grad(textures->get(tip->texture_id), s, qx, qy);
  }
  return hard_round_alpha_grad(s, soften, qx, qy);
}

Rect stamp_footprint(const Stamp& s, const TextureLibrary* textures, double soften) {
  const double c = std::abs(std::cos(s.theta));
  const double sn = std::abs(std::sin(s.theta));
  double hx = 0.0;
  double hy = 0.0;
  if (std::holds_alternative<Gaussian2D>(s.mode)) {
    const double sx2 = s.sigma_x * s.sigma_x;
    const double sy2 = s.sigma_y * s.sigma_y;
    hx = 4.0 * std::sqrt(sx2 * c * c + sy2 * sn * sn);
    hy = 4.0 * std::sqrt(sx2 * sn * sn + sy2 * c * c);
  } else if (const auto* tip = std::get_if<BrushTip>(&s.mode)) {
    if (!textures) throw std::invalid_argument("brush tip stamp rendered without textures");
    return textured_footprint(textures->get(tip->texture_id), s);
  } else {
    hx = hy = s.radius + 0.5 * std::max(soften, 0.0);
  }
  return pixel_cover(s.x - hx, s.y - hy, s.x + hx, s.y + hy);
}

AlphaMap stamp_alpha_hard_round(const Stamp& s, double soften) {
  if (!(s.radius > 0.0)) throw std::invalid_argument("hard round stamp needs a positive radius");
  if (soften < 0.0) throw std::invalid_argument("soften width must be >= 0");
  return rasterize(stamp_footprint(s, nullptr, soften),
                   [&](double qx, double qy) { return hard_round_alpha(s, soften, qx, qy); });
}

AlphaMap stamp_alpha_textured(const GrayImage& texture, const Stamp& s) {
  if (texture.empty()) throw std::invalid_argument("missing brush texture");
  if (!(s.radius > 0.0)) throw std::invalid_argument("textured stamp needs a positive radius");
  return rasterize(textured_footprint(texture, s),
                   [&](double qx, double qy) { return textured_alpha(texture, s, qx, qy); });
}

AlphaMap stamp_alpha_gaussian(const Stamp& s) {
  if (!(s.sigma_x > 0.0) || !(s.sigma_y > 0.0))
    throw std::invalid_argument("gaussian stamp needs positive sigma");
  return rasterize(stamp_footprint(s, nullptr, 0.0),
                   [&](double qx, double qy) { return gaussian_alpha(s, qx, qy); });
}

AlphaMap stamp_alpha(const Stamp& s, const TextureLibrary* textures, double soften) {
  if (std::holds_alternative<Gaussian2D>(s.mode)) return stamp_alpha_gaussian(s);
  if (const auto* tip = std::get_if<BrushTip>(&s.mode)) {
    if (!textures) throw std::invalid_argument("brush tip stamp rendered without textures");
    return stamp_alpha_textured(textures->get(tip->texture_id), s);
  }
  return stamp_alpha_hard_round(s, soften);
}

void composite_over(Canvas& canvas, const AlphaMap& alpha, Rgb color) {
  for (int ch = 0; ch < 3; ++ch)
    if (!(color[ch] >= 0.0 && color[ch] <= 1.0))
      throw std::invalid_argument("composite color outside [0, 1]");
  const Rect r = alpha.bounds().intersected(canvas.bounds());
  for (int py = r.y; py < r.bottom(); ++py)
    for (int px = r.x; px < r.right(); ++px) {
      const double a = alpha.values(px - alpha.origin.x, py - alpha.origin.y);
      if (a == 0.0) continue;
      Rgb& h = canvas(px, py);
      for (int ch = 0; ch < 3; ++ch)
        h[ch] = std::clamp(a * color[ch] + (1.0 - a) * h[ch], 0.0, 1.0);
    }
}

Canvas composite_weighted_sum(const std::vector<std::pair<AlphaMap, Rgb>>& stamps,
                              const Canvas& background) {
  const int w = background.width();
  const int h = background.height();
  Grid<double> weight(w, h, kBackgroundWeight);
  Canvas accum(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < 3; ++ch) accum(x, y)[ch] = kBackgroundWeight * background(x, y)[ch];
  for (const auto& [alpha, color] : stamps) {
    const Rect r = alpha.bounds().intersected(background.bounds());
    for (int py = r.y; py < r.bottom(); ++py)
      for (int px = r.x; px < r.right(); ++px) {
        const double a = alpha.values(px - alpha.origin.x, py - alpha.origin.y);
        if (a == 0.0) continue;
        weight(px, py) += a;
        for (int ch = 0; ch < 3; ++ch) accum(px, py)[ch] += a * color[ch];
      }
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < 3; ++ch)
        accum(x, y)[ch] = std::clamp(accum(x, y)[ch] / weight(x, y), 0.0, 1.0);
  return accum;
}

Canvas render_stamps(const std::vector<Stamp>& stamps, Canvas background,
                     const TextureLibrary* textures) {
  for (const Stamp& s : stamps) composite_over(background, stamp_alpha(s, textures, 0.0), s.color);
  return background;
}

}  // namespace copaint
