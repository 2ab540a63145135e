#include "copaint/predictor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "copaint/metrics.hpp"

namespace copaint {

Canvas ReferenceOracle::predict(const Canvas& canvas) const {
  return intent_reference(canvas, reference_);
}

Canvas intent_reference(const Canvas& canvas, const Canvas& reference) {
  if (!canvas.same_size(reference))
    throw std::invalid_argument("intent_reference: reference size differs from canvas");
  return reference;
}

StrokeVector8 to_stroke_vector(const Stamp& s, int width, int height) {
  const double diag = std::hypot(width, height);
  const double r = is_tip_mode(s.mode) ? s.radius
                                       : std::max(s.sigma_x, s.sigma_y) / kGaussianSigmaPerRadius;
  const double p = is_tip_mode(s.mode) ? s.pressure : 1.0;
  return {s.x / width, s.y / height, p, r / diag,
          (s.theta + std::numbers::pi) / (2.0 * std::numbers::pi), s.color.r, s.color.g, s.color.b};
}

Stamp from_stroke_vector(const StrokeVector8& a, const BrushMode& mode, int width, int height) {
  const double diag = std::hypot(width, height);
  const double r = std::max(a[kSlotRadius] * diag, 0.5);
  const double theta = std::clamp(a[kSlotTheta] * 2.0 * std::numbers::pi - std::numbers::pi,
                                  -std::numbers::pi, std::numbers::pi);
  const Rgb color{std::clamp(a[kSlotR], 0.0, 1.0), std::clamp(a[kSlotG], 0.0, 1.0),
                  std::clamp(a[kSlotB], 0.0, 1.0)};
  const double x = a[kSlotX] * width;
  const double y = a[kSlotY] * height;
  if (std::holds_alternative<Gaussian2D>(mode)) {
    const double sigma = r * kGaussianSigmaPerRadius;
    return Stamp::gaussian(x, y, sigma, sigma, theta, color);
  }
  return Stamp::tip(mode, x, y, r, theta, std::clamp(a[kSlotPressure], 0.0, 1.0), color);
}

FlowPair fm_pair(const StrokeVector8& a_src, const StrokeVector8& a_tar, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("fm_pair: t outside [0, 1]");
  FlowPair out;
  for (std::size_t i = 0; i < 8; ++i) {
    out.point[i] = (1.0 - t) * a_src[i] + t * a_tar[i];
    out.velocity[i] = a_tar[i] - a_src[i];
  }
  return out;
}

StrokeVector8 euler_integrate(const StrokeVector8& a0, const VelocityField& field,
                              const std::any& context, int steps) {
  if (steps < 1) throw std::invalid_argument("euler_integrate: steps must be >= 1");
  StrokeVector8 a = a0;
  const double dt = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const StrokeVector8 v = field(a, context, static_cast<double>(k) / steps);
    for (std::size_t i = 0; i < 8; ++i) {
      if (!std::isfinite(v[i])) throw std::runtime_error("euler_integrate: non-finite velocity");
      a[i] += dt * v[i];
    }
  }
  for (double& x : a) x = std::clamp(x, 0.0, 1.0);
  return a;
}

VelocityField straight_line_field(const StrokeVector8& a_src, const StrokeVector8& a_tar) {
  const StrokeVector8 u = fm_pair(a_src, a_tar, 0.0).velocity;
  return [u](const StrokeVector8&, const std::any&, double) { return u; };
}

Proposal propose_next_stroke(const Canvas& canvas, const Canvas& intent,
                             [[maybe_unused]] std::span<const Stamp> history, const Mask* mask,
                             double progress, const ProposerConfig& cfg) {
  if (!canvas.same_size(intent)) throw std::invalid_argument("propose_next_stroke: size mismatch");
  if (mask) {
    if (mask->width() != canvas.width() || mask->height() != canvas.height())
      throw std::invalid_argument("propose_next_stroke: mask size mismatch");
    if (mask->empty()) throw std::invalid_argument("propose_next_stroke: empty mask");
  }
  const int w = canvas.width();
  const int h = canvas.height();
  double best = 0.0;
  PixelPos at{-1, -1};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (mask && !mask->test(x, y)) continue;
      double r2 = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double d = canvas(x, y)[ch] - intent(x, y)[ch];
        r2 += d * d;
      }
      if (r2 > best) {
        best = r2;
        at = {x, y};
      }
    }
  if (at.x < 0) return CompletionSignal{};

  auto lum = [&](int x, int y) {
    return luminance(intent(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
  };
  const double gx = lum(at.x + 1, at.y) - lum(at.x - 1, at.y);
  const double gy = lum(at.x, at.y + 1) - lum(at.x, at.y - 1);
  const double theta = (gx == 0.0 && gy == 0.0) ? 0.0 : std::atan2(gy, gx);

  const double diag = std::hypot(w, h);
  const double r_max = std::max(cfg.r_max_fraction * diag, cfg.r_min);
  const double t = std::clamp(progress, 0.0, 1.0);
  const double r = r_max - (r_max - cfg.r_min) * t;
  const Rgb c = intent(at.x, at.y);
  return StrokeVector8{(at.x + 0.5) / w, (at.y + 0.5) / h, cfg.pressure, r / diag,
                       (theta + std::numbers::pi) / (2.0 * std::numbers::pi), c.r, c.g, c.b};
}

}  // namespace copaint
