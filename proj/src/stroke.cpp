#include "copaint/stroke.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace copaint {
namespace {

double dist(double ax, double ay, double bx, double by) { return std::hypot(bx - ax, by - ay); }

Stamp make_stamp(const StrokeRecord& stroke, double x, double y, double pressure, double theta,
                 const PressureConfig& cfg) {
  const double r = radius_from_pressure(pressure, cfg);
  if (std::holds_alternative<Gaussian2D>(stroke.tool)) {
    const double sigma = r * kGaussianSigmaPerRadius;
    return Stamp::gaussian(x, y, sigma, sigma, theta, stroke.color);
  }
  return Stamp::tip(stroke.tool, x, y, r, theta, pressure, stroke.color);
}

}  // namespace

void validate(const StrokeRecord& stroke) {
  if (stroke.samples.empty()) throw std::invalid_argument("stroke has no samples");
  if (!(stroke.base_size > 0.0) || !std::isfinite(stroke.base_size))
    throw std::invalid_argument("stroke base_size must be positive");
  for (int ch = 0; ch < 3; ++ch)
    if (!(stroke.color[ch] >= 0.0 && stroke.color[ch] <= 1.0))
      throw std::invalid_argument("stroke color outside [0, 1]");
  if (const auto* tip = std::get_if<BrushTip>(&stroke.tool); tip && tip->texture_id.empty())
    throw std::invalid_argument("brush tip stroke without texture id");
  double prev_t = -INFINITY;
  for (const TabletSample& s : stroke.samples) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.t_ms))
      throw std::invalid_argument("non-finite tablet sample");
    if (!(s.pressure >= 0.0 && s.pressure <= 1.0))
      throw std::invalid_argument("sample pressure outside [0, 1]");
    if (s.t_ms < prev_t) throw std::invalid_argument("sample timestamps must be nondecreasing");
    prev_t = s.t_ms;
  }
}

PressureConfig pressure_config_for(double base_size) {
  if (!(base_size > 0.0)) throw std::invalid_argument("base_size must be positive");
  const double r_max = 0.5 * base_size;
  return {0.1 * r_max, r_max};
}

SplinePoint eval_catmull_rom(const SplineSegment& seg, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("spline parameter outside [0, 1]");
  const auto& [p0, p1, p2, p3] = seg.controls;
  SplinePoint out;
  if (t == 0.0) {
    out = p1;
  } else if (t == 1.0) {
    out = p2;
  } else {
    const double t2 = t * t;
    const double t3 = t2 * t;
    auto basis = [&](double a, double b, double c, double d) {
      return 0.5 * (2.0 * b + (-a + c) * t + (2.0 * a - 5.0 * b + 4.0 * c - d) * t2 +
                    (-a + 3.0 * b - 3.0 * c + d) * t3);
    };
    out.x = basis(p0.x, p1.x, p2.x, p3.x);
    out.y = basis(p0.y, p1.y, p2.y, p3.y);
    out.pressure = basis(p0.pressure, p1.pressure, p2.pressure, p3.pressure);
  }
  out.pressure = std::clamp(out.pressure, 0.0, 1.0);
  return out;
}

std::vector<Stamp> plan_stamps(const StrokeRecord& stroke, const PressureConfig& cfg) {
  validate(stroke);
  const auto& samples = stroke.samples;
  const std::size_t n = samples.size();

  std::vector<SplinePoint> pts(n);
  double smoothed = samples[0].pressure;
  for (std::size_t i = 0; i < n; ++i) {
    if (stroke.smoothing && i > 0) smoothed = smooth_pressure(smoothed, samples[i].pressure);
    const double p = stroke.smoothing ? smoothed : samples[i].pressure;
    pts[i] = {samples[i].x, samples[i].y, p};
  }

  std::vector<Stamp> stamps;
  stamps.push_back(make_stamp(stroke, pts[0].x, pts[0].y, pts[0].pressure, 0.0, cfg));

  SplinePoint prev = pts[0];
  double travelled = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const SplineSegment seg{{pts[i == 0 ? 0 : i - 1], pts[i], pts[i + 1],
                             pts[std::min(i + 2, n - 1)]}};
    const double chord = dist(pts[i].x, pts[i].y, pts[i + 1].x, pts[i + 1].y);
    const int steps = std::max(1, static_cast<int>(std::ceil(chord / kWalkStep)));
    for (int k = 1; k <= steps; ++k) {
      const SplinePoint cur = eval_catmull_rom(seg, static_cast<double>(k) / steps);
      const double tau = kSpacingFraction * radius_from_pressure(cur.pressure, cfg);
      double d = dist(prev.x, prev.y, cur.x, cur.y);
      while (travelled + d >= tau && d > 0.0) {
        const double f = std::max(0.0, (tau - travelled) / d);
        const SplinePoint at{prev.x + f * (cur.x - prev.x), prev.y + f * (cur.y - prev.y),
                             prev.pressure + f * (cur.pressure - prev.pressure)};
        const Stamp& last = stamps.back();
        const double theta = std::atan2(at.y - last.y, at.x - last.x);
        stamps.push_back(make_stamp(stroke, at.x, at.y, at.pressure, theta, cfg));
        prev = at;
        travelled = 0.0;
        d = dist(prev.x, prev.y, cur.x, cur.y);
      }
      travelled += d;
      prev = cur;
    }
  }
  return stamps;
}

void render_stroke(Canvas& canvas, const StrokeRecord& stroke, const PressureConfig& cfg,
                   const TextureLibrary* textures) {
  for (const Stamp& s : plan_stamps(stroke, cfg))
    composite_over(canvas, stamp_alpha(s, textures, 0.0), s.color);
}

bool is_mouse_session(std::span<const StrokeRecord> session, double threshold) {
  std::map<double, std::size_t> counts;
  std::size_t total = 0;
  for (const StrokeRecord& s : session)
    for (const TabletSample& t : s.samples) {
      ++counts[t.pressure];
      ++total;
    }
  if (total == 0) throw std::invalid_argument("session has no samples");
  std::size_t modal = 0;
  for (const auto& [value, count] : counts) modal = std::max(modal, count);
  return static_cast<double>(modal) / static_cast<double>(total) > threshold;
}

}  // namespace copaint
