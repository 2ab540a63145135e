#pragma once

#include <array>
#include <span>
#include <vector>

#include "copaint/brush.hpp"

namespace copaint {

struct TabletSample {
  double x = 0.0;
  double y = 0.0;
  double pressure = 0.0;
  double t_ms = 0.0;  // since stroke start

  bool operator==(const TabletSample&) const = default;
};

/// A recorded artist stroke: brush metadata plus pressure samples.
struct StrokeRecord {
  BrushMode tool = HardRound{};
  double base_size = 10.0;  // brush diameter in pixels
  Rgb color;
  bool smoothing = true;
  std::vector<TabletSample> samples;

  bool operator==(const StrokeRecord&) const = default;
};

/// Throws std::invalid_argument on an empty sample list, non-positive size,
/// out-of-range pressure/color or decreasing timestamps.
void validate(const StrokeRecord& stroke);

/// Pressure curve for a brush of diameter `base_size`: r_max = base_size / 2,
/// r_min = r_max / 10.
PressureConfig pressure_config_for(double base_size);

struct SplinePoint {
  double x = 0.0;
  double y = 0.0;
  double pressure = 0.0;
};

/// Uniform Catmull-Rom window; t in [0,1] spans controls[1] -> controls[2].
struct SplineSegment {
  std::array<SplinePoint, 4> controls;
};

SplinePoint eval_catmull_rom(const SplineSegment& seg, double t);

/// Arc-length step of the dense spline walk used for stamp spacing.
inline constexpr double kWalkStep = 0.25;
/// Stamp spacing as a fraction of the live radius.
inline constexpr double kSpacingFraction = 0.05;

/// Expands a stroke into stamps spaced 0.05 * r(p) apart along the spline.
/// The first stamp sits on the first sample with theta = 0; later stamps take
/// theta = atan2(dy, dx) of the displacement from the previous stamp, in
/// canvas axes (y down), so a stroke moving up the screen has theta = -pi/2.
std::vector<Stamp> plan_stamps(const StrokeRecord& stroke, const PressureConfig& cfg);

/// Folds composite_over over plan_stamps, with hard display edges.
void render_stroke(Canvas& canvas, const StrokeRecord& stroke, const PressureConfig& cfg,
                   const TextureLibrary* textures = nullptr);

inline constexpr double kMouseModalFraction = 0.99;

/// True when the most common pressure value covers more than `threshold` of
/// all samples in the session, the signature of mouse input.
bool is_mouse_session(std::span<const StrokeRecord> session,
                      double threshold = kMouseModalFraction);

}  // namespace copaint
