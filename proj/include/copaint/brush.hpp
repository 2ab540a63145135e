#pragma once

// Brush parameterizations, pressure curves, stamp alpha maps and compositing.
//
// Three brush modes share one Stamp type. Tip modes (HardRound, BrushTip) are
// sized by a radius and carry pen pressure; Gaussian stamps are sized by two
// standard deviations and carry no pressure. Pixel centers sit at integer
// coordinates + 0.5. Angles follow the canvas axes (x right, y down), so a
// positive theta rotates clockwise on screen.

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "copaint/grid.hpp"

namespace copaint {

struct HardRound {
  bool operator==(const HardRound&) const = default;
};
struct BrushTip {
  std::string texture_id;
  bool operator==(const BrushTip&) const = default;
};
struct Gaussian2D {
  bool operator==(const Gaussian2D&) const = default;
};

using BrushMode = std::variant<HardRound, BrushTip, Gaussian2D>;

inline bool is_tip_mode(const BrushMode& m) { return !std::holds_alternative<Gaussian2D>(m); }
std::string mode_name(const BrushMode& m);
/// Inverse of mode_name; "brush_tip" needs the texture id.
BrushMode mode_from_name(const std::string& name, const std::string& texture_id = {});

/// One rendered brush instance. Tip stamps use `radius` and `pressure`;
/// Gaussian stamps use `sigma_x` and `sigma_y`. Unused fields stay zero.
struct Stamp {
  BrushMode mode = HardRound{};
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double theta = 0.0;
  double pressure = 0.0;
  Rgb color;

  static Stamp tip(BrushMode mode, double x, double y, double radius, double theta,
                   double pressure, Rgb color);
  static Stamp gaussian(double x, double y, double sigma_x, double sigma_y, double theta,
                        Rgb color);

  bool operator==(const Stamp&) const = default;
};

/// Throws std::invalid_argument when a stamp breaks its mode's invariants.
void validate(const Stamp& s);

/// Gaussian stamps derived from a brush radius use sigma = radius * this.
inline constexpr double kGaussianSigmaPerRadius = 0.5;

struct PressureConfig {
  double r_min = 1.0;
  double r_max = 10.0;

  static constexpr double kSmoothPrevious = 0.7;
  static constexpr double kSmoothCurrent = 0.3;
};

double radius_from_pressure(double p, const PressureConfig& cfg);
double opacity_from_pressure(double p);
double smooth_pressure(double prev_smoothed, double raw);

/// Brush tip textures keyed by id (content hash when loaded from files).
class TextureLibrary {
 public:
  void add(const std::string& id, GrayImage texture);
  bool contains(const std::string& id) const { return textures_.count(id) != 0; }
  /// Throws std::out_of_range for unknown ids.
  const GrayImage& get(const std::string& id) const;
  std::size_t size() const { return textures_.size(); }

 private:
  std::map<std::string, GrayImage> textures_;
};

/// Dense alpha values placed at `origin` within the canvas.
struct AlphaMap {
  PixelPos origin;
  Grid<double> values;

  Rect bounds() const { return {origin.x, origin.y, values.width(), values.height()}; }
  /// Alpha at canvas pixel (px, py); zero outside the map.
  double at(int px, int py) const;
};

// Per-point alpha evaluators. (qx, qy) is a continuous canvas position; pixel
// (i, j) is evaluated at (i + 0.5, j + 0.5).

/// Disk of radius r scaled by p^2.5. `soften` > 0 replaces the hard edge with
/// a C2 falloff of that width centered on the radius.
double hard_round_alpha(const Stamp& s, double soften, double qx, double qy);

/// exp(-q/2) with q the squared Mahalanobis distance; exactly zero at
/// q >= 16 (4 sigma). A C2 taper over q in [9, 16] brings the tail to zero
/// smoothly; it changes values by at most ~1e-3.
double gaussian_alpha(const Stamp& s, double qx, double qy);

/// Texture warped by translate(x,y) * rotate(theta) * scale(2r / max extent),
/// bilinear with zero outside the texture, scaled by p^2.5.
double textured_alpha(const GrayImage& texture, const Stamp& s, double qx, double qy);

/// Alpha and its partial derivatives with respect to the stamp's own
/// parameters. size_a / size_b are (radius, -) for tips and (sigma_x, sigma_y)
/// for Gaussians.
struct AlphaGrad {
  double value = 0.0;
  double d_x = 0.0;
  double d_y = 0.0;
  double d_size_a = 0.0;
  double d_size_b = 0.0;
  double d_theta = 0.0;
  double d_pressure = 0.0;
};

AlphaGrad hard_round_alpha_grad(const Stamp& s, double soften, double qx, double qy);
AlphaGrad gaussian_alpha_grad(const Stamp& s, double qx, double qy);
AlphaGrad textured_alpha_grad(const GrayImage& texture, const Stamp& s, double qx, double qy);

/// Dispatches on the stamp mode. `textures` is required for BrushTip stamps.
double stamp_alpha_at(const Stamp& s, const TextureLibrary* textures, double soften, double qx,
                      double qy);
AlphaGrad stamp_alpha_grad_at(const Stamp& s, const TextureLibrary* textures, double soften,
                              double qx, double qy);

/// Pixel rectangle covering every pixel center where the stamp can be nonzero.
Rect stamp_footprint(const Stamp& s, const TextureLibrary* textures, double soften);

AlphaMap stamp_alpha_hard_round(const Stamp& s, double soften);
AlphaMap stamp_alpha_textured(const GrayImage& texture, const Stamp& s);
AlphaMap stamp_alpha_gaussian(const Stamp& s);
AlphaMap stamp_alpha(const Stamp& s, const TextureLibrary* textures, double soften = 0.0);

/// h' = alpha * c + (1 - alpha) * h, clipped to the canvas. Pixels with
/// alpha == 0 are left untouched.
void composite_over(Canvas& canvas, const AlphaMap& alpha, Rgb color);

/// Background weight of the order-independent blend.
inline constexpr double kBackgroundWeight = 1.0;

/// Per pixel (sum_i a_i c_i + w_bg * bg) / (sum_i a_i + w_bg).
Canvas composite_weighted_sum(const std::vector<std::pair<AlphaMap, Rgb>>& stamps,
                              const Canvas& background);

/// Painter's-algorithm display render of stamps over a background.
Canvas render_stamps(const std::vector<Stamp>& stamps, Canvas background,
                     const TextureLibrary* textures);

}  // namespace copaint
