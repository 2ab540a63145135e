#pragma once

// Differentiable rendering of stamp sets and analytic gradients of the
// reconstruction loss.
//
// Free stamp parameters live in a flat vector in normalized units: x / width,
// y / height, radius and sigma / canvas diagonal, theta / pi; pressure and
// color are stored raw. A ParamLayout maps each slot back to (stamp, kind);
// parameters that have no slot keep the value of the layout's template stamp.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "copaint/brush.hpp"

namespace copaint {

enum class ParamKind : std::uint8_t { X, Y, Radius, SigmaX, SigmaY, Theta, Pressure, Red, Green, Blue };

std::string to_string(ParamKind k);

struct ParamSlot {
  std::size_t stamp = 0;
  ParamKind kind = ParamKind::X;
  bool operator==(const ParamSlot&) const = default;
};

using ParamVector = std::vector<double>;

/// Valid ranges enforced after every optimizer step.
struct ParamClamps {
  double min_pressure = 0.01;
  double min_size = 0.5;            // radius and sigma, pixels
  double position_margin = 0.1;     // fraction of the canvas extent
};

class ParamLayout {
 public:
  ParamLayout() = default;
  ParamLayout(int width, int height, std::vector<Stamp> templates, std::vector<ParamSlot> slots,
              ParamClamps clamps = {});

  /// Every parameter of every stamp is free.
  static ParamLayout all_free(int width, int height, std::vector<Stamp> stamps,
                              ParamClamps clamps = {});
  /// Free parameters of one stamp in canonical order.
  static std::vector<ParamKind> kinds_for(const Stamp& s);

  int width() const { return width_; }
  int height() const { return height_; }
  double diagonal() const;
  std::size_t stamp_count() const { return templates_.size(); }
  std::size_t size() const { return slots_.size(); }
  const std::vector<ParamSlot>& slots() const { return slots_; }
  const std::vector<Stamp>& templates() const { return templates_; }
  const ParamClamps& clamps() const { return clamps_; }

  /// Pixel units per normalized unit for a parameter kind.
  double scale(ParamKind k) const;

  /// Normalized vector for the given stamps (same count and modes as the
  /// templates).
  ParamVector normalize(std::span<const Stamp> stamps) const;
  ParamVector normalize_templates() const { return normalize(templates_); }

  /// Throws std::out_of_range when a parameter lies outside its clamp range.
  std::vector<Stamp> denormalize(std::span<const double> params) const;

  /// Projects params into their valid ranges; theta wraps into [-1, 1].
  void clamp(std::span<double> params) const;

  bool in_range(std::span<const double> params) const;

 private:
  void check_slots() const;
  double lower(ParamKind k) const;
  double upper(ParamKind k) const;

  int width_ = 0;
  int height_ = 0;
  std::vector<Stamp> templates_;
  std::vector<ParamSlot> slots_;
  ParamClamps clamps_;
};

enum class Blend {
  WeightedSum,  // order-independent; keeps gradients alive for occluded stamps
  Over,         // painter's algorithm, identical to display compositing
};

/// Everything besides the parameter vector needed to render a scene.
struct DiffScene {
  ParamLayout layout;
  Canvas background;
  Blend blend = Blend::WeightedSum;
  double soften = 1.0;  // hard round edge width during optimization
  const TextureLibrary* textures = nullptr;
};

Canvas render_diff(std::span<const double> params, const DiffScene& scene);

/// Mean over pixels of the squared L2 norm over RGB (channel sum).
double loss_mse(const Canvas& image, const Canvas& target);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Loss of render_diff(params) against target with its analytic gradient.
LossGrad loss_and_grad(std::span<const double> params, const DiffScene& scene,
                       const Canvas& target);

std::vector<double> grad_loss(std::span<const double> params, const DiffScene& scene,
                              const Canvas& target);

/// Central differences of an arbitrary scalar function.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> params, double eps);

/// Central differences of loss_mse(render_diff(params), target).
std::vector<double> finite_diff_grad(std::span<const double> params, const DiffScene& scene,
                                     const Canvas& target, double eps);

}  // namespace copaint
