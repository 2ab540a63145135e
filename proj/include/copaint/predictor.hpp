#pragma once

// Deterministic stand-ins for learned models: intent providers, the
// straight-line flow-matching pair, Euler sampling with pluggable velocity
// fields, and a residual-driven next-stroke proposer.

#include <any>
#include <array>
#include <functional>
#include <optional>
#include <span>
#include <variant>

#include "copaint/brush.hpp"
#include "copaint/mask.hpp"

namespace copaint {

/// Estimates the intended final image from the current canvas.
class IntentProvider {
 public:
  virtual ~IntentProvider() = default;
  /// Result has the canvas's dimensions.
  virtual Canvas predict(const Canvas& canvas) const = 0;
};

/// Returns a fixed reference image regardless of the canvas.
class ReferenceOracle final : public IntentProvider {
 public:
  explicit ReferenceOracle(Canvas reference) : reference_(std::move(reference)) {}
  Canvas predict(const Canvas& canvas) const override;
  const Canvas& reference() const { return reference_; }

 private:
  Canvas reference_;
};

Canvas intent_reference(const Canvas& canvas, const Canvas& reference);

/// (x, y, p, r, theta, R, G, B), each mapped to [0,1]: x / width,
/// y / height, r / canvas diagonal, (theta + pi) / (2 pi).
using StrokeVector8 = std::array<double, 8>;

enum StrokeSlot : int { kSlotX, kSlotY, kSlotPressure, kSlotRadius, kSlotTheta, kSlotR, kSlotG, kSlotB };

StrokeVector8 to_stroke_vector(const Stamp& s, int width, int height);
/// Tip modes take r and p directly; Gaussian stamps get
/// sigma_x = sigma_y = r * kGaussianSigmaPerRadius and ignore p.
Stamp from_stroke_vector(const StrokeVector8& a, const BrushMode& mode, int width, int height);

struct FlowPair {
  StrokeVector8 point;     // a_t
  StrokeVector8 velocity;  // u_t
};

/// a_t = (1 - t) a_src + t a_tar, u_t = a_tar - a_src.
FlowPair fm_pair(const StrokeVector8& a_src, const StrokeVector8& a_tar, double t);

/// v(a, context, t). The context is an opaque conditioning blob.
using VelocityField =
    std::function<StrokeVector8(const StrokeVector8& a, const std::any& context, double t)>;

inline constexpr int kDefaultEulerSteps = 10;

/// a <- a + v(a, context, k / steps) / steps for k = 0..steps-1, clamped to
/// [0,1]^8 at the end only. Throws on non-finite field output.
StrokeVector8 euler_integrate(const StrokeVector8& a0, const VelocityField& field,
                              const std::any& context, int steps = kDefaultEulerSteps);

/// Velocity field of the straight path toward a fixed target: the constant
/// a_tar - a_src.
VelocityField straight_line_field(const StrokeVector8& a_src, const StrokeVector8& a_tar);

struct ProposerConfig {
  double r_max_fraction = 0.08;  // of the canvas diagonal, at progress 0
  double r_min = 2.0;            // pixels, at progress 1
  double pressure = 0.8;
};

struct CompletionSignal {
  bool operator==(const CompletionSignal&) const = default;
};

using Proposal = std::variant<StrokeVector8, CompletionSignal>;

/// Next stroke at the pixel of largest squared residual between canvas and
/// intent (restricted to `mask`; ties resolved row-major), colored by the
/// intent there, oriented along the local intent luminance gradient, sized on
/// a linear coarse-to-fine schedule in `progress`. CompletionSignal when the
/// residual is zero everywhere considered.
Proposal propose_next_stroke(const Canvas& canvas, const Canvas& intent,
                             std::span<const Stamp> history, const Mask* mask, double progress,
                             const ProposerConfig& cfg = {});

}  // namespace copaint
