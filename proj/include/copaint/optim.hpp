#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "copaint/diff_render.hpp"

namespace copaint {

/// base_lr * (1 + cos(pi * step / (total - 1))) / 2. Requires total >= 2.
double cosine_lr(int step, int total, double base_lr);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update in place. Moments are sized on first use.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamHyper& hyper = {});

struct OptimConfig {
  int iterations = 30;
  double base_lr = 0.02;
  int patience = 5;
  double min_rel_improvement = 1e-4;
  AdamHyper adam;
  /// Optional extra projection applied after clamping (e.g. into a lasso).
  std::function<void(std::span<double>)> project;
};

enum class StopReason { MaxIterations, EarlyStop };

struct LossTrace {
  std::vector<double> losses;  // loss at each evaluated iterate
  StopReason reason = StopReason::MaxIterations;
};

struct OptimResult {
  ParamVector params;  // best iterate seen
  double loss = 0.0;   // its loss
  LossTrace trace;
};

/// Adam with cosine annealing on loss_mse(render_diff(params), target).
/// Stops early once the last `patience` + 1 losses differ by less than
/// min_rel_improvement relative to their maximum, or the loss reaches zero.
/// Iterates are clamped (and projected) after every step; the best-loss
/// iterate is returned, so the result never scores worse than `init`.
OptimResult optimize_strokes(ParamVector init, const DiffScene& scene, const Canvas& target,
                             const OptimConfig& cfg);

}  // namespace copaint
