#include "copaint/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace copaint {

double cosine_lr(int step, int total, double base_lr) {
  if (total < 2) throw std::invalid_argument("cosine_lr: total must be >= 2");
  if (step < 0 || step >= total) throw std::invalid_argument("cosine_lr: step outside [0, total)");
  if (step == total - 1) return 0.0;
  return base_lr * 0.5 *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total - 1)));
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamHyper& hyper) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw std::invalid_argument("adam_step: state shape mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * grads[i];
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
  }
}

OptimResult optimize_strokes(ParamVector init, const DiffScene& scene, const Canvas& target,
                             const OptimConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("optimize_strokes: iterations must be >= 1");
  if (!(cfg.base_lr > 0.0)) throw std::invalid_argument("optimize_strokes: base_lr must be > 0");
  if (!scene.layout.in_range(init))
    throw std::invalid_argument("optimize_strokes: initial parameters outside their valid ranges");

  OptimResult result;
  result.loss = std::numeric_limits<double>::infinity();
  ParamVector params = std::move(init);
  AdamState state;
  const auto& losses = result.trace.losses;

  for (int it = 0; it < cfg.iterations; ++it) {
    const LossGrad lg = loss_and_grad(params, scene, target);
    result.trace.losses.push_back(lg.loss);
    if (lg.loss < result.loss) {
      result.loss = lg.loss;
      result.params = params;
    }

    if (result.loss == 0.0) {
      result.trace.reason = StopReason::EarlyStop;
      break;
    }
    // Plateau: the last patience + 1 losses lie within a relative band. A rise
    // after an Adam overshoot is not a plateau.
    if (cfg.patience > 0 && it >= cfg.patience) {
      const auto [lo, hi] = std::minmax_element(losses.end() - cfg.patience - 1, losses.end());
      if ((*hi - *lo) / *hi < cfg.min_rel_improvement) {
        result.trace.reason = StopReason::EarlyStop;
        break;
      }
    }
    if (it + 1 == cfg.iterations) break;

    adam_step(params, lg.grad, state, cosine_lr(it, cfg.iterations, cfg.base_lr), cfg.adam);
    scene.layout.clamp(params);
    if (cfg.project) cfg.project(params);
  }
  return result;
}

}  // namespace copaint
