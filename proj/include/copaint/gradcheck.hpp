#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "copaint/diff_render.hpp"

namespace copaint {

struct GradCheckOptions {
  int scenes = 100;
  int canvas_size = 32;
  int min_stamps = 1;
  int max_stamps = 8;
  double eps = 1e-4;        // normalized units
  double rel_tol = 1e-3;
  double abs_floor = 1e-6;  // below this magnitude compare absolutely
  Blend blend = Blend::WeightedSum;
  std::uint64_t seed = 20240601;
};

struct GradCheckReport {
  int scenes = 0;
  std::size_t coordinates = 0;
  std::size_t failures = 0;
  double max_rel_error = 0.0;
  double max_abs_error_small = 0.0;  // over coordinates compared absolutely
  double seconds = 0.0;
  std::string worst;  // description of the worst coordinate

  bool passed() const { return failures == 0; }
};

/// Random Gaussian scene over a flat background with a noise target.
struct RandomScene {
  DiffScene scene;
  ParamVector params;
  Canvas target;
};

RandomScene random_gaussian_scene(std::mt19937_64& rng, int size, int stamps, Blend blend);

/// Compares grad_loss against finite_diff_grad on randomized scenes.
GradCheckReport run_gradient_suite(const GradCheckOptions& opts);

}  // namespace copaint
