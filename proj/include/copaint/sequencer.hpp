#pragma once

// Coarse-to-fine stroke plans from a target image and its guidance maps:
// regions in label order, attention-weighted positions, flat-first ordering
// and a linearly shrinking brush within each region.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "copaint/maps.hpp"
#include "copaint/mask.hpp"
#include "copaint/optim.hpp"

namespace copaint {

inline constexpr int kNormalWindow = 8;

/// Mean over the three components of the population variance of the normals
/// in the 8x8 window spanning offsets -4..+3 around `pos`, clipped to the map.
double local_normal_variance(const NormalMap& normals, PixelPos pos);

/// Positions that are redrawn when they land within this Chebyshev distance
/// of an earlier position, at most kSampleRetries times.
inline constexpr int kMinSampleSeparation = 1;
inline constexpr int kSampleRetries = 8;

/// n pixels drawn from `attention` restricted to `mask`; uniform over the mask
/// when its attention sums to zero. Deterministic in `seed`.
std::vector<PixelPos> sample_positions(const AttentionMap& attention, const Mask& mask, int n,
                                       std::uint64_t seed);

inline constexpr double kVarianceWeight = 100.0;

inline double position_score(double sigma_hat, double a_hat) {
  return kVarianceWeight * sigma_hat + a_hat;
}

/// Permutation sorting scores ascending; equal scores keep sample order.
std::vector<std::size_t> score_order(std::span<const double> scores);

/// r_max - (r_max - r_min) k / (n - 1) for k = 0..n-1; [r_max] for n = 1.
std::vector<double> assign_brush_sizes(int n, double r_max, double r_min);

/// Splits `budget` across regions in proportion to weight * area by largest
/// remainder (ties to the earlier region), then moves strokes from the
/// largest allocations so every nonempty region gets at least one.
std::vector<int> allocate_budget(std::span<const std::size_t> areas, int budget,
                                 std::span<const double> weights = {});

struct SequencerConfig {
  int budget = 350;
  BrushMode mode = Gaussian2D{};
  double region_radius_fraction = 0.25;  // of the region bounding-box diagonal
  double region_r_min = 2.0;
  double init_pressure = 0.8;
  std::map<std::int32_t, double> label_weights;  // area multipliers, default 1
  Rgb background{1.0, 1.0, 1.0};

  OptimConfig optim;
  Blend blend = Blend::WeightedSum;
  bool per_region = false;  // optimize region by region instead of jointly
  const TextureLibrary* textures = nullptr;
};

/// Per-region bookkeeping in emission order.
struct RegionPlan {
  std::int32_t label = 0;
  int budget = 0;
  double r_max = 0.0;
  double r_min = 0.0;
  std::vector<PixelPos> sampled;    // draw order
  std::vector<PixelPos> positions;  // emission order
  std::vector<double> sigma_hat;
  std::vector<double> a_hat;
  std::vector<double> scores;
  std::vector<double> sizes;
};

/// Stamp of the configured mode at pixel `pos` with radius-equivalent `size`,
/// colored by the target there.
Stamp initial_stamp(const SequencerConfig& cfg, const Canvas& target, PixelPos pos, double size);

StrokePlan build_stroke_plan(const Canvas& target, const LabelMap& labels, const OrderTable& order,
                             const NormalMap& normals, const AttentionMap& attention,
                             const SequencerConfig& cfg, std::uint64_t seed,
                             std::vector<RegionPlan>* regions = nullptr);

struct DatasetEntry {
  StrokePlan initial;
  StrokePlan optimized;
  double initial_loss = 0.0;  // optimization loss of the initial plan
  double final_loss = 0.0;
  std::vector<Canvas> snapshots;  // display canvas after every stroke
};

DatasetEntry generate_dataset_entry(const Canvas& target, const LabelMap& labels,
                                    const OrderTable& order, const NormalMap& normals,
                                    const AttentionMap& attention, const SequencerConfig& cfg,
                                    std::uint64_t seed);

/// Jointly optimizes `stamps` against `target`; returns the best stamps seen
/// and their loss through the out-parameters.
std::vector<Stamp> optimize_plan_stamps(std::vector<Stamp> stamps, const Canvas& target,
                                        const Canvas& background, const SequencerConfig& cfg,
                                        double* initial_loss = nullptr,
                                        double* final_loss = nullptr);

}  // namespace copaint
