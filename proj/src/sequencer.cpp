#include "copaint/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace copaint {

double local_normal_variance(const NormalMap& normals, PixelPos pos) {
  if (!normals.in_bounds(pos.x, pos.y))
    throw std::invalid_argument("local_normal_variance: position outside the map");
  const int half = kNormalWindow / 2;
  const int x0 = std::max(0, pos.x - half);
  const int y0 = std::max(0, pos.y - half);
  const int x1 = std::min(normals.width(), pos.x - half + kNormalWindow);
  const int y1 = std::min(normals.height(), pos.y - half + kNormalWindow);
  const double n = static_cast<double>(x1 - x0) * (y1 - y0);
  // Sorted, shifted by the smallest value, and finished with one division so
  // windows holding the same normals in any arrangement or count that share
  // an exact variance give bit-identical results and tie when scored.
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n));
  double num = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    v.clear();
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) v.push_back(normals(x, y)[ch]);
    std::sort(v.begin(), v.end());
    double sum = 0.0, sq = 0.0;
    for (double a : v) {
      const double d = a - v.front();
      sum += d;
      sq += d * d;
    }
    num += std::max(0.0, n * sq - sum * sum);
  }
  return num / (3.0 * n * n);
}

std::vector<PixelPos> sample_positions(const AttentionMap& attention, const Mask& mask, int n,
                                       std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_positions: n must be >= 1");
  if (mask.width() != attention.width() || mask.height() != attention.height())
    throw std::invalid_argument("sample_positions: mask size differs from attention");
  std::vector<PixelPos> pixels;
  std::vector<double> weights;
  double total = 0.0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.test(x, y)) {
        pixels.push_back({x, y});
        const double w = std::max(0.0, attention(x, y));
        weights.push_back(w);
        total += w;
      }
  if (pixels.empty()) throw std::invalid_argument("sample_positions: empty mask");
  if (!(total > 0.0)) std::fill(weights.begin(), weights.end(), 1.0);

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  Grid<std::uint8_t> taken(mask.width(), mask.height(), 0);
  auto crowded = [&](PixelPos p) {
    for (int dy = -kMinSampleSeparation; dy <= kMinSampleSeparation; ++dy)
      for (int dx = -kMinSampleSeparation; dx <= kMinSampleSeparation; ++dx)
        if (taken.in_bounds(p.x + dx, p.y + dy) && taken(p.x + dx, p.y + dy)) return true;
    return false;
  };
  std::vector<PixelPos> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    PixelPos p = pixels[dist(rng)];
    for (int retry = 0; retry < kSampleRetries && crowded(p); ++retry) p = pixels[dist(rng)];
    taken(p.x, p.y) = 1;
    out.push_back(p);
  }
  return out;
}

std::vector<std::size_t> score_order(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

std::vector<double> assign_brush_sizes(int n, double r_max, double r_min) {
  if (n < 1) throw std::invalid_argument("assign_brush_sizes: n must be >= 1");
  if (!(r_min > 0.0) || !(r_max >= r_min))
    throw std::invalid_argument("assign_brush_sizes: need r_max >= r_min > 0");
  if (n == 1) return {r_max};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[k] = r_max - (r_max - r_min) * k / (n - 1);
  out.back() = r_min;
  return out;
}

std::vector<int> allocate_budget(std::span<const std::size_t> areas, int budget,
                                 std::span<const double> weights) {
  if (!weights.empty() && weights.size() != areas.size())
    throw std::invalid_argument("allocate_budget: one weight per region");
  const std::size_t k = areas.size();
  std::vector<double> w(k);
  std::size_t nonempty = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double lw = weights.empty() ? 1.0 : weights[i];
    if (lw < 0.0) throw std::invalid_argument("allocate_budget: negative weight");
    w[i] = static_cast<double>(areas[i]) * lw;
    sum += w[i];
    if (areas[i] > 0) ++nonempty;
  }
  if (budget < static_cast<int>(nonempty))
    throw std::invalid_argument("allocate_budget: budget below the number of regions");
  std::vector<int> out(k, 0);
  if (nonempty == 0) return out;
  if (!(sum > 0.0)) {
    for (std::size_t i = 0; i < k; ++i) w[i] = areas[i] > 0 ? 1.0 : 0.0;
    sum = static_cast<double>(nonempty);
  }
  std::vector<double> rem(k);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = budget * w[i] / sum;
    out[i] = static_cast<int>(std::floor(quota));
    rem[i] = quota - out[i];
    assigned += out[i];
  }
  std::vector<std::size_t> by_rem(k);
  std::iota(by_rem.begin(), by_rem.end(), 0);
  std::stable_sort(by_rem.begin(), by_rem.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t j = 0; assigned < budget; j = (j + 1) % k) {
    if (w[by_rem[j]] > 0.0 || areas[by_rem[j]] > 0) {
      ++out[by_rem[j]];
      ++assigned;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (areas[i] == 0 || out[i] > 0) continue;
    const auto donor = static_cast<std::size_t>(
        std::max_element(out.begin(), out.end()) - out.begin());
    --out[donor];
    out[i] = 1;
  }
  return out;
}

Stamp initial_stamp(const SequencerConfig& cfg, const Canvas& target, PixelPos pos, double size) {
  const double x = pos.x + 0.5;
  const double y = pos.y + 0.5;
  const Rgb c = target(pos.x, pos.y);
  if (is_tip_mode(cfg.mode)) return Stamp::tip(cfg.mode, x, y, size, 0.0, cfg.init_pressure, c);
  const double sigma = size * kGaussianSigmaPerRadius;
  return Stamp::gaussian(x, y, sigma, sigma, 0.0, c);
}

namespace {

std::uint64_t region_seed(std::uint64_t seed, std::size_t region) {
  return seed ^ (0x9E3779B97F4A7C15ULL * (region + 1));
}

}  // namespace

StrokePlan build_stroke_plan(const Canvas& target, const LabelMap& labels, const OrderTable& order,
                             const NormalMap& normals, const AttentionMap& attention,
                             const SequencerConfig& cfg, std::uint64_t seed,
                             std::vector<RegionPlan>* regions) {
  if (!target.same_size(labels) || !target.same_size(normals) || !target.same_size(attention))
    throw std::invalid_argument("build_stroke_plan: raster dimensions differ");
  if (order.empty()) throw std::invalid_argument("build_stroke_plan: empty order table");
  const int w = target.width();
  const int h = target.height();

  std::vector<Mask> masks;
  std::vector<std::size_t> areas;
  std::vector<double> weights;
  for (const auto& e : order.entries()) {
    Mask m(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (labels(x, y) == e.id) m.set(x, y);
    areas.push_back(m.count());
    masks.push_back(std::move(m));
    const auto it = cfg.label_weights.find(e.id);
    weights.push_back(it == cfg.label_weights.end() ? 1.0 : it->second);
  }
  const std::vector<int> budgets = allocate_budget(areas, cfg.budget, weights);

  StrokePlan plan;
  plan.width = w;
  plan.height = h;
  plan.mode = cfg.mode;
  if (regions) regions->clear();
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (budgets[i] == 0) continue;
    const Mask& mask = masks[i];
    RegionPlan rp;
    rp.label = order.entries()[i].id;
    rp.budget = budgets[i];

    // Normalization ranges come from every pixel of the region.
    double s_lo = INFINITY, s_hi = -INFINITY, a_lo = INFINITY, a_hi = -INFINITY;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (mask.test(x, y)) {
          const double s = local_normal_variance(normals, {x, y});
          s_lo = std::min(s_lo, s);
          s_hi = std::max(s_hi, s);
          a_lo = std::min(a_lo, attention(x, y));
          a_hi = std::max(a_hi, attention(x, y));
        }
    auto scaled = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };

    const std::vector<PixelPos> sampled =
        sample_positions(attention, mask, rp.budget, region_seed(seed, i));
    std::vector<double> sig, att, score;
    for (const PixelPos& p : sampled) {
      sig.push_back(scaled(local_normal_variance(normals, p), s_lo, s_hi));
      att.push_back(scaled(attention(p.x, p.y), a_lo, a_hi));
      score.push_back(position_score(sig.back(), att.back()));
    }
    const Rect box = mask.bounds();
    rp.r_min = cfg.region_r_min;
    rp.r_max = std::max(cfg.region_r_min, cfg.region_radius_fraction * std::hypot(box.w, box.h));
    rp.sizes = assign_brush_sizes(rp.budget, rp.r_max, rp.r_min);
    rp.sampled = sampled;
    for (std::size_t k : score_order(score)) {
      rp.positions.push_back(sampled[k]);
      rp.sigma_hat.push_back(sig[k]);
      rp.a_hat.push_back(att[k]);
      rp.scores.push_back(score[k]);
    }
    for (std::size_t k = 0; k < rp.positions.size(); ++k) {
      plan.stamps.push_back(initial_stamp(cfg, target, rp.positions[k], rp.sizes[k]));
      plan.labels.push_back(rp.label);
    }
    if (regions) regions->push_back(std::move(rp));
  }
  return plan;
}

std::vector<Stamp> optimize_plan_stamps(std::vector<Stamp> stamps, const Canvas& target,
                                        const Canvas& background, const SequencerConfig& cfg,
                                        double* initial_loss, double* final_loss) {
  DiffScene scene;
  scene.layout = ParamLayout::all_free(target.width(), target.height(), stamps);
  scene.background = background;
  scene.blend = cfg.blend;
  scene.textures = cfg.textures;
  const ParamVector init = scene.layout.normalize_templates();
  const OptimResult res = optimize_strokes(init, scene, target, cfg.optim);
  if (initial_loss) *initial_loss = res.trace.losses.front();
  if (final_loss) *final_loss = res.loss;
  return scene.layout.denormalize(res.params);
}

DatasetEntry generate_dataset_entry(const Canvas& target, const LabelMap& labels,
                                    const OrderTable& order, const NormalMap& normals,
                                    const AttentionMap& attention, const SequencerConfig& cfg,
                                    std::uint64_t seed) {
  DatasetEntry entry;
  entry.initial = build_stroke_plan(target, labels, order, normals, attention, cfg, seed);
  entry.optimized = entry.initial;
  const Canvas blank(target.width(), target.height(), cfg.background);
  if (entry.initial.stamps.empty()) return entry;

  if (!cfg.per_region) {
    entry.optimized.stamps = optimize_plan_stamps(entry.initial.stamps, target, blank, cfg,
                                                  &entry.initial_loss, &entry.final_loss);
  } else {
    // Each region is fitted over the display render of the regions before it.
    Canvas below = blank;
    std::size_t start = 0;
    const auto& lab = entry.initial.labels;
    while (start < lab.size()) {
      std::size_t end = start;
      while (end < lab.size() && lab[end] == lab[start]) ++end;
      std::vector<Stamp> part(entry.initial.stamps.begin() + static_cast<std::ptrdiff_t>(start),
                              entry.initial.stamps.begin() + static_cast<std::ptrdiff_t>(end));
      part = optimize_plan_stamps(std::move(part), target, below, cfg);
      std::copy(part.begin(), part.end(),
                entry.optimized.stamps.begin() + static_cast<std::ptrdiff_t>(start));
      below = render_stamps(part, std::move(below), cfg.textures);
      start = end;
    }
    DiffScene scene;
    scene.layout = ParamLayout::all_free(target.width(), target.height(), entry.initial.stamps);
    scene.background = blank;
    scene.blend = cfg.blend;
    scene.textures = cfg.textures;
    entry.initial_loss =
        loss_mse(render_diff(scene.layout.normalize(entry.initial.stamps), scene), target);
    entry.final_loss =
        loss_mse(render_diff(scene.layout.normalize(entry.optimized.stamps), scene), target);
  }

  Canvas canvas = blank;
  entry.snapshots.reserve(entry.optimized.stamps.size());
  for (const Stamp& s : entry.optimized.stamps) {
    composite_over(canvas, stamp_alpha(s, cfg.textures), s.color);
    entry.snapshots.push_back(canvas);
  }
  return entry;
}

}  // namespace copaint
