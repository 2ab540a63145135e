#include "copaint/gradcheck.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace copaint {

RandomScene random_gaussian_scene(std::mt19937_64& rng, int size, int stamps, Blend blend) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double s = size;
  std::vector<Stamp> list;
  for (int i = 0; i < stamps; ++i)
    list.push_back(Stamp::gaussian(between(0.15 * s, 0.85 * s), between(0.15 * s, 0.85 * s),
                                   between(0.05 * s, 0.2 * s), between(0.05 * s, 0.2 * s),
                                   between(-0.9, 0.9) * std::numbers::pi,
                                   {between(0.05, 0.95), between(0.05, 0.95), between(0.05, 0.95)}));

  RandomScene out;
  out.scene.background = Canvas(size, size, {between(0, 1), between(0, 1), between(0, 1)});
  out.scene.blend = blend;
  out.scene.layout = ParamLayout::all_free(size, size, std::move(list));
  out.params = out.scene.layout.normalize_templates();
  out.target = Canvas(size, size);
  for (Rgb& px : out.target.data()) px = {unit(rng), unit(rng), unit(rng)};
  return out;
}

GradCheckReport run_gradient_suite(const GradCheckOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> count(opts.min_stamps, opts.max_stamps);
  GradCheckReport report;
  for (int n = 0; n < opts.scenes; ++n) {
    RandomScene rs = random_gaussian_scene(rng, opts.canvas_size, count(rng), opts.blend);
    const std::vector<double> analytic = grad_loss(rs.params, rs.scene, rs.target);
    const std::vector<double> numeric = finite_diff_grad(rs.params, rs.scene, rs.target, opts.eps);
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      ++report.coordinates;
      const double diff = std::abs(analytic[i] - numeric[i]);
      const double mag = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
      bool ok = true;
      if (mag < opts.abs_floor) {
        report.max_abs_error_small = std::max(report.max_abs_error_small, diff);
        ok = diff <= opts.abs_floor;
      } else {
        const double rel = diff / mag;
        if (rel > report.max_rel_error) {
          report.max_rel_error = rel;
          const ParamSlot& slot = rs.scene.layout.slots()[i];
          std::ostringstream os;
          os << "scene " << n << " stamp " << slot.stamp << " " << to_string(slot.kind)
             << ": analytic " << analytic[i] << " numeric " << numeric[i];
          report.worst = os.str();
        }
        ok = rel <= opts.rel_tol;
      }
      if (!ok) ++report.failures;
    }
    ++report.scenes;
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace copaint
