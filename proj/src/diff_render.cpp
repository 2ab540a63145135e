#include "copaint/diff_render.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace copaint {
namespace {

bool kind_fits(ParamKind k, const Stamp& s) {
  const bool tip = is_tip_mode(s.mode);
  switch (k) {
    case ParamKind::Radius:
    case ParamKind::Pressure:
      return tip;
    case ParamKind::SigmaX:
    case ParamKind::SigmaY:
      return !tip;
    default:
      return true;
  }
}

double& field(Stamp& s, ParamKind k) {
  switch (k) {
    case ParamKind::X: return s.x;
    case ParamKind::Y: return s.y;
    case ParamKind::Radius: return s.radius;
    case ParamKind::SigmaX: return s.sigma_x;
    case ParamKind::SigmaY: return s.sigma_y;
    case ParamKind::Theta: return s.theta;
    case ParamKind::Pressure: return s.pressure;
    case ParamKind::Red: return s.color.r;
    case ParamKind::Green: return s.color.g;
    case ParamKind::Blue: return s.color.b;
  }
  throw std::logic_error("unreachable parameter kind");
}

double field(const Stamp& s, ParamKind k) { return field(const_cast<Stamp&>(s), k); }

// Pixel-unit gradient of the loss with respect to one stamp's parameters,
// indexed by ParamKind.
using StampGrad = std::array<double, 10>;

}  // namespace

std::string to_string(ParamKind k) {
  switch (k) {
    case ParamKind::X: return "x";
    case ParamKind::Y: return "y";
    case ParamKind::Radius: return "radius";
    case ParamKind::SigmaX: return "sigma_x";
    case ParamKind::SigmaY: return "sigma_y";
    case ParamKind::Theta: return "theta";
    case ParamKind::Pressure: return "pressure";
    case ParamKind::Red: return "red";
    case ParamKind::Green: return "green";
    case ParamKind::Blue: return "blue";
  }
  return "?";
}

ParamLayout::ParamLayout(int width, int height, std::vector<Stamp> templates,
                         std::vector<ParamSlot> slots, ParamClamps clamps)
    : width_(width), height_(height), templates_(std::move(templates)),
      slots_(std::move(slots)), clamps_(clamps) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("ParamLayout: empty canvas");
  check_slots();
}

ParamLayout ParamLayout::all_free(int width, int height, std::vector<Stamp> stamps,
                                  ParamClamps clamps) {
  std::vector<ParamSlot> slots;
  for (std::size_t i = 0; i < stamps.size(); ++i)
    for (ParamKind k : kinds_for(stamps[i])) slots.push_back({i, k});
  return ParamLayout(width, height, std::move(stamps), std::move(slots), clamps);
}

std::vector<ParamKind> ParamLayout::kinds_for(const Stamp& s) {
  using K = ParamKind;
  if (is_tip_mode(s.mode)) return {K::X, K::Y, K::Radius, K::Theta, K::Pressure, K::Red, K::Green, K::Blue};
  return {K::X, K::Y, K::SigmaX, K::SigmaY, K::Theta, K::Red, K::Green, K::Blue};
}

void ParamLayout::check_slots() const {
  std::set<std::pair<std::size_t, int>> seen;
  for (const ParamSlot& s : slots_) {
    if (s.stamp >= templates_.size()) throw std::invalid_argument("ParamLayout: slot stamp out of range");
    if (!kind_fits(s.kind, templates_[s.stamp]))
      throw std::invalid_argument("ParamLayout: " + to_string(s.kind) + " does not apply to a " +
                                  mode_name(templates_[s.stamp].mode) + " stamp");
    if (!seen.insert({s.stamp, static_cast<int>(s.kind)}).second)
      throw std::invalid_argument("ParamLayout: duplicate slot");
  }
}

double ParamLayout::diagonal() const { return std::hypot(width_, height_); }

double ParamLayout::scale(ParamKind k) const {
  switch (k) {
    case ParamKind::X: return width_;
    case ParamKind::Y: return height_;
    case ParamKind::Radius:
    case ParamKind::SigmaX:
    case ParamKind::SigmaY: return diagonal();
    case ParamKind::Theta: return std::numbers::pi;
    default: return 1.0;
  }
}

double ParamLayout::lower(ParamKind k) const {
  switch (k) {
    case ParamKind::X:
    case ParamKind::Y: return -clamps_.position_margin;
    case ParamKind::Radius:
    case ParamKind::SigmaX:
    case ParamKind::SigmaY: return clamps_.min_size / diagonal();
    case ParamKind::Theta: return -1.0;
    case ParamKind::Pressure: return clamps_.min_pressure;
    default: return 0.0;
  }
}

double ParamLayout::upper(ParamKind k) const {
  switch (k) {
    case ParamKind::X:
    case ParamKind::Y: return 1.0 + clamps_.position_margin;
    default: return 1.0;
  }
}

ParamVector ParamLayout::normalize(std::span<const Stamp> stamps) const {
  if (stamps.size() != templates_.size())
    throw std::invalid_argument("ParamLayout::normalize: stamp count mismatch");
  ParamVector out(slots_.size());
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const ParamSlot& s = slots_[i];
    out[i] = field(stamps[s.stamp], s.kind) / scale(s.kind);
  }
  return out;
}

std::vector<Stamp> ParamLayout::denormalize(std::span<const double> params) const {
  if (params.size() != slots_.size())
    throw std::invalid_argument("ParamLayout::denormalize: parameter count mismatch");
  std::vector<Stamp> stamps = templates_;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const ParamSlot& s = slots_[i];
    const double v = params[i];
    if (!(v >= lower(s.kind) && v <= upper(s.kind)))
      throw std::out_of_range("parameter " + to_string(s.kind) + " of stamp " +
                              std::to_string(s.stamp) + " outside its clamp range");
    field(stamps[s.stamp], s.kind) = v * scale(s.kind);
  }
  return stamps;
}

void ParamLayout::clamp(std::span<double> params) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const ParamKind k = slots_[i].kind;
    double& v = params[i];
    if (!std::isfinite(v)) v = field(templates_[slots_[i].stamp], k) / scale(k);
    if (k == ParamKind::Theta) {
      v -= 2.0 * std::floor((v + 1.0) / 2.0);
      v = std::clamp(v, -1.0, 1.0);
    } else {
      v = std::clamp(v, lower(k), upper(k));
    }
  }
}

bool ParamLayout::in_range(std::span<const double> params) const {
  if (params.size() != slots_.size()) return false;
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (!(params[i] >= lower(slots_[i].kind) && params[i] <= upper(slots_[i].kind))) return false;
  return true;
}

Canvas render_diff(std::span<const double> params, const DiffScene& scene) {
  const std::vector<Stamp> stamps = scene.layout.denormalize(params);
  if (scene.blend == Blend::WeightedSum) {
    std::vector<std::pair<AlphaMap, Rgb>> maps;
    maps.reserve(stamps.size());
    for (const Stamp& s : stamps) maps.emplace_back(stamp_alpha(s, scene.textures, scene.soften), s.color);
    return composite_weighted_sum(maps, scene.background);
  }
  Canvas out = scene.background;
  for (const Stamp& s : stamps) composite_over(out, stamp_alpha(s, scene.textures, scene.soften), s.color);
  return out;
}

double loss_mse(const Canvas& image, const Canvas& target) {
  if (!image.same_size(target)) throw std::invalid_argument("loss_mse: dimension mismatch");
  if (image.empty()) return 0.0;
  double sum = 0.0;
  const auto a = image.data();
  const auto b = target.data();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int ch = 0; ch < 3; ++ch) {
      const double d = a[i][ch] - b[i][ch];
      sum += d * d;
    }
  return sum / static_cast<double>(a.size());
}

LossGrad loss_and_grad(std::span<const double> params, const DiffScene& scene,
                       const Canvas& target) {
  const Canvas& bg = scene.background;
  if (!bg.same_size(target)) throw std::invalid_argument("loss_and_grad: dimension mismatch");
  const std::vector<Stamp> stamps = scene.layout.denormalize(params);
  const int w = bg.width();
  const int h = bg.height();
  const std::size_t npix = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);

  // Per-pixel stamp lists in stamp order (CSR).
  std::vector<Rect> rects(stamps.size());
  std::vector<std::uint32_t> offsets(npix + 1, 0);
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    rects[i] = stamp_footprint(stamps[i], scene.textures, scene.soften).intersected(bg.bounds());
    for (int y = rects[i].y; y < rects[i].bottom(); ++y)
      for (int x = rects[i].x; x < rects[i].right(); ++x) ++offsets[static_cast<std::size_t>(y) * w + x + 1];
  }
  for (std::size_t p = 0; p < npix; ++p) offsets[p + 1] += offsets[p];
  std::vector<std::uint32_t> entries(offsets.back());
  {
    std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < stamps.size(); ++i)
      for (int y = rects[i].y; y < rects[i].bottom(); ++y)
        for (int x = rects[i].x; x < rects[i].right(); ++x)
          entries[fill[static_cast<std::size_t>(y) * w + x]++] = static_cast<std::uint32_t>(i);
  }

  std::vector<StampGrad> acc(stamps.size(), StampGrad{});
  std::vector<AlphaGrad> ag;
  std::vector<Rgb> below;  // canvas under each stamp (Over blend)
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(npix);

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const std::uint32_t begin = offsets[p];
      const std::uint32_t end = offsets[p + 1];
      const double qx = x + 0.5;
      const double qy = y + 0.5;
      ag.clear();
      for (std::uint32_t e = begin; e < end; ++e)
        ag.push_back(stamp_alpha_grad_at(stamps[entries[e]], scene.textures, scene.soften, qx, qy));

      const Rgb& b = bg(x, y);
      const Rgb& t = target(x, y);
      Rgb out;
      if (scene.blend == Blend::WeightedSum) {
        double weight = kBackgroundWeight;
        Rgb num{kBackgroundWeight * b.r, kBackgroundWeight * b.g, kBackgroundWeight * b.b};
        for (std::size_t k = 0; k < ag.size(); ++k) {
          const Rgb& c = stamps[entries[begin + k]].color;
          weight += ag[k].value;
          for (int ch = 0; ch < 3; ++ch) num[ch] += ag[k].value * c[ch];
        }
        for (int ch = 0; ch < 3; ++ch) out[ch] = num[ch] / weight;
        Rgb g;
        for (int ch = 0; ch < 3; ++ch) {
          const double e = out[ch] - t[ch];
          loss += e * e;
          g[ch] = 2.0 * e * inv_n;
        }
        for (std::size_t k = 0; k < ag.size(); ++k) {
          const std::uint32_t i = entries[begin + k];
          const Rgb& c = stamps[i].color;
          double d_alpha = 0.0;
          for (int ch = 0; ch < 3; ++ch) {
            d_alpha += g[ch] * (c[ch] - out[ch]) / weight;
            acc[i][static_cast<int>(ParamKind::Red) + ch] += g[ch] * ag[k].value / weight;
          }
          StampGrad& a = acc[i];
          a[static_cast<int>(ParamKind::X)] += d_alpha * ag[k].d_x;
          a[static_cast<int>(ParamKind::Y)] += d_alpha * ag[k].d_y;
          a[static_cast<int>(ParamKind::Radius)] += d_alpha * ag[k].d_size_a;
          a[static_cast<int>(ParamKind::SigmaX)] += d_alpha * ag[k].d_size_a;
          a[static_cast<int>(ParamKind::SigmaY)] += d_alpha * ag[k].d_size_b;
          a[static_cast<int>(ParamKind::Theta)] += d_alpha * ag[k].d_theta;
          a[static_cast<int>(ParamKind::Pressure)] += d_alpha * ag[k].d_pressure;
        }
      } else {
        below.resize(ag.size());
        Rgb cur = b;
        for (std::size_t k = 0; k < ag.size(); ++k) {
          below[k] = cur;
          const double a = ag[k].value;
          const Rgb& c = stamps[entries[begin + k]].color;
          for (int ch = 0; ch < 3; ++ch) cur[ch] = a * c[ch] + (1.0 - a) * cur[ch];
        }
        out = cur;
        Rgb g;
        for (int ch = 0; ch < 3; ++ch) {
          const double e = out[ch] - t[ch];
          loss += e * e;
          g[ch] = 2.0 * e * inv_n;
        }
        for (std::size_t k = ag.size(); k-- > 0;) {
          const std::uint32_t i = entries[begin + k];
          const Rgb& c = stamps[i].color;
          const double a = ag[k].value;
          double d_alpha = 0.0;
          for (int ch = 0; ch < 3; ++ch) {
            d_alpha += g[ch] * (c[ch] - below[k][ch]);
            acc[i][static_cast<int>(ParamKind::Red) + ch] += g[ch] * a;
          }
          StampGrad& s = acc[i];
          s[static_cast<int>(ParamKind::X)] += d_alpha * ag[k].d_x;
          s[static_cast<int>(ParamKind::Y)] += d_alpha * ag[k].d_y;
          s[static_cast<int>(ParamKind::Radius)] += d_alpha * ag[k].d_size_a;
          s[static_cast<int>(ParamKind::SigmaX)] += d_alpha * ag[k].d_size_a;
          s[static_cast<int>(ParamKind::SigmaY)] += d_alpha * ag[k].d_size_b;
          s[static_cast<int>(ParamKind::Theta)] += d_alpha * ag[k].d_theta;
          s[static_cast<int>(ParamKind::Pressure)] += d_alpha * ag[k].d_pressure;
          for (int ch = 0; ch < 3; ++ch) g[ch] *= (1.0 - a);
        }
      }
    }

  LossGrad result;
  result.loss = loss * inv_n;
  result.grad.resize(scene.layout.size());
  const auto& slots = scene.layout.slots();
  for (std::size_t i = 0; i < slots.size(); ++i)
    result.grad[i] = acc[slots[i].stamp][static_cast<int>(slots[i].kind)] * scene.layout.scale(slots[i].kind);
  return result;
}

std::vector<double> grad_loss(std::span<const double> params, const DiffScene& scene,
                              const Canvas& target) {
  return loss_and_grad(params, scene, target).grad;
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> params, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_grad: eps must be positive");
  std::vector<double> probe(params.begin(), params.end());
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double up = f(probe);
    probe[i] = saved - eps;
    const double down = f(probe);
    probe[i] = saved;
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

std::vector<double> finite_diff_grad(std::span<const double> params, const DiffScene& scene,
                                     const Canvas& target, double eps) {
  return finite_diff_grad(
      [&](std::span<const double> p) { return loss_mse(render_diff(p, scene), target); }, params,
      eps);
}

}  // namespace copaint
