#include "copaint/mask.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace copaint {

Mask::Mask(int width, int height, bool fill) : bits_(width, height, fill ? 1 : 0) {}

Mask::Mask(Grid<std::uint8_t> bits) : bits_(std::move(bits)) {}

Mask Mask::from_polygon(int width, int height, std::span<const Point2> vertices) {
  Mask m(width, height);
  if (vertices.size() < 3) return m;
  const std::size_t n = vertices.size();
  for (int y = 0; y < height; ++y) {
    const double py = y + 0.5;
    for (int x = 0; x < width; ++x) {
      const double px = x + 0.5;
      bool inside = false;
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = vertices[i];
        const Point2& b = vertices[j];
        if ((a.y > py) != (b.y > py)) {
          const double xc = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
          if (px < xc) inside = !inside;
        }
      }
      if (inside) m.set(x, y);
    }
  }
  return m;
}

bool Mask::contains(double x, double y) const {
  if (!std::isfinite(x) || !std::isfinite(y)) return false;
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  if (fx < 0 || fy < 0 || fx >= width() || fy >= height()) return false;
  return test(static_cast<int>(fx), static_cast<int>(fy));
}

std::size_t Mask::count() const {
  std::size_t n = 0;
  for (std::uint8_t v : bits_.data()) n += v != 0;
  return n;
}

Rect Mask::bounds() const {
  int x0 = width(), y0 = height(), x1 = -1, y1 = -1;
  for (int y = 0; y < height(); ++y)
    for (int x = 0; x < width(); ++x)
      if (bits_(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

MaskProjector::MaskProjector(const Mask& mask)
    : mask_(mask), nearest_(mask.width(), mask.height(), -1) {
  if (mask.empty()) throw std::invalid_argument("MaskProjector: empty mask");
  const int w = mask.width();
  std::deque<PixelPos> queue;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < w; ++x)
      if (mask.test(x, y)) {
        nearest_(x, y) = y * w + x;
        queue.push_back({x, y});
      }
  constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!queue.empty()) {
    const PixelPos p = queue.front();
    queue.pop_front();
    for (int k = 0; k < 8; ++k) {
      const int nx = p.x + kDx[k];
      const int ny = p.y + kDy[k];
      if (!nearest_.in_bounds(nx, ny) || nearest_(nx, ny) >= 0) continue;
      nearest_(nx, ny) = nearest_(p.x, p.y);
      queue.push_back({nx, ny});
    }
  }
}

Point2 MaskProjector::project(double x, double y) const {
  if (mask_.contains(x, y)) return {x, y};
  const int w = mask_.width();
  const int h = mask_.height();
  const int px = std::clamp(static_cast<int>(std::floor(std::isfinite(x) ? x : 0.0)), 0, w - 1);
  const int py = std::clamp(static_cast<int>(std::floor(std::isfinite(y) ? y : 0.0)), 0, h - 1);
  const std::int32_t idx = nearest_(px, py);
  return {idx % w + 0.5, idx / w + 0.5};
}

}  // namespace copaint
