#pragma once

#include <algorithm>
#include <cassert>
#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace copaint {

/// Linear RGB triple. Channels are nominally in [0,1].
struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  double& operator[](int ch) { return ch == 0 ? r : (ch == 1 ? g : b); }
  double operator[](int ch) const { return ch == 0 ? r : (ch == 1 ? g : b); }

  bool operator==(const Rgb&) const = default;
};

struct PixelPos {
  int x = 0;
  int y = 0;
  bool operator==(const PixelPos&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Integer pixel rectangle, half-open: [x, x+w) x [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool empty() const { return w <= 0 || h <= 0; }
  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool contains(int px, int py) const {
    return px >= x && px < right() && py >= y && py < bottom();
  }

  Rect intersected(const Rect& o) const {
    const int x0 = std::max(x, o.x);
    const int y0 = std::max(y, o.y);
    const int x1 = std::min(right(), o.right());
    const int y1 = std::min(bottom(), o.bottom());
    if (x1 <= x0 || y1 <= y0) return {};
    return {x0, y0, x1 - x0, y1 - y0};
  }

  Rect united(const Rect& o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    const int x0 = std::min(x, o.x);
    const int y0 = std::min(y, o.y);
    const int x1 = std::max(right(), o.right());
    const int y1 = std::max(bottom(), o.bottom());
    return {x0, y0, x1 - x0, y1 - y0};
  }

  bool intersects(const Rect& o) const { return !intersected(o).empty(); }

  bool operator==(const Rect&) const = default;
};

/// Dense row-major 2D raster.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("Grid: negative dimensions");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  Rect bounds() const { return {0, 0, width_, height_}; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y) {
    assert(in_bounds(x, y));
    return data_[index(x, y)];
  }
  const T& operator()(int x, int y) const {
    assert(in_bounds(x, y));
    return data_[index(x, y)];
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  template <class U>
  bool same_size(const Grid<U>& o) const {
    return width_ == o.width() && height_ == o.height();
  }

  /// Copy of the region `r` clipped to the grid.
  Grid crop(const Rect& r) const {
    const Rect c = r.intersected(bounds());
    Grid out(c.w, c.h);
    for (int y = 0; y < c.h; ++y)
      for (int x = 0; x < c.w; ++x) out(x, y) = (*this)(c.x + x, c.y + y);
    return out;
  }

  /// Writes `src` with its origin at (ox, oy); parts outside are dropped.
  void paste(const Grid& src, int ox, int oy) {
    for (int y = 0; y < src.height(); ++y)
      for (int x = 0; x < src.width(); ++x)
        if (in_bounds(ox + x, oy + y)) (*this)(ox + x, oy + y) = src(x, y);
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// H x W linear-RGB raster.
using Canvas = Grid<Rgb>;

/// Grayscale raster with values in [0,1] (brush tip textures, attention).
using GrayImage = Grid<double>;

}  // namespace copaint
