#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "copaint/grid.hpp"

namespace copaint {

/// Binary region over a canvas-sized grid. A continuous point (x, y) lies in
/// the mask when the pixel containing it, (floor(x), floor(y)), is set.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false);
  explicit Mask(Grid<std::uint8_t> bits);

  /// Rasterizes a closed polygon with the even-odd rule at pixel centers.
  static Mask from_polygon(int width, int height, std::span<const Point2> vertices);

  int width() const { return bits_.width(); }
  int height() const { return bits_.height(); }

  bool test(int x, int y) const { return bits_.in_bounds(x, y) && bits_(x, y) != 0; }
  void set(int x, int y, bool on = true) { bits_(x, y) = on ? 1 : 0; }
  bool contains(double x, double y) const;

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  /// Tight bounding box of set pixels; empty Rect for an empty mask.
  Rect bounds() const;

  Mask crop(const Rect& r) const { return Mask(bits_.crop(r)); }
  const Grid<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const Mask&) const = default;

 private:
  Grid<std::uint8_t> bits_;
};

/// Maps any continuous point to the center of a nearby set pixel of a mask.
/// Points already inside are returned unchanged.
class MaskProjector {
 public:
  explicit MaskProjector(const Mask& mask);

  Point2 project(double x, double y) const;

 private:
  Mask mask_;
  // For every pixel, the index of a nearest set pixel (multi-source BFS).
  Grid<std::int32_t> nearest_;
};

}  // namespace copaint
