#pragma once

// Per-pixel guidance rasters consumed by the sequencer, and the stroke plan it
// emits.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "copaint/brush.hpp"

namespace copaint {

/// Label ids ordered coarsest first, plus ids whose pixels are skipped.
class OrderTable {
 public:
  static constexpr std::size_t kMaxLabels = 15;

  struct Entry {
    int id = 0;
    std::string name;
    bool operator==(const Entry&) const = default;
  };

  OrderTable() = default;
  /// Throws std::invalid_argument on duplicate ids or more than kMaxLabels.
  OrderTable(std::vector<Entry> entries, std::vector<int> ignored = {});

  const std::vector<Entry>& entries() const { return entries_; }
  const std::vector<int>& ignored() const { return ignored_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Position of `id` in the coarse-to-fine order, or nullopt.
  std::optional<std::size_t> index_of(int id) const;
  bool is_ignored(int id) const;

  bool operator==(const OrderTable&) const = default;

 private:
  std::vector<Entry> entries_;
  std::vector<int> ignored_;
};

/// Raw label ids per pixel.
using LabelMap = Grid<std::int32_t>;

using Normal = std::array<double, 3>;
/// Unit surface normals per pixel.
using NormalMap = Grid<Normal>;

/// Nonnegative sampling weights per pixel.
using AttentionMap = GrayImage;

/// Ordered stamps of a single brush mode, optionally tagged with the label of
/// the region each came from.
struct StrokePlan {
  int width = 0;
  int height = 0;
  BrushMode mode = Gaussian2D{};
  std::vector<Stamp> stamps;
  std::vector<std::int32_t> labels;  // empty, or one per stamp

  bool operator==(const StrokePlan&) const = default;
};

}  // namespace copaint
