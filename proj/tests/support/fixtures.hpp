#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <filesystem>
#include <random>
#include <string>

#include "copaint/io.hpp"
#include "copaint/sequencer.hpp"

namespace copaint::testing {

inline std::filesystem::path data_dir() { return COPAINT_TEST_DATA; }

inline std::string read_text(const std::filesystem::path& p) {
  const Bytes b = read_file(p);
  return std::string(b.begin(), b.end());
}

struct Portrait {
  Canvas target;
  GuidanceMaps maps;
};

inline Portrait load_portrait() {
  const auto dir = data_dir() / "portrait";
  Portrait p;
  p.target = import_image(read_file(dir / "target.png"));
  p.maps = load_maps(read_file(dir / "labels.png"), read_file(dir / "normals.png"),
                     read_file(dir / "attention.png"), read_text(dir / "order.txt"));
  return p;
}

/// 2x2 box average.
inline Canvas half_size(const Canvas& c) {
  Canvas out(c.width() / 2, c.height() / 2);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int ch = 0; ch < 3; ++ch)
        out(x, y)[ch] = 0.25 * (c(2 * x, 2 * y)[ch] + c(2 * x + 1, 2 * y)[ch] +
                                c(2 * x, 2 * y + 1)[ch] + c(2 * x + 1, 2 * y + 1)[ch]);
  return out;
}

inline Canvas random_canvas(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Canvas c(w, h);
  for (auto& px : c.data()) px = {u(rng), u(rng), u(rng)};
  return c;
}

inline double max_abs_diff(const Canvas& a, const Canvas& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int ch = 0; ch < 3; ++ch) m = std::max(m, std::abs(a.data()[i][ch] - b.data()[i][ch]));
  return m;
}

}  // namespace copaint::testing
