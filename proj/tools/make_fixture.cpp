// Writes the 128x128 synthetic portrait fixture: target image, paletted label
// map, 16-bit normal map, attention map and order table.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

#include "copaint/io.hpp"

using namespace copaint;

namespace {

constexpr int kSize = 128;

enum Label : std::uint8_t { kBackground = 0, kClothes = 1, kHair = 2, kSkin = 3, kMouth = 4, kEyes = 5 };

double ellipse(double x, double y, double cx, double cy, double rx, double ry) {
  const double dx = (x - cx) / rx;
  const double dy = (y - cy) / ry;
  return dx * dx + dy * dy;
}

Label label_at(double x, double y) {
  if (ellipse(x, y, 51, 58, 5, 3.2) <= 1 || ellipse(x, y, 77, 58, 5, 3.2) <= 1) return kEyes;
  if (ellipse(x, y, 64, 86, 11, 4) <= 1) return kMouth;
  if (ellipse(x, y, 64, 64, 27, 35) <= 1) return kSkin;
  if (ellipse(x, y, 64, 56, 36, 44) <= 1 && y < 80) return kHair;
  if (y > 96 && ellipse(x, y, 64, 140, 58, 46) <= 1) return kClothes;
  if (x > 54 && x < 74 && y > 90 && y < 110) return kSkin;  // neck
  return kBackground;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "tests/data/portrait";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> jitter(0.0, 0.35);

  Canvas target(kSize, kSize);
  PngRaster labels;
  labels.width = labels.height = kSize;
  labels.channels = 1;
  labels.paletted = true;
  labels.palette = {{40, 40, 120}, {200, 60, 60}, {90, 60, 30}, {240, 200, 170}, {180, 40, 60},
                    {20, 20, 20}};
  NormalMap normals(kSize, kSize, Normal{0, 0, 1});
  GrayImage attention(kSize, kSize);

  for (int y = 0; y < kSize; ++y)
    for (int x = 0; x < kSize; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      const Label l = label_at(px, py);
      labels.samples.push_back(l);
      const double u = px / kSize;
      const double v = py / kSize;
      Rgb c;
      Normal n{0, 0, 1};
      switch (l) {
        case kBackground:
          c = {0.10 + 0.15 * u, 0.25 + 0.20 * v, 0.55 - 0.15 * v};
          break;
        case kClothes:
          c = {0.55 - 0.2 * v, 0.12, 0.15 + 0.1 * u};
          n = {0.3 * std::sin(px * 0.4), 0.0, 1.0};
          break;
        case kHair: {
          const double streak = 0.5 + 0.5 * std::sin(px * 0.9 + 0.3 * py);
          c = {0.18 + 0.12 * streak, 0.10 + 0.07 * streak, 0.05 + 0.03 * streak};
          n = {jitter(rng), jitter(rng), 1.0};
          break;
        }
        case kSkin: {
          const double shade = 1.0 - 0.35 * std::sqrt(std::min(1.0, ellipse(px, py, 58, 56, 34, 42)));
          c = {0.85 * shade, 0.62 * shade, 0.50 * shade};
          const double dx = (px - 64) / 27.0;
          const double dy = (py - 64) / 35.0;
          n = {dx, dy, std::sqrt(std::max(0.05, 1.0 - dx * dx - dy * dy))};
          break;
        }
        case kMouth:
          c = {0.62, 0.22, 0.25};
          n = {0.0, (py - 86) / 4.0, 1.0};
          break;
        case kEyes: {
          const bool pupil = ellipse(px, py, px < 64 ? 51 : 77, 58, 2, 2) <= 1;
          c = pupil ? Rgb{0.03, 0.03, 0.05} : Rgb{0.92, 0.92, 0.90};
          n = {(px - (px < 64 ? 51 : 77)) / 5.0, (py - 58) / 3.2, 1.0};
          break;
        }
      }
      target(x, y) = c;
      const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
      normals(x, y) = {n[0] / len, n[1] / len, n[2] / len};
      attention(x, y) = 0.15 + std::exp(-ellipse(px, py, 64, 66, 30, 38)) +
                        0.8 * std::exp(-ellipse(px, py, 51, 58, 7, 6)) +
                        0.8 * std::exp(-ellipse(px, py, 77, 58, 7, 6)) +
                        0.5 * std::exp(-ellipse(px, py, 64, 86, 12, 6));
    }
  double peak = 0.0;
  for (double a : attention.data()) peak = std::max(peak, a);
  for (double& a : attention.data()) a /= peak;

  write_file(dir / "target.png", export_image(target));
  write_file(dir / "labels.png", encode_png(labels));
  write_file(dir / "normals.png", encode_normals(normals));
  write_file(dir / "attention.png", export_gray(attention));
  write_file(dir / "order.txt", std::string_view("# coarsest first\n"
                                                 "0 background\n"
                                                 "1 clothes\n"
                                                 "2 hair\n"
                                                 "3 skin\n"
                                                 "4 mouth\n"
                                                 "5 eyes\n"));
  std::cout << "wrote fixture to " << dir.string() << "\n";
  return 0;
}
