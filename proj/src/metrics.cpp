#include "copaint/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace copaint {
namespace {

void require_same(const Canvas& a, const Canvas& b, const char* who) {
  if (!a.same_size(b)) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> taps{};
  double sum = 0.0;
  const int half = kSsimWindow / 2;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - half;
    taps[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable "valid" filtering: output is (w - 10) x (h - 10).
Grid<double> filter_valid(const Grid<double>& in, const std::array<double, kSsimWindow>& taps) {
  const int ow = in.width() - kSsimWindow + 1;
  const int oh = in.height() - kSsimWindow + 1;
  Grid<double> rows(ow, in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += taps[k] * in(x + k, y);
      rows(x, y) = s;
    }
  Grid<double> out(ow, oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += taps[k] * rows(x, y + k);
      out(x, y) = s;
    }
  return out;
}

}  // namespace

double mse_channel_mean(const Canvas& a, const Canvas& b) {
  require_same(a, b, "mse");
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int ch = 0; ch < 3; ++ch) {
      const double d = a.data()[i][ch] - b.data()[i][ch];
      sum += d * d;
    }
  return sum / (3.0 * static_cast<double>(a.size()));
}

double psnr(const Canvas& a, const Canvas& b) {
  const double mse = mse_channel_mean(a, b);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double luminance(const Rgb& c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; }

double ssim(const Canvas& a, const Canvas& b) {
  require_same(a, b, "ssim");
  if (a.width() < kSsimWindow || a.height() < kSsimWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  const int w = a.width();
  const int h = a.height();
  Grid<double> x(w, h), y(w, h), xx(w, h), yy(w, h), xy(w, h);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const double la = luminance(a(i, j));
      const double lb = luminance(b(i, j));
      x(i, j) = la;
      y(i, j) = lb;
      xx(i, j) = la * la;
      yy(i, j) = lb * lb;
      xy(i, j) = la * lb;
    }
  const auto taps = gaussian_taps();
  const Grid<double> mx = filter_valid(x, taps);
  const Grid<double> my = filter_valid(y, taps);
  const Grid<double> sxx = filter_valid(xx, taps);
  const Grid<double> syy = filter_valid(yy, taps);
  const Grid<double> sxy = filter_valid(xy, taps);
  const double c1 = kSsimK1 * kSsimK1;
  const double c2 = kSsimK2 * kSsimK2;
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double ux = mx.data()[i];
    const double uy = my.data()[i];
    const double vx = sxx.data()[i] - ux * ux;
    const double vy = syy.data()[i] - uy * uy;
    const double cov = sxy.data()[i] - ux * uy;
    total += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) /
             ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

MetricReport compare(const Canvas& a, const Canvas& b) {
  return {psnr(a, b), ssim(a, b), mse_channel_mean(a, b)};
}

}  // namespace copaint
