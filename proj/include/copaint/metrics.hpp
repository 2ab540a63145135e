#pragma once

#include "copaint/grid.hpp"

namespace copaint {

struct MetricReport {
  double psnr = 0.0;  // dB; +infinity for identical images
  double ssim = 0.0;
  double mse = 0.0;   // mean over pixels and channels
};

/// Channel-mean MSE; loss_mse divided by 3.
double mse_channel_mean(const Canvas& a, const Canvas& b);

/// 10 log10(1 / mse) for images in [0,1]; +infinity when identical.
double psnr(const Canvas& a, const Canvas& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Rec. 709 luminance of a linear RGB pixel.
double luminance(const Rgb& c);

/// Mean SSIM over all full 11x11 Gaussian windows (sigma 1.5) of the Rec. 709
/// luminance. Throws for mismatched sizes or images smaller than the window.
double ssim(const Canvas& a, const Canvas& b);

MetricReport compare(const Canvas& a, const Canvas& b);

}  // namespace copaint
