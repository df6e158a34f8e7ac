#pragma once

#include "lgt/types.hpp"

namespace lgt {

/// PSNR reported for a zero-error reconstruction, and the upper clamp for
/// any other value.
inline constexpr double kPsnrCap = 100.0;

/// 10 log10(peak^2 / MSE) over the masked pixels, clamped to kPsnrCap.
double psnr(const RealVector& a, const RealVector& b, const Mask& mask, double peak = 1.0);

/// Mean squared error over the masked pixels.
double masked_mse(const RealVector& a, const RealVector& b, const Mask& mask);

}  // namespace lgt
