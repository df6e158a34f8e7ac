#include "lgt/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lgt {

double masked_mse(const RealVector& a, const RealVector& b, const Mask& mask) {
    if (a.size() != b.size() || a.size() != mask.size()) {
        throw DimensionMismatch("psnr operands and mask must have equal length");
    }
    const Index count = mask.count();
    if (count == 0) throw Error("mask must select at least one pixel");
    return (a - b).array().square().matrix().dot(mask.cast<double>().matrix()) /
           static_cast<double>(count);
}

double psnr(const RealVector& a, const RealVector& b, const Mask& mask, double peak) {
    const double mse = masked_mse(a, b, mask);
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

}  // namespace lgt
