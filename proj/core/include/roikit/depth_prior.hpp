#pragma once

#include <optional>
#include <span>
#include <vector>

#include "roikit/types.hpp"

namespace roikit {

// Bilinear sample of the raster at continuous pixel position (u, v).
// Pixel centers sit at integer coordinates, so the valid domain is
// u in [0, width-1], v in [0, height-1]; outside it (or for non-finite
// input) the result is nullopt and the caller decides the policy.
// Bilinear interpolation reproduces affine fields d(u,v) = au + bv + c
// exactly.
std::optional<double> sample_depth(const DepthRaster& raster, double u, double v);

// Projects every point into the raster and appends the sampled depth
// prior as a fifth attribute. Points behind the camera or projecting
// outside the raster keep d_da = 0 and are never dropped: output order
// and count equal the input, and the first four fields are copied
// bitwise.
std::vector<Point5> augment_points(std::span<const RawPoint> points,
                                   const DepthRaster& raster,
                                   const CalibrationSet& calib);

}  // namespace roikit
