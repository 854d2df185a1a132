#include "roikit/depth_prior.hpp"

#include <cmath>

#include "roikit/geometry.hpp"

namespace roikit {

std::optional<double> sample_depth(const DepthRaster& raster, double u, double v) {
    if (raster.width == 0 || raster.height == 0) return std::nullopt;
    if (!std::isfinite(u) || !std::isfinite(v)) return std::nullopt;
    const double umax = double(raster.width) - 1.0;
    const double vmax = double(raster.height) - 1.0;
    if (u < 0.0 || u > umax || v < 0.0 || v > vmax) return std::nullopt;

    const auto i0 = uint32_t(std::floor(u));
    const auto j0 = uint32_t(std::floor(v));
    const uint32_t i1 = std::min(i0 + 1, raster.width - 1);
    const uint32_t j1 = std::min(j0 + 1, raster.height - 1);
    const double fx = u - double(i0);
    const double fy = v - double(j0);

    const double top = (1.0 - fx) * raster.at(i0, j0) + fx * raster.at(i1, j0);
    const double bot = (1.0 - fx) * raster.at(i0, j1) + fx * raster.at(i1, j1);
    return (1.0 - fy) * top + fy * bot;
}

std::vector<Point5> augment_points(std::span<const RawPoint> points, const DepthRaster& raster,
                                   const CalibrationSet& calib) {
    std::vector<Point5> out;
    out.reserve(points.size());
    for (const RawPoint& p : points) {
        Point5 q{p.x, p.y, p.z, p.r, 0.0};
        const Vec3 rect = lidar_to_rect(p.position(), calib);
        const Eigen::Vector4d hp(rect.x(), rect.y(), rect.z(), 1.0);
        const Vec3 proj = calib.P * hp;
        if (proj.z() > 0.0) {
            if (auto d = sample_depth(raster, proj.x() / proj.z(), proj.y() / proj.z())) {
                q.d_da = *d;
            }
        }
        out.push_back(q);
    }
    return out;
}

}  // namespace roikit
