#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

namespace roikit {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

// One LiDAR return in the sensor frame. Spatial coordinates in meters,
// reflectance unitless in [0,1]. All components finite.
struct RawPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double r = 0.0;

    Vec3 position() const { return {x, y, z}; }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(r);
    }
};

// LiDAR return plus a sampled depth prior. d_da >= 0, with 0 meaning
// "no prior available" (point projected outside the raster or behind
// the camera).
struct Point5 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double r = 0.0;
    double d_da = 0.0;

    Vec3 position() const { return {x, y, z}; }
};

// Continuous pixel location of a projected point. depth_cam is the
// camera-frame z of the point, positive for valid projections.
struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
    double depth_cam = 0.0;
};

// Camera projection and LiDAR->camera rigid transform, KITTI convention.
//   P  : 3x4 camera projection matrix (pixels)
//   R0 : 3x3 rectification rotation, orthonormal up to file precision
//   Tr : 3x4 LiDAR-to-camera rigid transform
struct CalibrationSet {
    Mat34 P = Mat34::Zero();
    Mat3 R0 = Mat3::Identity();
    Mat34 Tr = Mat34::Zero();

    static CalibrationSet identity();

    // Enforces R0'R0 ~ I within 1e-3 and P[2][2] != 0.
    // Throws FormatError on violation.
    void validate() const;
};

// Row-major single-precision depth values, model-relative units,
// nonnegative. data.size() == width * height.
struct DepthRaster {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<float> data;

    float at(uint32_t ix, uint32_t iy) const { return data[size_t(iy) * width + ix]; }
    float& at(uint32_t ix, uint32_t iy) { return data[size_t(iy) * width + ix]; }
};

// Maps any finite angle to (-pi, pi].
double normalize_angle(double a);

// Oriented 3D box in the LiDAR frame. (cx,cy,cz) is the geometric
// center; l, w, h are the extents along the box-local x, y, z axes;
// yaw rotates about the up axis, measured from +x, counterclockwise
// positive. Yaw is normalized to (-pi, pi] on construction.
struct Box3D {
    Box3D() = default;
    Box3D(const Vec3& center, double l, double w, double h, double yaw);

    Vec3 center = Vec3::Zero();
    double l = 1.0;
    double w = 1.0;
    double h = 1.0;
    double yaw = 0.0;

    Vec3 dims() const { return {l, w, h}; }
};

enum class ClassLabel { Car, Pedestrian, Cyclist, Other };

const char* to_string(ClassLabel c);

// A ground-truth or proposal box with its class. DontCare entries are
// retained with dont_care set; downstream consumers decide whether to
// skip them.
struct LabeledBox {
    Box3D box;
    ClassLabel label = ClassLabel::Other;
    bool dont_care = false;
    double truncation = 0.0;
    int occlusion = 0;
};

}  // namespace roikit
