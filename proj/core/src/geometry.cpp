#include "roikit/geometry.hpp"

#include <cmath>

namespace roikit {

Mat3 rot_z(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat3 r;
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return r;
}

Vec3 lidar_to_rect(const Vec3& p, const CalibrationSet& calib) {
    Eigen::Vector4d hp(p.x(), p.y(), p.z(), 1.0);
    return calib.R0 * (calib.Tr * hp);
}

Vec3 rect_to_lidar(const Vec3& p_rect, const CalibrationSet& calib) {
    // Tr = [R | t] is rigid, so its inverse is [R' | -R't].
    const Vec3 p_cam = calib.R0.transpose() * p_rect;
    const Mat3 rot = calib.Tr.leftCols<3>();
    const Vec3 t = calib.Tr.col(3);
    return rot.transpose() * (p_cam - t);
}

PixelCoord rect_to_image(const Vec3& p_rect, const Mat34& P) {
    Eigen::Vector4d hp(p_rect.x(), p_rect.y(), p_rect.z(), 1.0);
    const Vec3 proj = P * hp;
    if (!(proj.z() > 0.0)) throw BehindCameraError(proj.z());
    return {proj.x() / proj.z(), proj.y() / proj.z(), proj.z()};
}

std::vector<size_t> points_in_box(std::span<const Vec3> points, const Box3D& box, double margin) {
    const double c = std::cos(-box.yaw);
    const double s = std::sin(-box.yaw);
    const double hx = box.l / 2.0 + margin;
    const double hy = box.w / 2.0 + margin;
    const double hz = box.h / 2.0 + margin;

    std::vector<size_t> inside;
    for (size_t i = 0; i < points.size(); ++i) {
        const Vec3 d = points[i] - box.center;
        const double lx = c * d.x() - s * d.y();
        const double ly = s * d.x() + c * d.y();
        if (std::abs(lx) <= hx && std::abs(ly) <= hy && std::abs(d.z()) <= hz) {
            inside.push_back(i);
        }
    }
    return inside;
}

Vec3 canonicalize_point(const Vec3& p, const Box3D& box) {
    const double c = std::cos(-box.yaw);
    const double s = std::sin(-box.yaw);
    const Vec3 d = p - box.center;
    return {c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z()};
}

std::vector<Vec3> canonicalize(std::span<const Vec3> points, const Box3D& box) {
    std::vector<Vec3> out;
    out.reserve(points.size());
    for (const Vec3& p : points) out.push_back(canonicalize_point(p, box));
    return out;
}

Box3D rotate_box(const Box3D& box, double angle) {
    return Box3D(rot_z(angle) * box.center, box.l, box.w, box.h, box.yaw + angle);
}

}  // namespace roikit
