#pragma once

#include <span>
#include <vector>

#include "roikit/errors.hpp"
#include "roikit/types.hpp"

namespace roikit {

// Rotation about the up axis by `angle` radians, counterclockwise.
Mat3 rot_z(double angle);

// LiDAR frame -> rectified camera frame: R0 * Tr * homogeneous(p).
Vec3 lidar_to_rect(const Vec3& p, const CalibrationSet& calib);

// Rectified camera frame -> image plane. Inverse of lidar_to_rect.
Vec3 rect_to_lidar(const Vec3& p_rect, const CalibrationSet& calib);

// Projective division u = row0.p~ / row2.p~, v = row1.p~ / row2.p~.
// Throws BehindCameraError when row2.p~ <= 0.
PixelCoord rect_to_image(const Vec3& p_rect, const Mat34& P);

// Indices of points inside `box` enlarged by `margin` on every
// half-extent. Membership is tested in the box-local frame,
// |x'| <= l/2 + margin etc., boundary inclusive.
std::vector<size_t> points_in_box(std::span<const Vec3> points, const Box3D& box, double margin);

// Box-local ("canonical") coordinates: Rz(-yaw) * (p - center). The box
// center maps to the origin and the box axes to the coordinate axes.
std::vector<Vec3> canonicalize(std::span<const Vec3> points, const Box3D& box);
Vec3 canonicalize_point(const Vec3& p, const Box3D& box);

// The box as seen after rotating the whole scene by `angle` about the
// up axis (center rotates, yaw accumulates).
Box3D rotate_box(const Box3D& box, double angle);

}  // namespace roikit
