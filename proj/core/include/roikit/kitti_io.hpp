#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "roikit/errors.hpp"
#include "roikit/types.hpp"

namespace roikit {

// KITTI velodyne scan: packed little-endian f32 (x, y, z, r) quadruples,
// no header. File length must be a multiple of 16 bytes and every
// component finite; violations raise FormatError with the record index.
std::vector<RawPoint> read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(const std::filesystem::path& path, std::span<const RawPoint> points);

// Augmented cloud: packed little-endian f32 (x, y, z, r, d_da) quintuples.
std::vector<Point5> read_point5_cloud(const std::filesystem::path& path);
void write_point5_cloud(const std::filesystem::path& path, std::span<const Point5> points);

// Calibration text file of "KEY: v1 v2 ..." lines. Requires keys
// P2 (12 values), R0_rect (9) and Tr_velo_to_cam (12), parsed row-major.
// Missing key -> MissingCalibError; wrong value count or unparsable
// number -> FormatError.
CalibrationSet read_calibration(const std::filesystem::path& path);

// Depth raster container: magic "DPR1", u32 LE width, u32 LE height,
// then width*height f32 LE row-major values (finite, >= 0).
DepthRaster read_depth_raster(const std::filesystem::path& path);
void write_depth_raster(const std::filesystem::path& path, const DepthRaster& raster);

// KITTI 15-column label file. Boxes are converted to the LiDAR frame
// eagerly: camera-frame bottom-center location is mapped through
// R0^-1 then Tr^-1, shifted up by h/2 to the geometric center, and
// camera ry becomes lidar yaw = -ry - pi/2 (normalized).
// DontCare rows come back as ClassLabel::Other with dont_care set;
// their conventional (-1,-1,-1) dimensions are replaced by unit dims
// so the Box3D invariant holds.
std::vector<LabeledBox> read_labels(const std::filesystem::path& path, const CalibrationSet& calib);

}  // namespace roikit
