#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "roikit/errors.hpp"
#include "roikit/types.hpp"

namespace roikit {

// Regular voxel partition of space. A point p falls into voxel
// floor((p - origin) / voxel_size); only voxels with index in
// [0, extent) per axis are kept.
struct GridSpec {
    Vec3 origin = Vec3::Zero();
    Vec3 voxel_size = Vec3::Ones();
    Vec3i extent = Vec3i::Ones();

    // KITTI-convention detection range: origin (0, -40, -3),
    // voxel size (0.05, 0.05, 0.1), extent (1408, 1600, 40).
    static GridSpec kitti_default();

    void validate() const;  // voxel_size > 0, extent >= 1
    std::optional<Vec3i> voxel_of(const Vec3& p) const;
    Vec3 center_of(const Vec3i& index) const;
};

struct VoxelEntry {
    Vec3i index = Vec3i::Zero();
    Vec3 center = Vec3::Zero();
    std::vector<double> feature;
    size_t member_count = 0;
};

// Voxel-indexed feature map standing in for a 3D backbone output.
// Entries are kept sorted by (ix, iy, iz) so that every traversal
// order downstream is reproducible. Immutable once built; share freely
// across threads.
class SparseVoxelMap {
public:
    SparseVoxelMap() = default;
    // channel_hint fixes the channel count when entries is empty.
    SparseVoxelMap(GridSpec spec, std::vector<VoxelEntry> entries, size_t dropped_points,
                   size_t channel_hint = 0);

    const GridSpec& spec() const { return spec_; }
    const std::vector<VoxelEntry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    size_t channels() const { return channels_; }
    size_t dropped_points() const { return dropped_; }

    const VoxelEntry* find(const Vec3i& index) const;

    // Voxel-center positions in entry order.
    std::vector<Vec3> centers() const;

private:
    GridSpec spec_;
    std::vector<VoxelEntry> entries_;
    std::vector<int64_t> keys_;  // packed indices, ascending, parallel to entries_
    size_t channels_ = 0;
    size_t dropped_ = 0;
};

// Assigns each in-extent point to its voxel and stores the arithmetic
// mean of the 5D point features (x, y, z, r, d_da) per voxel, using
// compensated summation. Out-of-extent points are dropped and counted.
SparseVoxelMap voxelize(std::span<const Point5> points, const GridSpec& spec);

// Replaces or inserts voxel features from a text file of
// "ix iy iz f_1 ... f_C" lines. All records must share one channel
// count; if it differs from the map's, every existing entry must be
// covered by the file. Out-of-extent coordinates raise FormatError.
SparseVoxelMap load_voxel_features(const SparseVoxelMap& map, const std::filesystem::path& path);

}  // namespace roikit
