#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "roikit/pointgfe.hpp"
#include "roikit/spatial_index.hpp"
#include "roikit/tensor.hpp"
#include "roikit/types.hpp"
#include "roikit/voxelgrid.hpp"

namespace roikit {

enum class VolumeTag { voxel_path, point_path, fused };

const char* to_string(VolumeTag tag);
VolumeTag volume_tag_from_string(const std::string& s);

// Dense C x g x g x g feature block over an RoI. Spatial layout is
// row-major [c][z][y][x] with x fastest, matching the local-frame grid
// ordering of roi_grid_points.
struct FeatureVolume {
    VolumeTag tag = VolumeTag::fused;
    int channels = 0;
    int g = 0;
    std::vector<double> data;  // channels * g^3

    static FeatureVolume zeros(VolumeTag tag, int channels, int g);

    double at(int c, int iz, int iy, int ix) const {
        return data[size_t(((c * g + iz) * g + iy) * g + ix)];
    }
    double& at(int c, int iz, int iy, int ix) {
        return data[size_t(((c * g + iz) * g + iy) * g + ix)];
    }

    Tensor as_tensor() const;  // [C, g, g, g]
    static FeatureVolume from_tensor(VolumeTag tag, const Tensor& t);

    // Golden dump format: text header "FVOL1 <tag> <C> <g>" + newline,
    // then f32 LE payload in storage order.
    void save(const std::filesystem::path& path) const;
    static FeatureVolume load(const std::filesystem::path& path);
};

struct RoiPoolConfig {
    int n = 6;                       // grid-pooling resolution
    int m = 12;                      // sub-voxel resolution, must equal 2n
    double grid_query_radius = 0.8;  // ball query radius over voxel centers
    int grid_query_k = 16;           // neighbor cap per grid point
    double margin = 0.2;             // RoI enlargement, meters per half-extent

    void validate() const;
};

// World-frame cell centers of the uniform n^3 partition of the box,
// x-fastest then y then z in local coordinates.
std::vector<Vec3> roi_grid_points(const Box3D& box, int n);

// Each grid point gathers voxel features within grid_query_radius
// (first grid_query_k voxels in map entry order) and stores their mean;
// grid points with no voxel in radius stay zero.
FeatureVolume roi_grid_pool(const SparseVoxelMap& map, const Box3D& box,
                            const RoiPoolConfig& cfg);
// Batch variant reusing a prebuilt index over map.centers().
FeatureVolume roi_grid_pool(const SparseVoxelMap& map, const GridHashIndex& voxel_index,
                            const Box3D& box, const RoiPoolConfig& cfg);

// Max-pools point embeddings into the m^3 sub-voxel partition of a box
// with extents box_dims. Positions must already be canonical; points
// admitted by the enlargement margin clamp into boundary cells. Empty
// cells stay zero.
FeatureVolume roi_aware_pool(std::span<const Vec3> canonical_positions,
                             const Tensor& embeddings, const Vec3& box_dims, int m);

// Stride-2 2^3 convolution halving the spatial resolution, then ReLU.
// kernel [Cout, Cin, 2, 2, 2], bias [Cout]; v.g must be even.
FeatureVolume downsample_volume(const FeatureVolume& v, const Tensor& kernel,
                                const Tensor& bias);

// Extra bundle entries used by extract_roi_features: the point-path
// downsampler, named down.K [C, C, 2,2,2] and down.b [C].
std::vector<TensorSpec> downsample_manifest(int channels);

struct RoiFeaturePair {
    FeatureVolume voxel_volume;  // [map channels, n^3]
    FeatureVolume point_volume;  // [gfe total width, n^3]
    size_t point_count = 0;      // points inside the enlarged box
};

// Shares the point positions and the voxel-center index across boxes.
// extract() is const and safe to call from several threads at once.
class RoiExtractor {
public:
    RoiExtractor(std::span<const Point5> points, const SparseVoxelMap& map,
                 const WeightBundle& bundle, const PointGfeConfig& gfe_cfg,
                 const RoiPoolConfig& pool_cfg);

    // Both RoI paths for one box: grid pooling over the voxel map, and
    // crop -> canonicalize -> pointgfe_stack -> roi_aware_pool ->
    // downsample_volume over the points. Boxes with no points yield an
    // all-zero point volume.
    RoiFeaturePair extract(const Box3D& box) const;

private:
    std::span<const Point5> points_;
    std::vector<Vec3> positions_;
    const SparseVoxelMap& map_;
    const WeightBundle& bundle_;
    PointGfeConfig gfe_cfg_;
    RoiPoolConfig pool_cfg_;
    GridHashIndex voxel_index_;
};

// Batch convenience over RoiExtractor, one result per box in order.
std::vector<RoiFeaturePair> extract_roi_features(std::span<const Point5> points,
                                                 const SparseVoxelMap& map,
                                                 std::span<const Box3D> boxes,
                                                 const WeightBundle& bundle,
                                                 const PointGfeConfig& gfe_cfg,
                                                 const RoiPoolConfig& pool_cfg);

}  // namespace roikit
