#pragma once

#include <span>

#include "roikit/gated_fusion.hpp"
#include "roikit/pointgfe.hpp"
#include "roikit/roi_pooling.hpp"
#include "roikit/tensor.hpp"
#include "roikit/types.hpp"
#include "roikit/voxelgrid.hpp"

// Straight-line reference implementations of the pooling and forward
// operations, written as direct formula evaluation with no acceleration
// structures or shared code with the production paths. They exist to be
// compared against, in the selfcheck suites and in tests; never use them
// for real workloads.
namespace roikit::ref {

Tensor affine_naive(const Tensor& W, const Tensor& b, const Tensor& x);
Tensor gap_naive(const Tensor& v);
Tensor conv3d_naive(const Tensor& kernel, const Tensor& bias, const Tensor& v, int stride,
                    int padding);

Tensor pointgfe_stage_naive(const Tensor& point_feats, const Tensor& offsets,
                            const GfeStageWeights& w);

// Per-voxel mean features via two-pass grouping with plain summation.
// Returns (voxel index, mean feature) pairs sorted by index.
struct VoxelMean {
    Vec3i index;
    std::vector<double> feature;
    size_t member_count = 0;
};
std::vector<VoxelMean> voxel_means_naive(std::span<const Point5> points, const GridSpec& spec);

FeatureVolume aware_pool_naive(std::span<const Vec3> canonical_positions,
                               const Tensor& embeddings, const Vec3& box_dims, int m);

FeatureVolume grid_pool_naive(const SparseVoxelMap& map, const Box3D& box,
                              const RoiPoolConfig& cfg);

FeatureVolume gated_stage_naive(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                                const BgrfStageWeights& w, GateMode mode);

}  // namespace roikit::ref
