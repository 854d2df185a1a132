#pragma once

#include <array>
#include <span>
#include <vector>

#include "roikit/nn.hpp"
#include "roikit/spatial_index.hpp"
#include "roikit/tensor.hpp"
#include "roikit/types.hpp"

namespace roikit {

// Three stacked local-geometry encoder stages. Stage s consumes the
// previous stage's per-point features (the raw 5D attributes for stage
// 1, depth prior included) together with relative neighbor offsets, and
// the three stage outputs are concatenated per point.
struct PointGfeConfig {
    double radius = 0.8;
    int k = 9;
    std::array<int, 3> stage_widths = {32, 32, 64};
    // Hidden width of each stage MLP; 0 means "same as the stage width".
    std::array<int, 3> hidden_widths = {0, 0, 0};

    int total_width() const { return stage_widths[0] + stage_widths[1] + stage_widths[2]; }
    int hidden_width(int stage) const {
        return hidden_widths[size_t(stage)] > 0 ? hidden_widths[size_t(stage)]
                                                : stage_widths[size_t(stage)];
    }
    void validate() const;  // radius > 0, k >= 1, widths >= 1
};

// Weights of one stage MLP (Linear-ReLU-Linear-ReLU), W1 [hidden, Cin+3],
// W2 [Cout, hidden]. Bundle names: gfe.stage{1,2,3}.{W1,b1,W2,b2}.
struct GfeStageWeights {
    const Tensor* W1 = nullptr;
    const Tensor* b1 = nullptr;
    const Tensor* W2 = nullptr;
    const Tensor* b2 = nullptr;

    static GfeStageWeights from_bundle(const WeightBundle& bundle, int stage);
};

// Relative positions neighbor-minus-self: entry (i, j) is
// positions[neighbors[i*k + j]] - positions[i]. Result is [N, k, 3].
// Out-of-range neighbor indices raise IndexError.
Tensor encode_local_geometry(std::span<const Vec3> positions,
                             std::span<const int32_t> neighbors, int k);

// One encoder stage: each neighbor slot j of point i forms
// concat(point_feats[i], offsets[i, j]), runs through the stage MLP,
// and the stage output row is the elementwise max over the k slots.
Tensor pointgfe_stage(const Tensor& point_feats, const Tensor& offsets,
                      const GfeStageWeights& w);

// Full three-stage stack over a point cloud. Neighborhoods come from a
// single ball query (config radius / k) on the point positions and are
// shared by all stages; a point always reaches at least itself, so no
// neighborhood is empty. Output is [N, total_width()].
Tensor pointgfe_stack(std::span<const Point5> points, const PointGfeConfig& config,
                      const WeightBundle& bundle);

// The manifest seeded_init needs for a given config (stage MLPs only).
std::vector<TensorSpec> pointgfe_manifest(const PointGfeConfig& config);

}  // namespace roikit
