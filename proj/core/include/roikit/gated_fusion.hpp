#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "roikit/nn.hpp"
#include "roikit/roi_pooling.hpp"
#include "roikit/tensor.hpp"

namespace roikit {

// How the two per-channel gate vectors are squashed. independent_sigmoid
// keeps the branches uncoupled; softmax_complementary forces them to sum
// to one per channel.
enum class GateMode { independent_sigmoid, softmax_complementary };

GateMode gate_mode_from_string(const std::string& s);
const char* to_string(GateMode mode);

// Weights of one fusion stage. Bundle names:
//   bgrf.stage{s}.unify_{v,p}.{W,b}      GAP vector -> common width Cu
//   bgrf.stage{s}.gate_{v,p}.{W1,b1,W2,b2}  Linear-ReLU-Linear, Cu -> C
//   bgrf.stage{s}.refine.{K,b}           3^3 conv, stride 1, padding 1
struct BgrfStageWeights {
    const Tensor* unify_v_W = nullptr;
    const Tensor* unify_v_b = nullptr;
    const Tensor* unify_p_W = nullptr;
    const Tensor* unify_p_b = nullptr;
    const Tensor* gate_v_W1 = nullptr;
    const Tensor* gate_v_b1 = nullptr;
    const Tensor* gate_v_W2 = nullptr;
    const Tensor* gate_v_b2 = nullptr;
    const Tensor* gate_p_W1 = nullptr;
    const Tensor* gate_p_b1 = nullptr;
    const Tensor* gate_p_W2 = nullptr;
    const Tensor* gate_p_b2 = nullptr;
    const Tensor* refine_K = nullptr;
    const Tensor* refine_b = nullptr;

    static BgrfStageWeights from_bundle(const WeightBundle& bundle, int stage);
};

// The per-channel gates of one stage, exposed for tests that need to
// freeze or inspect them.
struct GatePair {
    Tensor a_v;  // [C]
    Tensor a_p;  // [C]
};

GatePair compute_gates(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                       const BgrfStageWeights& w, GateMode mode);

// One fusion stage. Both volumes must share shape. The gates weight the
// inputs per channel, S = a_v * v + a_p * p; the output adds a linear
// 3^3 convolutional refinement back onto S (residual around the conv).
FeatureVolume gated_fuse_stage(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                               const BgrfStageWeights& w,
                               GateMode mode = GateMode::independent_sigmoid);

// Like gated_fuse_stage but with the gate vectors supplied by the
// caller instead of computed from the inputs.
FeatureVolume gated_fuse_stage_with_gates(const FeatureVolume& v_vol,
                                          const FeatureVolume& p_vol, const GatePair& gates,
                                          const BgrfStageWeights& w);

struct CascadeOutput {
    std::array<FeatureVolume, 3> stages;
    FeatureVolume average;
};

// Three-stage cascade: stage 1 fuses (v, p); each later stage fuses the
// previous output with the point volume again. The average is the
// elementwise mean of the three stage outputs.
CascadeOutput cascade(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                      const std::array<BgrfStageWeights, 3>& stage_weights,
                      GateMode mode = GateMode::independent_sigmoid);

// Per-cell affine over the channel axis (a 1x1x1 convolution); maps a
// volume with W.shape[1] channels to W.shape[0] channels. Used to bring
// the voxel path to the point-path width before fusion
// (bundle names bgrf.adapt_v.{W,b}).
FeatureVolume adapt_channels(const FeatureVolume& vol, const Tensor& W, const Tensor& b);

// Row-major flattening, length C * g^3; what a downstream head consumes.
std::vector<double> flatten_for_head(const FeatureVolume& vol);

// Analytic gradients of loss = sum of gated_fuse_stage output with
// respect to every stage weight tensor, derived by hand for
// finite-difference verification. Keys match the bundle suffixes
// (unify_v.W, gate_p.b2, refine.K, ...).
std::map<std::string, Tensor> bgrf_stage_loss_gradients(const FeatureVolume& v_vol,
                                                        const FeatureVolume& p_vol,
                                                        const BgrfStageWeights& w,
                                                        GateMode mode);

// Manifest for seeded_init: three stages at channel width c, unify width
// cu (gate hidden width equals cu), plus an adapt_v entry when
// c_map != c.
std::vector<TensorSpec> bgrf_manifest(int c, int cu, int c_map);

}  // namespace roikit
