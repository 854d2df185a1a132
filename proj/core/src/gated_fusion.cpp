#include "roikit/gated_fusion.hpp"

#include <cmath>
#include <string>

namespace roikit {
namespace {

std::string stage_prefix(int stage) { return "bgrf.stage" + std::to_string(stage) + "."; }

// Intermediate values of one gating branch, kept for the backward pass.
struct BranchTrace {
    Tensor gap;  // [C]
    Tensor zu;   // [Cu]  pre-ReLU unify output
    Tensor u;    // [Cu]
    Tensor z1;   // [Gh]  pre-ReLU gate hidden
    Tensor h;    // [Gh]
    Tensor r;    // [C]   gate logits
};

struct StageTrace {
    BranchTrace v, p;
    Tensor a_v, a_p;  // [C] gate values
};

BranchTrace trace_branch(const FeatureVolume& vol, const Tensor& unify_W, const Tensor& unify_b,
                         const Tensor& gate_W1, const Tensor& gate_b1, const Tensor& gate_W2,
                         const Tensor& gate_b2) {
    BranchTrace t;
    t.gap = nn::global_avg_pool(vol.as_tensor());
    t.zu = nn::affine_forward(unify_W, unify_b, t.gap);
    t.u = nn::relu(t.zu);
    t.z1 = nn::affine_forward(gate_W1, gate_b1, t.u);
    t.h = nn::relu(t.z1);
    t.r = nn::affine_forward(gate_W2, gate_b2, t.h);
    return t;
}

StageTrace trace_stage(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                       const BgrfStageWeights& w, GateMode mode) {
    StageTrace t;
    t.v = trace_branch(v_vol, *w.unify_v_W, *w.unify_v_b, *w.gate_v_W1, *w.gate_v_b1,
                       *w.gate_v_W2, *w.gate_v_b2);
    t.p = trace_branch(p_vol, *w.unify_p_W, *w.unify_p_b, *w.gate_p_W1, *w.gate_p_b1,
                       *w.gate_p_W2, *w.gate_p_b2);
    const size_t channels = t.v.r.numel();
    if (t.p.r.numel() != channels) throw ShapeError("gate branches disagree on channel count");
    t.a_v = Tensor({channels});
    t.a_p = Tensor({channels});
    for (size_t c = 0; c < channels; ++c) {
        if (mode == GateMode::independent_sigmoid) {
            t.a_v[c] = 1.0 / (1.0 + std::exp(-t.v.r[c]));
            t.a_p[c] = 1.0 / (1.0 + std::exp(-t.p.r[c]));
        } else {
            const double m = std::max(t.v.r[c], t.p.r[c]);
            const double ev = std::exp(t.v.r[c] - m);
            const double ep = std::exp(t.p.r[c] - m);
            t.a_v[c] = ev / (ev + ep);
            t.a_p[c] = ep / (ev + ep);
        }
    }
    return t;
}

FeatureVolume weighted_sum(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                           const Tensor& a_v, const Tensor& a_p) {
    FeatureVolume s = FeatureVolume::zeros(VolumeTag::fused, v_vol.channels, v_vol.g);
    const size_t cells = size_t(v_vol.g) * size_t(v_vol.g) * size_t(v_vol.g);
    for (int c = 0; c < v_vol.channels; ++c) {
        const double av = a_v[size_t(c)];
        const double ap = a_p[size_t(c)];
        const double* vc = v_vol.data.data() + size_t(c) * cells;
        const double* pc = p_vol.data.data() + size_t(c) * cells;
        double* sc = s.data.data() + size_t(c) * cells;
        for (size_t i = 0; i < cells; ++i) sc[i] = av * vc[i] + ap * pc[i];
    }
    return s;
}

FeatureVolume refine_residual(const FeatureVolume& s, const Tensor& kernel, const Tensor& bias) {
    const Tensor refined = nn::conv3d_forward(kernel, bias, s.as_tensor(), 1, 1);
    FeatureVolume out = s;
    out.tag = VolumeTag::fused;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += refined[i];
    return out;
}

void check_same_shape(const FeatureVolume& v_vol, const FeatureVolume& p_vol) {
    if (v_vol.channels != p_vol.channels || v_vol.g != p_vol.g) {
        throw ShapeError("fusion inputs must share shape; adapt channels upstream");
    }
}

}  // namespace

GateMode gate_mode_from_string(const std::string& s) {
    if (s == "sigmoid") return GateMode::independent_sigmoid;
    if (s == "softmax") return GateMode::softmax_complementary;
    throw FormatError("unknown gate mode: " + s + " (expected sigmoid or softmax)");
}

const char* to_string(GateMode mode) {
    return mode == GateMode::independent_sigmoid ? "sigmoid" : "softmax";
}

BgrfStageWeights BgrfStageWeights::from_bundle(const WeightBundle& bundle, int stage) {
    const std::string p = stage_prefix(stage);
    BgrfStageWeights w;
    w.unify_v_W = &bundle.at(p + "unify_v.W");
    w.unify_v_b = &bundle.at(p + "unify_v.b");
    w.unify_p_W = &bundle.at(p + "unify_p.W");
    w.unify_p_b = &bundle.at(p + "unify_p.b");
    w.gate_v_W1 = &bundle.at(p + "gate_v.W1");
    w.gate_v_b1 = &bundle.at(p + "gate_v.b1");
    w.gate_v_W2 = &bundle.at(p + "gate_v.W2");
    w.gate_v_b2 = &bundle.at(p + "gate_v.b2");
    w.gate_p_W1 = &bundle.at(p + "gate_p.W1");
    w.gate_p_b1 = &bundle.at(p + "gate_p.b1");
    w.gate_p_W2 = &bundle.at(p + "gate_p.W2");
    w.gate_p_b2 = &bundle.at(p + "gate_p.b2");
    w.refine_K = &bundle.at(p + "refine.K");
    w.refine_b = &bundle.at(p + "refine.b");
    return w;
}

GatePair compute_gates(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                       const BgrfStageWeights& w, GateMode mode) {
    check_same_shape(v_vol, p_vol);
    StageTrace t = trace_stage(v_vol, p_vol, w, mode);
    return {std::move(t.a_v), std::move(t.a_p)};
}

FeatureVolume gated_fuse_stage(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                               const BgrfStageWeights& w, GateMode mode) {
    check_same_shape(v_vol, p_vol);
    const StageTrace t = trace_stage(v_vol, p_vol, w, mode);
    const FeatureVolume s = weighted_sum(v_vol, p_vol, t.a_v, t.a_p);
    return refine_residual(s, *w.refine_K, *w.refine_b);
}

FeatureVolume gated_fuse_stage_with_gates(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                                          const GatePair& gates, const BgrfStageWeights& w) {
    check_same_shape(v_vol, p_vol);
    if (gates.a_v.numel() != size_t(v_vol.channels) ||
        gates.a_p.numel() != size_t(v_vol.channels)) {
        throw ShapeError("gate vectors must have one entry per channel");
    }
    const FeatureVolume s = weighted_sum(v_vol, p_vol, gates.a_v, gates.a_p);
    return refine_residual(s, *w.refine_K, *w.refine_b);
}

CascadeOutput cascade(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                      const std::array<BgrfStageWeights, 3>& stage_weights, GateMode mode) {
    CascadeOutput out;
    const FeatureVolume* prev = &v_vol;
    for (int s = 0; s < 3; ++s) {
        out.stages[size_t(s)] = gated_fuse_stage(*prev, p_vol, stage_weights[size_t(s)], mode);
        prev = &out.stages[size_t(s)];
    }
    out.average = FeatureVolume::zeros(VolumeTag::fused, v_vol.channels, v_vol.g);
    for (size_t i = 0; i < out.average.data.size(); ++i) {
        out.average.data[i] = (out.stages[0].data[i] + out.stages[1].data[i] +
                               out.stages[2].data[i]) / 3.0;
    }
    return out;
}

FeatureVolume adapt_channels(const FeatureVolume& vol, const Tensor& W, const Tensor& b) {
    if (W.ndim() != 2 || W.dim(1) != size_t(vol.channels)) {
        throw ShapeError("adapt_channels: W columns must equal input channels");
    }
    const size_t c_out = W.dim(0);
    if (b.ndim() != 1 || b.dim(0) != c_out) throw ShapeError("adapt_channels: bad bias");
    const size_t cells = size_t(vol.g) * size_t(vol.g) * size_t(vol.g);
    FeatureVolume out = FeatureVolume::zeros(vol.tag, int(c_out), vol.g);
    for (size_t o = 0; o < c_out; ++o) {
        double* dst = out.data.data() + o * cells;
        for (size_t i = 0; i < cells; ++i) dst[i] = b[o];
        for (size_t c = 0; c < size_t(vol.channels); ++c) {
            const double wv = W.at(o, c);
            const double* src = vol.data.data() + c * cells;
            for (size_t i = 0; i < cells; ++i) dst[i] += wv * src[i];
        }
    }
    return out;
}

std::vector<double> flatten_for_head(const FeatureVolume& vol) { return vol.data; }

namespace {

// Backward of one gating branch given dL/dr; fills the four weight
// gradients and returns nothing else (input gradients are not needed).
void branch_backward(const BranchTrace& t, const Tensor& dr, const Tensor& gate_W1,
                     const Tensor& gate_W2, Tensor& g_unify_W, Tensor& g_unify_b,
                     Tensor& g_gate_W1, Tensor& g_gate_b1, Tensor& g_gate_W2,
                     Tensor& g_gate_b2) {
    const size_t channels = dr.numel();
    const size_t gh = t.h.numel();
    const size_t cu = t.u.numel();

    for (size_t c = 0; c < channels; ++c) {
        for (size_t h = 0; h < gh; ++h) g_gate_W2.at(c, h) = dr[c] * t.h[h];
        g_gate_b2[c] = dr[c];
    }

    Tensor dz1({gh});
    for (size_t h = 0; h < gh; ++h) {
        double acc = 0.0;
        for (size_t c = 0; c < channels; ++c) acc += dr[c] * gate_W2.at(c, h);
        dz1[h] = t.z1[h] > 0.0 ? acc : 0.0;
    }
    for (size_t h = 0; h < gh; ++h) {
        for (size_t u = 0; u < cu; ++u) g_gate_W1.at(h, u) = dz1[h] * t.u[u];
        g_gate_b1[h] = dz1[h];
    }

    Tensor dzu({cu});
    for (size_t u = 0; u < cu; ++u) {
        double acc = 0.0;
        for (size_t h = 0; h < gh; ++h) acc += dz1[h] * gate_W1.at(h, u);
        dzu[u] = t.zu[u] > 0.0 ? acc : 0.0;
    }
    const size_t c_in = t.gap.numel();
    for (size_t u = 0; u < cu; ++u) {
        for (size_t c = 0; c < c_in; ++c) g_unify_W.at(u, c) = dzu[u] * t.gap[c];
        g_unify_b[u] = dzu[u];
    }
}

}  // namespace

std::map<std::string, Tensor> bgrf_stage_loss_gradients(const FeatureVolume& v_vol,
                                                        const FeatureVolume& p_vol,
                                                        const BgrfStageWeights& w,
                                                        GateMode mode) {
    check_same_shape(v_vol, p_vol);
    const StageTrace t = trace_stage(v_vol, p_vol, w, mode);
    const FeatureVolume s = weighted_sum(v_vol, p_vol, t.a_v, t.a_p);

    const size_t channels = size_t(v_vol.channels);
    const size_t g = size_t(v_vol.g);
    const size_t cells = g * g * g;
    const Tensor& kernel = *w.refine_K;
    const size_t k = kernel.dim(2);  // refine kernels are 3^3, stride 1, pad 1
    const long pad = 1;

    // dL/dout = 1 everywhere; out = S + conv(S).
    // refine bias: each output cell contributes 1.
    Tensor g_refine_b({channels});
    for (size_t o = 0; o < channels; ++o) g_refine_b[o] = double(cells);

    // refine kernel: sum of the padded S values each tap sees.
    Tensor g_refine_K(kernel.shape());
    auto s_at = [&](size_t c, long z, long y, long x) -> double {
        if (z < 0 || y < 0 || x < 0 || z >= long(g) || y >= long(g) || x >= long(g)) return 0.0;
        return s.data[(c * g + size_t(z)) * g * g + size_t(y) * g + size_t(x)];
    };
    for (size_t c = 0; c < channels; ++c) {
        for (size_t dz = 0; dz < k; ++dz) {
            for (size_t dy = 0; dy < k; ++dy) {
                for (size_t dx = 0; dx < k; ++dx) {
                    double acc = 0.0;
                    for (long z = 0; z < long(g); ++z)
                        for (long y = 0; y < long(g); ++y)
                            for (long x = 0; x < long(g); ++x)
                                acc += s_at(c, z - pad + long(dz), y - pad + long(dy),
                                            x - pad + long(dx));
                    for (size_t o = 0; o < channels; ++o) {
                        g_refine_K[(((o * channels + c) * k + dz) * k + dy) * k + dx] = acc;
                    }
                }
            }
        }
    }

    // dL/dS = 1 (residual) + transposed-conv of ones: for channel c each
    // position s receives sum_o K[o,c,d] over taps that map onto it.
    std::vector<double> ksum(channels * k * k * k, 0.0);
    for (size_t o = 0; o < channels; ++o) {
        for (size_t c = 0; c < channels; ++c) {
            for (size_t d = 0; d < k * k * k; ++d) {
                ksum[c * k * k * k + d] += kernel[(o * channels + c) * k * k * k + d];
            }
        }
    }
    std::vector<double> g_s(channels * cells, 1.0);
    for (size_t c = 0; c < channels; ++c) {
        for (long z = 0; z < long(g); ++z) {
            for (long y = 0; y < long(g); ++y) {
                for (long x = 0; x < long(g); ++x) {
                    for (size_t dz = 0; dz < k; ++dz) {
                        const long tz = z - pad + long(dz);
                        if (tz < 0 || tz >= long(g)) continue;
                        for (size_t dy = 0; dy < k; ++dy) {
                            const long ty = y - pad + long(dy);
                            if (ty < 0 || ty >= long(g)) continue;
                            for (size_t dx = 0; dx < k; ++dx) {
                                const long tx = x - pad + long(dx);
                                if (tx < 0 || tx >= long(g)) continue;
                                g_s[(c * g + size_t(tz)) * g * g + size_t(ty) * g + size_t(tx)] +=
                                    ksum[((c * k + dz) * k + dy) * k + dx];
                            }
                        }
                    }
                }
            }
        }
    }

    // dL/da_v[c] = sum_s g_s[c,s] * v[c,s], likewise for p.
    Tensor gv_dot({channels}), gp_dot({channels});
    for (size_t c = 0; c < channels; ++c) {
        double av = 0.0, ap = 0.0;
        const double* gs = g_s.data() + c * cells;
        const double* vc = v_vol.data.data() + c * cells;
        const double* pc = p_vol.data.data() + c * cells;
        for (size_t i = 0; i < cells; ++i) {
            av += gs[i] * vc[i];
            ap += gs[i] * pc[i];
        }
        gv_dot[c] = av;
        gp_dot[c] = ap;
    }

    Tensor dr_v({channels}), dr_p({channels});
    for (size_t c = 0; c < channels; ++c) {
        if (mode == GateMode::independent_sigmoid) {
            dr_v[c] = gv_dot[c] * t.a_v[c] * (1.0 - t.a_v[c]);
            dr_p[c] = gp_dot[c] * t.a_p[c] * (1.0 - t.a_p[c]);
        } else {
            // a_v = softmax(r_v, r_p): da_v/dr_v = a_v a_p = -da_v/dr_p.
            dr_v[c] = (gv_dot[c] - gp_dot[c]) * t.a_v[c] * t.a_p[c];
            dr_p[c] = (gp_dot[c] - gv_dot[c]) * t.a_v[c] * t.a_p[c];
        }
    }

    std::map<std::string, Tensor> grads;
    grads.emplace("refine.K", std::move(g_refine_K));
    grads.emplace("refine.b", std::move(g_refine_b));

    auto alloc_branch = [&](const char* name, const BranchTrace& trace, const Tensor& dr,
                            const Tensor& gate_W1, const Tensor& gate_W2,
                            const Tensor& unify_W) {
        const std::string base(name);
        Tensor g_unify_W(unify_W.shape());
        Tensor g_unify_b({trace.u.numel()});
        Tensor g_gate_W1(gate_W1.shape());
        Tensor g_gate_b1({trace.h.numel()});
        Tensor g_gate_W2(gate_W2.shape());
        Tensor g_gate_b2({channels});
        branch_backward(trace, dr, gate_W1, gate_W2, g_unify_W, g_unify_b, g_gate_W1, g_gate_b1,
                        g_gate_W2, g_gate_b2);
        grads.emplace("unify_" + base + ".W", std::move(g_unify_W));
        grads.emplace("unify_" + base + ".b", std::move(g_unify_b));
        grads.emplace("gate_" + base + ".W1", std::move(g_gate_W1));
        grads.emplace("gate_" + base + ".b1", std::move(g_gate_b1));
        grads.emplace("gate_" + base + ".W2", std::move(g_gate_W2));
        grads.emplace("gate_" + base + ".b2", std::move(g_gate_b2));
    };
    alloc_branch("v", t.v, dr_v, *w.gate_v_W1, *w.gate_v_W2, *w.unify_v_W);
    alloc_branch("p", t.p, dr_p, *w.gate_p_W1, *w.gate_p_W2, *w.unify_p_W);
    return grads;
}

std::vector<TensorSpec> bgrf_manifest(int c, int cu, int c_map) {
    if (cu <= 0) cu = c;
    const auto cc = size_t(c), cuc = size_t(cu);
    std::vector<TensorSpec> manifest;
    for (int s = 1; s <= 3; ++s) {
        const std::string p = stage_prefix(s);
        for (const char* branch : {"v", "p"}) {
            const std::string b(branch);
            manifest.push_back({p + "unify_" + b + ".W", {cuc, cc}});
            manifest.push_back({p + "unify_" + b + ".b", {cuc}});
            manifest.push_back({p + "gate_" + b + ".W1", {cuc, cuc}});
            manifest.push_back({p + "gate_" + b + ".b1", {cuc}});
            manifest.push_back({p + "gate_" + b + ".W2", {cc, cuc}});
            manifest.push_back({p + "gate_" + b + ".b2", {cc}});
        }
        manifest.push_back({p + "refine.K", {cc, cc, 3, 3, 3}});
        manifest.push_back({p + "refine.b", {cc}});
    }
    if (c_map != c) {
        manifest.push_back({"bgrf.adapt_v.W", {cc, size_t(c_map)}});
        manifest.push_back({"bgrf.adapt_v.b", {cc}});
    }
    return manifest;
}

}  // namespace roikit
