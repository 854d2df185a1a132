#include "roikit/pointgfe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace roikit {
namespace {

std::string stage_prefix(int stage) { return "gfe.stage" + std::to_string(stage) + "."; }

}  // namespace

void PointGfeConfig::validate() const {
    if (!(radius > 0.0)) throw ShapeError("pointgfe radius must be positive");
    if (k < 1) throw ShapeError("pointgfe k must be >= 1");
    for (int wdt : stage_widths) {
        if (wdt < 1) throw ShapeError("pointgfe stage widths must be >= 1");
    }
}

GfeStageWeights GfeStageWeights::from_bundle(const WeightBundle& bundle, int stage) {
    const std::string p = stage_prefix(stage);
    GfeStageWeights w;
    w.W1 = &bundle.at(p + "W1");
    w.b1 = &bundle.at(p + "b1");
    w.W2 = &bundle.at(p + "W2");
    w.b2 = &bundle.at(p + "b2");
    return w;
}

Tensor encode_local_geometry(std::span<const Vec3> positions, std::span<const int32_t> neighbors,
                             int k) {
    if (k < 1) throw ShapeError("encode_local_geometry: k must be >= 1");
    if (neighbors.size() != positions.size() * size_t(k)) {
        throw ShapeError("encode_local_geometry: neighbor table must be N x k");
    }
    const size_t n = positions.size();
    Tensor offsets({n, size_t(k), 3});
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < size_t(k); ++j) {
            const int32_t nb = neighbors[i * size_t(k) + j];
            if (nb < 0 || size_t(nb) >= n) {
                throw IndexError("neighbor index " + std::to_string(nb) + " out of range");
            }
            const Vec3 d = positions[size_t(nb)] - positions[i];
            double* row = offsets.data() + (i * size_t(k) + j) * 3;
            row[0] = d.x();
            row[1] = d.y();
            row[2] = d.z();
        }
    }
    return offsets;
}

Tensor pointgfe_stage(const Tensor& point_feats, const Tensor& offsets, const GfeStageWeights& w) {
    if (point_feats.ndim() != 2) throw ShapeError("pointgfe_stage: features must be [N, Cin]");
    if (offsets.ndim() != 3 || offsets.dim(2) != 3) {
        throw ShapeError("pointgfe_stage: offsets must be [N, k, 3]");
    }
    if (offsets.dim(0) != point_feats.dim(0)) {
        throw ShapeError("pointgfe_stage: offsets and features disagree on N");
    }
    if (offsets.dim(1) < 1) throw ShapeError("pointgfe_stage: need at least one neighbor slot");
    const size_t n = point_feats.dim(0);
    const size_t c_in = point_feats.dim(1);
    const size_t k = offsets.dim(1);

    const Tensor& W1 = *w.W1;
    const Tensor& b1 = *w.b1;
    const Tensor& W2 = *w.W2;
    const Tensor& b2 = *w.b2;
    if (W1.ndim() != 2 || W1.dim(1) != c_in + 3) {
        throw ShapeError("pointgfe_stage: W1 columns must equal Cin + 3");
    }
    const size_t hidden = W1.dim(0);
    if (b1.ndim() != 1 || b1.dim(0) != hidden) throw ShapeError("pointgfe_stage: bad b1");
    if (W2.ndim() != 2 || W2.dim(1) != hidden) throw ShapeError("pointgfe_stage: bad W2");
    const size_t c_out = W2.dim(0);
    if (b2.ndim() != 1 || b2.dim(0) != c_out) throw ShapeError("pointgfe_stage: bad b2");

    Tensor out({n, c_out});
    std::vector<double> hidden_buf(hidden);
    std::vector<double> slot_out(c_out);
    for (size_t i = 0; i < n; ++i) {
        const double* feats = point_feats.data() + i * c_in;
        double* out_row = out.data() + i * c_out;
        std::fill(out_row, out_row + c_out, -std::numeric_limits<double>::infinity());
        for (size_t j = 0; j < k; ++j) {
            const double* off = offsets.data() + (i * k + j) * 3;
            // hidden = relu(W1 . concat(feats, off) + b1)
            for (size_t h = 0; h < hidden; ++h) {
                const double* row = W1.data() + h * (c_in + 3);
                double acc = b1[h];
                for (size_t f = 0; f < c_in; ++f) acc += row[f] * feats[f];
                acc += row[c_in] * off[0] + row[c_in + 1] * off[1] + row[c_in + 2] * off[2];
                hidden_buf[h] = acc > 0.0 ? acc : 0.0;
            }
            // slot = relu(W2 . hidden + b2), then max into the output row
            for (size_t o = 0; o < c_out; ++o) {
                const double* row = W2.data() + o * hidden;
                double acc = b2[o];
                for (size_t h = 0; h < hidden; ++h) acc += row[h] * hidden_buf[h];
                slot_out[o] = acc > 0.0 ? acc : 0.0;
                if (slot_out[o] > out_row[o]) out_row[o] = slot_out[o];
            }
        }
    }
    return out;
}

Tensor pointgfe_stack(std::span<const Point5> points, const PointGfeConfig& config,
                      const WeightBundle& bundle) {
    config.validate();
    const size_t n = points.size();
    const size_t total = size_t(config.total_width());
    if (n == 0) return Tensor({0, total});

    std::vector<Vec3> positions;
    positions.reserve(n);
    for (const Point5& p : points) positions.push_back(p.position());

    const GridHashIndex index(positions, config.radius);
    std::vector<int32_t> neighbors(n * size_t(config.k));
    for (size_t i = 0; i < n; ++i) {
        // A query from an indexed point always finds at least itself.
        const auto nb = index.ball_query(positions[i], config.radius, config.k);
        std::copy(nb.begin(), nb.end(), neighbors.begin() + long(i * size_t(config.k)));
    }
    const Tensor offsets = encode_local_geometry(positions, neighbors, config.k);

    Tensor feats({n, 5});
    for (size_t i = 0; i < n; ++i) {
        double* row = feats.data() + i * 5;
        row[0] = points[i].x;
        row[1] = points[i].y;
        row[2] = points[i].z;
        row[3] = points[i].r;
        row[4] = points[i].d_da;
    }

    std::array<Tensor, 3> stage_out;
    for (int s = 0; s < 3; ++s) {
        const auto w = GfeStageWeights::from_bundle(bundle, s + 1);
        stage_out[size_t(s)] = pointgfe_stage(s == 0 ? feats : stage_out[size_t(s - 1)],
                                              offsets, w);
    }

    Tensor embedding({n, total});
    for (size_t i = 0; i < n; ++i) {
        double* row = embedding.data() + i * total;
        size_t at = 0;
        for (int s = 0; s < 3; ++s) {
            const size_t wdt = stage_out[size_t(s)].dim(1);
            const double* src = stage_out[size_t(s)].data() + i * wdt;
            std::copy(src, src + wdt, row + at);
            at += wdt;
        }
    }
    return embedding;
}

std::vector<TensorSpec> pointgfe_manifest(const PointGfeConfig& config) {
    config.validate();
    std::vector<TensorSpec> manifest;
    int c_in = 5;
    for (int s = 0; s < 3; ++s) {
        const auto hidden = size_t(config.hidden_width(s));
        const auto c_out = size_t(config.stage_widths[size_t(s)]);
        const std::string p = stage_prefix(s + 1);
        manifest.push_back({p + "W1", {hidden, size_t(c_in) + 3}});
        manifest.push_back({p + "b1", {hidden}});
        manifest.push_back({p + "W2", {c_out, hidden}});
        manifest.push_back({p + "b2", {c_out}});
        c_in = int(c_out);
    }
    return manifest;
}

}  // namespace roikit
