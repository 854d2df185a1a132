#include "roikit/roi_pooling.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "roikit/geometry.hpp"

namespace roikit {

const char* to_string(VolumeTag tag) {
    switch (tag) {
        case VolumeTag::voxel_path: return "voxel_path";
        case VolumeTag::point_path: return "point_path";
        case VolumeTag::fused: return "fused";
    }
    return "fused";
}

VolumeTag volume_tag_from_string(const std::string& s) {
    if (s == "voxel_path") return VolumeTag::voxel_path;
    if (s == "point_path") return VolumeTag::point_path;
    if (s == "fused") return VolumeTag::fused;
    throw FormatError("unknown volume tag: " + s);
}

FeatureVolume FeatureVolume::zeros(VolumeTag tag, int channels, int g) {
    FeatureVolume v;
    v.tag = tag;
    v.channels = channels;
    v.g = g;
    v.data.assign(size_t(channels) * size_t(g) * size_t(g) * size_t(g), 0.0);
    return v;
}

Tensor FeatureVolume::as_tensor() const {
    return Tensor({size_t(channels), size_t(g), size_t(g), size_t(g)}, data);
}

FeatureVolume FeatureVolume::from_tensor(VolumeTag tag, const Tensor& t) {
    if (t.ndim() != 4 || t.dim(1) != t.dim(2) || t.dim(1) != t.dim(3)) {
        throw ShapeError("FeatureVolume requires a [C, g, g, g] tensor");
    }
    FeatureVolume v;
    v.tag = tag;
    v.channels = int(t.dim(0));
    v.g = int(t.dim(1));
    v.data = t.values();
    return v;
}

void FeatureVolume::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << "FVOL1 " << to_string(tag) << " " << channels << " " << g << "\n";
    for (double v : data) {
        const float f = float(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof(float));
    }
    if (!out) throw FormatError("write failed on " + path.string());
}

FeatureVolume FeatureVolume::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string magic, tag_str;
    int channels = 0, g = 0;
    in >> magic >> tag_str >> channels >> g;
    if (!in || magic != "FVOL1") throw FormatError(path.string() + ": bad volume header");
    in.get();  // the newline after the header
    if (channels < 0 || g < 0) throw FormatError(path.string() + ": negative dimensions");
    FeatureVolume v = zeros(volume_tag_from_string(tag_str), channels, g);
    for (double& d : v.data) {
        float f = 0.0f;
        in.read(reinterpret_cast<char*>(&f), sizeof(float));
        if (!in) throw FormatError(path.string() + ": truncated payload");
        d = double(f);
    }
    return v;
}

void RoiPoolConfig::validate() const {
    if (n < 1) throw ShapeError("grid resolution n must be >= 1");
    if (m != 2 * n) throw ShapeError("sub-voxel resolution m must equal 2n");
    if (!(grid_query_radius > 0.0)) throw ShapeError("grid query radius must be positive");
    if (grid_query_k < 1) throw ShapeError("grid query k must be >= 1");
    if (margin < 0.0) throw ShapeError("margin must be >= 0");
}

std::vector<Vec3> roi_grid_points(const Box3D& box, int n) {
    const Mat3 rot = rot_z(box.yaw);
    std::vector<Vec3> points;
    points.reserve(size_t(n) * size_t(n) * size_t(n));
    for (int iz = 0; iz < n; ++iz) {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const Vec3 local(((double(ix) + 0.5) / n - 0.5) * box.l,
                                 ((double(iy) + 0.5) / n - 0.5) * box.w,
                                 ((double(iz) + 0.5) / n - 0.5) * box.h);
                points.push_back(box.center + rot * local);
            }
        }
    }
    return points;
}

FeatureVolume roi_grid_pool(const SparseVoxelMap& map, const Box3D& box,
                            const RoiPoolConfig& cfg) {
    const GridHashIndex index(map.centers(), cfg.grid_query_radius);
    return roi_grid_pool(map, index, box, cfg);
}

FeatureVolume roi_grid_pool(const SparseVoxelMap& map, const GridHashIndex& voxel_index,
                            const Box3D& box, const RoiPoolConfig& cfg) {
    cfg.validate();
    const int channels = int(map.channels());
    FeatureVolume vol = FeatureVolume::zeros(VolumeTag::voxel_path, channels, cfg.n);
    if (map.empty()) return vol;

    const auto grid = roi_grid_points(box, cfg.n);
    const size_t cells = grid.size();
    for (size_t cell = 0; cell < cells; ++cell) {
        const auto found = voxel_index.radius_neighbors(grid[cell], cfg.grid_query_radius,
                                                        size_t(cfg.grid_query_k));
        if (found.empty()) continue;
        double* dst_base = vol.data.data();
        for (int c = 0; c < channels; ++c) {
            double acc = 0.0;
            for (int32_t vi : found) acc += map.entries()[size_t(vi)].feature[size_t(c)];
            dst_base[size_t(c) * cells + cell] = acc / double(found.size());
        }
    }
    return vol;
}

FeatureVolume roi_aware_pool(std::span<const Vec3> canonical_positions, const Tensor& embeddings,
                             const Vec3& box_dims, int m) {
    if (m < 1) throw ShapeError("roi_aware_pool: m must be >= 1");
    if (embeddings.ndim() != 2 || embeddings.dim(0) != canonical_positions.size()) {
        throw ShapeError("roi_aware_pool: embeddings must be [N, C] with N matching positions");
    }
    const size_t channels = embeddings.dim(1);
    FeatureVolume vol = FeatureVolume::zeros(VolumeTag::point_path, int(channels), m);
    const size_t cells = size_t(m) * size_t(m) * size_t(m);

    std::vector<bool> occupied(cells, false);
    for (size_t i = 0; i < canonical_positions.size(); ++i) {
        const Vec3& p = canonical_positions[i];
        int idx[3];
        for (int a = 0; a < 3; ++a) {
            const double cell_size = box_dims[a] / double(m);
            int v = int(std::floor((p[a] + box_dims[a] / 2.0) / cell_size));
            idx[a] = std::clamp(v, 0, m - 1);  // margin points clamp to boundary cells
        }
        const size_t cell = (size_t(idx[2]) * size_t(m) + size_t(idx[1])) * size_t(m) +
                            size_t(idx[0]);
        const double* emb = embeddings.data() + i * channels;
        if (!occupied[cell]) {
            occupied[cell] = true;
            for (size_t c = 0; c < channels; ++c) vol.data[c * cells + cell] = emb[c];
        } else {
            for (size_t c = 0; c < channels; ++c) {
                double& dst = vol.data[c * cells + cell];
                if (emb[c] > dst) dst = emb[c];
            }
        }
    }
    return vol;
}

FeatureVolume downsample_volume(const FeatureVolume& v, const Tensor& kernel,
                                const Tensor& bias) {
    if (v.g % 2 != 0) throw ShapeError("downsample_volume: resolution must be even");
    if (kernel.ndim() != 5 || kernel.dim(2) != 2) {
        throw ShapeError("downsample_volume: kernel must be [Cout, Cin, 2, 2, 2]");
    }
    const Tensor out = nn::relu(nn::conv3d_forward(kernel, bias, v.as_tensor(), 2, 0));
    return FeatureVolume::from_tensor(v.tag, out);
}

std::vector<TensorSpec> downsample_manifest(int channels) {
    const auto c = size_t(channels);
    return {{"down.K", {c, c, 2, 2, 2}}, {"down.b", {c}}};
}

RoiExtractor::RoiExtractor(std::span<const Point5> points, const SparseVoxelMap& map,
                           const WeightBundle& bundle, const PointGfeConfig& gfe_cfg,
                           const RoiPoolConfig& pool_cfg)
    : points_(points), map_(map), bundle_(bundle), gfe_cfg_(gfe_cfg), pool_cfg_(pool_cfg) {
    gfe_cfg_.validate();
    pool_cfg_.validate();
    positions_.reserve(points.size());
    for (const Point5& p : points) positions_.push_back(p.position());
    voxel_index_ = GridHashIndex(map.centers(), pool_cfg.grid_query_radius);
}

RoiFeaturePair RoiExtractor::extract(const Box3D& box) const {
    RoiFeaturePair pair;
    pair.voxel_volume = roi_grid_pool(map_, voxel_index_, box, pool_cfg_);

    const auto inside = points_in_box(positions_, box, pool_cfg_.margin);
    pair.point_count = inside.size();
    if (inside.empty()) {
        pair.point_volume =
            FeatureVolume::zeros(VolumeTag::point_path, gfe_cfg_.total_width(), pool_cfg_.n);
        return pair;
    }

    std::vector<Point5> cropped;
    std::vector<Vec3> canonical;
    cropped.reserve(inside.size());
    canonical.reserve(inside.size());
    for (size_t idx : inside) {
        const Vec3 local = canonicalize_point(positions_[idx], box);
        canonical.push_back(local);
        cropped.push_back({local.x(), local.y(), local.z(), points_[idx].r, points_[idx].d_da});
    }

    const Tensor embedding = pointgfe_stack(cropped, gfe_cfg_, bundle_);
    const FeatureVolume pooled = roi_aware_pool(canonical, embedding, box.dims(), pool_cfg_.m);
    pair.point_volume = downsample_volume(pooled, bundle_.at("down.K"), bundle_.at("down.b"));
    return pair;
}

std::vector<RoiFeaturePair> extract_roi_features(std::span<const Point5> points,
                                                 const SparseVoxelMap& map,
                                                 std::span<const Box3D> boxes,
                                                 const WeightBundle& bundle,
                                                 const PointGfeConfig& gfe_cfg,
                                                 const RoiPoolConfig& pool_cfg) {
    const RoiExtractor extractor(points, map, bundle, gfe_cfg, pool_cfg);
    std::vector<RoiFeaturePair> out;
    out.reserve(boxes.size());
    for (const Box3D& box : boxes) out.push_back(extractor.extract(box));
    return out;
}

}  // namespace roikit
