#include "roikit/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "roikit/geometry.hpp"

namespace roikit::ref {

Tensor affine_naive(const Tensor& W, const Tensor& b, const Tensor& x) {
    const size_t out_dim = W.dim(0);
    const size_t in_dim = W.dim(1);
    std::vector<size_t> shape = x.shape();
    shape.back() = out_dim;
    Tensor y(shape);
    const size_t rows = x.numel() / in_dim;
    for (size_t r = 0; r < rows; ++r) {
        for (size_t o = 0; o < out_dim; ++o) {
            double acc = b[o];
            for (size_t i = 0; i < in_dim; ++i) acc += W[o * in_dim + i] * x[r * in_dim + i];
            y[r * out_dim + o] = acc;
        }
    }
    return y;
}

Tensor gap_naive(const Tensor& v) {
    const size_t channels = v.dim(0);
    const size_t d = v.dim(1), h = v.dim(2), w = v.dim(3);
    Tensor out({channels});
    for (size_t c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (size_t z = 0; z < d; ++z)
            for (size_t y = 0; y < h; ++y)
                for (size_t x = 0; x < w; ++x) acc += v[((c * d + z) * h + y) * w + x];
        out[c] = acc / double(d * h * w);
    }
    return out;
}

Tensor conv3d_naive(const Tensor& kernel, const Tensor& bias, const Tensor& v, int stride,
                    int padding) {
    const long c_out = long(kernel.dim(0));
    const long c_in = long(kernel.dim(1));
    const long k = long(kernel.dim(2));
    const long in_d = long(v.dim(1)), in_h = long(v.dim(2)), in_w = long(v.dim(3));
    const long out_d = (in_d + 2 * padding - k) / stride + 1;
    const long out_h = (in_h + 2 * padding - k) / stride + 1;
    const long out_w = (in_w + 2 * padding - k) / stride + 1;

    Tensor out({size_t(c_out), size_t(out_d), size_t(out_h), size_t(out_w)});
    for (long co = 0; co < c_out; ++co) {
        for (long oz = 0; oz < out_d; ++oz) {
            for (long oy = 0; oy < out_h; ++oy) {
                for (long ox = 0; ox < out_w; ++ox) {
                    double acc = bias[size_t(co)];
                    for (long ci = 0; ci < c_in; ++ci) {
                        for (long dz = 0; dz < k; ++dz) {
                            for (long dy = 0; dy < k; ++dy) {
                                for (long dx = 0; dx < k; ++dx) {
                                    const long z = oz * stride - padding + dz;
                                    const long y = oy * stride - padding + dy;
                                    const long x = ox * stride - padding + dx;
                                    if (z < 0 || y < 0 || x < 0 || z >= in_d || y >= in_h ||
                                        x >= in_w) {
                                        continue;
                                    }
                                    acc += kernel[size_t((((co * c_in + ci) * k + dz) * k + dy) *
                                                         k + dx)] *
                                           v[size_t(((ci * in_d + z) * in_h + y) * in_w + x)];
                                }
                            }
                        }
                    }
                    out[size_t(((co * out_d + oz) * out_h + oy) * out_w + ox)] = acc;
                }
            }
        }
    }
    return out;
}

Tensor pointgfe_stage_naive(const Tensor& point_feats, const Tensor& offsets,
                            const GfeStageWeights& w) {
    const size_t n = point_feats.dim(0);
    const size_t c_in = point_feats.dim(1);
    const size_t k = offsets.dim(1);
    const size_t hidden = w.W1->dim(0);
    const size_t c_out = w.W2->dim(0);

    Tensor out({n, c_out});
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> best(c_out, -std::numeric_limits<double>::infinity());
        for (size_t j = 0; j < k; ++j) {
            std::vector<double> in(c_in + 3);
            for (size_t f = 0; f < c_in; ++f) in[f] = point_feats[i * c_in + f];
            for (size_t a = 0; a < 3; ++a) in[c_in + a] = offsets[(i * k + j) * 3 + a];
            std::vector<double> hid(hidden);
            for (size_t hh = 0; hh < hidden; ++hh) {
                double acc = (*w.b1)[hh];
                for (size_t f = 0; f < c_in + 3; ++f) acc += (*w.W1)[hh * (c_in + 3) + f] * in[f];
                hid[hh] = std::max(acc, 0.0);
            }
            for (size_t o = 0; o < c_out; ++o) {
                double acc = (*w.b2)[o];
                for (size_t hh = 0; hh < hidden; ++hh) acc += (*w.W2)[o * hidden + hh] * hid[hh];
                best[o] = std::max(best[o], std::max(acc, 0.0));
            }
        }
        for (size_t o = 0; o < c_out; ++o) out[i * c_out + o] = best[o];
    }
    return out;
}

std::vector<VoxelMean> voxel_means_naive(std::span<const Point5> points, const GridSpec& spec) {
    using Key = std::tuple<int, int, int>;
    std::map<Key, std::vector<size_t>> groups;
    for (size_t i = 0; i < points.size(); ++i) {
        Key key;
        bool inside = true;
        int idx[3];
        const Vec3 pos = points[i].position();
        for (int a = 0; a < 3; ++a) {
            const double f = std::floor((pos[a] - spec.origin[a]) / spec.voxel_size[a]);
            if (f < 0.0 || f >= double(spec.extent[a])) {
                inside = false;
                break;
            }
            idx[a] = int(f);
        }
        if (!inside) continue;
        key = {idx[0], idx[1], idx[2]};
        groups[key].push_back(i);
    }

    std::vector<VoxelMean> out;
    for (const auto& [key, members] : groups) {
        VoxelMean vm;
        vm.index = Vec3i(std::get<0>(key), std::get<1>(key), std::get<2>(key));
        vm.member_count = members.size();
        vm.feature.assign(5, 0.0);
        for (size_t i : members) {
            vm.feature[0] += points[i].x;
            vm.feature[1] += points[i].y;
            vm.feature[2] += points[i].z;
            vm.feature[3] += points[i].r;
            vm.feature[4] += points[i].d_da;
        }
        for (double& f : vm.feature) f /= double(members.size());
        out.push_back(std::move(vm));
    }
    return out;
}

FeatureVolume aware_pool_naive(std::span<const Vec3> canonical_positions,
                               const Tensor& embeddings, const Vec3& box_dims, int m) {
    const size_t channels = embeddings.dim(1);
    FeatureVolume vol = FeatureVolume::zeros(VolumeTag::point_path, int(channels), m);
    for (int iz = 0; iz < m; ++iz) {
        for (int iy = 0; iy < m; ++iy) {
            for (int ix = 0; ix < m; ++ix) {
                // Gather every point whose (clamped) sub-voxel is this cell.
                std::vector<size_t> members;
                for (size_t i = 0; i < canonical_positions.size(); ++i) {
                    const Vec3& p = canonical_positions[i];
                    int cell[3];
                    const double step[3] = {box_dims.x() / m, box_dims.y() / m, box_dims.z() / m};
                    cell[0] = int(std::floor((p.x() + box_dims.x() / 2.0) / step[0]));
                    cell[1] = int(std::floor((p.y() + box_dims.y() / 2.0) / step[1]));
                    cell[2] = int(std::floor((p.z() + box_dims.z() / 2.0) / step[2]));
                    for (int a = 0; a < 3; ++a) cell[a] = std::min(std::max(cell[a], 0), m - 1);
                    if (cell[0] == ix && cell[1] == iy && cell[2] == iz) members.push_back(i);
                }
                if (members.empty()) continue;
                for (size_t c = 0; c < channels; ++c) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (size_t i : members) best = std::max(best, embeddings[i * channels + c]);
                    vol.at(int(c), iz, iy, ix) = best;
                }
            }
        }
    }
    return vol;
}

FeatureVolume grid_pool_naive(const SparseVoxelMap& map, const Box3D& box,
                              const RoiPoolConfig& cfg) {
    const int channels = int(map.channels());
    FeatureVolume vol = FeatureVolume::zeros(VolumeTag::voxel_path, channels, cfg.n);
    const auto grid = roi_grid_points(box, cfg.n);
    const double r2 = cfg.grid_query_radius * cfg.grid_query_radius;

    for (int iz = 0; iz < cfg.n; ++iz) {
        for (int iy = 0; iy < cfg.n; ++iy) {
            for (int ix = 0; ix < cfg.n; ++ix) {
                const Vec3& gp = grid[size_t((iz * cfg.n + iy) * cfg.n + ix)];
                std::vector<size_t> found;
                for (size_t vi = 0; vi < map.entries().size(); ++vi) {
                    if ((map.entries()[vi].center - gp).squaredNorm() <= r2) {
                        found.push_back(vi);
                        if (found.size() == size_t(cfg.grid_query_k)) break;
                    }
                }
                if (found.empty()) continue;
                for (int c = 0; c < channels; ++c) {
                    double acc = 0.0;
                    for (size_t vi : found) acc += map.entries()[vi].feature[size_t(c)];
                    vol.at(c, iz, iy, ix) = acc / double(found.size());
                }
            }
        }
    }
    return vol;
}

FeatureVolume gated_stage_naive(const FeatureVolume& v_vol, const FeatureVolume& p_vol,
                                const BgrfStageWeights& w, GateMode mode) {
    const size_t channels = size_t(v_vol.channels);
    const size_t g = size_t(v_vol.g);
    const size_t cells = g * g * g;

    auto branch_logits = [&](const FeatureVolume& vol, const Tensor& uW, const Tensor& ub,
                             const Tensor& gW1, const Tensor& gb1, const Tensor& gW2,
                             const Tensor& gb2) {
        std::vector<double> gap(channels, 0.0);
        for (size_t c = 0; c < channels; ++c) {
            for (size_t i = 0; i < cells; ++i) gap[c] += vol.data[c * cells + i];
            gap[c] /= double(cells);
        }
        const size_t cu = uW.dim(0);
        std::vector<double> u(cu);
        for (size_t o = 0; o < cu; ++o) {
            double acc = ub[o];
            for (size_t c = 0; c < channels; ++c) acc += uW[o * channels + c] * gap[c];
            u[o] = std::max(acc, 0.0);
        }
        const size_t gh = gW1.dim(0);
        std::vector<double> h(gh);
        for (size_t o = 0; o < gh; ++o) {
            double acc = gb1[o];
            for (size_t i = 0; i < cu; ++i) acc += gW1[o * cu + i] * u[i];
            h[o] = std::max(acc, 0.0);
        }
        std::vector<double> r(channels);
        for (size_t o = 0; o < channels; ++o) {
            double acc = gb2[o];
            for (size_t i = 0; i < gh; ++i) acc += gW2[o * gh + i] * h[i];
            r[o] = acc;
        }
        return r;
    };

    const auto rv = branch_logits(v_vol, *w.unify_v_W, *w.unify_v_b, *w.gate_v_W1, *w.gate_v_b1,
                                  *w.gate_v_W2, *w.gate_v_b2);
    const auto rp = branch_logits(p_vol, *w.unify_p_W, *w.unify_p_b, *w.gate_p_W1, *w.gate_p_b1,
                                  *w.gate_p_W2, *w.gate_p_b2);

    std::vector<double> av(channels), ap(channels);
    for (size_t c = 0; c < channels; ++c) {
        if (mode == GateMode::independent_sigmoid) {
            av[c] = 1.0 / (1.0 + std::exp(-rv[c]));
            ap[c] = 1.0 / (1.0 + std::exp(-rp[c]));
        } else {
            const double mx = std::max(rv[c], rp[c]);
            const double ev = std::exp(rv[c] - mx), ep = std::exp(rp[c] - mx);
            av[c] = ev / (ev + ep);
            ap[c] = ep / (ev + ep);
        }
    }

    FeatureVolume s = FeatureVolume::zeros(VolumeTag::fused, v_vol.channels, v_vol.g);
    for (size_t c = 0; c < channels; ++c) {
        for (size_t i = 0; i < cells; ++i) {
            s.data[c * cells + i] = av[c] * v_vol.data[c * cells + i] +
                                    ap[c] * p_vol.data[c * cells + i];
        }
    }

    const Tensor refined = conv3d_naive(*w.refine_K, *w.refine_b, s.as_tensor(), 1, 1);
    FeatureVolume out = s;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += refined[i];
    return out;
}

}  // namespace roikit::ref
