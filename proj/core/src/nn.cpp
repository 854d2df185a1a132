#include "roikit/nn.hpp"

#include <cmath>
#include <string>

namespace roikit::nn {

Tensor affine_forward(const Tensor& W, const Tensor& b, const Tensor& x) {
    if (W.ndim() != 2) throw ShapeError("affine_forward: W must be 2-D");
    const size_t out_dim = W.dim(0);
    const size_t in_dim = W.dim(1);
    if (b.ndim() != 1 || b.dim(0) != out_dim) {
        throw ShapeError("affine_forward: bias length must equal W rows");
    }
    if (x.ndim() == 0 || x.shape().back() != in_dim) {
        throw ShapeError("affine_forward: last axis of x (" +
                         std::to_string(x.ndim() ? x.shape().back() : 0) + ") must equal " +
                         std::to_string(in_dim));
    }

    std::vector<size_t> out_shape = x.shape();
    out_shape.back() = out_dim;
    Tensor y(std::move(out_shape));

    const size_t rows = x.numel() / in_dim;
    for (size_t r = 0; r < rows; ++r) {
        const double* xi = x.data() + r * in_dim;
        double* yi = y.data() + r * out_dim;
        for (size_t o = 0; o < out_dim; ++o) {
            const double* wo = W.data() + o * in_dim;
            double acc = b[o];
            for (size_t i = 0; i < in_dim; ++i) acc += wo[i] * xi[i];
            yi[o] = acc;
        }
    }
    return y;
}

Tensor relu(const Tensor& x) {
    Tensor y = x;
    for (size_t i = 0; i < y.numel(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
    return y;
}

Tensor sigmoid(const Tensor& x) {
    Tensor y = x;
    for (size_t i = 0; i < y.numel(); ++i) y[i] = 1.0 / (1.0 + std::exp(-y[i]));
    return y;
}

Tensor global_avg_pool(const Tensor& v) {
    if (v.ndim() != 4) throw ShapeError("global_avg_pool expects [C, D, H, W]");
    const size_t channels = v.dim(0);
    const size_t cells = v.dim(1) * v.dim(2) * v.dim(3);
    if (cells == 0) throw ShapeError("global_avg_pool: empty spatial extent");
    Tensor out({channels});
    for (size_t c = 0; c < channels; ++c) {
        const double* vc = v.data() + c * cells;
        double acc = 0.0;
        for (size_t i = 0; i < cells; ++i) acc += vc[i];
        out[c] = acc / double(cells);
    }
    return out;
}

Tensor conv3d_forward(const Tensor& kernel, const Tensor& bias, const Tensor& v, int stride,
                      int padding) {
    if (kernel.ndim() != 5) throw ShapeError("conv3d kernel must be [Cout, Cin, k, k, k]");
    if (v.ndim() != 4) throw ShapeError("conv3d input must be [Cin, D, H, W]");
    const size_t c_out = kernel.dim(0);
    const size_t c_in = kernel.dim(1);
    const size_t k = kernel.dim(2);
    if (kernel.dim(3) != k || kernel.dim(4) != k) throw ShapeError("conv3d kernel must be cubic");
    if (bias.ndim() != 1 || bias.dim(0) != c_out) {
        throw ShapeError("conv3d bias length must equal Cout");
    }
    if (v.dim(0) != c_in) throw ShapeError("conv3d input channels do not match kernel");
    if (stride < 1) throw ShapeError("conv3d stride must be >= 1");
    if (padding < 0) throw ShapeError("conv3d padding must be >= 0");

    const long in_d = long(v.dim(1)), in_h = long(v.dim(2)), in_w = long(v.dim(3));
    auto out_extent = [&](long in) -> long {
        const long span = in + 2 * padding - long(k);
        if (span < 0 || span % stride != 0) {
            throw ShapeError("conv3d output extent is not integral for input " +
                             std::to_string(in));
        }
        return span / stride + 1;
    };
    const long out_d = out_extent(in_d), out_h = out_extent(in_h), out_w = out_extent(in_w);

    // Zero-padded copy of the input, so the accumulation loops are
    // branch-free.
    const long pd = in_d + 2 * padding, ph = in_h + 2 * padding, pw = in_w + 2 * padding;
    std::vector<double> padded(c_in * size_t(pd) * size_t(ph) * size_t(pw), 0.0);
    for (size_t c = 0; c < c_in; ++c) {
        for (long z = 0; z < in_d; ++z) {
            for (long y = 0; y < in_h; ++y) {
                const double* src = v.data() + ((c * size_t(in_d) + size_t(z)) * size_t(in_h) +
                                                size_t(y)) * size_t(in_w);
                double* dst = padded.data() +
                              ((c * size_t(pd) + size_t(z + padding)) * size_t(ph) +
                               size_t(y + padding)) * size_t(pw) + size_t(padding);
                std::copy(src, src + in_w, dst);
            }
        }
    }

    Tensor out({c_out, size_t(out_d), size_t(out_h), size_t(out_w)});
    for (size_t co = 0; co < c_out; ++co) {
        for (long oz = 0; oz < out_d; ++oz) {
            for (long oy = 0; oy < out_h; ++oy) {
                double* out_row = out.data() + ((co * size_t(out_d) + size_t(oz)) * size_t(out_h) +
                                                size_t(oy)) * size_t(out_w);
                for (long ox = 0; ox < out_w; ++ox) {
                    double acc = bias[co];
                    for (size_t ci = 0; ci < c_in; ++ci) {
                        for (size_t dz = 0; dz < k; ++dz) {
                            const size_t z = size_t(oz * stride) + dz;
                            for (size_t dy = 0; dy < k; ++dy) {
                                const size_t y = size_t(oy * stride) + dy;
                                const double* in_row =
                                    padded.data() + ((ci * size_t(pd) + z) * size_t(ph) + y) *
                                                        size_t(pw) + size_t(ox * stride);
                                const double* k_row =
                                    kernel.data() + (((co * c_in + ci) * k + dz) * k + dy) * k;
                                for (size_t dx = 0; dx < k; ++dx) acc += k_row[dx] * in_row[dx];
                            }
                        }
                    }
                    out_row[ox] = acc;
                }
            }
        }
    }
    return out;
}

double finite_diff_check(const std::function<double(const Tensor&)>& f,
                         const Tensor& analytic_grad, const Tensor& x, double eps) {
    if (!analytic_grad.same_shape(x)) {
        throw ShapeError("finite_diff_check: gradient shape must match x");
    }
    if (!(eps > 0.0)) throw ShapeError("finite_diff_check: eps must be positive");
    double max_rel = 0.0;
    Tensor probe = x;
    for (size_t i = 0; i < x.numel(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + eps;
        const double f_plus = f(probe);
        probe[i] = saved - eps;
        const double f_minus = f(probe);
        probe[i] = saved;
        const double numeric = (f_plus - f_minus) / (2.0 * eps);
        const double rel = std::abs(numeric - analytic_grad[i]) /
                           (std::abs(analytic_grad[i]) + 1e-8);
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

uint64_t splitmix64_next(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

WeightBundle seeded_init(uint64_t seed, std::span<const TensorSpec> manifest) {
    WeightBundle bundle;
    for (const TensorSpec& spec : manifest) {
        size_t fan_in = 1;
        if (spec.shape.size() >= 2) {
            for (size_t i = 1; i < spec.shape.size(); ++i) fan_in *= spec.shape[i];
        } else if (spec.shape.size() == 1) {
            fan_in = spec.shape[0];
        }
        const double scale = 1.0 / std::sqrt(double(fan_in));

        uint64_t state = seed ^ fnv1a64(spec.name);
        Tensor t(spec.shape);
        for (size_t i = 0; i < t.numel(); ++i) {
            const double u = double(splitmix64_next(state) >> 11) * 0x1.0p-53;
            t[i] = double(float((2.0 * u - 1.0) * scale));
        }
        bundle.insert(spec.name, std::move(t));
    }
    return bundle;
}

}  // namespace roikit::nn
