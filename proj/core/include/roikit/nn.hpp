#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "roikit/tensor.hpp"

namespace roikit::nn {

// y = x W' + b over the last axis. W is [out, in], b is [out],
// x is [..., in]; the result is [..., out]. Accumulation in double.
Tensor affine_forward(const Tensor& W, const Tensor& b, const Tensor& x);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// Per-channel mean over all spatial cells: [C, D, H, W] -> [C].
Tensor global_avg_pool(const Tensor& v);

// Standard cross-correlation forward. kernel is [Cout, Cin, k, k, k],
// bias [Cout], v [Cin, D, H, W]; cells outside the input are zeros.
// Output spatial dims (D + 2*padding - k) / stride + 1 must be
// integral and positive, else ShapeError.
Tensor conv3d_forward(const Tensor& kernel, const Tensor& bias, const Tensor& v, int stride,
                      int padding);

// Central-difference check of a hand-derived gradient:
// compares (f(x + eps*e_i) - f(x - eps*e_i)) / (2*eps) against
// analytic_grad[i] and returns max_i |diff_i| / (|g_i| + 1e-8).
double finite_diff_check(const std::function<double(const Tensor&)>& f,
                         const Tensor& analytic_grad, const Tensor& x, double eps);

// splitmix64 step; the documented PRNG behind seeded_init.
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
//   z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31
uint64_t splitmix64_next(uint64_t& state);

// 64-bit FNV-1a over the bytes of `s`; combines a tensor name into its
// stream seed.
uint64_t fnv1a64(std::string_view s);

// Deterministic uniform initialization in [-s, s] with s = 1/sqrt(fan_in),
// fan_in being the product of all dims but the first (the sole dim for
// vectors). Each tensor draws from its own splitmix64 stream seeded with
// seed ^ fnv1a64(name): values depend only on (seed, name, shape), never
// on manifest order. Doubles u in [0,1) come from (x >> 11) * 2^-53 and
// every value is quantized to f32 so bundles round-trip through files
// bit-exactly. Identical across platforms.
WeightBundle seeded_init(uint64_t seed, std::span<const TensorSpec> manifest);

}  // namespace roikit::nn
