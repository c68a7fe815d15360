#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "porelab/error.hpp"
#include "porelab/tensor.hpp"

namespace porelab {

/// Cubic kernel geometry shared by both convolution flavours.
struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int padding = 0;
};

/// floor((s + 2p - k) / stride) + 1
inline std::int64_t conv_output_extent(std::int64_t s, const ConvGeometry& g) {
  return (s + 2 * g.padding - g.kernel) / g.stride + 1;
}

/// (s - 1) * stride - 2p + k
inline std::int64_t conv_transpose_output_extent(std::int64_t s, const ConvGeometry& g) {
  return (s - 1) * g.stride - 2 * g.padding + g.kernel;
}

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Range [lo, hi) of i in [0, n) such that i * s + off lies in [0, limit).
inline std::pair<std::int64_t, std::int64_t> valid_range(std::int64_t n, std::int64_t s, std::int64_t off,
                                                         std::int64_t limit) {
  const std::int64_t lo = std::max<std::int64_t>(0, -floor_div(off, s));
  const std::int64_t hi = std::min<std::int64_t>(n, floor_div(limit - 1 - off, s) + 1);
  return {lo, std::max(lo, hi)};
}

inline void check_geometry(const ConvGeometry& g) {
  if (g.kernel <= 0 || g.stride <= 0 || g.padding < 0) throw ShapeError("invalid convolution geometry");
}

}  // namespace detail

/// Strided, zero-padded 3D convolution (cross-correlation). Kernels are laid
/// out (out_ch, in_ch, k, k, k).
inline Tensor conv3d(const Tensor& x, std::span<const float> kernels, std::int64_t out_channels,
                     const ConvGeometry& g) {
  detail::check_geometry(g);
  const Shape4& in = x.shape();
  const std::int64_t k = g.kernel, k3 = k * k * k;
  if (static_cast<std::int64_t>(kernels.size()) != out_channels * in.c * k3)
    throw ShapeError("conv3d kernel buffer holds " + std::to_string(kernels.size()) + " values, expected " +
                     std::to_string(out_channels * in.c * k3) + " for input " + in.str());
  if (in.d + 2 * g.padding < k || in.h + 2 * g.padding < k || in.w + 2 * g.padding < k)
    throw ShapeError("conv3d input " + in.str() + " smaller than kernel after padding");
  const Shape4 out{out_channels, conv_output_extent(in.d, g), conv_output_extent(in.h, g), conv_output_extent(in.w, g)};
  Tensor y(out);
  const std::int64_t s = g.stride, p = g.padding;

#pragma omp parallel for schedule(static)
  for (std::int64_t oc = 0; oc < out.c; ++oc) {
    auto dst = y.channel(oc);
    for (std::int64_t ic = 0; ic < in.c; ++ic) {
      const auto src = x.channel(ic);
      const float* kw_base = kernels.data() + (oc * in.c + ic) * k3;
      for (std::int64_t kd = 0; kd < k; ++kd) {
        const auto [z0, z1] = detail::valid_range(out.d, s, kd - p, in.d);
        for (std::int64_t kh = 0; kh < k; ++kh) {
          const auto [y0, y1] = detail::valid_range(out.h, s, kh - p, in.h);
          for (std::int64_t kx = 0; kx < k; ++kx) {
            const float w = kw_base[(kd * k + kh) * k + kx];
            if (w == 0.0f) continue;
            const auto [x0, x1] = detail::valid_range(out.w, s, kx - p, in.w);
            for (std::int64_t oz = z0; oz < z1; ++oz) {
              const std::int64_t iz = oz * s + kd - p;
              for (std::int64_t oy = y0; oy < y1; ++oy) {
                const std::int64_t iy = oy * s + kh - p;
                float* drow = dst.data() + (oz * out.h + oy) * out.w;
                const float* srow = src.data() + (iz * in.h + iy) * in.w;
                const std::int64_t off = kx - p;
                for (std::int64_t ox = x0; ox < x1; ++ox) drow[ox] += w * srow[ox * s + off];
              }
            }
          }
        }
      }
    }
  }
  return y;
}

/// Adjoint of conv3d with the same geometry: scatters every input voxel
/// through the kernel. Kernels are laid out (in_ch, out_ch, k, k, k).
inline Tensor conv_transpose3d(const Tensor& x, std::span<const float> kernels, std::int64_t out_channels,
                               const ConvGeometry& g) {
  detail::check_geometry(g);
  const Shape4& in = x.shape();
  const std::int64_t k = g.kernel, k3 = k * k * k;
  if (static_cast<std::int64_t>(kernels.size()) != in.c * out_channels * k3)
    throw ShapeError("conv_transpose3d kernel buffer holds " + std::to_string(kernels.size()) +
                     " values, expected " + std::to_string(in.c * out_channels * k3) + " for input " + in.str());
  const Shape4 out{out_channels, conv_transpose_output_extent(in.d, g), conv_transpose_output_extent(in.h, g),
                   conv_transpose_output_extent(in.w, g)};
  if (out.d <= 0 || out.h <= 0 || out.w <= 0)
    throw ShapeError("conv_transpose3d output would be empty for input " + in.str());
  Tensor y(out);
  const std::int64_t s = g.stride, p = g.padding;

#pragma omp parallel for schedule(static)
  for (std::int64_t oc = 0; oc < out.c; ++oc) {
    auto dst = y.channel(oc);
    for (std::int64_t ic = 0; ic < in.c; ++ic) {
      const auto src = x.channel(ic);
      const float* kw_base = kernels.data() + (ic * out.c + oc) * k3;
      for (std::int64_t kd = 0; kd < k; ++kd) {
        const auto [z0, z1] = detail::valid_range(in.d, s, kd - p, out.d);
        for (std::int64_t kh = 0; kh < k; ++kh) {
          const auto [y0, y1] = detail::valid_range(in.h, s, kh - p, out.h);
          for (std::int64_t kx = 0; kx < k; ++kx) {
            const float w = kw_base[(kd * k + kh) * k + kx];
            if (w == 0.0f) continue;
            const auto [x0, x1] = detail::valid_range(in.w, s, kx - p, out.w);
            for (std::int64_t iz = z0; iz < z1; ++iz) {
              const std::int64_t oz = iz * s + kd - p;
              for (std::int64_t iy = y0; iy < y1; ++iy) {
                const std::int64_t oy = iy * s + kh - p;
                float* drow = dst.data() + (oz * out.h + oy) * out.w;
                const float* srow = src.data() + (iz * in.h + iy) * in.w;
                const std::int64_t off = kx - p;
                for (std::int64_t ix = x0; ix < x1; ++ix) drow[ix * s + off] += w * srow[ix];
              }
            }
          }
        }
      }
    }
  }
  return y;
}

inline void add_channel_bias(Tensor& x, std::span<const float> bias) {
  if (static_cast<std::int64_t>(bias.size()) != x.shape().c) throw ShapeError("bias length does not match channels");
  for (std::int64_t c = 0; c < x.shape().c; ++c)
    for (float& v : x.channel(c)) v += bias[static_cast<std::size_t>(c)];
}

/// Inference-mode batch normalization with stored running statistics:
///   y = gamma_c (x - mean_c) / sqrt(var_c + eps) + beta_c
inline void batchnorm_infer(Tensor& x, std::span<const float> gamma, std::span<const float> beta,
                            std::span<const float> mean, std::span<const float> var, float eps) {
  const auto c = static_cast<std::size_t>(x.shape().c);
  if (gamma.size() != c || beta.size() != c || mean.size() != c || var.size() != c)
    throw ShapeError("batchnorm parameter lengths must equal the channel count " + std::to_string(c));
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float denom_sq = var[ch] + eps;
    if (!(denom_sq > 0.0f)) throw NumericError("batchnorm variance + eps must be positive on channel " + std::to_string(ch));
    const float denom = std::sqrt(denom_sq);
    for (float& v : x.channel(static_cast<std::int64_t>(ch))) v = gamma[ch] * (v - mean[ch]) / denom + beta[ch];
  }
}

inline float leaky_relu(float v, float slope) { return std::max(v, slope * v); }

/// Logistic function without overflow for large |v|.
inline float sigmoid(float v) {
  if (v >= 0.0f) return 1.0f / (1.0f + std::exp(-v));
  const float e = std::exp(v);
  return e / (1.0f + e);
}

inline void leaky_relu_inplace(Tensor& x, float slope) {
  for (float& v : x.data()) v = leaky_relu(v, slope);
}
inline void tanh_inplace(Tensor& x) {
  for (float& v : x.data()) v = std::tanh(v);
}
inline void sigmoid_inplace(Tensor& x) {
  for (float& v : x.data()) v = sigmoid(v);
}

}  // namespace porelab
