#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "porelab/conv.hpp"
#include "porelab/error.hpp"
#include "porelab/tensor.hpp"
#include "porelab/volume.hpp"
#include "porelab/weights.hpp"

namespace porelab {

/// i.i.d. N(0, 1) latent of shape (d, m, n, o); reproducible for a seed.
inline LatentVector sample_noise(std::int64_t d, std::int64_t m, std::int64_t n, std::int64_t o, std::uint64_t seed) {
  if (d <= 0 || m <= 0 || n <= 0 || o <= 0) throw ShapeError("latent dimensions must be positive");
  Tensor z({d, m, n, o});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (float& v : z.data()) v = static_cast<float>(normal(rng));
  return z;
}

/// z = beta * z_start + (1 - beta) * z_end for beta sweeping 1 -> 0 in
/// `steps` uniform values.
inline std::vector<LatentVector> interpolate_latent(const LatentVector& z_start, const LatentVector& z_end, int steps) {
  if (z_start.shape() != z_end.shape()) throw ShapeError("latent endpoints differ in shape");
  if (steps < 2) throw RangeError("interpolation needs at least two steps");
  std::vector<LatentVector> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const float beta = static_cast<float>(1.0 - static_cast<double>(i) / (steps - 1));
    Tensor z(z_start.shape());
    const auto a = z_start.data();
    const auto b = z_end.data();
    auto dst = z.data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = beta * a[j] + (1.0f - beta) * b[j];
    out.push_back(std::move(z));
  }
  return out;
}

/// Runs one table row: convolution, bias, batchnorm, activation.
inline Tensor run_layer(const Tensor& x, const LayerSpec& l, const LayerParams& p, const NetworkWeights& w) {
  if (x.shape().c != l.in_channels)
    throw ShapeError("layer expects " + std::to_string(l.in_channels) + " channels, input has " +
                     std::to_string(x.shape().c));
  const ConvGeometry g{l.kernel, l.stride, l.padding};
  Tensor y = l.kind == LayerKind::conv3d ? conv3d(x, p.kernel, l.filters, g) : conv_transpose3d(x, p.kernel, l.filters, g);
  if (l.bias) add_channel_bias(y, p.bias);
  if (l.batchnorm) batchnorm_infer(y, p.gamma, p.beta, p.running_mean, p.running_var, w.bn_eps);
  switch (l.activation) {
    case LayerKind::leakyrelu: leaky_relu_inplace(y, w.leaky_slope); break;
    case LayerKind::tanh: tanh_inplace(y); break;
    case LayerKind::sigmoid: sigmoid_inplace(y); break;
    default: throw ValidationError("unsupported activation tag");
  }
  return y;
}

/// Feature maps after each layer's activation, in network order.
inline std::vector<Tensor> dump_activations(const NetworkWeights& w, const Tensor& input) {
  validate_structure(w);
  std::vector<Tensor> out;
  out.reserve(w.layers.size());
  const Tensor* cur = &input;
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    out.push_back(run_layer(*cur, w.layers[i], w.params[i], w));
    cur = &out.back();
  }
  return out;
}

inline Tensor forward(const NetworkWeights& w, const Tensor& input) {
  validate_structure(w);
  Tensor cur = input;
  for (std::size_t i = 0; i < w.layers.size(); ++i) cur = run_layer(cur, w.layers[i], w.params[i], w);
  return cur;
}

/// Output edge for a latent of spatial extent m; 16 m + 48 for the
/// reference generator.
inline std::int64_t generator_output_extent(std::span<const LayerSpec> layers, std::int64_t m) {
  std::int64_t s = m;
  for (const auto& l : layers) {
    const ConvGeometry g{l.kernel, l.stride, l.padding};
    s = l.kind == LayerKind::conv3d ? conv_output_extent(s, g) : conv_transpose_output_extent(s, g);
  }
  return s;
}

/// Smallest latent extent whose generator output covers `edge` voxels.
inline std::int64_t latent_extent_for(std::span<const LayerSpec> layers, std::int64_t edge) {
  std::int64_t m = 1;
  while (generator_output_extent(layers, m) < edge) ++m;
  return m;
}

/// [-1, 1] -> [0, 255] via v = round(255 (y + 1) / 2), halves away from zero.
inline std::uint8_t to_gray(float y) {
  const double v = 255.0 * (static_cast<double>(y) + 1.0) / 2.0;
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

/// [0, 255] -> [-1, 1] via y = v / 127.5 - 1.
inline float from_gray(std::uint8_t v) { return static_cast<float>(v / 127.5 - 1.0); }

/// Tensor (1, nz, ny, nx) holding the gray volume mapped to [-1, 1].
inline Tensor gray_to_tensor(const GrayImage3D& img) {
  const Dims& d = img.dims();
  Tensor t({1, d.nz, d.ny, d.nx});
  auto dst = t.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = from_gray(img.values()[i]);
  return t;
}

inline GrayImage3D tensor_to_gray(const Tensor& t, double voxel_size) {
  if (t.shape().c != 1) throw ShapeError("gray conversion needs a single-channel tensor");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(t.shape().spatial()));
  const auto src = t.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = to_gray(src[i]);
  return GrayImage3D({t.shape().w, t.shape().h, t.shape().d}, voxel_size, std::move(out));
}

inline GrayImage3D generator_forward(const NetworkWeights& w, const LatentVector& z,
                                     double voxel_size = kDefaultVoxelSize) {
  if (w.role != NetworkRole::generator) throw ValidationError("weights are not a generator");
  if (z.shape().c != w.latent_dim)
    throw ShapeError("latent has " + std::to_string(z.shape().c) + " channels, generator expects " +
                     std::to_string(w.latent_dim));
  return tensor_to_gray(forward(w, z), voxel_size);
}

inline constexpr std::int64_t kDiscriminatorEdge = 64;

/// Probability that a 64^3 image is real.
inline double discriminator_forward(const NetworkWeights& w, const GrayImage3D& img) {
  if (w.role != NetworkRole::discriminator) throw ValidationError("weights are not a discriminator");
  if (img.dims() != Dims{kDiscriminatorEdge, kDiscriminatorEdge, kDiscriminatorEdge})
    throw ShapeError("discriminator input must be 64^3");
  const Tensor out = forward(w, gray_to_tensor(img));
  if (out.shape().elements() != 1) throw ShapeError("discriminator produced " + out.shape().str() + ", expected a scalar");
  return static_cast<double>(out.values()[0]);
}

struct DiscriminatorScore {
  double score = 0.0;
  std::int64_t tiles = 0;
  bool tiled = false;          ///< image was larger than 64^3 and tile-averaged
  bool remainder_ignored = false;  ///< extents not divisible by 64; margins skipped
};

/// Scores any image of at least 64^3: disjoint 64^3 tiles from the origin,
/// averaged in raster order.
inline DiscriminatorScore discriminator_score(const NetworkWeights& w, const GrayImage3D& img) {
  const Dims& d = img.dims();
  if (d.min_extent() < kDiscriminatorEdge) throw ShapeError("discriminator input must be at least 64^3");
  DiscriminatorScore s;
  const std::int64_t tx = d.nx / kDiscriminatorEdge, ty = d.ny / kDiscriminatorEdge, tz = d.nz / kDiscriminatorEdge;
  double sum = 0.0;
  for (std::int64_t k = 0; k < tz; ++k)
    for (std::int64_t j = 0; j < ty; ++j)
      for (std::int64_t i = 0; i < tx; ++i) {
        const auto tile = img.crop(i * kDiscriminatorEdge, j * kDiscriminatorEdge, k * kDiscriminatorEdge,
                                   {kDiscriminatorEdge, kDiscriminatorEdge, kDiscriminatorEdge});
        sum += discriminator_forward(w, tile);
        ++s.tiles;
      }
  s.score = sum / static_cast<double>(s.tiles);
  s.tiled = s.tiles > 1;
  s.remainder_ignored = (d.nx % kDiscriminatorEdge) || (d.ny % kDiscriminatorEdge) || (d.nz % kDiscriminatorEdge);
  return s;
}

}  // namespace porelab
