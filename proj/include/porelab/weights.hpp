#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "porelab/error.hpp"
#include "porelab/voxel_io.hpp"

namespace porelab {

/// Layer kind tags. The values are part of the weights file format.
enum class LayerKind : std::uint8_t {
  conv3d = 1,
  convtransp3d = 2,
  batchnorm = 3,
  leakyrelu = 4,
  tanh = 5,
  sigmoid = 6,
};

enum class NetworkRole : std::uint8_t { generator = 0, discriminator = 1 };

inline const char* role_name(NetworkRole r) { return r == NetworkRole::generator ? "generator" : "discriminator"; }

/// One row of the network table: a convolution followed by optional
/// batch normalization and an activation.
struct LayerSpec {
  LayerKind kind = LayerKind::conv3d;
  int in_channels = 0;
  int filters = 0;
  int kernel = 4;
  int stride = 1;
  int padding = 0;
  bool batchnorm = false;
  bool bias = false;
  LayerKind activation = LayerKind::leakyrelu;

  std::int64_t kernel_elements() const {
    return static_cast<std::int64_t>(in_channels) * filters * kernel * kernel * kernel;
  }
  bool operator==(const LayerSpec&) const = default;
};

struct LayerParams {
  std::vector<float> kernel;  ///< (out, in, k, k, k) for conv3d, (in, out, k, k, k) for convtransp3d
  std::vector<float> bias;
  std::vector<float> gamma, beta, running_mean, running_var;
  bool operator==(const LayerParams&) const = default;
};

struct NetworkWeights {
  NetworkRole role = NetworkRole::generator;
  int latent_dim = 512;  ///< input channels of the first layer
  float leaky_slope = 0.2f;
  float bn_eps = 1e-5f;
  std::vector<LayerSpec> layers;
  std::vector<LayerParams> params;
  bool operator==(const NetworkWeights&) const = default;
};

/// Generator rows: four transposed convolutions halving the filter count,
/// a 3x3x3 convolution, and a final single-filter transposed convolution.
inline std::vector<LayerSpec> generator_architecture(int latent_dim = 512, int ngf = 64) {
  using K = LayerKind;
  return {
      {K::convtransp3d, latent_dim, ngf * 8, 4, 1, 0, true, false, K::leakyrelu},
      {K::convtransp3d, ngf * 8, ngf * 4, 4, 2, 1, true, false, K::leakyrelu},
      {K::convtransp3d, ngf * 4, ngf * 2, 4, 2, 1, true, false, K::leakyrelu},
      {K::convtransp3d, ngf * 2, ngf, 4, 2, 1, true, false, K::leakyrelu},
      {K::conv3d, ngf, ngf, 3, 1, 1, true, false, K::leakyrelu},
      {K::convtransp3d, ngf, 1, 4, 2, 1, false, true, K::tanh},
  };
}

inline std::vector<LayerSpec> discriminator_architecture(int ndf = 64) {
  using K = LayerKind;
  return {
      {K::conv3d, 1, ndf, 4, 2, 1, false, true, K::leakyrelu},
      {K::conv3d, ndf, ndf * 2, 4, 2, 1, true, false, K::leakyrelu},
      {K::conv3d, ndf * 2, ndf * 4, 4, 2, 1, true, false, K::leakyrelu},
      {K::conv3d, ndf * 4, ndf * 8, 4, 2, 1, true, false, K::leakyrelu},
      {K::conv3d, ndf * 8, 1, 4, 1, 0, false, true, K::sigmoid},
  };
}

struct ParameterCount {
  std::int64_t kernels = 0;
  std::int64_t biases = 0;
  std::int64_t batchnorm_affine = 0;  ///< gamma and beta
  std::int64_t batchnorm_running = 0; ///< running mean and variance (not trainable)
  std::int64_t trainable() const { return kernels + biases + batchnorm_affine; }
};

inline ParameterCount parameter_count(std::span<const LayerSpec> layers) {
  ParameterCount n;
  for (const auto& l : layers) {
    n.kernels += l.kernel_elements();
    if (l.bias) n.biases += l.filters;
    if (l.batchnorm) {
      n.batchnorm_affine += 2 * l.filters;
      n.batchnorm_running += 2 * l.filters;
    }
  }
  return n;
}

/// Checks buffer sizes and channel compatibility of adjacent layers.
inline void validate_structure(const NetworkWeights& w) {
  if (w.layers.empty()) throw ValidationError("network has no layers");
  if (w.layers.size() != w.params.size()) throw ValidationError("layer and parameter record counts differ");
  if (w.layers.front().in_channels != w.latent_dim)
    throw ValidationError("first layer expects " + std::to_string(w.layers.front().in_channels) +
                          " input channels but metadata declares " + std::to_string(w.latent_dim));
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const auto& l = w.layers[i];
    const auto& p = w.params[i];
    const std::string where = "layer " + std::to_string(i + 1);
    if (l.kind != LayerKind::conv3d && l.kind != LayerKind::convtransp3d)
      throw ValidationError(where + ": kind must be conv3d or convtransp3d");
    if (l.activation != LayerKind::leakyrelu && l.activation != LayerKind::tanh && l.activation != LayerKind::sigmoid)
      throw ValidationError(where + ": unsupported activation");
    if (l.in_channels <= 0 || l.filters <= 0 || l.kernel <= 0 || l.stride <= 0 || l.padding < 0)
      throw ValidationError(where + ": non-positive geometry");
    if (i > 0 && w.layers[i - 1].filters != l.in_channels)
      throw ValidationError(where + ": expects " + std::to_string(l.in_channels) + " channels, previous layer emits " +
                            std::to_string(w.layers[i - 1].filters));
    if (static_cast<std::int64_t>(p.kernel.size()) != l.kernel_elements())
      throw ValidationError(where + ": kernel buffer has wrong size");
    const auto f = static_cast<std::size_t>(l.filters);
    if (p.bias.size() != (l.bias ? f : 0)) throw ValidationError(where + ": bias buffer has wrong size");
    const std::size_t bn = l.batchnorm ? f : 0;
    if (p.gamma.size() != bn || p.beta.size() != bn || p.running_mean.size() != bn || p.running_var.size() != bn)
      throw ValidationError(where + ": batchnorm buffers have wrong size");
  }
}

/// Checks the layer sequence against the reference generator/discriminator
/// tables (kinds, kernels, strides, paddings, batchnorm and activations).
/// Filter counts are free, except that the last layer emits one channel.
inline void validate_architecture(const NetworkWeights& w) {
  validate_structure(w);
  const auto ref = w.role == NetworkRole::generator ? generator_architecture(w.latent_dim, 1) : discriminator_architecture(1);
  if (w.layers.size() != ref.size())
    throw ValidationError(std::string(role_name(w.role)) + " must have " + std::to_string(ref.size()) + " layers, found " +
                          std::to_string(w.layers.size()));
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto& l = w.layers[i];
    const auto& r = ref[i];
    if (l.kind != r.kind || l.kernel != r.kernel || l.stride != r.stride || l.padding != r.padding ||
        l.batchnorm != r.batchnorm || l.activation != r.activation)
      throw ValidationError(std::string(role_name(w.role)) + " layer " + std::to_string(i + 1) +
                            " does not match the reference layer order");
  }
  if (w.layers.back().filters != 1) throw ValidationError("final layer must emit a single channel");
  if (w.role == NetworkRole::discriminator && w.latent_dim != 1)
    throw ValidationError("discriminator input must have one channel");
}

/// Random initialization; kernel std 1/sqrt(effective fan-in) keeps feature
/// magnitudes near unity through the stack.
inline NetworkWeights random_weights(NetworkRole role, std::vector<LayerSpec> layers, std::uint64_t seed,
                                     float leaky_slope = 0.2f, float bn_eps = 1e-5f) {
  NetworkWeights w;
  w.role = role;
  w.latent_dim = layers.empty() ? 0 : layers.front().in_channels;
  w.leaky_slope = leaky_slope;
  w.bn_eps = bn_eps;
  w.layers = std::move(layers);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& l : w.layers) {
    LayerParams p;
    double fan_in = static_cast<double>(l.in_channels) * l.kernel * l.kernel * l.kernel;
    if (l.kind == LayerKind::convtransp3d) fan_in /= static_cast<double>(l.stride * l.stride * l.stride);
    const double sd = 1.0 / std::sqrt(std::max(1.0, fan_in));
    p.kernel.resize(static_cast<std::size_t>(l.kernel_elements()));
    for (auto& v : p.kernel) v = static_cast<float>(sd * normal(rng));
    if (l.bias) {
      p.bias.resize(static_cast<std::size_t>(l.filters));
      for (auto& v : p.bias) v = static_cast<float>(0.1 * normal(rng));
    }
    if (l.batchnorm) {
      const auto f = static_cast<std::size_t>(l.filters);
      p.gamma.resize(f);
      p.beta.resize(f);
      p.running_mean.resize(f);
      p.running_var.resize(f);
      for (std::size_t c = 0; c < f; ++c) {
        p.gamma[c] = static_cast<float>(1.0 + 0.1 * normal(rng));
        p.beta[c] = static_cast<float>(0.1 * normal(rng));
        p.running_mean[c] = static_cast<float>(0.1 * normal(rng));
        p.running_var[c] = static_cast<float>(1.0 + 0.1 * std::abs(normal(rng)));
      }
    }
    w.params.push_back(std::move(p));
  }
  return w;
}

// ---------------------------------------------------------------------------
// G3DW binary format, little-endian throughout:
//
//   "G3DW" | u32 version=1
//   u32 latent_dim | f32 leaky_slope | f32 bn_eps | u8 component (0 gen, 1 disc)
//   u32 layer_count
//   per layer: u8 kind | u32 in_channels | u32 filters | u32 kernel | u32 stride
//              | u32 padding | u8 flags (bit0 batchnorm, bit1 bias)
//              | u8 activation tag
//              | f32 kernel[...] | f32 bias[filters] if bias
//              | f32 gamma, beta, running_mean, running_var [filters] if batchnorm
//   u32 CRC-32 (zlib polynomial) of every preceding byte
// ---------------------------------------------------------------------------

inline constexpr std::array<std::uint8_t, 4> kWeightsMagic{'G', '3', 'D', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f32s(std::span<const float> vs) {
    for (float v : vs) f32(v);
  }
  void raw(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::vector<float> f32s(std::size_t n) {
    if (n > remaining() / 4) throw FormatError("weights file truncated inside a parameter array");
    std::vector<float> out(n);
    for (auto& v : out) v = f32();
    return out;
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("weights file truncated");
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = ::crc32(crc, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_weights(const NetworkWeights& w) {
  validate_structure(w);
  detail::ByteWriter out;
  out.raw(kWeightsMagic);
  out.u32(kWeightsVersion);
  out.u32(static_cast<std::uint32_t>(w.latent_dim));
  out.f32(w.leaky_slope);
  out.f32(w.bn_eps);
  out.u8(static_cast<std::uint8_t>(w.role));
  out.u32(static_cast<std::uint32_t>(w.layers.size()));
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const auto& l = w.layers[i];
    const auto& p = w.params[i];
    out.u8(static_cast<std::uint8_t>(l.kind));
    out.u32(static_cast<std::uint32_t>(l.in_channels));
    out.u32(static_cast<std::uint32_t>(l.filters));
    out.u32(static_cast<std::uint32_t>(l.kernel));
    out.u32(static_cast<std::uint32_t>(l.stride));
    out.u32(static_cast<std::uint32_t>(l.padding));
    out.u8(static_cast<std::uint8_t>((l.batchnorm ? 1u : 0u) | (l.bias ? 2u : 0u)));
    out.u8(static_cast<std::uint8_t>(l.activation));
    out.f32s(p.kernel);
    if (l.bias) out.f32s(p.bias);
    if (l.batchnorm) {
      out.f32s(p.gamma);
      out.f32s(p.beta);
      out.f32s(p.running_mean);
      out.f32s(p.running_var);
    }
  }
  const std::uint32_t crc = detail::crc32_of(out.bytes());
  out.u32(crc);
  return std::move(out.bytes());
}

/// Parses a G3DW buffer. Verifies magic, version and checksum, then the
/// structural and reference-architecture invariants.
inline NetworkWeights decode_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw FormatError("weights file truncated");
  if (!std::equal(kWeightsMagic.begin(), kWeightsMagic.end(), bytes.begin()))
    throw FormatError("bad magic: not a G3DW weights file");
  const auto body = bytes.first(bytes.size() - 4);
  detail::ByteReader tail(bytes.last(4));
  if (detail::crc32_of(body) != tail.u32()) throw FormatError("checksum mismatch: weights file truncated or corrupted");

  detail::ByteReader in(body);
  in.u32();  // magic
  const std::uint32_t version = in.u32();
  if (version != kWeightsVersion) throw FormatError("unsupported weights version " + std::to_string(version));
  NetworkWeights w;
  w.latent_dim = static_cast<int>(in.u32());
  w.leaky_slope = in.f32();
  w.bn_eps = in.f32();
  const std::uint8_t role = in.u8();
  if (role > 1) throw FormatError("unknown network component tag " + std::to_string(role));
  w.role = static_cast<NetworkRole>(role);
  const std::uint32_t count = in.u32();
  if (count > 64) throw FormatError("implausible layer count " + std::to_string(count));
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerSpec l;
    l.kind = static_cast<LayerKind>(in.u8());
    l.in_channels = static_cast<int>(in.u32());
    l.filters = static_cast<int>(in.u32());
    l.kernel = static_cast<int>(in.u32());
    l.stride = static_cast<int>(in.u32());
    l.padding = static_cast<int>(in.u32());
    const std::uint8_t flags = in.u8();
    if (flags & ~3u) throw FormatError("unknown layer flags");
    l.batchnorm = (flags & 1u) != 0;
    l.bias = (flags & 2u) != 0;
    l.activation = static_cast<LayerKind>(in.u8());
    if (l.kind != LayerKind::conv3d && l.kind != LayerKind::convtransp3d)
      throw FormatError("layer " + std::to_string(i + 1) + " has unknown kind tag");
    if (l.in_channels <= 0 || l.filters <= 0 || l.kernel <= 0 || l.kernel > 16 || l.stride <= 0)
      throw FormatError("layer " + std::to_string(i + 1) + " has implausible geometry");
    LayerParams p;
    p.kernel = in.f32s(static_cast<std::size_t>(l.kernel_elements()));
    const auto f = static_cast<std::size_t>(l.filters);
    if (l.bias) p.bias = in.f32s(f);
    if (l.batchnorm) {
      p.gamma = in.f32s(f);
      p.beta = in.f32s(f);
      p.running_mean = in.f32s(f);
      p.running_var = in.f32s(f);
    }
    w.layers.push_back(l);
    w.params.push_back(std::move(p));
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after the last layer record");
  validate_architecture(w);
  return w;
}

inline void save_weights(const NetworkWeights& w, const std::filesystem::path& path) {
  const auto bytes = encode_weights(w);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  write_bytes(tmp, bytes.data(), bytes.size());
  std::filesystem::rename(tmp, path);
}

inline NetworkWeights load_weights(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such weights file: " + path.string());
  return decode_weights(read_bytes(path));
}

}  // namespace porelab
