#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

namespace casegment {

using Sample = std::uint16_t;
using LabelId = std::uint32_t;

/// Label id 0 marks an unlabeled cell everywhere in the library.
inline constexpr LabelId kNullLabel = 0;

enum class ImageFormat { EnviBsq, Ppm };

/// W x H grid of N-band digital levels. Samples are stored pixel-interleaved
/// (row-major over pixels, bands contiguous per pixel) so that a pixel's
/// spectral vector is a contiguous span.
class MultibandImage {
 public:
  /// Zero-filled image. Throws ContractError on empty dimensions or a depth
  /// other than 8 or 16.
  MultibandImage(std::size_t width, std::size_t height, std::size_t bands, unsigned depth);

  /// Takes ownership of `samples`; validates length and sample range.
  MultibandImage(std::size_t width, std::size_t height, std::size_t bands, unsigned depth,
                 std::vector<Sample> samples);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t bands() const noexcept { return bands_; }
  unsigned depth() const noexcept { return depth_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  Sample max_value() const noexcept { return static_cast<Sample>((1u << depth_) - 1u); }

  std::span<const Sample> pixel(std::size_t index) const noexcept {
    return {samples_.data() + index * bands_, bands_};
  }
  Sample at(std::size_t index, std::size_t band) const noexcept {
    return samples_[index * bands_ + band];
  }
  /// Throws ContractError if `value` exceeds max_value().
  void set(std::size_t index, std::size_t band, Sample value);

  std::span<const Sample> samples() const noexcept { return samples_; }

  bool operator==(const MultibandImage&) const = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::size_t bands_;
  unsigned depth_;
  std::vector<Sample> samples_;
};

/// Row-major label ids, kNullLabel for unlabeled cells.
struct LabelRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<LabelId> labels;

  LabelRaster() = default;
  LabelRaster(std::size_t w, std::size_t h) : width(w), height(h), labels(w * h, kNullLabel) {}
  LabelRaster(std::size_t w, std::size_t h, std::vector<LabelId> ids);

  /// Number of distinct nonzero ids.
  std::size_t label_count() const;

  bool operator==(const LabelRaster&) const = default;
};

using Signature = std::vector<Sample>;
using SignatureTable = std::unordered_map<LabelId, Signature>;

/// Loads an image. For ENVI input `path` may name either the header
/// (`x.hdr` with payload `x`, `x.img`, `x.bsq` or `x.raw`) or the payload
/// (header `path + ".hdr"`, falling back to the payload's stem + ".hdr").
MultibandImage load_image(const std::filesystem::path& path, ImageFormat format);

MultibandImage load_envi(const std::filesystem::path& path);
MultibandImage load_ppm(const std::filesystem::path& path);

/// Writes the raw BSQ payload to `path` and its header to `path + ".hdr"`.
void save_envi(const MultibandImage& image, const std::filesystem::path& path);

/// Writes a 3-band 8-bit image as binary PPM.
void save_ppm(const MultibandImage& image, const std::filesystem::path& path);

/// Raw little-endian u32 payload at `path`, JSON sidecar at `path + ".json"`.
void save_label_raster(const LabelRaster& labels, const std::filesystem::path& path);
LabelRaster load_label_raster(const std::filesystem::path& path);

/// Renders every labeled pixel with its label's signature sampled at
/// `band_triple`, rescaled to 8 bits. Null cells are black.
void save_preview(const MultibandImage& image, const LabelRaster& labels,
                  const SignatureTable& signatures, std::array<std::size_t, 3> band_triple,
                  const std::filesystem::path& path);

/// Same rendering as save_preview, returned as an 8-bit RGB image.
MultibandImage render_preview(const MultibandImage& image, const LabelRaster& labels,
                              const SignatureTable& signatures,
                              std::array<std::size_t, 3> band_triple);

/// Rescales a `depth`-bit sample to 8 bits with rounding.
std::uint8_t to_8bit(Sample value, unsigned depth) noexcept;

}  // namespace casegment
