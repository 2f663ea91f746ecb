#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "casegment/raster.hpp"

namespace casegment {

/// Occurrence counts of the per-pixel band sum, indexed by sum value over
/// [0, N * (2^depth - 1)].
struct SumHistogram {
  std::vector<std::uint64_t> counts;

  std::size_t size() const noexcept { return counts.size(); }
  std::uint64_t total() const noexcept;
};

/// Inclusive band-sum interval grown around a histogram peak.
struct SumRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t peak = 0;

  bool contains(std::size_t sum) const noexcept { return lo <= sum && sum <= hi; }
  auto operator<=>(const SumRange&) const = default;
};

struct RangeParams {
  std::size_t smooth_window = 5;
  double prominence_frac = 0.05;
  std::size_t min_separation = 10;
  std::size_t half_width = 5;
  std::size_t max_peaks = 8;
};

/// Balanced (all bands within tolerance of each other) or dominated by one
/// band. An N-band image has N + 1 regions.
class SpectralRegion {
 public:
  static constexpr SpectralRegion balanced() noexcept { return SpectralRegion(0); }
  static constexpr SpectralRegion dominant(std::size_t band) noexcept {
    return SpectralRegion(band + 1);
  }

  constexpr bool is_balanced() const noexcept { return code_ == 0; }
  /// Dominant band; only meaningful when !is_balanced().
  constexpr std::size_t band() const noexcept { return code_ - 1; }
  constexpr std::size_t code() const noexcept { return code_; }

  auto operator<=>(const SpectralRegion&) const = default;

 private:
  constexpr explicit SpectralRegion(std::size_t code) noexcept : code_(code) {}
  std::size_t code_;
};

struct SeedEntry {
  std::size_t pixel;
  LabelId label;

  bool operator==(const SeedEntry&) const = default;
};

struct LabelKey {
  std::size_t range_index;
  SpectralRegion region;

  auto operator<=>(const LabelKey&) const = default;
};

/// Seed cells plus the (range, region) class behind every label.
/// Label id k describes `label_table[k - 1]`.
struct SeedMap {
  std::vector<SeedEntry> entries;
  std::vector<LabelKey> label_table;

  std::size_t label_count() const noexcept { return label_table.size(); }
  LabelRaster to_raster(std::size_t width, std::size_t height) const;
};

/// Sum of a pixel's samples.
inline std::size_t band_sum(std::span<const Sample> v) noexcept {
  std::size_t s = 0;
  for (Sample x : v) s += x;
  return s;
}

SumHistogram compute_sum_histogram(const MultibandImage& image, unsigned threads = 1);

/// Centered moving average; windows are truncated at the domain edges and
/// averaged over the bins they actually cover.
std::vector<double> smooth_histogram(const SumHistogram& hist, std::size_t window);

/// Picks band-sum ranges around the dominant histogram peaks. A peak is a
/// plateau of the smoothed counts whose existing neighbors are strictly
/// lower, located at the plateau's center. Falls back to one full-domain
/// range when nothing qualifies.
std::vector<SumRange> select_ranges(const SumHistogram& hist, const RangeParams& params = {});

SpectralRegion classify_spectral_region(std::span<const Sample> v, double delta_rel);

/// Seeds every in-range pixel on a `stride` lattice (row-major), labelling it
/// by its (range, spectral region) class in first-encounter order.
SeedMap generate_seeds(const MultibandImage& image, std::span<const SumRange> ranges,
                       double delta_rel, std::size_t stride = 1);

}  // namespace casegment
