#pragma once

// Synthetic rasters for tests.

#include <algorithm>
#include <random>
#include <vector>

#include "casegment/raster.hpp"

namespace synthetic {

using namespace casegment;

inline MultibandImage uniform(std::size_t w, std::size_t h, std::vector<Sample> value, unsigned depth = 8) {
  std::vector<Sample> samples;
  samples.reserve(w * h * value.size());
  for (std::size_t i = 0; i < w * h; ++i) samples.insert(samples.end(), value.begin(), value.end());
  return MultibandImage(w, h, value.size(), depth, std::move(samples));
}

inline MultibandImage random_image(std::mt19937& rng, std::size_t w, std::size_t h, std::size_t bands,
                                   unsigned depth = 8, Sample max = 0) {
  const Sample top = max != 0 ? max : static_cast<Sample>((1u << depth) - 1u);
  std::uniform_int_distribution<int> dist(0, top);
  std::vector<Sample> samples(w * h * bands);
  for (auto& s : samples) s = static_cast<Sample>(dist(rng));
  return MultibandImage(w, h, bands, depth, std::move(samples));
}

/// Paints `colors[region_of[p]]` at every pixel, plus uniform integer noise
/// in [-noise, noise] per sample (clamped to the 8-bit range).
inline MultibandImage from_regions(std::size_t w, std::size_t h, const std::vector<int>& region_of,
                                   const std::vector<std::vector<Sample>>& colors, int noise = 0,
                                   std::mt19937* rng = nullptr) {
  const std::size_t bands = colors.front().size();
  std::uniform_int_distribution<int> jitter(-noise, noise);
  std::vector<Sample> samples;
  samples.reserve(w * h * bands);
  for (std::size_t p = 0; p < w * h; ++p)
    for (std::size_t b = 0; b < bands; ++b) {
      int v = colors[static_cast<std::size_t>(region_of[p])][b];
      if (noise > 0) v += jitter(*rng);
      samples.push_back(static_cast<Sample>(std::clamp(v, 0, 255)));
    }
  return MultibandImage(w, h, bands, 8, std::move(samples));
}

/// Four quadrant-like regions split at (cx, cy).
inline std::vector<int> quadrants(std::size_t w, std::size_t h, std::size_t cx, std::size_t cy) {
  std::vector<int> out(w * h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) out[y * w + x] = (x >= cx ? 1 : 0) + (y >= cy ? 2 : 0);
  return out;
}

}  // namespace synthetic
