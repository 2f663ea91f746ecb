#include "casegment/seeding.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "casegment/detail/parallel.hpp"
#include "casegment/errors.hpp"

namespace casegment {

namespace {

struct Peak {
  std::size_t position;
  double height;
};

bool taller(const Peak& a, const Peak& b) noexcept {
  if (a.height != b.height) return a.height > b.height;
  return a.position < b.position;
}

void check_params(const RangeParams& p) {
  if (p.smooth_window == 0 || p.smooth_window % 2 == 0)
    throw ContractError("smooth_window must be a positive odd bin count");
  if (!(p.prominence_frac > 0.0 && p.prominence_frac < 1.0))
    throw ContractError("prominence_frac must lie in (0, 1)");
  if (p.min_separation == 0) throw ContractError("min_separation must be positive");
  if (p.max_peaks == 0) throw ContractError("max_peaks must be positive");
}

std::vector<Peak> find_plateau_peaks(const std::vector<double>& s) {
  std::vector<Peak> peaks;
  const std::size_t n = s.size();
  std::size_t a = 0;
  while (a < n) {
    std::size_t b = a;
    while (b + 1 < n && s[b + 1] == s[a]) ++b;
    const bool has_left = a > 0;
    const bool has_right = b + 1 < n;
    const bool left_lower = !has_left || s[a - 1] < s[a];
    const bool right_lower = !has_right || s[b + 1] < s[a];
    if ((has_left || has_right) && left_lower && right_lower) peaks.push_back({(a + b) / 2, s[a]});
    a = b + 1;
  }
  return peaks;
}

}  // namespace

std::uint64_t SumHistogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

LabelRaster SeedMap::to_raster(std::size_t width, std::size_t height) const {
  LabelRaster raster(width, height);
  for (const SeedEntry& e : entries) {
    if (e.pixel >= raster.labels.size()) throw ContractError("seed index outside raster");
    raster.labels[e.pixel] = e.label;
  }
  return raster;
}

SumHistogram compute_sum_histogram(const MultibandImage& image, unsigned threads) {
  const std::size_t domain = image.bands() * image.max_value() + 1;
  const std::size_t rows = image.height();
  const std::size_t width = image.width();
  const unsigned blocks =
      static_cast<unsigned>(std::min<std::size_t>(detail::resolve_threads(threads), rows));

  std::vector<std::vector<std::uint64_t>> partial(blocks, std::vector<std::uint64_t>(domain, 0));
  detail::parallel_blocks(rows, blocks, [&](std::size_t block, std::size_t y0, std::size_t y1) {
    auto& counts = partial[block];
    for (std::size_t i = y0 * width; i < y1 * width; ++i) ++counts[band_sum(image.pixel(i))];
  });

  SumHistogram hist{std::move(partial[0])};
  for (std::size_t b = 1; b < partial.size(); ++b)
    for (std::size_t s = 0; s < domain; ++s) hist.counts[s] += partial[b][s];
  return hist;
}

std::vector<double> smooth_histogram(const SumHistogram& hist, std::size_t window) {
  const std::size_t n = hist.size();
  const std::size_t half = window / 2;
  std::vector<double> out(n, 0.0);
  std::uint64_t sum = 0;
  std::size_t lo = 0, hi = 0;  // current window is [lo, hi)
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t want_lo = i >= half ? i - half : 0;
    const std::size_t want_hi = std::min(n, i + half + 1);
    while (hi < want_hi) sum += hist.counts[hi++];
    while (lo < want_lo) sum -= hist.counts[lo++];
    out[i] = static_cast<double>(sum) / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<SumRange> select_ranges(const SumHistogram& hist, const RangeParams& params) {
  check_params(params);
  if (hist.size() == 0) throw ContractError("empty histogram");
  const std::size_t last = hist.size() - 1;

  const std::vector<double> smoothed = smooth_histogram(hist, params.smooth_window);
  const double global_max = *std::max_element(smoothed.begin(), smoothed.end());
  const double threshold = params.prominence_frac * global_max;

  std::vector<Peak> candidates;
  for (const Peak& p : find_plateau_peaks(smoothed))
    if (p.height >= threshold && p.height > 0.0) candidates.push_back(p);
  std::sort(candidates.begin(), candidates.end(), taller);

  std::vector<Peak> accepted;
  for (const Peak& c : candidates) {
    if (accepted.size() == params.max_peaks) break;
    const bool isolated = std::all_of(accepted.begin(), accepted.end(), [&](const Peak& a) {
      const std::size_t gap = a.position > c.position ? a.position - c.position : c.position - a.position;
      return gap >= params.min_separation;
    });
    if (isolated) accepted.push_back(c);
  }
  if (accepted.empty()) return {SumRange{0, last, smoothed.empty() ? 0 : last / 2}};

  std::sort(accepted.begin(), accepted.end(),
            [](const Peak& a, const Peak& b) { return a.position < b.position; });

  std::vector<SumRange> ranges;
  std::vector<Peak> owners;
  for (const Peak& p : accepted) {
    SumRange r{p.position >= params.half_width ? p.position - params.half_width : 0,
               std::min(last, p.position + params.half_width), p.position};
    if (!ranges.empty() && r.lo <= ranges.back().hi) {
      SumRange& prev = ranges.back();
      prev.hi = std::max(prev.hi, r.hi);
      if (taller(p, owners.back())) {
        owners.back() = p;
        prev.peak = p.position;
      }
      continue;
    }
    ranges.push_back(r);
    owners.push_back(p);
  }
  return ranges;
}

SpectralRegion classify_spectral_region(std::span<const Sample> v, double delta_rel) {
  if (v.empty()) throw ContractError("cannot classify an empty vector");
  std::size_t argmax = 0;
  Sample lo = v[0];
  std::size_t sum = 0;
  for (std::size_t b = 0; b < v.size(); ++b) {
    if (v[b] > v[argmax]) argmax = b;
    lo = std::min(lo, v[b]);
    sum += v[b];
  }
  const double spread = static_cast<double>(v[argmax] - lo);
  const double mean = static_cast<double>(sum) / static_cast<double>(v.size());
  if (spread <= delta_rel * mean) return SpectralRegion::balanced();
  return SpectralRegion::dominant(argmax);
}

SeedMap generate_seeds(const MultibandImage& image, std::span<const SumRange> ranges,
                       double delta_rel, std::size_t stride) {
  if (ranges.empty()) throw ContractError("generate_seeds needs at least one band-sum range");
  if (stride == 0) throw ContractError("seed stride must be at least 1");
  for (std::size_t r = 0; r < ranges.size(); ++r) {
    if (ranges[r].lo > ranges[r].hi) throw ContractError("inverted band-sum range");
    if (r > 0 && ranges[r].lo <= ranges[r - 1].hi)
      throw ContractError("band-sum ranges must be sorted and disjoint");
  }

  SeedMap seeds;
  std::map<LabelKey, LabelId> ids;
  for (std::size_t y = 0; y < image.height(); y += stride) {
    for (std::size_t x = 0; x < image.width(); x += stride) {
      const std::size_t index = y * image.width() + x;
      const auto v = image.pixel(index);
      const std::size_t sum = band_sum(v);
      auto it = std::upper_bound(ranges.begin(), ranges.end(), sum,
                                 [](std::size_t s, const SumRange& r) { return s < r.lo; });
      if (it == ranges.begin()) continue;
      --it;
      if (!it->contains(sum)) continue;
      const LabelKey key{static_cast<std::size_t>(it - ranges.begin()),
                         classify_spectral_region(v, delta_rel)};
      auto [slot, inserted] = ids.try_emplace(key, static_cast<LabelId>(seeds.label_table.size() + 1));
      if (inserted) seeds.label_table.push_back(key);
      seeds.entries.push_back({index, slot->second});
    }
  }
  return seeds;
}

}  // namespace casegment
