#include "casegment/segments.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <string>

#include "casegment/detail/disjoint_set.hpp"
#include "casegment/detail/parallel.hpp"
#include "casegment/errors.hpp"

namespace casegment {

SegmentSet extract_segments(const LabelRaster& labels, Neighborhood connectivity) {
  const std::size_t n = labels.width * labels.height;
  if (labels.labels.size() != n) throw ContractError("label buffer does not match raster size");
  const auto width = static_cast<long>(labels.width);
  const auto height = static_cast<long>(labels.height);

  // Only offsets preceding the center in row-major order; the rest are
  // covered when the neighbor itself is visited.
  std::vector<Offset> backward;
  for (const Offset& o : neighbor_offsets(connectivity))
    if (o.dy < 0 || (o.dy == 0 && o.dx < 0)) backward.push_back(o);

  detail::DisjointSet sets(n);
  for (long y = 0; y < height; ++y) {
    for (long x = 0; x < width; ++x) {
      const auto p = static_cast<std::size_t>(y * width + x);
      const LabelId label = labels.labels[p];
      if (label == kNullLabel) continue;
      for (const Offset& o : backward) {
        const long nx = x + o.dx;
        const long ny = y + o.dy;
        if (nx < 0 || ny < 0 || nx >= width) continue;
        const auto q = static_cast<std::size_t>(ny * width + nx);
        if (labels.labels[q] == label) sets.unite(p, q);
      }
    }
  }

  SegmentSet out;
  out.width = labels.width;
  out.height = labels.height;
  out.segment_of.assign(n, 0);
  std::vector<SegmentId> root_id(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (labels.labels[p] == kNullLabel) continue;
    const std::size_t root = sets.find(p);
    if (root_id[root] == 0) {
      root_id[root] = static_cast<SegmentId>(out.segments.size() + 1);
      out.segments.push_back({root_id[root], labels.labels[p], {}, {}});
    }
    out.segment_of[p] = root_id[root];
    out.segments[root_id[root] - 1].pixels.push_back(p);
  }
  return out;
}

NullingResult null_small_segments(AutomatonGrid& grid, const SegmentSet& segments,
                                  std::size_t min_area) {
  if (segments.width != grid.width || segments.height != grid.height)
    throw ContractError("segment set does not match automaton grid");
  NullingResult result;
  for (const Segment& s : segments.segments) {
    if (s.area() >= min_area) continue;
    ++result.segments_cleared;
    result.cells_cleared += s.area();
    for (std::size_t p : s.pixels) grid.set(p, {kNullLabel, 0.0});
  }
  return result;
}

EliminationResult eliminate_oversegmentation(AutomatonGrid grid, const MultibandImage& image,
                                             Neighborhood nb, const AttenuationParams& params,
                                             const EliminationOptions& options) {
  if (options.min_area == 0) throw ContractError("min_area must be at least 1");
  const std::size_t max_iters =
      options.max_iters != 0 ? options.max_iters : 10 * (grid.width + grid.height);

  EliminationResult result;
  bool first = true;
  for (;;) {
    const SegmentSet segments = extract_segments(grid.to_raster(), nb);
    const auto small = static_cast<std::size_t>(std::count_if(
        segments.segments.begin(), segments.segments.end(),
        [&](const Segment& s) { return s.area() < options.min_area; }));
    if (first && small == segments.size())
      throw ContractError("no segment reaches min_area " + std::to_string(options.min_area) +
                          "; nothing would remain to regrow from");
    first = false;
    if (small == 0 || result.rounds_used == options.max_rounds) break;

    EliminationRound round;
    round.segments_before = segments.size();
    round.cleared = null_small_segments(grid, segments, options.min_area);
    ConvergenceResult regrown =
        run_to_convergence(std::move(grid), image, nb, params, max_iters, options.threads);
    grid = std::move(regrown.grid);
    round.steps = regrown.steps;
    round.converged = regrown.converged;
    result.rounds.push_back(round);
    ++result.rounds_used;
  }
  result.grid = std::move(grid);
  return result;
}

Signature medoid_signature(const MultibandImage& image, std::span<const std::size_t> pixels,
                           std::size_t sample_cap) {
  if (pixels.empty()) throw ContractError("medoid of an empty segment");
  if (sample_cap == 0) throw ContractError("medoid sample cap must be positive");

  std::vector<std::size_t> members;
  if (pixels.size() > sample_cap) {
    members.reserve(sample_cap);
    for (std::size_t i = 0; i < sample_cap; ++i) members.push_back(pixels[i * pixels.size() / sample_cap]);
  } else {
    members.assign(pixels.begin(), pixels.end());
  }

  const std::size_t k = members.size();
  const std::size_t bands = image.bands();
  std::vector<Sample> vectors(k * bands);
  for (std::size_t i = 0; i < k; ++i) {
    const auto v = image.pixel(members[i]);
    std::copy(v.begin(), v.end(), vectors.begin() + static_cast<long>(i * bands));
  }
  const auto vec = [&](std::size_t i) { return std::span<const Sample>(vectors.data() + i * bands, bands); };

  // d(i, j) lands in both sums; each sum still accumulates in ascending j.
  std::vector<double> sums(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double d = spectral_distance(vec(i), vec(j));
      sums[i] += d;
      sums[j] += d;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < k; ++i)
    if (sums[i] < sums[best] || (sums[i] == sums[best] && members[i] < members[best])) best = i;
  const auto v = vec(best);
  return Signature(v.begin(), v.end());
}

void compute_signatures(SegmentSet& segments, const MultibandImage& image, unsigned threads,
                        std::size_t sample_cap) {
  if (segments.width != image.width() || segments.height != image.height())
    throw ContractError("segment set does not match image");
  std::atomic<std::size_t> next{0};
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(detail::resolve_threads(threads), std::max<std::size_t>(segments.size(), 1)));
  detail::parallel_blocks(workers, workers, [&](std::size_t, std::size_t, std::size_t) {
    for (std::size_t s = next++; s < segments.size(); s = next++)
      segments.segments[s].signature = medoid_signature(image, segments.segments[s].pixels, sample_cap);
  });
}

}  // namespace casegment
