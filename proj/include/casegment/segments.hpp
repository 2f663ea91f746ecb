#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "casegment/automaton.hpp"
#include "casegment/raster.hpp"

namespace casegment {

using SegmentId = std::uint32_t;

/// Maximal connected run of cells sharing one automaton label.
struct Segment {
  SegmentId id = 0;
  LabelId label = kNullLabel;
  std::vector<std::size_t> pixels;  // ascending
  Signature signature;              // empty until computed

  std::size_t area() const noexcept { return pixels.size(); }
};

/// Segments indexed by id - 1. `segment_of[p]` is the id holding pixel p,
/// or 0 for null cells.
struct SegmentSet {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Segment> segments;
  std::vector<SegmentId> segment_of;

  std::size_t size() const noexcept { return segments.size(); }
  /// Raster of segment ids.
  LabelRaster to_raster() const { return LabelRaster(width, height, segment_of); }
};

/// Connected components of equal nonzero label. Ids follow the row-major
/// order of each segment's first pixel, starting at 1.
SegmentSet extract_segments(const LabelRaster& labels, Neighborhood connectivity);

struct NullingResult {
  std::size_t segments_cleared = 0;
  std::size_t cells_cleared = 0;
};

/// Resets every cell of every segment smaller than `min_area` to (null, 0).
NullingResult null_small_segments(AutomatonGrid& grid, const SegmentSet& segments,
                                  std::size_t min_area);

struct EliminationOptions {
  std::size_t min_area = 150;
  std::size_t max_rounds = 5;
  std::size_t max_iters = 0;  // per re-evolution; 0 picks 10 * (W + H)
  unsigned threads = 1;
};

struct EliminationRound {
  std::size_t segments_before = 0;
  NullingResult cleared;
  std::size_t steps = 0;
  bool converged = false;
};

struct EliminationResult {
  AutomatonGrid grid;
  std::size_t rounds_used = 0;
  std::vector<EliminationRound> rounds;
};

/// Repeats {extract, null small segments, re-evolve} until every segment
/// reaches `min_area` or `max_rounds` rounds ran. Throws ContractError when
/// no segment is large enough to regrow from.
EliminationResult eliminate_oversegmentation(AutomatonGrid grid, const MultibandImage& image,
                                             Neighborhood nb, const AttenuationParams& params,
                                             const EliminationOptions& options);

inline constexpr std::size_t kMedoidSampleCap = 4096;

/// Member vector with the least summed Euclidean distance to all members;
/// ties go to the lowest pixel index. Segments larger than `sample_cap` are
/// reduced to an evenly strided subsample first.
Signature medoid_signature(const MultibandImage& image, std::span<const std::size_t> pixels,
                           std::size_t sample_cap = kMedoidSampleCap);

/// Fills `signature` of every segment.
void compute_signatures(SegmentSet& segments, const MultibandImage& image, unsigned threads = 1,
                        std::size_t sample_cap = kMedoidSampleCap);

}  // namespace casegment
