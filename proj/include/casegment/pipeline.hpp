#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "casegment/automaton.hpp"
#include "casegment/errors.hpp"
#include "casegment/raster.hpp"
#include "casegment/seeding.hpp"
#include "casegment/segments.hpp"
#include "json.hpp"

namespace casegment {

/// Invalid configuration values (maps to CLI exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Everything the segmentation itself depends on; no file paths.
struct SegmentationParams {
  Neighborhood neighborhood = Neighborhood::Moore8;
  double delta_rel = 0.1;
  RangeParams ranges;
  std::size_t stride = 1;
  double epsilon = 1e-6;
  std::size_t min_area = 150;
  std::size_t max_iters = 0;  // 0 picks 10 * (W + H)
  std::size_t max_rounds = 5;
  unsigned threads = 1;       // 0 = one per hardware thread

  void validate() const;
};

struct PipelineConfig {
  std::filesystem::path input;
  ImageFormat format = ImageFormat::EnviBsq;
  std::vector<std::size_t> bands;  // empty keeps every band
  SegmentationParams params;
  bool strict = false;
  std::filesystem::path out_labels;
  std::filesystem::path out_stats;
  std::filesystem::path out_preview;
  std::array<std::size_t, 3> preview_bands{0, 1, 2};

  void validate() const;
};

struct SeedingOutcome {
  SumHistogram histogram;
  std::vector<SumRange> ranges;
  SeedMap seeds;
};

struct RunReport {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 0;
  unsigned depth = 0;
  std::vector<SumRange> ranges;
  std::vector<LabelKey> label_table;
  std::size_t seed_count = 0;
  double seed_fraction = 0.0;
  std::size_t initial_steps = 0;
  bool initial_converged = false;
  std::size_t segments_before = 0;
  std::size_t segments_after = 0;
  std::size_t rounds_used = 0;
  std::vector<EliminationRound> rounds;
  std::vector<std::string> warnings;
  std::map<std::string, double> timings;  // seconds per phase

  bool converged() const noexcept;
};

struct SegmentationResult {
  AutomatonGrid grid;
  SegmentSet segments;  // final, with signatures
  RunReport report;
};

/// Keeps the listed bands, in the listed order.
MultibandImage select_bands(const MultibandImage& image, std::span<const std::size_t> bands);

/// Histogram, range selection and seed generation. Throws ContractError
/// naming the range parameters when no seed results.
SeedingOutcome seed_image(const MultibandImage& image, const SegmentationParams& params);

/// Full in-memory pipeline: seeds, evolution, small-segment elimination,
/// segment extraction and medoid signatures.
SegmentationResult segment_image(const MultibandImage& image, const SegmentationParams& params);

/// `segment` subcommand: load, segment, write labels / stats / preview.
RunReport run_segment(const PipelineConfig& config);

/// `seeds` subcommand: load, seed, write the seed raster and stats.
RunReport run_seeds(const PipelineConfig& config);

/// `stats` subcommand: segment statistics recomputed from a label raster.
nlohmann::json label_raster_stats(const LabelRaster& labels, Neighborhood connectivity);

/// Stats document for a segment run. Keys are sorted; wall times live
/// under "timing_seconds" only.
nlohmann::json segment_stats(const RunReport& report, const SegmentSet& segments,
                             const SegmentationParams& params);
nlohmann::json seed_stats(const RunReport& report, const SegmentationParams& params);

std::string region_name(SpectralRegion region);
std::string neighborhood_name(Neighborhood nb);

}  // namespace casegment
