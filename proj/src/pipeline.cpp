#include "casegment/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace casegment {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class PhaseTimer {
 public:
  explicit PhaseTimer(std::map<std::string, double>& sink) : sink_(sink) {}

  void lap(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    sink_[phase] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

 private:
  std::map<std::string, double>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string describe_range_params(const SegmentationParams& p) {
  std::ostringstream s;
  s << "--smooth-window " << p.ranges.smooth_window << ", --prominence " << p.ranges.prominence_frac
    << ", --min-separation " << p.ranges.min_separation << ", --half-width " << p.ranges.half_width
    << ", --max-peaks " << p.ranges.max_peaks << ", --stride " << p.stride;
  return s.str();
}

MultibandImage load_input(const PipelineConfig& config) {
  MultibandImage image = load_image(config.input, config.format);
  if (!config.bands.empty()) image = select_bands(image, config.bands);
  return image;
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

json config_json(const SegmentationParams& p) {
  return {{"neighborhood", neighborhood_name(p.neighborhood)},
          {"delta_rel", p.delta_rel},
          {"smooth_window", p.ranges.smooth_window},
          {"prominence", p.ranges.prominence_frac},
          {"min_separation", p.ranges.min_separation},
          {"half_width", p.ranges.half_width},
          {"max_peaks", p.ranges.max_peaks},
          {"stride", p.stride},
          {"epsilon", p.epsilon},
          {"min_area", p.min_area},
          {"max_iters", p.max_iters},
          {"max_rounds", p.max_rounds}};
}

json image_json(const RunReport& r) {
  return {{"width", r.width}, {"height", r.height}, {"bands", r.bands}, {"depth", r.depth}};
}

json seeding_json(const RunReport& r) {
  json ranges = json::array();
  for (const SumRange& range : r.ranges)
    ranges.push_back({{"lo", range.lo}, {"hi", range.hi}, {"peak", range.peak}});
  json labels = json::array();
  for (std::size_t i = 0; i < r.label_table.size(); ++i)
    labels.push_back({{"id", i + 1},
                      {"range", r.label_table[i].range_index},
                      {"region", region_name(r.label_table[i].region)}});
  return {{"ranges", ranges},
          {"seed_count", r.seed_count},
          {"seed_fraction", r.seed_fraction},
          {"label_count", r.label_table.size()},
          {"labels", labels}};
}

// Per-segment and per-label summaries shared by `segment` and `stats`.
json segment_summary(const SegmentSet& segments, bool with_signatures) {
  json list = json::array();
  std::map<LabelId, std::pair<std::size_t, std::size_t>> per_label;  // area, segment count
  std::size_t labeled = 0;
  for (const Segment& s : segments.segments) {
    json entry = {{"id", s.id}, {"label", s.label}, {"area", s.area()}};
    if (with_signatures) entry["signature"] = s.signature;
    list.push_back(std::move(entry));
    auto& [area, count] = per_label[s.label];
    area += s.area();
    ++count;
    labeled += s.area();
  }
  json labels = json::array();
  for (const auto& [label, stats] : per_label)
    labels.push_back({{"label", label}, {"area", stats.first}, {"segments", stats.second}});
  return {{"segment_count", segments.size()},
          {"label_count", per_label.size()},
          {"labeled_cells", labeled},
          {"labels", labels},
          {"segments", list}};
}

}  // namespace

void SegmentationParams::validate() const {
  if (!(delta_rel >= 0.0)) throw UsageError("--delta-rel must be non-negative");
  if (ranges.smooth_window == 0 || ranges.smooth_window % 2 == 0)
    throw UsageError("--smooth-window must be a positive odd number");
  if (!(ranges.prominence_frac > 0.0 && ranges.prominence_frac < 1.0))
    throw UsageError("--prominence must lie in (0, 1)");
  if (ranges.min_separation == 0) throw UsageError("--min-separation must be positive");
  if (ranges.max_peaks == 0) throw UsageError("--max-peaks must be positive");
  if (stride == 0) throw UsageError("--stride must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw UsageError("--epsilon must lie in (0, 1)");
  if (min_area == 0) throw UsageError("--min-area must be at least 1");
}

void PipelineConfig::validate() const {
  params.validate();
  if (input.empty()) throw UsageError("--input is required");
}

bool RunReport::converged() const noexcept {
  if (!initial_converged) return false;
  for (const EliminationRound& r : rounds)
    if (!r.converged) return false;
  return true;
}

MultibandImage select_bands(const MultibandImage& image, std::span<const std::size_t> bands) {
  if (bands.empty()) throw UsageError("band subset is empty");
  for (std::size_t b : bands)
    if (b >= image.bands())
      throw UsageError("band " + std::to_string(b) + " out of range for a " +
                       std::to_string(image.bands()) + "-band image");
  std::vector<Sample> samples;
  samples.reserve(image.pixel_count() * bands.size());
  for (std::size_t i = 0; i < image.pixel_count(); ++i)
    for (std::size_t b : bands) samples.push_back(image.at(i, b));
  return MultibandImage(image.width(), image.height(), bands.size(), image.depth(), std::move(samples));
}

SeedingOutcome seed_image(const MultibandImage& image, const SegmentationParams& params) {
  params.validate();
  SeedingOutcome out;
  out.histogram = compute_sum_histogram(image, params.threads);
  out.ranges = select_ranges(out.histogram, params.ranges);
  out.seeds = generate_seeds(image, out.ranges, params.delta_rel, params.stride);
  if (out.seeds.entries.empty()) {
    std::ostringstream msg;
    msg << "no seeds: no sampled pixel has a band sum inside the selected ranges";
    for (const SumRange& r : out.ranges) msg << " [" << r.lo << ", " << r.hi << "]";
    msg << "; range parameters were " << describe_range_params(params)
        << " (try a larger --half-width or a smaller --stride)";
    throw ContractError(msg.str());
  }
  return out;
}

SegmentationResult segment_image(const MultibandImage& image, const SegmentationParams& params) {
  SegmentationResult result;
  RunReport& report = result.report;
  report.width = image.width();
  report.height = image.height();
  report.bands = image.bands();
  report.depth = image.depth();
  PhaseTimer timer(report.timings);

  SeedingOutcome seeding = seed_image(image, params);
  report.ranges = seeding.ranges;
  report.label_table = seeding.seeds.label_table;
  report.seed_count = seeding.seeds.entries.size();
  report.seed_fraction = static_cast<double>(report.seed_count) / static_cast<double>(image.pixel_count());
  timer.lap("seeding");

  const AttenuationParams attenuation = AttenuationParams::for_image(image, params.epsilon);
  const std::size_t max_iters = params.max_iters != 0 ? params.max_iters : 10 * (image.width() + image.height());
  ConvergenceResult evolved =
      run_to_convergence(init_from_seeds(image.width(), image.height(), seeding.seeds), image,
                         params.neighborhood, attenuation, max_iters, params.threads);
  report.initial_steps = evolved.steps;
  report.initial_converged = evolved.converged;
  if (!evolved.converged)
    report.warnings.push_back("initial evolution stopped at max_iters " + std::to_string(max_iters) +
                              " without converging");
  timer.lap("evolution");

  EliminationResult eliminated;
  try {
    eliminated = eliminate_oversegmentation(
        std::move(evolved.grid), image, params.neighborhood, attenuation,
        {params.min_area, params.max_rounds, max_iters, params.threads});
  } catch (const ContractError& e) {
    throw ContractError(std::string(e.what()) + " (initial segmentation has only smaller segments; "
                        "lower --min-area)");
  }
  report.rounds_used = eliminated.rounds_used;
  report.rounds = eliminated.rounds;
  report.segments_before = eliminated.rounds.empty()
                               ? 0
                               : eliminated.rounds.front().segments_before;
  for (const EliminationRound& r : eliminated.rounds)
    if (!r.converged)
      report.warnings.push_back("re-evolution stopped at max_iters " + std::to_string(max_iters) +
                                " without converging");
  timer.lap("elimination");

  result.grid = std::move(eliminated.grid);
  result.segments = extract_segments(result.grid.to_raster(), params.neighborhood);
  if (eliminated.rounds.empty()) report.segments_before = result.segments.size();
  report.segments_after = result.segments.size();
  for (const Segment& s : result.segments.segments)
    if (s.area() < params.min_area) {
      report.warnings.push_back("segments below min_area remain after " +
                                std::to_string(report.rounds_used) + " rounds");
      break;
    }
  compute_signatures(result.segments, image, params.threads);
  timer.lap("signatures");
  return result;
}

RunReport run_segment(const PipelineConfig& config) {
  config.validate();
  if (config.out_labels.empty()) throw UsageError("--out-labels is required");
  if (config.out_stats.empty()) throw UsageError("--out-stats is required");

  const auto start = std::chrono::steady_clock::now();
  const MultibandImage image = load_input(config);
  const double load_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!config.out_preview.empty())
    for (std::size_t b : config.preview_bands)
      if (b >= image.bands())
        throw UsageError("--preview-bands index " + std::to_string(b) + " out of range");

  SegmentationResult result = segment_image(image, config.params);
  RunReport& report = result.report;
  report.timings["load"] = load_seconds;

  const auto write_start = std::chrono::steady_clock::now();
  save_label_raster(result.grid.to_raster(), config.out_labels);
  if (!config.out_preview.empty()) {
    SignatureTable signatures;
    for (const Segment& s : result.segments.segments) signatures.emplace(s.id, s.signature);
    save_preview(image, result.segments.to_raster(), signatures, config.preview_bands, config.out_preview);
  }
  report.timings["write"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - write_start).count();
  write_json(segment_stats(report, result.segments, config.params), config.out_stats);
  return report;
}

RunReport run_seeds(const PipelineConfig& config) {
  config.validate();
  if (config.out_labels.empty()) throw UsageError("--out-labels is required");
  if (config.out_stats.empty()) throw UsageError("--out-stats is required");

  RunReport report;
  PhaseTimer timer(report.timings);
  const MultibandImage image = load_input(config);
  report.width = image.width();
  report.height = image.height();
  report.bands = image.bands();
  report.depth = image.depth();
  timer.lap("load");

  const SeedingOutcome seeding = seed_image(image, config.params);
  report.ranges = seeding.ranges;
  report.label_table = seeding.seeds.label_table;
  report.seed_count = seeding.seeds.entries.size();
  report.seed_fraction = static_cast<double>(report.seed_count) / static_cast<double>(image.pixel_count());
  report.initial_converged = true;
  timer.lap("seeding");

  save_label_raster(seeding.seeds.to_raster(image.width(), image.height()), config.out_labels);
  timer.lap("write");
  write_json(seed_stats(report, config.params), config.out_stats);
  return report;
}

json label_raster_stats(const LabelRaster& labels, Neighborhood connectivity) {
  const SegmentSet segments = extract_segments(labels, connectivity);
  json doc = segment_summary(segments, false);
  doc["command"] = "stats";
  doc["connectivity"] = neighborhood_name(connectivity);
  doc["raster"] = {{"width", labels.width}, {"height", labels.height}};
  return doc;
}

json segment_stats(const RunReport& report, const SegmentSet& segments,
                   const SegmentationParams& params) {
  json rounds = json::array();
  for (const EliminationRound& r : report.rounds)
    rounds.push_back({{"segments_before", r.segments_before},
                      {"segments_cleared", r.cleared.segments_cleared},
                      {"cells_cleared", r.cleared.cells_cleared},
                      {"steps", r.steps},
                      {"converged", r.converged}});
  json doc;
  doc["command"] = "segment";
  doc["image"] = image_json(report);
  doc["config"] = config_json(params);
  doc["seeding"] = seeding_json(report);
  doc["evolution"] = {{"steps", report.initial_steps}, {"converged", report.initial_converged}};
  doc["elimination"] = {{"min_area", params.min_area},
                        {"segments_before", report.segments_before},
                        {"segments_after", report.segments_after},
                        {"rounds_used", report.rounds_used},
                        {"rounds", rounds}};
  doc["result"] = segment_summary(segments, true);
  doc["warnings"] = report.warnings;
  doc["timing_seconds"] = report.timings;
  return doc;
}

json seed_stats(const RunReport& report, const SegmentationParams& params) {
  json doc;
  doc["command"] = "seeds";
  doc["image"] = image_json(report);
  doc["config"] = config_json(params);
  doc["seeding"] = seeding_json(report);
  doc["warnings"] = report.warnings;
  doc["timing_seconds"] = report.timings;
  return doc;
}

std::string region_name(SpectralRegion region) {
  if (region.is_balanced()) return "balanced";
  return "dominant:" + std::to_string(region.band());
}

std::string neighborhood_name(Neighborhood nb) {
  return nb == Neighborhood::Moore8 ? "moore" : "vonneumann";
}

}  // namespace casegment
