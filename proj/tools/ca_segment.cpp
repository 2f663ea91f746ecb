// ca-segment: unsupervised multispectral segmentation with a cellular automaton.
//
// Exit codes: 0 success, 1 usage error, 2 data or contract error (including
// non-convergence under --strict).

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "casegment/pipeline.hpp"

namespace {

using namespace casegment;

std::vector<std::size_t> parse_index_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a band index");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " needs at least one index");
  return out;
}

struct Options {
  PipelineConfig config;
  std::string format = "envi-bsq";
  std::string bands;
  std::string neighborhood = "moore";
  std::string preview_bands = "0,1,2";
};

void add_intake_flags(CLI::App& cmd, Options& o) {
  auto& p = o.config.params;
  cmd.add_option("--input", o.config.input, "Input raster (ENVI header/payload or PPM)")->required();
  cmd.add_option("--format", o.format, "envi-bsq or ppm")
      ->check(CLI::IsMember({"envi-bsq", "ppm"}))
      ->capture_default_str();
  cmd.add_option("--bands", o.bands, "Comma-separated band subset, e.g. 2,1,0");
  cmd.add_option("--neighborhood", o.neighborhood, "moore or vonneumann")
      ->check(CLI::IsMember({"moore", "vonneumann"}))
      ->capture_default_str();
  cmd.add_option("--delta-rel", p.delta_rel, "Relative band spread still counted as balanced")
      ->capture_default_str();
  cmd.add_option("--smooth-window", p.ranges.smooth_window, "Histogram smoothing window (odd)")
      ->capture_default_str();
  cmd.add_option("--prominence", p.ranges.prominence_frac,
                 "Minimum peak height as a fraction of the tallest")
      ->capture_default_str();
  cmd.add_option("--min-separation", p.ranges.min_separation, "Minimum bins between peaks")
      ->capture_default_str();
  cmd.add_option("--half-width", p.ranges.half_width, "Range half width around each peak")
      ->capture_default_str();
  cmd.add_option("--max-peaks", p.ranges.max_peaks, "Maximum number of band-sum ranges")
      ->capture_default_str();
  cmd.add_option("--stride", p.stride, "Seed lattice stride in pixels")->capture_default_str();
  cmd.add_option("--epsilon", p.epsilon, "Attenuation floor")->capture_default_str();
  cmd.add_option("--threads", p.threads, "Worker threads (0 = all cores)")->capture_default_str();
  cmd.add_option("--out-labels", o.config.out_labels, "Label raster output path")->required();
  cmd.add_option("--out-stats", o.config.out_stats, "Stats JSON output path")->required();
}

void finish_options(Options& o) {
  o.config.format = o.format == "ppm" ? ImageFormat::Ppm : ImageFormat::EnviBsq;
  o.config.params.neighborhood =
      o.neighborhood == "vonneumann" ? Neighborhood::VonNeumann4 : Neighborhood::Moore8;
  if (!o.bands.empty()) o.config.bands = parse_index_list(o.bands, "--bands");
  const auto triple = parse_index_list(o.preview_bands, "--preview-bands");
  if (triple.size() != 3) throw UsageError("--preview-bands needs exactly three indices");
  std::copy(triple.begin(), triple.end(), o.config.preview_bands.begin());
}

void print_summary(const RunReport& r, bool segmented) {
  std::cout << "image " << r.width << "x" << r.height << "x" << r.bands << " (" << r.depth
            << "-bit)\n"
            << "ranges " << r.ranges.size() << ", labels " << r.label_table.size() << ", seeds "
            << r.seed_count << " (" << 100.0 * r.seed_fraction << "% of pixels)\n";
  if (!segmented) return;
  std::cout << "converged after " << r.initial_steps << " steps" << (r.initial_converged ? "" : " (NOT converged)")
            << "\n"
            << "segments " << r.segments_before << " -> " << r.segments_after << " after "
            << r.rounds_used << " elimination round(s)\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised multispectral segmentation with a deterministic cellular automaton"};
  app.require_subcommand(1);

  Options segment_opts;
  auto* segment = app.add_subcommand("segment", "Seed, evolve, eliminate small segments, write results");
  add_intake_flags(*segment, segment_opts);
  segment->add_option("--min-area", segment_opts.config.params.min_area,
                      "Smallest segment area kept (pixels)")
      ->capture_default_str();
  segment->add_option("--max-iters", segment_opts.config.params.max_iters,
                      "Evolution step cap (0 = 10 * (width + height))")
      ->capture_default_str();
  segment->add_option("--max-rounds", segment_opts.config.params.max_rounds,
                      "Elimination rounds cap")
      ->capture_default_str();
  segment->add_flag("--strict", segment_opts.config.strict, "Fail when evolution does not converge");
  segment->add_option("--out-preview", segment_opts.config.out_preview, "Preview PPM output path");
  segment->add_option("--preview-bands", segment_opts.preview_bands, "Bands rendered as r,g,b")
      ->capture_default_str();

  Options seeds_opts;
  auto* seeds = app.add_subcommand("seeds", "Write the automatic seed map as a label raster");
  add_intake_flags(*seeds, seeds_opts);

  std::string stats_labels;
  std::string stats_out;
  std::string stats_neighborhood = "moore";
  auto* stats = app.add_subcommand("stats", "Recompute segment statistics from a label raster");
  stats->add_option("--labels", stats_labels, "Label raster path")->required();
  stats->add_option("--neighborhood", stats_neighborhood, "Segment connectivity: moore or vonneumann")
      ->check(CLI::IsMember({"moore", "vonneumann"}))
      ->capture_default_str();
  stats->add_option("--out-stats", stats_out, "Write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*segment) {
      finish_options(segment_opts);
      const RunReport report = run_segment(segment_opts.config);
      print_summary(report, true);
      if (segment_opts.config.strict && !report.converged()) {
        std::cerr << "error: evolution did not converge (--strict)\n";
        return 2;
      }
    } else if (*seeds) {
      finish_options(seeds_opts);
      print_summary(run_seeds(seeds_opts.config), false);
    } else if (*stats) {
      const auto nb = stats_neighborhood == "vonneumann" ? Neighborhood::VonNeumann4 : Neighborhood::Moore8;
      const auto doc = label_raster_stats(load_label_raster(stats_labels), nb);
      if (stats_out.empty()) {
        std::cout << doc.dump(2) << "\n";
      } else {
        std::ofstream out(stats_out, std::ios::trunc);
        if (!out) throw IoError("cannot write " + stats_out);
        out << doc.dump(2) << "\n";
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
