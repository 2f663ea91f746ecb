#include "casegment/automaton.hpp"

#include <array>
#include <cmath>
#include <string>

#include "casegment/detail/parallel.hpp"
#include "casegment/errors.hpp"

namespace casegment {

namespace {

constexpr std::array<Offset, 8> kMoore{{{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
constexpr std::array<Offset, 4> kVonNeumann{{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};

void check_dimensions(const AutomatonGrid& grid, const MultibandImage& image) {
  if (grid.width != image.width() || grid.height != image.height() ||
      grid.labels.size() != image.pixel_count() || grid.strengths.size() != image.pixel_count())
    throw ContractError("automaton grid " + std::to_string(grid.width) + "x" +
                        std::to_string(grid.height) + " does not match image " +
                        std::to_string(image.width()) + "x" + std::to_string(image.height()));
}

// Applies the attack rule to rows [y0, y1) of `src`, writing into `dst`.
// A neighbor whose strength does not exceed the running strength cannot win
// (attenuation <= 1), so its distance is never computed.
bool evolve_rows(const AutomatonGrid& src, AutomatonGrid& dst, const MultibandImage& image,
                 std::span<const Offset> offsets, const AttenuationParams& params, std::size_t y0,
                 std::size_t y1) {
  const auto width = static_cast<long>(src.width);
  const auto height = static_cast<long>(src.height);
  bool changed = false;
  for (auto y = static_cast<long>(y0); y < static_cast<long>(y1); ++y) {
    for (long x = 0; x < width; ++x) {
      const auto p = static_cast<std::size_t>(y * width + x);
      LabelId label = src.labels[p];
      double strength = src.strengths[p];
      for (const Offset& o : offsets) {
        const long nx = x + o.dx;
        const long ny = y + o.dy;
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        const auto q = static_cast<std::size_t>(ny * width + nx);
        const double attacker = src.strengths[q];
        if (attacker <= strength) continue;
        const double force = attenuation(spectral_distance(image.pixel(p), image.pixel(q)), params) * attacker;
        if (force > strength) {
          label = src.labels[q];
          strength = force;
        }
      }
      dst.labels[p] = label;
      dst.strengths[p] = strength;
      changed |= label != src.labels[p] || strength != src.strengths[p];
    }
  }
  return changed;
}

bool evolve_into(const AutomatonGrid& src, AutomatonGrid& dst, const MultibandImage& image,
                 Neighborhood nb, const AttenuationParams& params, unsigned threads) {
  const auto offsets = neighbor_offsets(nb);
  const unsigned blocks = static_cast<unsigned>(
      std::min<std::size_t>(detail::resolve_threads(threads), src.height));
  std::vector<char> block_changed(blocks, 0);
  detail::parallel_blocks(src.height, blocks, [&](std::size_t block, std::size_t y0, std::size_t y1) {
    block_changed[block] = evolve_rows(src, dst, image, offsets, params, y0, y1);
  });
  dst.step = src.step + 1;
  for (char c : block_changed)
    if (c) return true;
  return false;
}

}  // namespace

std::span<const Offset> neighbor_offsets(Neighborhood nb) noexcept {
  if (nb == Neighborhood::VonNeumann4) return kVonNeumann;
  return kMoore;
}

AttenuationParams AttenuationParams::for_image(const MultibandImage& image, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractError("epsilon must lie in (0, 1)");
  return {static_cast<double>(image.max_value()) * std::sqrt(static_cast<double>(image.bands())), epsilon};
}

double spectral_distance(std::span<const Sample> a, std::span<const Sample> b) noexcept {
  std::int64_t sq = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t d = static_cast<std::int64_t>(a[i]) - static_cast<std::int64_t>(b[i]);
    sq += d * d;
  }
  return std::sqrt(static_cast<double>(sq));
}

AutomatonGrid init_from_seeds(std::size_t width, std::size_t height, const SeedMap& seeds) {
  AutomatonGrid grid(width, height);
  for (const SeedEntry& e : seeds.entries) {
    if (e.pixel >= grid.size())
      throw ContractError("seed pixel " + std::to_string(e.pixel) + " outside the grid");
    if (e.label == kNullLabel) throw ContractError("seed carries the null label");
    if (grid.labels[e.pixel] != kNullLabel)
      throw ContractError("pixel " + std::to_string(e.pixel) + " seeded twice");
    grid.set(e.pixel, {e.label, 1.0});
  }
  return grid;
}

StepResult evolve_step(const AutomatonGrid& grid, const MultibandImage& image, Neighborhood nb,
                       const AttenuationParams& params, unsigned threads) {
  check_dimensions(grid, image);
  StepResult result{grid, false};
  result.changed = evolve_into(grid, result.grid, image, nb, params, threads);
  return result;
}

ConvergenceResult run_to_convergence(AutomatonGrid grid, const MultibandImage& image,
                                     Neighborhood nb, const AttenuationParams& params,
                                     std::size_t max_iters, unsigned threads) {
  check_dimensions(grid, image);
  if (max_iters == 0) throw ContractError("max_iters must be at least 1");
  AutomatonGrid scratch = grid;
  ConvergenceResult result;
  while (result.steps < max_iters) {
    const bool changed = evolve_into(grid, scratch, image, nb, params, threads);
    std::swap(grid, scratch);
    ++result.steps;
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  result.grid = std::move(grid);
  return result;
}

}  // namespace casegment
