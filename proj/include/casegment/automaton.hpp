#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "casegment/raster.hpp"
#include "casegment/seeding.hpp"

namespace casegment {

struct CellState {
  LabelId label = kNullLabel;
  double strength = 0.0;

  bool operator==(const CellState&) const = default;
};

/// Automaton state over the image grid, stored as parallel label/strength
/// arrays. Invariant: label == kNullLabel iff strength == 0.
struct AutomatonGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<LabelId> labels;
  std::vector<double> strengths;
  std::size_t step = 0;

  AutomatonGrid() = default;
  AutomatonGrid(std::size_t w, std::size_t h)
      : width(w), height(h), labels(w * h, kNullLabel), strengths(w * h, 0.0) {}

  std::size_t size() const noexcept { return labels.size(); }
  CellState cell(std::size_t i) const noexcept { return {labels[i], strengths[i]}; }
  void set(std::size_t i, CellState s) noexcept {
    labels[i] = s.label;
    strengths[i] = s.strength;
  }
  LabelRaster to_raster() const { return LabelRaster(width, height, labels); }

  /// Compares cell states only; the step counter is ignored.
  bool same_state(const AutomatonGrid& other) const noexcept {
    return width == other.width && height == other.height && labels == other.labels &&
           strengths == other.strengths;
  }
};

enum class Neighborhood { Moore8, VonNeumann4 };

struct Offset {
  int dx;
  int dy;
};

/// Neighbor offsets in row-major order (top-left to bottom-right), center
/// excluded. Both the automaton and segment extraction enumerate in this order.
std::span<const Offset> neighbor_offsets(Neighborhood nb) noexcept;

struct AttenuationParams {
  double d_max = 1.0;
  double epsilon = 1e-6;

  /// d_max = (2^depth - 1) * sqrt(bands).
  static AttenuationParams for_image(const MultibandImage& image, double epsilon = 1e-6);
};

/// max(epsilon, 1 - d / d_max)
inline double attenuation(double distance, const AttenuationParams& params) noexcept {
  const double g = 1.0 - distance / params.d_max;
  return g > params.epsilon ? g : params.epsilon;
}

/// Euclidean distance between two spectral vectors of equal length.
double spectral_distance(std::span<const Sample> a, std::span<const Sample> b) noexcept;

/// Seeds start at strength 1; every other cell is null with strength 0.
AutomatonGrid init_from_seeds(std::size_t width, std::size_t height, const SeedMap& seeds);

struct StepResult {
  AutomatonGrid grid;
  bool changed = false;
};

/// One synchronous application of the attack rule to every cell. Reads only
/// the input grid, so the result is independent of `threads`.
StepResult evolve_step(const AutomatonGrid& grid, const MultibandImage& image, Neighborhood nb,
                       const AttenuationParams& params, unsigned threads = 1);

struct ConvergenceResult {
  AutomatonGrid grid;
  std::size_t steps = 0;  // evolve_step calls, including the final unchanged pass
  bool converged = false;
};

ConvergenceResult run_to_convergence(AutomatonGrid grid, const MultibandImage& image,
                                     Neighborhood nb, const AttenuationParams& params,
                                     std::size_t max_iters, unsigned threads = 1);

}  // namespace casegment
