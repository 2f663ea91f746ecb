#include <random>

#include "casegment/errors.hpp"
#include "casegment/segments.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace casegment;

namespace {

std::vector<std::size_t> areas(const SegmentSet& s) {
  std::vector<std::size_t> out;
  for (const auto& seg : s.segments) out.push_back(seg.area());
  return out;
}

// Automaton grid whose labels are `labels`, all labeled cells at strength 1.
AutomatonGrid grid_from(const LabelRaster& r) {
  AutomatonGrid g(r.width, r.height);
  for (std::size_t i = 0; i < r.labels.size(); ++i)
    if (r.labels[i] != kNullLabel) g.set(i, {r.labels[i], 1.0});
  return g;
}

}  // namespace

TEST_CASE("segment extraction") {
  SUBCASE("two rows") {
    const SegmentSet s = extract_segments(LabelRaster(2, 2, {1, 1, 2, 2}), Neighborhood::Moore8);
    CHECK(areas(s) == std::vector<std::size_t>{2, 2});
    CHECK(s.segments[0].label == 1);
    CHECK(s.segments[1].label == 2);
    CHECK(s.segment_of == std::vector<SegmentId>{1, 1, 2, 2});
  }
  SUBCASE("checkerboard") {
    LabelRaster board(4, 4);
    for (std::size_t i = 0; i < 16; ++i) board.labels[i] = 1 + ((i % 4 + i / 4) % 2);
    CHECK(extract_segments(board, Neighborhood::VonNeumann4).size() == 16);
    // Diagonal contacts join under Moore connectivity.
    CHECK(extract_segments(board, Neighborhood::Moore8).size() == 2);
  }
  SUBCASE("null cells belong to no segment") {
    const SegmentSet s = extract_segments(LabelRaster(3, 1, {0, 4, 0}), Neighborhood::Moore8);
    REQUIRE(s.size() == 1);
    CHECK(s.segments[0].pixels == std::vector<std::size_t>{1});
    CHECK(s.segment_of == std::vector<SegmentId>{0, 1, 0});
  }
  SUBCASE("ids follow first-pixel order") {
    // Label 2 forms a U; its first pixel comes before label 1's.
    const SegmentSet s = extract_segments(LabelRaster(3, 2, {2, 1, 2, 2, 2, 2}), Neighborhood::VonNeumann4);
    REQUIRE(s.size() == 2);
    CHECK(s.segments[0].label == 2);
    CHECK(s.segments[0].area() == 5);
    CHECK(s.segments[1].label == 1);
  }
}

TEST_CASE("segment extraction matches a BFS oracle on random rasters") {
  std::mt19937 rng(53);
  for (int trial = 0; trial < 80; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 16);
    std::uniform_int_distribution<LabelId> id(0, 1 + trial % 4);
    LabelRaster r(dim(rng), dim(rng));
    for (auto& l : r.labels) l = id(rng);
    for (const Neighborhood nb : {Neighborhood::Moore8, Neighborhood::VonNeumann4}) {
      const SegmentSet s = extract_segments(r, nb);
      const auto expected = oracle::components(r, nb);
      REQUIRE(s.size() == expected.size());
      std::size_t labeled = 0, total = 0;
      for (LabelId l : r.labels) labeled += l != kNullLabel;
      for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(s.segments[k].id == k + 1);
        CHECK(s.segments[k].pixels == expected[k]);
        total += s.segments[k].area();
        for (std::size_t p : s.segments[k].pixels) {
          CHECK(s.segment_of[p] == k + 1);
          CHECK(r.labels[p] == s.segments[k].label);
        }
      }
      CHECK(total == labeled);
    }
  }
}

TEST_CASE("nulling small segments") {
  SUBCASE("singleton") {
    const LabelRaster r(3, 1, {1, 2, 2});
    AutomatonGrid g = grid_from(r);
    const auto res = null_small_segments(g, extract_segments(r, Neighborhood::Moore8), 150);
    CHECK(res.segments_cleared == 2);
    CHECK(g.cell(0) == CellState{kNullLabel, 0.0});
  }
  SUBCASE("nothing small") {
    const LabelRaster r(2, 1, {1, 1});
    AutomatonGrid g = grid_from(r);
    const auto res = null_small_segments(g, extract_segments(r, Neighborhood::Moore8), 2);
    CHECK(res.segments_cleared == 0);
    CHECK(g.same_state(grid_from(r)));
  }
  SUBCASE("threshold is strict") {
    // Stripes of 3, 149, 150 and 900 cells.
    const std::size_t w = 1202;
    LabelRaster r(w, 1);
    for (std::size_t i = 0; i < w; ++i) r.labels[i] = i < 3 ? 1 : i < 152 ? 2 : i < 302 ? 3 : 4;
    AutomatonGrid g = grid_from(r);
    const SegmentSet s = extract_segments(r, Neighborhood::Moore8);
    CHECK(areas(s) == std::vector<std::size_t>{3, 149, 150, 900});
    const auto res = null_small_segments(g, s, 150);
    CHECK(res.segments_cleared == 2);
    CHECK(res.cells_cleared == 152);
    for (std::size_t i = 0; i < w; ++i) CHECK((g.labels[i] == kNullLabel) == (i < 152));
  }
}

TEST_CASE("oversegmentation elimination") {
  SUBCASE("no small segments") {
    const MultibandImage img = synthetic::uniform(4, 4, {3});
    const LabelRaster r(4, 4, std::vector<LabelId>(16, 1));
    const auto res = eliminate_oversegmentation(grid_from(r), img, Neighborhood::Moore8,
                                                AttenuationParams::for_image(img), {10, 5});
    CHECK(res.rounds_used == 0);
    CHECK(res.grid.same_state(grid_from(r)));
  }
  SUBCASE("small region absorbed by the large one") {
    // 8x8: a 2x2 block (4 px) inside a 60 px surround, seeded per region.
    std::vector<int> region(64, 0);
    for (std::size_t y = 3; y < 5; ++y)
      for (std::size_t x = 3; x < 5; ++x) region[y * 8 + x] = 1;
    const MultibandImage img = synthetic::from_regions(8, 8, region, {{40, 40, 40}, {200, 60, 60}});
    const auto p = AttenuationParams::for_image(img);
    SeedMap seeds;
    seeds.entries = {{0, 1}, {3 * 8 + 3, 2}};
    const auto evolved = run_to_convergence(init_from_seeds(8, 8, seeds), img, Neighborhood::Moore8, p, 100);
    CHECK(areas(extract_segments(evolved.grid.to_raster(), Neighborhood::Moore8)) ==
          std::vector<std::size_t>{60, 4});

    const auto res = eliminate_oversegmentation(evolved.grid, img, Neighborhood::Moore8, p, {10, 5});
    CHECK(res.rounds_used == 1);
    REQUIRE(res.rounds.size() == 1);
    CHECK(res.rounds[0].cleared.segments_cleared == 1);
    CHECK(res.rounds[0].cleared.cells_cleared == 4);
    const SegmentSet after = extract_segments(res.grid.to_raster(), Neighborhood::Moore8);
    REQUIRE(after.size() == 1);
    CHECK(after.segments[0].area() == 64);
    CHECK(after.segments[0].label == 1);
  }
  SUBCASE("a sliver between two large regions is split by attack strength") {
    // 16x16: left block x < 7 (value 50), sliver x in [7, 9) (value 90),
    // right block x >= 9 (value 130). The sliver is equidistant from both.
    std::vector<int> region(256);
    for (std::size_t i = 0; i < 256; ++i) region[i] = i % 16 < 7 ? 0 : i % 16 < 9 ? 1 : 2;
    const MultibandImage img = synthetic::from_regions(16, 16, region, {{50}, {90}, {130}});
    const auto p = AttenuationParams::for_image(img);
    SeedMap seeds;
    seeds.entries = {{0, 1}, {7, 2}, {15, 3}};
    const auto evolved = run_to_convergence(init_from_seeds(16, 16, seeds), img, Neighborhood::Moore8, p, 500);
    const auto res = eliminate_oversegmentation(evolved.grid, img, Neighborhood::Moore8, p, {40, 5});
    CHECK(res.rounds_used == 1);

    // Oracle: null the sliver and re-run the literal simulator.
    oracle::SimGrid sim{evolved.grid.labels, evolved.grid.strengths};
    for (std::size_t i = 0; i < 256; ++i)
      if (region[i] == 1) {
        sim.label[i] = kNullLabel;
        sim.theta[i] = 0.0;
      }
    const auto expected = oracle::run(sim, img, Neighborhood::Moore8, p.epsilon, 500);
    CHECK(res.grid.labels == expected.grid.label);
    CHECK(res.grid.strengths == expected.grid.theta);
    for (std::size_t i = 0; i < 256; ++i)
      if (region[i] == 1) CHECK(res.grid.labels[i] == (i % 16 == 7 ? 1u : 3u));
    for (const auto& s : extract_segments(res.grid.to_raster(), Neighborhood::Moore8).segments)
      CHECK(s.area() >= 40);
  }
  SUBCASE("everything below min_area is a contract error") {
    const MultibandImage img = synthetic::uniform(3, 1, {3});
    const LabelRaster r(3, 1, {1, 2, 3});
    CHECK_THROWS_AS(eliminate_oversegmentation(grid_from(r), img, Neighborhood::Moore8,
                                               AttenuationParams::for_image(img), {2, 5}),
                    ContractError);
  }
}

TEST_CASE("medoid signature") {
  const MultibandImage img(3, 1, 2, 8, {0, 0, 0, 1, 10, 10});
  CHECK(medoid_signature(img, std::vector<std::size_t>{2}) == Signature{10, 10});
  CHECK(medoid_signature(img, std::vector<std::size_t>{0, 1, 2}) == Signature{0, 1});
  CHECK(medoid_signature(img, std::vector<std::size_t>{2, 1, 0}) == Signature{0, 1});
  CHECK_THROWS_AS(medoid_signature(img, std::vector<std::size_t>{}), ContractError);

  // Two members: equal sums, the lower pixel index wins.
  CHECK(medoid_signature(img, std::vector<std::size_t>{2, 0}) == Signature{0, 0});

  const MultibandImage flat = synthetic::uniform(5, 5, {4, 8});
  std::vector<std::size_t> all(25);
  std::iota(all.begin(), all.end(), std::size_t{0});
  CHECK(medoid_signature(flat, all) == Signature{4, 8});

  SUBCASE("subsampled medoid is still a member") {
    std::mt19937 rng(59);
    const MultibandImage noisy = synthetic::random_image(rng, 40, 40, 3);
    std::vector<std::size_t> px(1600);
    std::iota(px.begin(), px.end(), std::size_t{0});
    const Signature m = medoid_signature(noisy, px, 100);
    bool member = false;
    for (std::size_t i = 0; i < 1600; i += 16) member |= Signature(noisy.pixel(i).begin(), noisy.pixel(i).end()) == m;
    CHECK(member);
    std::vector<std::size_t> sample;
    for (std::size_t i = 0; i < 100; ++i) sample.push_back(i * 16);
    CHECK(m == oracle::medoid(noisy, sample));
  }
}

TEST_CASE("signatures for every segment, independent of threads") {
  std::mt19937 rng(61);
  const MultibandImage img = synthetic::random_image(rng, 30, 30, 2);
  LabelRaster r(30, 30);
  for (auto& l : r.labels) l = 1 + rng() % 3;
  SegmentSet one = extract_segments(r, Neighborhood::VonNeumann4);
  SegmentSet many = one;
  compute_signatures(one, img, 1);
  compute_signatures(many, img, 5);
  for (std::size_t k = 0; k < one.size(); ++k) {
    CHECK(one.segments[k].signature == oracle::medoid(img, one.segments[k].pixels));
    CHECK(many.segments[k].signature == one.segments[k].signature);
  }
}
