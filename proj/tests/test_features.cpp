#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ucstereo/features.hpp"

using namespace ucs;

namespace {

RasterImage remap(const RasterImage& img, auto&& fn) {
  RasterImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = static_cast<float>(fn(img[i]));
  return out;
}

}  // namespace

TEST_CASE("census channels are exactly +-1") {
  const RasterImage img = testing::random_image(20, 17, 1);
  FeatureConfig cfg;
  cfg.census_radius = 2;
  const FeatureMap f = census_transform(img, cfg);
  CHECK(f.channels() == 24);
  for (float v : f.values()) CHECK((v == 1.0f || v == -1.0f));
}

TEST_CASE("census ties map to -1") {
  const RasterImage flat(9, 9, 0.3f);
  FeatureConfig cfg;
  cfg.census_radius = 1;
  const FeatureMap f = census_transform(flat, cfg);
  for (float v : f.values()) CHECK(v == -1.0f);
}

TEST_CASE("census is invariant to monotone intensity maps") {
  const RasterImage img = testing::random_image(24, 24, 7);
  FeatureConfig cfg;
  cfg.census_radius = 3;
  cfg.group_count = 8;
  const FeatureMap base = census_transform(img, cfg);
  // Offset stays within [0,1] for the comparison to be meaningful.
  const RasterImage offset = remap(img, [](float v) { return v * 0.8 + 0.1; });
  const RasterImage gamma = remap(img, [](float v) { return std::pow(v, 2.2); });
  const RasterImage affine = remap(img, [](float v) { return 0.5 * v + 0.25; });
  CHECK(census_transform(offset, cfg).values() == base.values());
  CHECK(census_transform(gamma, cfg).values() == base.values());
  CHECK(census_transform(affine, cfg).values() == base.values());
}

TEST_CASE("gradient channels lie in [-1,1]") {
  const RasterImage img = testing::random_image(16, 16, 2);
  FeatureConfig cfg;
  cfg.census_radius = 1;
  cfg.include_gradients = true;
  cfg.group_count = 2;
  const FeatureMap f = census_transform(img, cfg);
  CHECK(f.channels() == 10);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 8; c < 10; ++c) CHECK(std::abs(f.at(x, y)[c]) <= 1.0f);
}

TEST_CASE("group count must divide the channel count") {
  const RasterImage img = testing::random_image(8, 8, 2);
  FeatureConfig cfg;
  cfg.census_radius = 1;
  cfg.group_count = 3;
  CHECK_THROWS_AS(census_transform(img, cfg), Error);
  cfg.census_radius = 5;
  cfg.group_count = 1;
  CHECK_THROWS_AS(census_transform(img, cfg), Error);  // window larger than image
}

TEST_CASE("census is thread-count independent") {
  const RasterImage img = testing::random_image(40, 33, 9);
  FeatureConfig cfg;
  CHECK(census_transform(img, cfg, 1).values() == census_transform(img, cfg, 7).values());
}

TEST_CASE("box pyramid halves with rounding up") {
  RasterImage img(5, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) img(x, y) = static_cast<float>(x + 10 * y) / 64.0f;
  const ImagePyramid p = build_pyramid(img, 3);
  REQUIRE(p.levels.size() == 3);
  CHECK(p.levels[1].width() == 3);
  CHECK(p.levels[1].height() == 2);
  CHECK(p.levels[2].width() == 2);
  CHECK(p.levels[2].height() == 1);
  // 2x2 block average, and the partial column at x = 4 averages two pixels.
  CHECK(p.levels[1](0, 0) == doctest::Approx((0 + 1 + 10 + 11) / 4.0 / 64.0));
  CHECK(p.levels[1](2, 0) == doctest::Approx((4 + 14) / 2.0 / 64.0));
  CHECK(p.levels[1](2, 1) == doctest::Approx(24 / 64.0));
}

TEST_CASE("pyramid of a constant image stays constant") {
  const RasterImage img(37, 21, 0.625f);
  const ImagePyramid p = build_pyramid(img, 5);
  for (const RasterImage& level : p.levels)
    for (float v : level.values()) CHECK(v == 0.625f);
}
