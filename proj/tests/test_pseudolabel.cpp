#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "ucstereo/pseudolabel.hpp"

using namespace ucs;

namespace {

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Grid<double> row(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return Grid<double>(n, 1, std::move(v));
}

SparseLabelMap label_of(const std::vector<float>& v) {
  const int n = static_cast<int>(v.size());
  SparseLabelMap out{DisparityRaster(n, 1, v), Grid<std::uint8_t>(n, 1, 0)};
  for (int i = 0; i < n; ++i) out.valid[i] = std::isnan(v[i]) ? 0 : 1;
  return out;
}

}  // namespace

TEST_CASE("pixel filter on the regression example") {
  const Grid<double> d = row({6.0, 6.4, 7.2});
  const Grid<double> u = row({0.0, 0.64, 3.36});
  const SparseLabelMap l = filter_by_pixel_uncertainty(d, u, 0.9);
  CHECK(l.valid[0] == 1);
  CHECK(l.valid[1] == 1);
  CHECK(l.valid[2] == 0);
  CHECK(l.disparity[1] == 6.4f);
  CHECK(std::isnan(l.disparity[2]));
  CHECK(filter_by_pixel_uncertainty(d, u, 1e9).density() == 1.0);
  CHECK(filter_by_pixel_uncertainty(d, u, 0.0).density() == 0.0);
}

TEST_CASE("pixel filter keeps exactly the pixels below the threshold (random)") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(0.0, 4.0);
  Grid<double> d(30, 20), u(30, 20);
  for (std::size_t i = 0; i < u.size(); ++i) {
    d[i] = uni(rng);
    u[i] = uni(rng);
  }
  double previous = -1.0;
  for (double t : {0.1, 0.5, 0.9, 1.2, 1.5, 2.1}) {
    const SparseLabelMap l = filter_by_pixel_uncertainty(d, u, t);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK((l.valid[i] == 1) == (std::sqrt(u[i]) < t));
    CHECK(l.density() >= previous);
    previous = l.density();
  }
}

TEST_CASE("uniform field gives the logistic of its spread") {
  AreaFilterConfig cfg;
  const RasterImage img(20, 20, 0.4f);
  const Grid<double> d(20, 20, 12.0);
  for (double spread : {0.0, 0.8, 1.5, 3.0}) {
    const Grid<double> u(20, 20, spread * spread);
    const AreaUncertaintyField a = area_uncertainty(d, u, img, cfg);
    const double expected = logistic(cfg.slope * (spread - cfg.midpoint));
    for (double v : a.values()) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("confident neighbours pull an isolated pixel down") {
  AreaFilterConfig cfg;
  const RasterImage img(21, 21, 0.5f);
  const Grid<double> d(21, 21, 8.0);
  Grid<double> u(21, 21, 0.01);
  u(10, 10) = 9.0;
  const AreaUncertaintyField a = area_uncertainty(d, u, img, cfg);
  CHECK(a(10, 10) < logistic(cfg.slope * (3.0 - cfg.midpoint)));
}

TEST_CASE("dissimilar neighbours leave a pixel on its own value") {
  AreaFilterConfig cfg;
  RasterImage img(21, 21, 0.0f);
  img(10, 10) = 1.0f;
  const Grid<double> d(21, 21, 8.0);
  Grid<double> u(21, 21, 0.01);
  u(10, 10) = 9.0;
  const AreaUncertaintyField a = area_uncertainty(d, u, img, cfg);
  CHECK(std::abs(a(10, 10) - logistic(cfg.slope * (3.0 - cfg.midpoint))) < 1e-3);
}

TEST_CASE("area uncertainty stays strictly inside (0,1)") {
  AreaFilterConfig cfg;
  const RasterImage img = testing::random_image(16, 16, 4);
  Grid<double> d(16, 16), u(16, 16);
  for (std::size_t i = 0; i < u.size(); ++i) {
    d[i] = static_cast<double>(i % 7);
    u[i] = (i % 3 == 0) ? 0.0 : 1e6;
  }
  const AreaUncertaintyField a = area_uncertainty(d, u, img, cfg);
  for (double v : a.values()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("area filter thresholds strictly") {
  const Grid<double> d = row({1.0, 2.0});
  AreaUncertaintyField a(2, 1);
  a[0] = 0.1;
  a[1] = 0.3;
  const SparseLabelMap l = filter_by_area_uncertainty(d, a, 0.2);
  CHECK(l.valid[0] == 1);
  CHECK(l.valid[1] == 0);
  const AreaUncertaintyField half(4, 4, 0.5);
  CHECK(filter_by_area_uncertainty(Grid<double>(4, 4, 1.0), half, 0.5).density() == 0.0);
  CHECK(filter_by_area_uncertainty(Grid<double>(4, 4, 1.0), half, 1.0).density() == 1.0);
  CHECK_THROWS_AS(filter_by_area_uncertainty(d, a, 0.0), Error);
  CHECK_THROWS_AS(filter_by_area_uncertainty(d, a, 1.5), Error);
}

TEST_CASE("area filter density is monotone in the threshold") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uni(1e-6, 1.0 - 1e-6);
  AreaUncertaintyField a(25, 25);
  for (double& v : a.values()) v = uni(rng);
  const Grid<double> d(25, 25, 3.0);
  double previous = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double density = filter_by_area_uncertainty(d, a, k / 20.0).density();
    CHECK(density >= previous);
    previous = density;
  }
}

TEST_CASE("left-right check examples") {
  const Grid<double> zero(10, 4, 0.0);
  CHECK(lrc_check(zero, zero, 1.0).density() == 1.0);
  const Grid<double> five(10, 4, 5.0);
  CHECK(lrc_check(five, zero, 1.0).density() == 0.0);
  // Lookups leaving the image are invalid even when the values agree.
  const SparseLabelMap l = lrc_check(five, five, 1.0);
  CHECK(l.valid[0] == 0);
  CHECK(l.valid[4] == 0);
  CHECK(l.valid[5] == 1);
  CHECK(std::isinf(lrc_disagreement(five, five)[2]));
}

TEST_CASE("left-right check flags occlusions on a stereogram") {
  StereogramSpec s;
  s.width = 128;
  s.height = 64;
  s.model = TwoLayer{24, 6, 40, 10, 90, 54};
  s.seed = 21;
  s.d_max = 32;
  const Stereogram g = generate_stereogram(s);
  CascadeParams p;
  p.d_max = 32;
  p.fused_scales = {3};
  const StageTrace l = run_cascade(g.left, g.right, FeatureConfig{}, p);
  const StageTrace r = run_cascade_right_view(g.left, g.right, FeatureConfig{}, p);
  const SparseLabelMap ok = lrc_check(l.disparity, r.disparity, 1.0);
  std::size_t occ = 0, occ_ok = 0, vis = 0, vis_ok = 0;
  for (std::size_t i = 0; i < ok.valid.size(); ++i) {
    if (g.occluded[i]) {
      ++occ;
      occ_ok += ok.valid[i];
    } else {
      ++vis;
      vis_ok += ok.valid[i];
    }
  }
  REQUIRE(occ > 0);
  CHECK(static_cast<double>(occ_ok) / occ < static_cast<double>(vis_ok) / vis);
}

TEST_CASE("ground-truth uncertainty mask") {
  const Grid<double> d = row({6.4, 7.2, 3.0});
  const DisparityRaster gt(3, 1, std::vector<float>{6.0f, 6.0f, kInvalidDisparity});
  const BinaryMask m = gt_uncertainty_mask(d, gt);
  CHECK(m[0] == 0);
  CHECK(m[1] == 1);
  CHECK(m[2] == BinaryMask::kUndefined);
  const DisparityRaster same(3, 1, std::vector<float>{6.4f, 7.2f, 3.0f});
  const BinaryMask exact = gt_uncertainty_mask(d, same);
  for (std::uint8_t v : exact.values()) CHECK(v == 0);
}

TEST_CASE("label statistics") {
  const DisparityRaster gt(4, 1, std::vector<float>{10, 10, 10, 10});
  const LabelStats s = label_stats(label_of({10, 14, kInvalidDisparity, 10}), gt);
  CHECK(s.density == doctest::Approx(0.75));
  CHECK(s.overlap == doctest::Approx(0.75));
  CHECK(s.d1 == doctest::Approx(1.0 / 3.0));

  const LabelStats full = label_stats(label_of({10, 10, 10, 10}), gt);
  CHECK(full.d1 == 0.0);
  CHECK(full.density == 1.0);
  CHECK(full.overlap == 1.0);

  const LabelStats half = label_stats(label_of({10, kInvalidDisparity, 10, kInvalidDisparity}), gt);
  CHECK(half.overlap == 0.5);
  CHECK(half.d1 == 0.0);

  const float n = kInvalidDisparity;
  CHECK_THROWS_AS(label_stats(label_of({n, n, n, n}), gt), Error);
}

TEST_CASE("generated labels combine both filters") {
  const Stereogram g = testing::constant_pair(9, 30, 64, 32);
  CascadeParams p;
  p.d_max = 32;
  p.fused_scales = {3};
  const StageTrace t = run_cascade(g.left, g.right, FeatureConfig{}, p);
  const PseudoLabelResult r = generate_pseudo_labels(t, g.left, 0.9, 0.2, AreaFilterConfig{});
  for (std::size_t i = 0; i < r.label.valid.size(); ++i) {
    CHECK(r.label.valid[i] == (r.pixel_label.valid[i] & r.area_label.valid[i]));
    if (r.label.valid[i]) {
      CHECK(std::sqrt(r.uncertainty[i]) < 0.9);
      CHECK(r.area[i] < 0.2);
    }
  }
  CHECK(r.label.density() > 0.0);
  CHECK(r.label.density() < 1.0);
  // The open upper bound passes everything through.
  const PseudoLabelResult all = generate_pseudo_labels(t, g.left, 0.9, 1.0, AreaFilterConfig{});
  CHECK(all.label.valid == all.pixel_label.valid);
}
