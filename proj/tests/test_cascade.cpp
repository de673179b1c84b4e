#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "ucstereo/cascade.hpp"

using namespace ucs;

namespace {

// One pixel carrying explicit hypotheses and probabilities.
struct Pixel {
  HypothesisSet hyp;
  ProbabilityVolume prob;
};

Pixel pixel(const std::vector<double>& d, const std::vector<double>& p) {
  Pixel out{HypothesisSet(1, 1, static_cast<int>(d.size())),
            {PlaneVolume(1, 1, static_cast<int>(d.size()))}};
  std::copy(d.begin(), d.end(), out.hyp.at(0, 0).begin());
  std::copy(p.begin(), p.end(), out.prob.probabilities.at(0, 0).begin());
  return out;
}

std::pair<double, double> regress(const std::vector<double>& d, const std::vector<double>& p) {
  const Pixel px = pixel(d, p);
  const DisparityField disp = soft_argmin(px.prob, px.hyp);
  const UncertaintyField unc = pixel_uncertainty(px.prob, px.hyp, disp);
  return {disp(0, 0), unc(0, 0)};
}

template <class G>
bool same_bits(const G& a, const G& b) {
  return a.same_shape(b) && std::memcmp(a.values().data(), b.values().data(),
                                        a.size() * sizeof(a.values()[0])) == 0;
}

CascadeParams small_params() {
  CascadeParams p;
  p.d_max = 32;
  p.fused_scales = {3};
  return p;
}

}  // namespace

TEST_CASE("regression on the illustrated distributions") {
  const std::vector<double> d = {2, 4, 6, 8, 10};
  auto [d1, u1] = regress(d, {0, 0, 1, 0, 0});
  CHECK(std::abs(d1 - 6.0) < 1e-9);
  CHECK(std::abs(u1 - 0.0) < 1e-9);
  auto [d2, u2] = regress(d, {0, 0, 0.8, 0.2, 0});
  CHECK(std::abs(d2 - 6.4) < 1e-9);
  CHECK(std::abs(u2 - 0.64) < 1e-9);
  auto [d3, u3] = regress(d, {0, 0, 0.7, 0, 0.3});
  CHECK(std::abs(d3 - 7.2) < 1e-9);
  CHECK(std::abs(u3 - 3.36) < 1e-9);
}

TEST_CASE("degenerate hypothesis lists regress exactly") {
  auto [d, u] = regress({3.7, 3.7, 3.7}, {0.2, 0.5, 0.3});
  CHECK(d == 3.7);
  CHECK(u == 0.0);
}

TEST_CASE("soft-argmin stays inside the hypothesis span and U >= 0 (random)") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 9;
    std::vector<double> d(n), p(n);
    double lo = 10.0 * u(rng), total = 0.0;
    for (int i = 0; i < n; ++i) {
      lo += u(rng);
      d[i] = lo;
      p[i] = u(rng);
      total += p[i];
    }
    for (double& q : p) q /= total;
    auto [disp, unc] = regress(d, p);
    CHECK(disp >= d.front());
    CHECK(disp <= d.back());
    CHECK(unc >= 0.0);
    CHECK(unc <= (d.back() - d.front()) * (d.back() - d.front()) / 4.0 + 1e-9);
  }
}

TEST_CASE("next stage range with zero uncertainty collapses to twice the estimate") {
  CascadeParams p = small_params();
  DisparityField d(4, 4, 1.25);
  UncertaintyField u(4, 4, 0.0);
  const RangeField r = next_stage_range(d, u, p, 3);
  CHECK(r.stage == 2);
  CHECK(r.lower.width() == 8);
  for (std::size_t i = 0; i < r.lower.size(); ++i) {
    CHECK(r.lower[i] == doctest::Approx(2.5));
    CHECK(r.upper[i] == doctest::Approx(2.5));
  }
}

TEST_CASE("next stage range follows (alpha+1) sqrt(U) + beta and clamps") {
  CascadeParams p = small_params();
  p.alpha[3] = 1.0;
  p.beta[3] = 0.5;
  DisparityField d(2, 2, 2.0);
  UncertaintyField u(2, 2, 0.25);
  d(1, 1) = 0.1;
  const RangeField r = next_stage_range(d, u, p, 3, 4, 4);
  // Half-width 2 * 0.5 + 0.5 = 1.5 at stage 3, doubled at stage 2.
  CHECK(r.lower(0, 0) == doctest::Approx(1.0));
  CHECK(r.upper(0, 0) == doctest::Approx(7.0));
  CHECK(r.lower(3, 3) == 0.0);  // clamped at zero
  for (std::size_t i = 0; i < r.lower.size(); ++i) {
    CHECK(r.lower[i] <= r.upper[i]);
    CHECK(r.upper[i] <= 32.0 / 4.0 - 1.0);
  }
}

TEST_CASE("hypothesis sampling is uniform, sorted and hits both ends") {
  RangeField r{Grid<double>(3, 2, 1.0), Grid<double>(3, 2, 4.0), 2};
  r.upper(2, 1) = 1.0;
  const HypothesisSet h = sample_hypotheses(r, 4);
  const auto a = h.at(0, 0);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == doctest::Approx(2.0));
  CHECK(a[3] == 4.0);
  for (double v : h.at(2, 1)) CHECK(v == 1.0);
  CHECK_NOTHROW(h.validate(8.0));
}

TEST_CASE("one-stage cascade over the full dense range equals the dense matcher") {
  const Stereogram g = testing::constant_pair(6, 9, 64, 32);
  CascadeParams p = small_params();
  FeatureConfig f;
  for (int scale : {1, 2, 3}) {
    const StageOutput dense = match_dense(g.left, g.right, f, p, scale);
    const int planes = p.planes_at_scale(scale);
    const int w = dense.disparity.width(), h = dense.disparity.height();
    RangeField range{Grid<double>(w, h, 0.0), Grid<double>(w, h, planes - 1.0), scale};
    const StageOutput one = match_in_range(g.left, g.right, f, p, scale, range, planes);
    CHECK(same_bits(dense.disparity, one.disparity));
    CHECK(same_bits(dense.uncertainty, one.uncertainty));
  }
}

TEST_CASE("cascade output shapes and stage order") {
  const Stereogram g = testing::constant_pair(8, 3, 64, 32);
  CascadeParams p = small_params();
  const StageTrace t = run_cascade(g.left, g.right, FeatureConfig{}, p);
  REQUIRE(t.stages.size() == 3);
  CHECK(t.stages[0].stage == 3);
  CHECK(t.stage(2).hypotheses.planes() == 16);
  CHECK(t.stage(1).hypotheses.planes() == 12);
  CHECK(t.stage(1).disparity.width() == 32);
  CHECK(t.disparity.width() == 64);
  CHECK_FALSE(t.stage(3).range.has_value());
  CHECK(t.stage(2).range.has_value());
  CHECK_THROWS_AS(t.stage(0), Error);
  for (double v : t.uncertainty.values()) CHECK(v >= 0.0);
  for (double v : t.disparity.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 32.0);
  }
}

TEST_CASE("refined stages search inside the previous range") {
  const Stereogram g = testing::constant_pair(11, 4, 64, 32);
  const StageTrace t = run_cascade(g.left, g.right, FeatureConfig{}, small_params());
  for (int stage : {2, 1}) {
    const StageOutput& s = t.stage(stage);
    for (int y = 0; y < s.disparity.height(); ++y)
      for (int x = 0; x < s.disparity.width(); ++x) {
        CHECK(s.hypotheses.at(x, y).front() == s.range->lower(x, y));
        CHECK(s.hypotheses.at(x, y).back() == doctest::Approx(s.range->upper(x, y)));
        CHECK(s.disparity(x, y) >= s.range->lower(x, y) - 1e-12);
        CHECK(s.disparity(x, y) <= s.range->upper(x, y) + 1e-12);
      }
  }
}

TEST_CASE("stage 0 is the doubled bilinear upsample of stage 1") {
  const Stereogram g = testing::constant_pair(5, 8, 64, 32);
  const StageTrace t = run_cascade(g.left, g.right, FeatureConfig{}, small_params());
  const Grid<double> up = resize_bilinear(t.stage(1).disparity, 64, 64);
  const Grid<double> uu = resize_bilinear(t.stage(1).uncertainty, 64, 64);
  for (std::size_t i = 0; i < up.size(); ++i) {
    CHECK(t.disparity[i] == 2.0 * up[i]);
    CHECK(t.uncertainty[i] == 4.0 * uu[i]);
  }
}

TEST_CASE("cascade results do not depend on the thread count") {
  const Stereogram g = testing::constant_pair(13, 6, 96, 64);
  CascadeParams p;
  p.d_max = 64;
  p.threads = 1;
  const StageTrace a = run_cascade(g.left, g.right, FeatureConfig{}, p);
  p.threads = 8;
  const StageTrace b = run_cascade(g.left, g.right, FeatureConfig{}, p);
  CHECK(same_bits(a.disparity, b.disparity));
  CHECK(same_bits(a.uncertainty, b.uncertainty));
}

TEST_CASE("constant scene is recovered") {
  const Stereogram g = testing::constant_pair(16, 12, 96, 64);
  CascadeParams p;
  p.d_max = 64;
  const StageTrace t = run_cascade(g.left, g.right, FeatureConfig{}, p);
  std::size_t good = 0, count = 0;
  for (int y = 0; y < 96; ++y)
    for (int x = 24; x < 96; ++x) {
      ++count;
      good += std::abs(t.disparity(x, y) - 16.0) < 0.5;
    }
  CHECK(static_cast<double>(good) / count > 0.9);
}

TEST_CASE("right-view cascade mirrors the problem") {
  const Stereogram g = testing::constant_pair(10, 2, 64, 32);
  const StageTrace t = run_cascade_right_view(g.left, g.right, FeatureConfig{}, small_params());
  std::size_t good = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 48; ++x) good += std::abs(t.disparity(x, y) - 10.0) < 1.0;
  CHECK(static_cast<double>(good) / (64 * 48) > 0.8);
}

TEST_CASE("refinement keeps constant fields") {
  const DisparityField d(20, 10, 7.5);
  const DisparityField r = refine_disparity(d);
  for (double v : r.values()) CHECK(v == doctest::Approx(7.5));
}

TEST_CASE("refinement removes an isolated spike") {
  DisparityField d(9, 9, 4.0);
  d(4, 4) = 40.0;
  CHECK(refine_disparity(d)(4, 4) == doctest::Approx(4.0));
}

TEST_CASE("census radius shrinks to fit small levels") {
  FeatureConfig f;
  f.census_radius = 4;
  CHECK(fit_features_to_level(f, 64, 64)->census_radius == 4);
  CHECK(fit_features_to_level(f, 6, 40)->census_radius == 2);
  CHECK_FALSE(fit_features_to_level(f, 2, 40).has_value());
}

TEST_CASE("parameter validation") {
  CascadeParams p;
  CHECK_NOTHROW(p.validate());
  p.d_max = 100;  // not a multiple of 32
  CHECK_THROWS_AS(p.validate(), Error);
  p = CascadeParams{};
  p.fused_scales = {4, 5};
  CHECK_THROWS_AS(p.validate(), Error);
  p = CascadeParams{};
  p.temperature = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = CascadeParams{};
  p.beta[2] = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("image size and shape checks") {
  const RasterImage small(16, 16, 0.5f);
  CHECK_THROWS_AS(run_cascade(small, small, FeatureConfig{}, small_params()), Error);
  const RasterImage a(64, 64, 0.5f), b(64, 48, 0.5f);
  CHECK_THROWS_AS(run_cascade(a, b, FeatureConfig{}, small_params()), Error);
}
