#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "ucstereo/eval.hpp"

using namespace ucs;

namespace {

DisparityRaster raster(std::vector<float> v) {
  const int n = static_cast<int>(v.size());
  return DisparityRaster(n, 1, std::move(v));
}

SparseLabelMap dense_label(const Grid<double>& values) {
  SparseLabelMap out{DisparityRaster(values.width(), values.height()),
                     Grid<std::uint8_t>(values.width(), values.height(), 1)};
  for (std::size_t i = 0; i < values.size(); ++i) out.disparity[i] = static_cast<float>(values[i]);
  return out;
}

std::vector<double> d1_sequence(const RocCurve& c) {
  std::vector<double> out;
  for (const RocPoint& p : c.points) out.push_back(p.d1);
  return out;
}

}  // namespace

TEST_CASE("metrics of a perfect prediction are zero") {
  const DisparityRaster gt = raster({1, 5, 10, kInvalidDisparity});
  const MetricReport m = compute_metrics(gt, gt);
  CHECK(m.epe == 0.0);
  CHECK(m.d1_all == 0.0);
  CHECK(m.bad1 == 0.0);
  CHECK(m.bad2 == 0.0);
  CHECK(m.valid_count == 3);
}

TEST_CASE("D1 rule and bad-N arithmetic") {
  CHECK(is_d1_outlier(4.0, 50.0));
  CHECK_FALSE(is_d1_outlier(4.0, 100.0));
  CHECK_FALSE(is_d1_outlier(3.0, 10.0));
  const MetricReport m = compute_metrics(raster({10, 11.5f, 12.5f}), raster({10, 10, 10}));
  CHECK(m.bad1 == doctest::Approx(2.0 / 3.0));
  CHECK(m.bad2 == doctest::Approx(1.0 / 3.0));
  CHECK(m.epe == doctest::Approx(4.0 / 3.0));
  const float n = kInvalidDisparity;
  CHECK_THROWS_AS(compute_metrics(raster({n, 1}), raster({1, n})), Error);
}

TEST_CASE("adding an erroneous pixel never lowers D1 or bad-N") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> u(1.0f, 60.0f);
  std::vector<float> d, g;
  MetricReport previous{};
  for (int k = 0; k < 40; ++k) {
    const float gt = u(rng);
    g.push_back(gt);
    d.push_back(gt + (k % 3 == 0 ? 0.2f : 0.0f));
    const MetricReport base = compute_metrics(raster(d), raster(g));
    std::vector<float> d2 = d, g2 = g;
    g2.push_back(gt);
    d2.push_back(gt + 10.0f);
    const MetricReport worse = compute_metrics(raster(d2), raster(g2));
    CHECK(worse.d1_all >= base.d1_all);
    CHECK(worse.bad1 >= base.bad1);
    CHECK(worse.bad2 >= base.bad2);
    previous = base;
  }
  CHECK(previous.valid_count == 40);
}

TEST_CASE("ROC on four pixels") {
  const DisparityRaster gt = raster({10, 10, 10, 10});
  const DisparityRaster d = raster({10, 10, 15, 15});
  const Grid<double> unc(4, 1, std::vector<double>{0.1, 0.2, 0.8, 0.9});
  const RocCurve c = roc_curve(d, gt, unc, 0.25);
  const std::vector<double> expected = {0.5, 1.0 / 3.0, 0.0, 0.0};
  REQUIRE(c.points.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(c.points[k].d1 == doctest::Approx(expected[k]));
    CHECK(c.points[k].removed_fraction == doctest::Approx(0.25 * k));
    CHECK(c.points[k].density == doctest::Approx(1.0 - 0.25 * k));
  }
}

TEST_CASE("ROC at the default step has 20 rows, starting at full density") {
  const DisparityRaster gt(40, 10, 20.0f);
  const DisparityRaster d(40, 10, 21.0f);
  const Grid<double> unc(40, 10, 1.0);
  const RocCurve c = roc_curve(d, gt, unc);
  CHECK(c.points.size() == 20);
  CHECK(c.points.front().density == 1.0);
  CHECK(c.points.back().removed_fraction == doctest::Approx(0.95));

  testing::TempDir dir("roc");
  write_roc_csv(c, dir / "roc.csv");
  std::ifstream in(dir / "roc.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 22);
  CHECK(lines.front() == "removed_fraction,density,d1");
  CHECK(lines.back().rfind("# auc,", 0) == 0);
}

TEST_CASE("constant uncertainty keeps the global rate flat under index ties") {
  // Outliers spread evenly, so every 5% suffix keeps the same rate.
  std::vector<float> g(400, 20.0f), d(400, 20.0f);
  for (std::size_t i = 0; i < d.size(); i += 4) d[i] = 30.0f;
  const RocCurve c = roc_curve(raster(d), raster(g), Grid<double>(400, 1, 0.5));
  for (const RocPoint& p : c.points) CHECK(p.d1 == doctest::Approx(0.25));
  CHECK(c.auc == doctest::Approx(0.25));
}

TEST_CASE("oracle uncertainty gives a non-increasing D1 and the smallest AUC") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> gt_dist(5.0f, 60.0f);
  std::exponential_distribution<float> err_dist(0.4f);
  std::bernoulli_distribution sign(0.5);
  const int n = 500;
  std::vector<float> g(n), d(n);
  for (int i = 0; i < n; ++i) {
    g[i] = gt_dist(rng);
    d[i] = g[i] + (sign(rng) ? 1.0f : -1.0f) * err_dist(rng);
  }
  Grid<double> oracle(n, 1);
  for (int i = 0; i < n; ++i) oracle[i] = std::abs(static_cast<double>(d[i]) - g[i]);
  const RocCurve best = roc_curve(raster(d), raster(g), oracle);
  const std::vector<double> seq = d1_sequence(best);
  for (std::size_t k = 1; k < seq.size(); ++k) CHECK(seq[k] <= seq[k - 1]);

  std::vector<double> perm(oracle.values());
  for (int trial = 0; trial < 100; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    const RocCurve other = roc_curve(raster(d), raster(g), Grid<double>(n, 1, perm));
    CHECK(best.auc <= other.auc + 1e-15);
  }
}

TEST_CASE("smooth-L1 branches and knee") {
  CHECK(smooth_l1(0.5) == 0.125);
  CHECK(smooth_l1(2.0) == 1.5);
  CHECK(smooth_l1(-2.0) == 1.5);
  // Both branch formulas at |x| = 1.
  CHECK(0.5 * 1.0 * 1.0 == 0.5);
  CHECK(smooth_l1(1.0) == 0.5);
  CHECK(smooth_l1(std::nextafter(1.0, 0.0)) == doctest::Approx(0.5));
  const double h = 1e-6;
  const double left = (smooth_l1(1.0) - smooth_l1(1.0 - h)) / h;
  const double right = (smooth_l1(1.0 + h) - smooth_l1(1.0)) / h;
  CHECK(left == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(right == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("smooth-L1 loss averages over valid labels") {
  const Grid<double> pred(3, 1, std::vector<double>{1.0, 2.0, 3.0});
  SparseLabelMap labels = dense_label(Grid<double>(3, 1, std::vector<double>{1.5, 4.0, 99.0}));
  labels.valid[2] = 0;
  CHECK(smooth_l1_loss(pred, labels) == doctest::Approx((0.125 + 1.5) / 2.0));
  CHECK(smooth_l1_loss(pred, dense_label(pred)) == 0.0);
  labels.valid[0] = labels.valid[1] = 0;
  CHECK_THROWS_AS(smooth_l1_loss(pred, labels), Error);
}

TEST_CASE("silog of a uniformly scaled prediction") {
  Grid<double> labels(7, 3);
  // Labels are stored as float; pick values float represents exactly.
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = 1.0 + 0.375 * static_cast<double>(i);
  for (double c : {0.5, 1.3, 2.0, 7.5}) {
    Grid<double> pred = labels;
    for (double& v : pred.values()) v *= c;
    const double loss = silog_loss(pred, dense_label(labels));
    CHECK(std::abs(loss - std::abs(std::log(c)) * std::sqrt(0.15)) < 1e-9);
  }
  CHECK(silog_loss(labels, dense_label(labels)) == 0.0);
}

TEST_CASE("silog zero-mean case and lambda limits") {
  const Grid<double> labels(2, 1, std::vector<double>{1.0, 1.0});
  const Grid<double> pred(2, 1, std::vector<double>{2.0, 0.5});
  CHECK(silog_loss(pred, dense_label(labels)) == doctest::Approx(std::log(2.0)));

  const Grid<double> l2(3, 1, std::vector<double>{2.0, 5.0, 9.0});
  const Grid<double> p2(3, 1, std::vector<double>{2.5, 4.0, 12.0});
  LossConfig rmse;
  rmse.silog_lambda = 0.0;
  double sq = 0.0;
  for (int i = 0; i < 3; ++i) sq += std::pow(std::log(p2[i] / l2[i]), 2.0);
  CHECK(silog_loss(p2, dense_label(l2), rmse) == doctest::Approx(std::sqrt(sq / 3.0)));

  LossConfig scale_free;
  scale_free.silog_lambda = 1.0;
  Grid<double> l3 = l2, p3 = p2;
  for (double& v : l3.values()) v *= 3.7;
  for (double& v : p3.values()) v *= 3.7;
  CHECK(silog_loss(p3, dense_label(l3), scale_free) ==
        doctest::Approx(silog_loss(p2, dense_label(l2), scale_free)));

  const Grid<double> bad(2, 1, std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(silog_loss(bad, dense_label(labels)), Error);
}

TEST_CASE("BCE values") {
  BinaryMask mask(3, 2, 0);
  mask[1] = 1;
  mask[4] = BinaryMask::kUndefined;
  CHECK(std::abs(bce_uncertainty_loss(Grid<double>(3, 2, 0.5), mask) - std::log(2.0)) < 1e-9);
  const BinaryMask one(1, 1, 1);
  CHECK(bce_uncertainty_loss(Grid<double>(1, 1, 0.25), one) == doctest::Approx(-std::log(0.25)));
  // Perfect predictions hit the clamp floor.
  CHECK(bce_uncertainty_loss(Grid<double>(1, 1, 1.0), one) < 1e-6);
  CHECK_THROWS_AS(bce_uncertainty_loss(Grid<double>(1, 1, 0.5),
                                       BinaryMask(1, 1, BinaryMask::kUndefined)),
                  Error);
}

TEST_CASE("triangulation") {
  const CalibrationInfo calib{100.0, 0.5};
  const DisparityRaster d = raster({10.0f, kInvalidDisparity, 0.0f, -2.0f});
  const DisparityRaster z = disparity_to_depth(d, calib);
  CHECK(z[0] == 5.0f);
  CHECK(std::isnan(z[1]));
  CHECK(std::isnan(z[2]));
  CHECK(std::isnan(z[3]));
  CHECK_THROWS_AS(disparity_to_depth(d, CalibrationInfo{0.0, 1.0}), Error);
}

TEST_CASE("triangulation round trip is exact to 1e-9 (random)") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 256.0);
  const CalibrationInfo calib{721.5377, 0.5327};
  Grid<double> d(50, 40);
  for (double& v : d.values()) v = u(rng);
  const Grid<double> back = depth_to_disparity(disparity_to_depth(d, calib), calib);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(back[i] - d[i]) < 1e-9);
}

TEST_CASE("metrics CSV") {
  testing::TempDir dir("metrics");
  write_metrics_csv(MetricReport{0.5, 0.25, 0.125, 0.0, 8}, dir / "m.csv");
  std::ifstream in(dir / "m.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "epe,d1_all,bad1,bad2,valid_count\n0.5,0.25,0.125,0,8\n");
  CHECK_THROWS_AS(write_metrics_csv(MetricReport{}, dir / "no" / "such" / "m.csv"), Error);
}
