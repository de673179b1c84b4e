#pragma once

#include <filesystem>
#include <vector>

#include "ucstereo/pseudolabel.hpp"

namespace ucs {

struct MetricReport {
  double epe = 0.0;
  double d1_all = 0.0;
  double bad1 = 0.0;
  double bad2 = 0.0;
  std::size_t valid_count = 0;
};

struct RocPoint {
  double removed_fraction = 0.0;
  double density = 1.0;
  double d1 = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

struct LossConfig {
  double silog_lambda = 0.85;
  double bce_epsilon = 1e-7;
};

/// KITTI D1 rule: error above 3 px and above 5% of the true disparity.
inline bool is_d1_outlier(double abs_error, double gt) {
  return abs_error > 3.0 && abs_error > 0.05 * gt;
}

/// Metrics over pixels valid in both rasters.
MetricReport compute_metrics(const DisparityRaster& disparity, const DisparityRaster& gt);

/// Sparsification curve: the most uncertain GT-valid pixels are removed in
/// steps of `step` (ties by pixel index) and D1 is measured on the rest.
/// Rows run from removed 0 up to 1 - step; AUC is the trapezoid area over
/// the removed-fraction axis divided by its extent.
RocCurve roc_curve(const DisparityRaster& disparity, const DisparityRaster& gt,
                   const Grid<double>& uncertainty, double step = 0.05);

double smooth_l1(double x);

/// Mean smooth-L1 of (label - prediction) over valid label pixels.
double smooth_l1_loss(const Grid<double>& prediction, const SparseLabelMap& labels);

/// sqrt(mean d^2 - lambda (mean d)^2), d = log(pred) - log(label), over
/// valid label pixels.
double silog_loss(const Grid<double>& prediction, const SparseLabelMap& labels,
                  const LossConfig& config = {});

/// Binary cross-entropy over the defined mask pixels, probabilities clamped
/// to [eps, 1 - eps].
double bce_uncertainty_loss(const Grid<double>& u_area, const BinaryMask& mask,
                            const LossConfig& config = {});

/// depth = f B / d; non-positive or invalid disparities give NaN.
DisparityRaster disparity_to_depth(const DisparityRaster& disparity, const CalibrationInfo& calib);
DisparityRaster depth_to_disparity(const DisparityRaster& depth, const CalibrationInfo& calib);
/// Double-precision forms; invalid entries are NaN.
Grid<double> disparity_to_depth(const Grid<double>& disparity, const CalibrationInfo& calib);
Grid<double> depth_to_disparity(const Grid<double>& depth, const CalibrationInfo& calib);

void write_metrics_csv(const MetricReport& report, const std::filesystem::path& path);
void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path);

}  // namespace ucs
