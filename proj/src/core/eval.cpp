#include "ucstereo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace ucs {

namespace {

void check_calibration(const CalibrationInfo& calib) {
  require(calib.focal_length > 0.0 && calib.baseline > 0.0,
          "focal length and baseline must be positive");
}

}  // namespace

MetricReport compute_metrics(const DisparityRaster& disparity, const DisparityRaster& gt) {
  require(disparity.same_shape(gt), "disparity and ground truth differ in shape");
  MetricReport report;
  double abs_sum = 0.0;
  std::size_t d1 = 0, bad1 = 0, bad2 = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (std::isnan(gt[i]) || std::isnan(disparity[i])) continue;
    const double err = std::abs(static_cast<double>(disparity[i]) - gt[i]);
    ++report.valid_count;
    abs_sum += err;
    if (err > 1.0) ++bad1;
    if (err > 2.0) ++bad2;
    if (is_d1_outlier(err, gt[i])) ++d1;
  }
  if (report.valid_count == 0) fail(ErrorKind::InvalidArgument, "empty intersection");
  const double n = static_cast<double>(report.valid_count);
  report.epe = abs_sum / n;
  report.d1_all = d1 / n;
  report.bad1 = bad1 / n;
  report.bad2 = bad2 / n;
  return report;
}

RocCurve roc_curve(const DisparityRaster& disparity, const DisparityRaster& gt,
                   const Grid<double>& uncertainty, double step) {
  require(disparity.same_shape(gt) && disparity.same_shape(uncertainty),
          "ROC inputs differ in shape");
  require(step > 0.0 && step <= 1.0, "ROC step must lie in (0, 1]");

  std::vector<std::size_t> pixels;
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (!std::isnan(gt[i]) && !std::isnan(disparity[i])) pixels.push_back(i);
  if (pixels.empty()) fail(ErrorKind::InvalidArgument, "empty ground truth");

  // Most uncertain first; equal uncertainty keeps pixel order.
  std::stable_sort(pixels.begin(), pixels.end(), [&](std::size_t a, std::size_t b) {
    return uncertainty[a] > uncertainty[b];
  });
  const std::size_t n = pixels.size();
  std::vector<std::size_t> outliers_after(n + 1, 0);  // outliers in pixels[k..n)
  for (std::size_t k = n; k-- > 0;) {
    const std::size_t i = pixels[k];
    const double err = std::abs(static_cast<double>(disparity[i]) - gt[i]);
    outliers_after[k] = outliers_after[k + 1] + (is_d1_outlier(err, gt[i]) ? 1 : 0);
  }

  RocCurve curve;
  const int steps = static_cast<int>(std::lround(1.0 / step));
  for (int k = 0; k < steps; ++k) {
    const double removed_fraction = k * step;
    if (removed_fraction >= 1.0) break;
    const auto removed = static_cast<std::size_t>(std::llround(removed_fraction * n));
    if (removed >= n) break;
    const std::size_t kept = n - removed;
    curve.points.push_back({removed_fraction, 1.0 - removed_fraction,
                            static_cast<double>(outliers_after[removed]) / kept});
  }

  if (curve.points.size() == 1) {
    curve.auc = curve.points.front().d1;
  } else {
    double area = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
      const RocPoint& a = curve.points[k - 1];
      const RocPoint& b = curve.points[k];
      area += 0.5 * (a.d1 + b.d1) * (b.removed_fraction - a.removed_fraction);
    }
    curve.auc = area / (curve.points.back().removed_fraction - curve.points.front().removed_fraction);
  }
  return curve;
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1_loss(const Grid<double>& prediction, const SparseLabelMap& labels) {
  require(prediction.same_shape(labels.disparity), "prediction and labels differ in shape");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    if (!labels.valid[i]) continue;
    sum += smooth_l1(labels.disparity[i] - prediction[i]);
    ++count;
  }
  if (count == 0) fail(ErrorKind::NoSupervision, "smooth-L1 loss needs at least one valid label");
  return sum / count;
}

double silog_loss(const Grid<double>& prediction, const SparseLabelMap& labels,
                  const LossConfig& config) {
  require(prediction.same_shape(labels.disparity), "prediction and labels differ in shape");
  require(config.silog_lambda >= 0.0 && config.silog_lambda <= 1.0, "lambda must lie in [0,1]");
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    if (!labels.valid[i]) continue;
    const double label = labels.disparity[i];
    require(prediction[i] > 0.0 && label > 0.0, "silog loss needs positive disparities");
    const double d = std::log(prediction[i]) - std::log(label);
    sum += d;
    sum_sq += d * d;
    ++count;
  }
  if (count == 0) fail(ErrorKind::NoSupervision, "silog loss needs at least one valid label");
  const double n = static_cast<double>(count);
  const double value = sum_sq / n - config.silog_lambda * (sum / n) * (sum / n);
  return std::sqrt(std::max(value, 0.0));
}

double bce_uncertainty_loss(const Grid<double>& u_area, const BinaryMask& mask,
                            const LossConfig& config) {
  require(u_area.same_shape(mask), "uncertainty and mask differ in shape");
  require(config.bce_epsilon > 0.0 && config.bce_epsilon < 0.5, "epsilon must lie in (0, 0.5)");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < u_area.size(); ++i) {
    if (mask[i] == BinaryMask::kUndefined) continue;
    const double p = std::clamp(u_area[i], config.bce_epsilon, 1.0 - config.bce_epsilon);
    sum += mask[i] ? std::log(p) : std::log(1.0 - p);
    ++count;
  }
  if (count == 0) fail(ErrorKind::InvalidArgument, "empty mask");
  return -sum / count;
}

DisparityRaster disparity_to_depth(const DisparityRaster& disparity, const CalibrationInfo& calib) {
  check_calibration(calib);
  const double fb = calib.focal_length * calib.baseline;
  DisparityRaster out(disparity.width(), disparity.height());
  for (std::size_t i = 0; i < disparity.size(); ++i) {
    const float d = disparity[i];
    out[i] = (std::isnan(d) || d <= 0.0f) ? kInvalidDisparity : static_cast<float>(fb / d);
  }
  return out;
}

DisparityRaster depth_to_disparity(const DisparityRaster& depth, const CalibrationInfo& calib) {
  // Triangulation is its own inverse: d = f B / depth.
  return disparity_to_depth(depth, calib);
}

Grid<double> disparity_to_depth(const Grid<double>& disparity, const CalibrationInfo& calib) {
  check_calibration(calib);
  const double fb = calib.focal_length * calib.baseline;
  Grid<double> out(disparity.width(), disparity.height());
  for (std::size_t i = 0; i < disparity.size(); ++i) {
    const double d = disparity[i];
    out[i] = (std::isnan(d) || d <= 0.0) ? std::numeric_limits<double>::quiet_NaN() : fb / d;
  }
  return out;
}

Grid<double> depth_to_disparity(const Grid<double>& depth, const CalibrationInfo& calib) {
  return disparity_to_depth(depth, calib);
}

void write_metrics_csv(const MetricReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << "epe,d1_all,bad1,bad2,valid_count\n"
      << format_real(report.epe) << ',' << format_real(report.d1_all) << ','
      << format_real(report.bad1) << ',' << format_real(report.bad2) << ','
      << report.valid_count << '\n';
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << "removed_fraction,density,d1\n";
  for (const RocPoint& p : curve.points)
    out << format_real(p.removed_fraction) << ',' << format_real(p.density) << ','
        << format_real(p.d1) << '\n';
  out << "# auc," << format_real(curve.auc) << '\n';
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace ucs
