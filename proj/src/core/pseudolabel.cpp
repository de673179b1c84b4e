#include "ucstereo/pseudolabel.hpp"

#include <algorithm>
#include <cmath>

#include "ucstereo/eval.hpp"

namespace ucs {

namespace {

// Keeps U_area strictly inside (0,1) even where the logistic saturates.
constexpr double kAreaEpsilon = 1e-12;

SparseLabelMap empty_label(int width, int height) {
  return {DisparityRaster(width, height, kInvalidDisparity),
          Grid<std::uint8_t>(width, height, 0)};
}

void keep(SparseLabelMap& label, std::size_t i, double value) {
  label.disparity[i] = static_cast<float>(value);
  label.valid[i] = 1;
}

}  // namespace

std::size_t SparseLabelMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.values().begin(), valid.values().end(), 1));
}

double SparseLabelMap::density() const {
  return valid.empty() ? 0.0 : static_cast<double>(valid_count()) / valid.size();
}

void AreaFilterConfig::validate() const {
  require(radius >= 1, "area filter radius must be >= 1");
  require(sigma_color > 0.0 && sigma_disparity > 0.0, "area filter sigmas must be positive");
  require(slope > 0.0, "area filter slope must be positive");
}

SparseLabelMap filter_by_pixel_uncertainty(const Grid<double>& disparity,
                                           const Grid<double>& uncertainty, double t) {
  require(disparity.same_shape(uncertainty), "disparity and uncertainty differ in shape");
  require(t >= 0.0, "threshold must be non-negative");
  SparseLabelMap out = empty_label(disparity.width(), disparity.height());
  for (std::size_t i = 0; i < disparity.size(); ++i)
    if (std::sqrt(uncertainty[i]) < t) keep(out, i, disparity[i]);
  return out;
}

AreaUncertaintyField area_uncertainty(const Grid<double>& disparity,
                                      const Grid<double>& uncertainty, const RasterImage& left,
                                      const AreaFilterConfig& config, int threads) {
  config.validate();
  require(disparity.same_shape(uncertainty) && disparity.same_shape(left),
          "area uncertainty inputs differ in shape");
  const int w = disparity.width(), h = disparity.height(), r = config.radius;
  const double color_k = 1.0 / (2.0 * config.sigma_color * config.sigma_color);
  const double disp_k = 1.0 / (2.0 * config.sigma_disparity * config.sigma_disparity);

  Grid<double> spread(w, h);
  for (std::size_t i = 0; i < spread.size(); ++i) spread[i] = std::sqrt(std::max(uncertainty[i], 0.0));

  AreaUncertaintyField out(w, h);
  parallel_for(h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double ic = left(x, y), dc = disparity(x, y);
      double sum = 0.0, weight = 0.0;
      for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
        for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          const double di = left(xx, yy) - ic;
          const double dd = disparity(xx, yy) - dc;
          const double wgt = std::exp(-di * di * color_k - dd * dd * disp_k);
          sum += wgt * spread(xx, yy);
          weight += wgt;
        }
      }
      const double aggregated = sum / weight;
      const double u = 1.0 / (1.0 + std::exp(-config.slope * (aggregated - config.midpoint)));
      out(x, y) = std::clamp(u, kAreaEpsilon, 1.0 - kAreaEpsilon);
    }
  });
  return out;
}

SparseLabelMap filter_by_area_uncertainty(const Grid<double>& disparity,
                                          const AreaUncertaintyField& u_area, double t) {
  require(disparity.same_shape(u_area), "disparity and area uncertainty differ in shape");
  require(t > 0.0 && t <= 1.0, "area threshold must lie in (0, 1]");
  SparseLabelMap out = empty_label(disparity.width(), disparity.height());
  for (std::size_t i = 0; i < disparity.size(); ++i)
    if (u_area[i] < t) keep(out, i, disparity[i]);
  return out;
}

Grid<double> lrc_disagreement(const Grid<double>& disp_left, const Grid<double>& disp_right) {
  require(disp_left.same_shape(disp_right), "left and right disparities differ in shape");
  const int w = disp_left.width(), h = disp_left.height();
  Grid<double> out(w, h, std::numeric_limits<double>::infinity());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = disp_left(x, y);
      if (!std::isfinite(d)) continue;
      const long xr = std::lround(x - d);
      if (xr < 0 || xr >= w) continue;
      out(x, y) = std::abs(d - disp_right(static_cast<int>(xr), y));
    }
  }
  return out;
}

SparseLabelMap lrc_check(const Grid<double>& disp_left, const Grid<double>& disp_right,
                         double tol) {
  const Grid<double> gap = lrc_disagreement(disp_left, disp_right);
  SparseLabelMap out = empty_label(disp_left.width(), disp_left.height());
  for (std::size_t i = 0; i < gap.size(); ++i)
    if (gap[i] < tol) keep(out, i, disp_left[i]);
  return out;
}

BinaryMask gt_uncertainty_mask(const Grid<double>& disparity, const DisparityRaster& gt,
                               double threshold) {
  require(disparity.same_shape(gt), "disparity and ground truth differ in shape");
  BinaryMask out(gt.width(), gt.height(), BinaryMask::kUndefined);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (std::isnan(gt[i])) continue;
    out[i] = std::abs(gt[i] - disparity[i]) > threshold ? 1 : 0;
  }
  return out;
}

LabelStats label_stats(const SparseLabelMap& label, const DisparityRaster& gt) {
  require(label.disparity.same_shape(gt), "label and ground truth differ in shape");
  std::size_t gt_valid = 0, joint = 0, outliers = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (std::isnan(gt[i])) continue;
    ++gt_valid;
    if (!label.valid[i]) continue;
    ++joint;
    if (is_d1_outlier(std::abs(static_cast<double>(label.disparity[i]) - gt[i]), gt[i]))
      ++outliers;
  }
  if (joint == 0) fail(ErrorKind::InvalidArgument, "empty intersection");
  return {static_cast<double>(outliers) / joint, label.density(),
          static_cast<double>(joint) / gt_valid};
}

PseudoLabelResult generate_pseudo_labels(const StageTrace& trace, const RasterImage& left,
                                         double t_pixel, double t_area,
                                         const AreaFilterConfig& area, int threads) {
  PseudoLabelResult out;
  out.refined = refine_disparity(trace.disparity);
  out.uncertainty = trace.uncertainty;
  out.pixel_label = filter_by_pixel_uncertainty(out.refined, out.uncertainty, t_pixel);
  out.area = area_uncertainty(out.refined, out.uncertainty, left, area, threads);
  out.area_label = filter_by_area_uncertainty(out.refined, out.area, t_area);
  out.label = empty_label(left.width(), left.height());
  for (std::size_t i = 0; i < out.label.valid.size(); ++i)
    if (out.pixel_label.valid[i] && out.area_label.valid[i]) keep(out.label, i, out.refined[i]);
  return out;
}

}  // namespace ucs
