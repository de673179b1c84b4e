#pragma once

#include <cstdint>

#include "ucstereo/cascade.hpp"

namespace ucs {

/// Sparse disparity label: NaN and valid == 0 outside the mask.
struct SparseLabelMap {
  DisparityRaster disparity;
  Grid<std::uint8_t> valid;

  int width() const noexcept { return disparity.width(); }
  int height() const noexcept { return disparity.height(); }
  std::size_t valid_count() const;
  double density() const;
};

/// Values strictly inside (0,1); higher means more likely wrong.
struct AreaUncertaintyField : Grid<double> {
  using Grid<double>::Grid;
};

struct AreaFilterConfig {
  int radius = 7;
  double sigma_color = 0.1;
  double sigma_disparity = 3.0;
  double midpoint = 1.5;  // px of aggregated sqrt(U) mapped to 0.5
  double slope = 2.0;

  void validate() const;
};

/// 0/1 where defined, kUndefined where ground truth is invalid.
struct BinaryMask : Grid<std::uint8_t> {
  using Grid<std::uint8_t>::Grid;
  static constexpr std::uint8_t kUndefined = 255;
};

/// Keeps pixels with sqrt(U) < t.
SparseLabelMap filter_by_pixel_uncertainty(const Grid<double>& disparity,
                                           const Grid<double>& uncertainty, double t);

/// Cross-bilateral average of sqrt(U) guided by the left image and the
/// disparity, squashed by logistic(slope * (avg - midpoint)).
AreaUncertaintyField area_uncertainty(const Grid<double>& disparity,
                                      const Grid<double>& uncertainty, const RasterImage& left,
                                      const AreaFilterConfig& config, int threads = 1);

/// Keeps pixels with U_area < t, t in (0, 1]. At t = 1 nothing is removed.
SparseLabelMap filter_by_area_uncertainty(const Grid<double>& disparity,
                                          const AreaUncertaintyField& u_area, double t);

/// |d_L(x) - d_R(x - d_L(x))|, +inf when the lookup leaves the image.
Grid<double> lrc_disagreement(const Grid<double>& disp_left, const Grid<double>& disp_right);

/// Keeps pixels whose left-right disagreement is below tol.
SparseLabelMap lrc_check(const Grid<double>& disp_left, const Grid<double>& disp_right,
                         double tol);

/// 1 where |gt - d| > threshold, 0 otherwise, undefined where gt is invalid.
BinaryMask gt_uncertainty_mask(const Grid<double>& disparity, const DisparityRaster& gt,
                               double threshold = 1.0);

struct LabelStats {
  double d1 = 0.0;
  double density = 0.0;
  double overlap = 0.0;
};

/// D1 over pixels valid in both; overlap = share of GT-valid pixels labelled.
LabelStats label_stats(const SparseLabelMap& label, const DisparityRaster& gt);

/// Pixel-filter then area-filter pipeline on a matched pair.
struct PseudoLabelResult {
  DisparityField refined;           // full-resolution input to the filters
  UncertaintyField uncertainty;     // stage-0, squared pixels
  SparseLabelMap pixel_label;       // sqrt(U) < t_pixel
  AreaUncertaintyField area;        // U_area
  SparseLabelMap area_label;        // U_area < t_area
  SparseLabelMap label;             // both filters
};

PseudoLabelResult generate_pseudo_labels(const StageTrace& trace, const RasterImage& left,
                                         double t_pixel, double t_area,
                                         const AreaFilterConfig& area, int threads = 1);

}  // namespace ucs
