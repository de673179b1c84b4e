#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "ucstereo/costvolume.hpp"

namespace ucs {

/// Disparity estimate at a stage's resolution, in that stage's pixels.
struct DisparityField : Grid<double> {
  using Grid<double>::Grid;
  int stage = 0;
};

/// Variance of the per-pixel disparity distribution, squared pixels.
struct UncertaintyField : Grid<double> {
  using Grid<double>::Grid;
  int stage = 0;
};

/// Per-pixel search interval [lower, upper] at `stage`.
struct RangeField {
  Grid<double> lower;
  Grid<double> upper;
  int stage = 0;
};

struct CascadeParams {
  int d_max = 256;
  int planes_stage2 = 16;
  int planes_stage1 = 12;
  // Indexed by the stage whose estimate forms the next range (3 and 2).
  std::array<double, 4> alpha{};
  std::array<double, 4> beta{};
  std::vector<int> fused_scales{3, 4, 5};
  AggregationConfig aggregation;
  double temperature = 0.1;
  int threads = 1;

  void validate() const;
  /// Number of dense planes at pyramid scale i, D_max / 2^i.
  int planes_at_scale(int scale) const { return d_max >> scale; }
};

struct StageOutput {
  int stage = 0;
  DisparityField disparity;
  UncertaintyField uncertainty;
  std::optional<RangeField> range;  // absent for the dense stage
  HypothesisSet hypotheses;
  std::shared_ptr<const ProbabilityVolume> probabilities;
};

/// Stages 3, 2, 1 in order, plus the upsampled full-resolution result.
struct StageTrace {
  std::vector<StageOutput> stages;
  DisparityField disparity;      // stage 0
  UncertaintyField uncertainty;  // stage 0, squared full-resolution pixels

  const StageOutput& stage(int index) const;
};

/// d = sum_n d_n p_n, evaluated as d_0 + sum_n (d_n - d_0) p_n so that a
/// degenerate hypothesis list returns its value exactly.
DisparityField soft_argmin(const ProbabilityVolume& prob, const HypothesisSet& hyp);

/// U = sum_n (d_n - d)^2 p_n.
UncertaintyField pixel_uncertainty(const ProbabilityVolume& prob, const HypothesisSet& hyp,
                                   const DisparityField& disparity);

/// Search interval for stage i-1 from the stage-i estimate:
///   d -/+ ((alpha_i + 1) sqrt(U) + beta_i)
/// computed at stage-i resolution, bilinearly resized to (width, height),
/// doubled into stage i-1 units and clamped to [0, D_max/2^(i-1) - 1].
/// A zero width/height means twice the stage-i size.
RangeField next_stage_range(const DisparityField& disparity, const UncertaintyField& uncertainty,
                            const CascadeParams& params, int stage, int width = 0,
                            int height = 0);

/// d_n = d_min + n (d_max - d_min) / (N - 1).
HypothesisSet sample_hypotheses(const RangeField& range, int planes);

/// Build, aggregate, normalise and regress one stage over given hypotheses.
StageOutput match_stage(const FeatureMap& left, const FeatureMap& right,
                        const HypothesisSet& hypotheses, const CascadeParams& params,
                        int stage);

/// Plain dense matcher at pyramid `scale`: every integer disparity below
/// D_max / 2^scale, no fusion.
StageOutput match_dense(const RasterImage& left, const RasterImage& right,
                        const FeatureConfig& features, const CascadeParams& params, int scale);

/// Single cascade stage at `scale` searching a given range with `planes`
/// uniform samples.
StageOutput match_in_range(const RasterImage& left, const RasterImage& right,
                           const FeatureConfig& features, const CascadeParams& params, int scale,
                           const RangeField& range, int planes);

/// Fused dense stage 3, uncertainty-driven stages 2 and 1, bilinear stage 0.
StageTrace run_cascade(const RasterImage& left, const RasterImage& right,
                       const FeatureConfig& features, const CascadeParams& params);

/// Disparity of the right view (right pixel x matches left pixel x + d),
/// obtained by running the cascade on the mirrored, swapped pair.
StageTrace run_cascade_right_view(const RasterImage& left, const RasterImage& right,
                                  const FeatureConfig& features, const CascadeParams& params);

/// 3x3 median followed by a 5x5 bilateral filter on disparity values.
DisparityField refine_disparity(const DisparityField& disparity);

/// Stage-0 field as a raster (NaN-free).
DisparityRaster to_raster(const Grid<double>& field);

/// Feature config usable at a pyramid level: the census radius shrinks to fit
/// small levels. Returns nullopt when not even a 3x3 window fits.
std::optional<FeatureConfig> fit_features_to_level(const FeatureConfig& config, int width,
                                                   int height);

}  // namespace ucs
