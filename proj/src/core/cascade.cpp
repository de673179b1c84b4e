#include "ucstereo/cascade.hpp"

#include <algorithm>
#include <cmath>

namespace ucs {

namespace {

constexpr int kMinImageSize = 32;
constexpr int kPyramidLevels = 6;
// Coarser fused levels must keep this many pixels on their short side.
constexpr int kMinFusedLevelSize = 16;

}  // namespace

void CascadeParams::validate() const {
  require(d_max >= 2, "d_max must be at least 2");
  require(planes_stage2 >= 2 && planes_stage1 >= 2, "refined stages need at least 2 planes");
  for (int stage : {2, 3}) {
    require(alpha[stage] >= -1.0, "alpha must be >= -1");
    require(beta[stage] >= 0.0, "beta must be >= 0");
  }
  require(!fused_scales.empty() && fused_scales.front() == 3,
          "fused scales must start at scale 3");
  for (std::size_t i = 1; i < fused_scales.size(); ++i)
    require(fused_scales[i] == fused_scales[i - 1] + 1, "fused scales must be consecutive");
  require(fused_scales.back() < kPyramidLevels, "fused scales limited to 3..5");
  const int coarsest = fused_scales.back();
  require(d_max % (1 << coarsest) == 0 && planes_at_scale(coarsest) >= 2,
          "d_max must be a multiple of 2^s with at least 2 planes at every fused scale s");
  require(temperature > 0.0, "temperature must be positive");
  require(threads >= 1, "thread count must be positive");
  aggregation.validate();
}

const StageOutput& StageTrace::stage(int index) const {
  for (const StageOutput& s : stages)
    if (s.stage == index) return s;
  fail(ErrorKind::InvalidArgument, "no stage " + std::to_string(index) + " in trace");
}

DisparityField soft_argmin(const ProbabilityVolume& prob, const HypothesisSet& hyp) {
  require(prob.width() == hyp.width() && prob.height() == hyp.height() &&
              prob.planes() == hyp.planes(),
          "probability volume and hypotheses differ in shape");
  DisparityField out(prob.width(), prob.height());
  for (int y = 0; y < prob.height(); ++y) {
    for (int x = 0; x < prob.width(); ++x) {
      const auto p = prob.probabilities.at(x, y);
      const auto d = hyp.at(x, y);
      double offset = 0.0;
      for (int n = 1; n < hyp.planes(); ++n) offset += (d[n] - d[0]) * p[n];
      out(x, y) = std::clamp(d[0] + offset, d.front(), d.back());
    }
  }
  return out;
}

UncertaintyField pixel_uncertainty(const ProbabilityVolume& prob, const HypothesisSet& hyp,
                                   const DisparityField& disparity) {
  require(prob.width() == hyp.width() && prob.height() == hyp.height() &&
              prob.planes() == hyp.planes() && disparity.width() == hyp.width() &&
              disparity.height() == hyp.height(),
          "uncertainty inputs differ in shape");
  UncertaintyField out(prob.width(), prob.height());
  out.stage = disparity.stage;
  for (int y = 0; y < prob.height(); ++y) {
    for (int x = 0; x < prob.width(); ++x) {
      const auto p = prob.probabilities.at(x, y);
      const auto d = hyp.at(x, y);
      const double mean = disparity(x, y);
      double var = 0.0;
      for (int n = 0; n < hyp.planes(); ++n) var += (d[n] - mean) * (d[n] - mean) * p[n];
      out(x, y) = var;
    }
  }
  return out;
}

RangeField next_stage_range(const DisparityField& disparity, const UncertaintyField& uncertainty,
                            const CascadeParams& params, int stage, int width, int height) {
  require(disparity.same_shape(uncertainty), "disparity and uncertainty differ in shape");
  require(stage >= 1 && stage < static_cast<int>(params.alpha.size()), "stage out of range");
  if (width <= 0) width = 2 * disparity.width();
  if (height <= 0) height = 2 * disparity.height();

  const double alpha = params.alpha[stage];
  const double beta = params.beta[stage];
  Grid<double> lower(disparity.width(), disparity.height());
  Grid<double> upper(disparity.width(), disparity.height());
  for (std::size_t i = 0; i < disparity.size(); ++i) {
    const double half_width = (alpha + 1.0) * std::sqrt(std::max(uncertainty[i], 0.0)) + beta;
    lower[i] = disparity[i] - half_width;
    upper[i] = disparity[i] + half_width;
  }

  const double limit = static_cast<double>(params.planes_at_scale(stage - 1) - 1);
  RangeField range{resize_bilinear(lower, width, height), resize_bilinear(upper, width, height),
                   stage - 1};
  for (std::size_t i = 0; i < range.lower.size(); ++i) {
    range.lower[i] = std::clamp(2.0 * range.lower[i], 0.0, limit);
    range.upper[i] = std::clamp(2.0 * range.upper[i], 0.0, limit);
  }
  return range;
}

HypothesisSet sample_hypotheses(const RangeField& range, int planes) {
  require(planes >= 2, "hypothesis sampling needs at least 2 planes");
  require(range.lower.same_shape(range.upper), "range bounds differ in shape");
  HypothesisSet out(range.lower.width(), range.lower.height(), planes);
  for (int y = 0; y < range.lower.height(); ++y) {
    for (int x = 0; x < range.lower.width(); ++x) {
      const double lo = range.lower(x, y);
      const double hi = range.upper(x, y);
      require(lo <= hi, "range lower bound exceeds upper bound");
      auto h = out.at(x, y);
      for (int n = 0; n < planes; ++n) h[n] = lo + n * (hi - lo) / (planes - 1);
    }
  }
  return out;
}

namespace {

// Aggregate -> softmin -> soft-argmin -> uncertainty.
StageOutput regress_stage(const CostVolume& raw, const CascadeParams& params, int stage) {
  const HypothesisSet& hypotheses = raw.hypotheses;
  const CostVolume aggregated = aggregate(raw, params.aggregation, params.threads);
  auto prob = std::make_shared<ProbabilityVolume>(
      softmin_probabilities(aggregated, params.temperature, params.threads));
  StageOutput out;
  out.stage = stage;
  out.hypotheses = hypotheses;
  out.disparity = soft_argmin(*prob, hypotheses);
  out.disparity.stage = stage;
  out.uncertainty = pixel_uncertainty(*prob, hypotheses, out.disparity);
  out.uncertainty.stage = stage;
  out.probabilities = std::move(prob);
  return out;
}

}  // namespace

StageOutput match_stage(const FeatureMap& left, const FeatureMap& right,
                        const HypothesisSet& hypotheses, const CascadeParams& params, int stage) {
  return regress_stage(build_cost_volume(left, right, hypotheses, params.threads), params, stage);
}

std::optional<FeatureConfig> fit_features_to_level(const FeatureConfig& config, int width,
                                                   int height) {
  int largest = (std::min(width, height) - 1) / 2;
  if (largest < 1) return std::nullopt;
  FeatureConfig fitted = config;
  fitted.census_radius = std::min(config.census_radius, largest);
  return fitted;
}

namespace {

void check_pair(const RasterImage& left, const RasterImage& right) {
  require(left.same_shape(right), "left and right images differ in size");
  require(left.width() >= kMinImageSize && left.height() >= kMinImageSize,
          "images must be at least 32x32");
  validate_image(left);
  validate_image(right);
}

struct LevelFeatures {
  FeatureMap left;
  FeatureMap right;
};

LevelFeatures features_at(const ImagePyramid& left, const ImagePyramid& right, int scale,
                          const FeatureConfig& config, int threads) {
  const RasterImage& l = left.levels.at(scale);
  const auto fitted = fit_features_to_level(config, l.width(), l.height());
  if (!fitted)
    fail(ErrorKind::InvalidArgument,
         "pyramid level " + std::to_string(scale) + " too small for a census window");
  return {census_transform(l, *fitted, threads),
          census_transform(right.levels.at(scale), *fitted, threads)};
}

}  // namespace

StageOutput match_dense(const RasterImage& left, const RasterImage& right,
                        const FeatureConfig& features, const CascadeParams& params, int scale) {
  params.validate();
  check_pair(left, right);
  const ImagePyramid lp = build_pyramid(left, scale + 1);
  const ImagePyramid rp = build_pyramid(right, scale + 1);
  const LevelFeatures f = features_at(lp, rp, scale, features, params.threads);
  const HypothesisSet hyp =
      HypothesisSet::dense(f.left.width(), f.left.height(), params.planes_at_scale(scale));
  return match_stage(f.left, f.right, hyp, params, scale);
}

StageOutput match_in_range(const RasterImage& left, const RasterImage& right,
                           const FeatureConfig& features, const CascadeParams& params, int scale,
                           const RangeField& range, int planes) {
  params.validate();
  check_pair(left, right);
  const ImagePyramid lp = build_pyramid(left, scale + 1);
  const ImagePyramid rp = build_pyramid(right, scale + 1);
  const LevelFeatures f = features_at(lp, rp, scale, features, params.threads);
  require(range.lower.width() == f.left.width() && range.lower.height() == f.left.height(),
          "range does not match the pyramid level size");
  StageOutput out = match_stage(f.left, f.right, sample_hypotheses(range, planes), params, scale);
  out.range = range;
  return out;
}

StageTrace run_cascade(const RasterImage& left, const RasterImage& right,
                       const FeatureConfig& features, const CascadeParams& params) {
  params.validate();
  check_pair(left, right);
  const ImagePyramid lp = build_pyramid(left, kPyramidLevels);
  const ImagePyramid rp = build_pyramid(right, kPyramidLevels);

  // Dense volumes at the fused scales. Beyond scale 3, levels too small to
  // carry structure end the chain.
  std::vector<CostVolume> dense;
  for (int scale : params.fused_scales) {
    const RasterImage& level = lp.levels[scale];
    if (!fit_features_to_level(features, level.width(), level.height())) break;
    if (scale > 3 && std::min(level.width(), level.height()) < kMinFusedLevelSize) break;
    const LevelFeatures f = features_at(lp, rp, scale, features, params.threads);
    dense.push_back(build_cost_volume(
        f.left, f.right,
        HypothesisSet::dense(f.left.width(), f.left.height(), params.planes_at_scale(scale)),
        params.threads));
  }
  if (dense.empty()) fail(ErrorKind::InvalidArgument, "scale-3 level too small to match");

  StageTrace trace;
  {
    const CostVolume fused = fuse_dense_volumes(dense);
    trace.stages.push_back(regress_stage(fused, params, 3));
  }

  for (int stage = 3; stage >= 2; --stage) {
    const StageOutput& prev = trace.stages.back();
    const int next = stage - 1;
    const RasterImage& level = lp.levels[next];
    RangeField range = next_stage_range(prev.disparity, prev.uncertainty, params, stage,
                                        level.width(), level.height());
    const int planes = next == 2 ? params.planes_stage2 : params.planes_stage1;
    const LevelFeatures f = features_at(lp, rp, next, features, params.threads);
    StageOutput out = match_stage(f.left, f.right, sample_hypotheses(range, planes), params, next);
    out.range = std::move(range);
    trace.stages.push_back(std::move(out));
  }

  const StageOutput& s1 = trace.stages.back();
  const Grid<double> up_disp = resize_bilinear(s1.disparity, left.width(), left.height());
  const Grid<double> up_unc = resize_bilinear(s1.uncertainty, left.width(), left.height());
  trace.disparity = DisparityField(left.width(), left.height());
  trace.uncertainty = UncertaintyField(left.width(), left.height());
  for (std::size_t i = 0; i < up_disp.size(); ++i) {
    trace.disparity[i] = 2.0 * up_disp[i];
    trace.uncertainty[i] = 4.0 * up_unc[i];
  }
  return trace;
}

StageTrace run_cascade_right_view(const RasterImage& left, const RasterImage& right,
                                  const FeatureConfig& features, const CascadeParams& params) {
  const RasterImage mirrored_left(flip_horizontal<float>(right));
  const RasterImage mirrored_right(flip_horizontal<float>(left));
  StageTrace trace = run_cascade(mirrored_left, mirrored_right, features, params);
  auto unflip = [](auto& field) {
    const int stage = field.stage;
    static_cast<Grid<double>&>(field) = flip_horizontal<double>(field);
    field.stage = stage;
  };
  for (StageOutput& s : trace.stages) {
    unflip(s.disparity);
    unflip(s.uncertainty);
    s.range.reset();
    s.probabilities.reset();
  }
  unflip(trace.disparity);
  unflip(trace.uncertainty);
  return trace;
}

DisparityField refine_disparity(const DisparityField& disparity) {
  const int w = disparity.width(), h = disparity.height();
  auto clamped = [&](const Grid<double>& g, int x, int y) {
    return g(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };

  Grid<double> median(w, h);
  std::array<double, 9> window{};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int k = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) window[k++] = clamped(disparity, x + dx, y + dy);
      std::nth_element(window.begin(), window.begin() + 4, window.end());
      median(x, y) = window[4];
    }
  }

  constexpr int kRadius = 2;
  constexpr double kSigmaSpace = 1.5;
  constexpr double kSigmaRange = 0.5;
  DisparityField out(w, h);
  out.stage = disparity.stage;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double centre = median(x, y);
      double sum = 0.0, weight = 0.0;
      for (int dy = -kRadius; dy <= kRadius; ++dy) {
        for (int dx = -kRadius; dx <= kRadius; ++dx) {
          const double v = clamped(median, x + dx, y + dy);
          const double dr = v - centre;
          const double wgt = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigmaSpace * kSigmaSpace) -
                                      dr * dr / (2.0 * kSigmaRange * kSigmaRange));
          sum += wgt * dr;
          weight += wgt;
        }
      }
      out(x, y) = centre + sum / weight;
    }
  }
  return out;
}

DisparityRaster to_raster(const Grid<double>& field) {
  DisparityRaster out(field.width(), field.height());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = static_cast<float>(field[i]);
  return out;
}

}  // namespace ucs
