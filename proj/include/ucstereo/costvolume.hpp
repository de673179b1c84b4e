#pragma once

#include <span>
#include <vector>

#include "ucstereo/features.hpp"

namespace ucs {

/// Per-pixel sorted disparity hypotheses, pixel-major.
class HypothesisSet {
 public:
  HypothesisSet() = default;
  HypothesisSet(int width, int height, int planes);

  /// Integer hypotheses {0, ..., planes-1} at every pixel.
  static HypothesisSet dense(int width, int height, int planes);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int planes() const noexcept { return planes_; }
  bool is_dense() const noexcept { return dense_; }

  std::span<double> at(int x, int y) {
    return {values_.data() + offset(x, y), static_cast<std::size_t>(planes_)};
  }
  std::span<const double> at(int x, int y) const {
    return {values_.data() + offset(x, y), static_cast<std::size_t>(planes_)};
  }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Throws unless every per-pixel list is sorted and inside [0, d_limit).
  void validate(double d_limit) const;

  friend bool operator==(const HypothesisSet&, const HypothesisSet&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * planes_;
  }

  int width_ = 0;
  int height_ = 0;
  int planes_ = 0;
  bool dense_ = false;
  std::vector<double> values_;
};

/// Plane-major-per-pixel storage shared by cost and probability volumes.
class PlaneVolume {
 public:
  PlaneVolume() = default;
  PlaneVolume(int width, int height, int planes, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int planes() const noexcept { return planes_; }

  std::span<double> at(int x, int y) {
    return {values_.data() + offset(x, y), static_cast<std::size_t>(planes_)};
  }
  std::span<const double> at(int x, int y) const {
    return {values_.data() + offset(x, y), static_cast<std::size_t>(planes_)};
  }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const PlaneVolume&, const PlaneVolume&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * planes_;
  }

  int width_ = 0;
  int height_ = 0;
  int planes_ = 0;
  std::vector<double> values_;
};

/// Matching costs (lower is better, >= 0) indexed by a hypothesis set.
struct CostVolume {
  PlaneVolume costs;
  HypothesisSet hypotheses;

  int width() const noexcept { return costs.width(); }
  int height() const noexcept { return costs.height(); }
  int planes() const noexcept { return costs.planes(); }

  friend bool operator==(const CostVolume&, const CostVolume&) = default;
};

/// Per-pixel distributions over planes; each pixel sums to 1.
struct ProbabilityVolume {
  PlaneVolume probabilities;

  int width() const noexcept { return probabilities.width(); }
  int height() const noexcept { return probabilities.height(); }
  int planes() const noexcept { return probabilities.planes(); }

  friend bool operator==(const ProbabilityVolume&, const ProbabilityVolume&) = default;
};

struct AggregationConfig {
  enum class Method { Box, Sgm };
  Method method = Method::Box;
  int box_radius = 2;
  double p1 = 0.1;   // |plane step| == 1
  double p2 = 0.4;   // |plane step| > 1
  int sgm_paths = 4; // 2: horizontal only, 4: horizontal and vertical

  void validate() const;
};

/// Group-wise correlation cost over explicit hypotheses:
///   cost = mean_g (1 - (N_g/N_c) <f_l^g(x,y), f_r^g(x-d,y)>)
/// Fractional d interpolates f_r linearly along x and then uses the cosine of
/// each group pair instead, so sub-pixel minima are not pulled to integers.
/// x-d clamps to the image.
CostVolume build_cost_volume(const FeatureMap& left, const FeatureMap& right,
                             const HypothesisSet& hypotheses, int threads = 1);

/// Box filter per plane, or semi-global matching over 2 or 4 scanline
/// directions with path costs averaged.
CostVolume aggregate(const CostVolume& volume, const AggregationConfig& config,
                     int threads = 1);

/// Equal-weight fusion of dense volumes at consecutive scales, finest first.
/// Coarser volumes are upsampled bilinearly in space and linearly along the
/// plane axis (coarse plane k feeds fine planes 2k and 2k+1) before averaging.
CostVolume fuse_dense_volumes(std::span<const CostVolume> volumes);

/// Upsamples a dense volume by one scale step (helper of the fusion).
CostVolume upsample_dense_volume(const CostVolume& coarse, int fine_width, int fine_height);

/// p(n) = exp(-c(n)/tau) / sum_m exp(-c(m)/tau), evaluated after subtracting
/// the per-pixel minimum cost.
ProbabilityVolume softmin_probabilities(const CostVolume& volume, double temperature,
                                        int threads = 1);

}  // namespace ucs
