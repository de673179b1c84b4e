#pragma once

#include <span>
#include <vector>

#include "ucstereo/raster_io.hpp"

namespace ucs {

struct FeatureConfig {
  int census_radius = 4;        // window (2r+1)^2
  bool include_gradients = false;
  int group_count = 8;
};

/// Per-pixel feature vectors, pixel-major. Census channels are exactly +-1,
/// gradient channels lie in [-1,1].
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int width, int height, int channels, int groups);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  int groups() const noexcept { return groups_; }

  std::span<float> at(int x, int y) {
    return {data_.data() + offset(x, y), static_cast<std::size_t>(channels_)};
  }
  std::span<const float> at(int x, int y) const {
    return {data_.data() + offset(x, y), static_cast<std::size_t>(channels_)};
  }
  const std::vector<float>& values() const noexcept { return data_; }

  bool compatible(const FeatureMap& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_ && groups_ == other.groups_;
  }

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  int groups_ = 1;
  std::vector<float> data_;
};

struct ImagePyramid {
  std::vector<RasterImage> levels;  // level i at 1/2^i resolution
};

/// Number of channels census_transform produces for a config.
int feature_channel_count(const FeatureConfig& config);

/// Census over a (2r+1)^2 window, neighbours in row-major order with the
/// centre skipped. +1 where the neighbour is strictly brighter, -1 otherwise.
/// Coordinates clamp at the border. With include_gradients, two Sobel
/// channels (x then y, divided by 4) follow the census channels.
FeatureMap census_transform(const RasterImage& image, const FeatureConfig& config,
                            int threads = 1);

/// 2x2 box-average pyramid; odd sizes round up and the partial block
/// averages only the pixels it covers.
ImagePyramid build_pyramid(const RasterImage& image, int num_levels);

}  // namespace ucs
