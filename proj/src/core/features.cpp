#include "ucstereo/features.hpp"

#include <algorithm>

namespace ucs {

FeatureMap::FeatureMap(int width, int height, int channels, int groups)
    : width_(width), height_(height), channels_(channels), groups_(groups) {
  require(width > 0 && height > 0, "feature map must be non-empty");
  require(channels > 0 && groups > 0 && channels % groups == 0,
          "group count must divide the channel count");
  data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0f);
}

int feature_channel_count(const FeatureConfig& config) {
  const int side = 2 * config.census_radius + 1;
  return side * side - 1 + (config.include_gradients ? 2 : 0);
}

FeatureMap census_transform(const RasterImage& image, const FeatureConfig& config, int threads) {
  require(config.census_radius >= 1, "census radius must be at least 1");
  require(config.group_count >= 1, "group count must be positive");
  const int r = config.census_radius;
  const int w = image.width();
  const int h = image.height();
  require(2 * r + 1 <= w && 2 * r + 1 <= h, "census window larger than image");
  const int channels = feature_channel_count(config);
  require(channels % config.group_count == 0, "group count must divide the channel count");

  FeatureMap out(w, h, channels, config.group_count);
  auto px = [&](int x, int y) {
    return image(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };

  parallel_for(h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      auto f = out.at(x, y);
      const float centre = image(x, y);
      int k = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx == 0 && dy == 0) continue;
          f[k++] = px(x + dx, y + dy) > centre ? 1.0f : -1.0f;
        }
      }
      if (config.include_gradients) {
        const float gx = (px(x + 1, y - 1) + 2.0f * px(x + 1, y) + px(x + 1, y + 1)) -
                         (px(x - 1, y - 1) + 2.0f * px(x - 1, y) + px(x - 1, y + 1));
        const float gy = (px(x - 1, y + 1) + 2.0f * px(x, y + 1) + px(x + 1, y + 1)) -
                         (px(x - 1, y - 1) + 2.0f * px(x, y - 1) + px(x + 1, y - 1));
        f[k++] = gx / 4.0f;
        f[k++] = gy / 4.0f;
      }
    }
  });
  return out;
}

ImagePyramid build_pyramid(const RasterImage& image, int num_levels) {
  require(num_levels >= 1, "pyramid needs at least one level");
  require(image.width() > 0 && image.height() > 0, "cannot build a pyramid of an empty image");
  ImagePyramid pyramid;
  pyramid.levels.push_back(image);
  for (int level = 1; level < num_levels; ++level) {
    const RasterImage& src = pyramid.levels.back();
    if (src.width() == 1 && src.height() == 1)
      fail(ErrorKind::InvalidArgument, "pyramid level " + std::to_string(level) +
                                           " would be smaller than 1x1");
    const int w = (src.width() + 1) / 2;
    const int h = (src.height() + 1) / 2;
    RasterImage dst(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        int n = 0;
        for (int sy = 2 * y; sy < std::min(2 * y + 2, src.height()); ++sy)
          for (int sx = 2 * x; sx < std::min(2 * x + 2, src.width()); ++sx) {
            sum += src(sx, sy);
            ++n;
          }
        dst(x, y) = static_cast<float>(sum / n);
      }
    }
    pyramid.levels.push_back(std::move(dst));
  }
  return pyramid;
}

}  // namespace ucs
