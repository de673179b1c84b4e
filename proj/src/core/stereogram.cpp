#include "ucstereo/stereogram.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ucs {

namespace {

// Distribution code is written out so output is identical across standard
// library implementations; only the raw engine output is relied upon.
class DotSource {
 public:
  explicit DotSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Bright dot with probability `density`, dark background otherwise.
  float dot(double density) {
    const bool is_dot = uniform() < density;
    const double level = uniform();
    return static_cast<float>(is_dot ? 0.45 + 0.55 * level : 0.35 * level);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct GroundTruthVisitor {
  int x, y;
  double operator()(const ConstantDisparity& m) const { return m.disparity; }
  double operator()(const SlantedPlane& m) const { return std::round(m.a * x + m.b * y + m.c); }
  double operator()(const TwoLayer& m) const {
    const bool inside = x >= m.x0 && x < m.x1 && y >= m.y0 && y < m.y1;
    return inside ? m.fg_disparity : m.bg_disparity;
  }
};

float clamp_unit(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

Stereogram generate_stereogram(const StereogramSpec& spec) {
  require(spec.width > 0 && spec.height > 0, "stereogram size must be positive");
  require(spec.dot_density > 0.0 && spec.dot_density <= 1.0, "dot_density must lie in (0,1]");
  require(spec.noise_sigma >= 0.0, "noise_sigma must be non-negative");
  require(spec.d_max > 0, "d_max must be positive");

  const int w = spec.width;
  const int h = spec.height;
  Stereogram out{RasterImage(w, h), RasterImage(w, h), DisparityRaster(w, h),
                 Grid<std::uint8_t>(w, h, 1)};

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = std::visit(GroundTruthVisitor{x, y}, spec.model);
      require(d >= 0.0 && d < spec.d_max, "disparity model leaves [0, d_max) at (" +
                                              std::to_string(x) + ", " + std::to_string(y) + ")");
      out.gt(x, y) = static_cast<float>(d);
    }
  }

  DotSource rng(spec.seed);
  Grid<float> left_texture(w, h);
  for (float& v : left_texture.values()) v = rng.dot(spec.dot_density);

  // Forward warp with a z-buffer: larger disparity (nearer) wins.
  Grid<float> right_texture(w, h);
  Grid<int> owner(w, h, -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int d = static_cast<int>(out.gt(x, y));
      const int xr = x - d;
      if (xr < 0) continue;
      const int current = owner(xr, y);
      if (current < 0 || out.gt(current, y) < static_cast<float>(d)) {
        owner(xr, y) = x;
        right_texture(xr, y) = left_texture(x, y);
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int xr = 0; xr < w; ++xr) {
      const int x = owner(xr, y);
      if (x < 0)
        right_texture(xr, y) = rng.dot(spec.dot_density);
      else
        out.occluded(x, y) = 0;
    }
  }

  for (std::size_t i = 0; i < out.left.size(); ++i) {
    const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
    out.left[i] = clamp_unit(left_texture[i] + noise);
  }
  for (std::size_t i = 0; i < out.right.size(); ++i) {
    const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
    out.right[i] = clamp_unit(right_texture[i] + spec.brightness_offset_right + noise);
  }
  return out;
}

}  // namespace ucs
