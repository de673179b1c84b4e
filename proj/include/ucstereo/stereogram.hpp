#pragma once

#include <cstdint>
#include <variant>

#include "ucstereo/raster_io.hpp"

namespace ucs {

struct ConstantDisparity {
  int disparity = 0;
};

/// gt(x, y) = round(a * x + b * y + c).
struct SlantedPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Background at bg_disparity with a fronto-parallel box at fg_disparity.
/// The box covers [x0, x1) x [y0, y1) in the left view.
struct TwoLayer {
  int fg_disparity = 0;
  int bg_disparity = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

using DisparityModel = std::variant<ConstantDisparity, SlantedPlane, TwoLayer>;

struct StereogramSpec {
  int width = 128;
  int height = 128;
  DisparityModel model = ConstantDisparity{};
  double dot_density = 0.5;
  double noise_sigma = 0.0;
  double brightness_offset_right = 0.0;
  std::uint64_t seed = 0;
  int d_max = 256;
};

struct Stereogram {
  RasterImage left;
  RasterImage right;
  DisparityRaster gt;  // left-view disparity, integer valued
  /// 1 where the left pixel has no visible correspondence in the right view.
  Grid<std::uint8_t> occluded;
};

/// Random-dot stereo pair with exact ground truth. Left pixel (x, y) appears
/// at (x - gt(x, y), y) in the right view; nearer surfaces win collisions and
/// right pixels nothing maps to get fresh dots. Deterministic in the seed.
Stereogram generate_stereogram(const StereogramSpec& spec);

}  // namespace ucs
