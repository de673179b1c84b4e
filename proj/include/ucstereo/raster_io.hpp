#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>

#include "ucstereo/common.hpp"

namespace ucs {

/// Single-channel intensity image, values in [0,1].
class RasterImage : public Grid<float> {
 public:
  using Grid<float>::Grid;
  explicit RasterImage(Grid<float> g) : Grid<float>(std::move(g)) {}
};

/// Disparity in pixels; NaN marks an invalid pixel.
class DisparityRaster : public Grid<float> {
 public:
  using Grid<float>::Grid;
  explicit DisparityRaster(Grid<float> g) : Grid<float>(std::move(g)) {}

  bool valid(int x, int y) const { return !std::isnan((*this)(x, y)); }
  std::size_t valid_count() const;
};

struct CalibrationInfo {
  double focal_length = 0.0;  // pixels
  double baseline = 0.0;      // meters
};

/// Throws InvalidArgument unless every value is finite and inside [0,1].
void validate_image(const RasterImage& image);

/// Throws InvalidArgument unless every non-NaN value lies in [0, d_max).
void validate_disparity(const DisparityRaster& raster, double d_max);

// PFM: "Pf" single channel only. Rows are returned top-to-bottom, infinities
// decode to NaN and NaN is written as +inf (Middlebury convention).
DisparityRaster read_pfm(const std::filesystem::path& path);
void write_pfm(const DisparityRaster& raster, const std::filesystem::path& path);

// KITTI disparity PNG: 16-bit grey, value = round(256 * d), 0 = invalid.
// Disparities below 1/512 px round to 0 and therefore read back as invalid.
DisparityRaster read_kitti_png(const std::filesystem::path& path);
void write_kitti_png(const DisparityRaster& raster, const std::filesystem::path& path);
std::uint16_t encode_kitti_disparity(float disparity);
float decode_kitti_disparity(std::uint16_t stored);

/// Dispatch on extension: ".pfm" or ".png" (KITTI encoding).
DisparityRaster read_disparity(const std::filesystem::path& path);
void write_disparity(const DisparityRaster& raster, const std::filesystem::path& path);

/// Loads an 8/16-bit PNG or binary PGM. Colour inputs are reduced to the
/// mean of their RGB channels; alpha is ignored.
RasterImage read_image(const std::filesystem::path& path);

/// Writes a 16-bit greyscale PNG.
void write_image_png16(const RasterImage& image, const std::filesystem::path& path);

}  // namespace ucs
