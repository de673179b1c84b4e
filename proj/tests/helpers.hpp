#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "ucstereo/stereogram.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ucs_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline ucs::RasterImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ucs::RasterImage img(w, h);
  for (float& v : img.values()) v = u(rng);
  return img;
}

inline ucs::Stereogram constant_pair(int d, std::uint64_t seed, int size = 64, int d_max = 64) {
  ucs::StereogramSpec s;
  s.width = size;
  s.height = size;
  s.model = ucs::ConstantDisparity{d};
  s.seed = seed;
  s.d_max = d_max;
  return ucs::generate_stereogram(s);
}

}  // namespace testing
