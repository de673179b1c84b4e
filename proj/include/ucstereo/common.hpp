#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucs {

enum class ErrorKind {
  InvalidArgument,
  Io,
  Format,
  NoSupervision,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidArgument, what);
}

constexpr float kInvalidDisparity = std::numeric_limits<float>::quiet_NaN();

/// Dense row-major 2-D array. The building block for every raster and field
/// type in the library.
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    require(width >= 0 && height >= 0, "grid dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    require(width >= 0 && height >= 0, "grid dimensions must be non-negative");
    require(data_.size() == static_cast<std::size_t>(width) * height,
            "grid payload does not match dimensions");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& values() noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  template <class U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid& a, const Grid& b) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Shortest decimal text that reads back to exactly `v`.
std::string format_real(double v);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; callers write disjoint outputs, so results do not
/// depend on the thread count. The first exception thrown is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/// Bilinear resampling with pixel-centre alignment and clamped borders.
Grid<double> resize_bilinear(const Grid<double>& src, int width, int height);

/// Horizontal mirror image of a grid.
template <class T>
Grid<T> flip_horizontal(const Grid<T>& src) {
  Grid<T> out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      out(x, y) = src(src.width() - 1 - x, y);
  return out;
}

}  // namespace ucs
