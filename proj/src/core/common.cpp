#include "ucstereo/common.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace ucs {

std::string format_real(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::clamp(threads, 1, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      // Static contiguous partition.
      const int begin = static_cast<int>(static_cast<long long>(count) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
      pool.emplace_back([&, begin, end] {
        try {
          for (int i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

Grid<double> resize_bilinear(const Grid<double>& src, int width, int height) {
  require(src.width() > 0 && src.height() > 0, "cannot resample an empty grid");
  require(width > 0 && height > 0, "target size must be positive");
  Grid<double> out(width, height);
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  const int max_x = src.width() - 1;
  const int max_y = src.height() - 1;

  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(max_y));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, max_y);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(max_x));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, max_x);
      const double wx = fx - x0;
      // a + (b - a) * w keeps constant regions exactly constant.
      const double top = src(x0, y0) + (src(x1, y0) - src(x0, y0)) * wx;
      const double bottom = src(x0, y1) + (src(x1, y1) - src(x0, y1)) * wx;
      out(x, y) = top + (bottom - top) * wy;
    }
  }
  return out;
}

}  // namespace ucs
