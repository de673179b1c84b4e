#include "ucstereo/costvolume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ucs {

HypothesisSet::HypothesisSet(int width, int height, int planes)
    : width_(width), height_(height), planes_(planes) {
  require(width > 0 && height > 0, "hypothesis set must be non-empty");
  require(planes >= 1, "hypothesis set needs at least one plane");
  values_.assign(static_cast<std::size_t>(width) * height * planes, 0.0);
}

HypothesisSet HypothesisSet::dense(int width, int height, int planes) {
  HypothesisSet set(width, height, planes);
  set.dense_ = true;
  for (std::size_t i = 0; i < set.values_.size(); ++i)
    set.values_[i] = static_cast<double>(i % static_cast<std::size_t>(planes));
  return set;
}

void HypothesisSet::validate(double d_limit) const {
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const auto h = at(x, y);
      for (int n = 0; n < planes_; ++n) {
        require(std::isfinite(h[n]) && h[n] >= 0.0 && h[n] < d_limit,
                "hypothesis outside [0, d_max)");
        require(n == 0 || h[n - 1] <= h[n], "hypotheses must be non-decreasing");
      }
    }
  }
}

PlaneVolume::PlaneVolume(int width, int height, int planes, double fill)
    : width_(width), height_(height), planes_(planes) {
  require(width > 0 && height > 0 && planes > 0, "volume dimensions must be positive");
  values_.assign(static_cast<std::size_t>(width) * height * planes, fill);
}

void AggregationConfig::validate() const {
  require(box_radius >= 0, "box radius must be non-negative");
  require(p1 >= 0.0 && p1 <= p2, "SGM penalties need 0 <= P1 <= P2");
  require(sgm_paths == 2 || sgm_paths == 4, "SGM supports 2 or 4 paths");
}

CostVolume build_cost_volume(const FeatureMap& left, const FeatureMap& right,
                             const HypothesisSet& hypotheses, int threads) {
  require(left.compatible(right), "left and right feature maps differ in shape or grouping");
  require(hypotheses.width() == left.width() && hypotheses.height() == left.height(),
          "hypothesis set does not match the feature map size");

  const int w = left.width();
  const int h = left.height();
  const int planes = hypotheses.planes();
  const int channels = left.channels();
  const int groups = left.groups();
  const int group_size = channels / groups;
  const double group_scale = static_cast<double>(groups) / channels;

  CostVolume out{PlaneVolume(w, h, planes), hypotheses};
  parallel_for(h, threads, [&](int y) {
    std::vector<double> sampled(channels);
    for (int x = 0; x < w; ++x) {
      const auto fl = left.at(x, y);
      const auto hyp = hypotheses.at(x, y);
      auto cost = out.costs.at(x, y);
      for (int n = 0; n < planes; ++n) {
        const double xs = std::clamp(x - hyp[n], 0.0, static_cast<double>(w - 1));
        const int x0 = static_cast<int>(xs);
        const double t = xs - x0;
        const auto f0 = right.at(x0, y);
        if (t == 0.0) {
          for (int c = 0; c < channels; ++c) sampled[c] = f0[c];
        } else {
          const auto f1 = right.at(std::min(x0 + 1, w - 1), y);
          for (int c = 0; c < channels; ++c) sampled[c] = f0[c] + (f1[c] - f0[c]) * t;
        }
        double total = 0.0;
        for (int g = 0; g < groups; ++g) {
          double dot = 0.0;
          double norm = 0.0;
          for (int c = g * group_size; c < (g + 1) * group_size; ++c) {
            dot += fl[c] * sampled[c];
            norm += sampled[c] * sampled[c];
          }
          // Interpolated samples are no longer +-1; normalising by their
          // length keeps the minimum at the true sub-pixel offset.
          if (t == 0.0)
            total += 1.0 - group_scale * dot;
          else
            total += 1.0 - (norm > 0.0 ? dot / std::sqrt(group_size * norm) : 0.0);
        }
        cost[n] = std::max(0.0, total / groups);
      }
    }
  });
  return out;
}

namespace {

CostVolume box_aggregate(const CostVolume& in, int radius, int threads) {
  if (radius == 0) return in;
  const int w = in.width(), h = in.height(), planes = in.planes();
  CostVolume out{PlaneVolume(w, h, planes), in.hypotheses};
  parallel_for(h, threads, [&](int y) {
    const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      const double count = static_cast<double>((y1 - y0 + 1) * (x1 - x0 + 1));
      auto dst = out.costs.at(x, y);
      for (int yy = y0; yy <= y1; ++yy)
        for (int xx = x0; xx <= x1; ++xx) {
          const auto src = in.costs.at(xx, yy);
          for (int n = 0; n < planes; ++n) dst[n] += src[n];
        }
      for (int n = 0; n < planes; ++n) dst[n] /= count;
    }
  });
  return out;
}

// One SGM direction. Scanline `line` starts at (x0, y0) and advances by
// (dx, dy) for `length` pixels.
void sgm_scanline(const PlaneVolume& cost, PlaneVolume& path, int x0, int y0, int dx, int dy,
                  int length, double p1, double p2) {
  const int planes = cost.planes();
  int x = x0, y = y0;
  {
    const auto c = cost.at(x, y);
    auto l = path.at(x, y);
    std::copy(c.begin(), c.end(), l.begin());
  }
  for (int step = 1; step < length; ++step) {
    const auto prev = path.at(x, y);
    x += dx;
    y += dy;
    const double prev_min = *std::min_element(prev.begin(), prev.end());
    const auto c = cost.at(x, y);
    auto l = path.at(x, y);
    for (int n = 0; n < planes; ++n) {
      double best = std::min(prev[n], prev_min + p2);
      if (n > 0) best = std::min(best, prev[n - 1] + p1);
      if (n + 1 < planes) best = std::min(best, prev[n + 1] + p1);
      l[n] = c[n] + (best - prev_min);
    }
  }
}

CostVolume sgm_aggregate(const CostVolume& in, const AggregationConfig& cfg, int threads) {
  const int w = in.width(), h = in.height(), planes = in.planes();
  const PlaneVolume& cost = in.costs;
  std::vector<PlaneVolume> paths(cfg.sgm_paths, PlaneVolume(w, h, planes));

  parallel_for(h, threads, [&](int y) {
    sgm_scanline(cost, paths[0], 0, y, 1, 0, w, cfg.p1, cfg.p2);
    sgm_scanline(cost, paths[1], w - 1, y, -1, 0, w, cfg.p1, cfg.p2);
  });
  if (cfg.sgm_paths == 4) {
    parallel_for(w, threads, [&](int x) {
      sgm_scanline(cost, paths[2], x, 0, 0, 1, h, cfg.p1, cfg.p2);
      sgm_scanline(cost, paths[3], x, h - 1, 0, -1, h, cfg.p1, cfg.p2);
    });
  }

  // Pairwise summation keeps the zero-penalty case an exact identity.
  CostVolume out{PlaneVolume(w, h, planes), in.hypotheses};
  auto& dst = out.costs.values();
  const auto& a = paths[0].values();
  const auto& b = paths[1].values();
  if (cfg.sgm_paths == 2) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (a[i] + b[i]) / 2.0;
  } else {
    const auto& c = paths[2].values();
    const auto& d = paths[3].values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = ((a[i] + b[i]) + (c[i] + d[i])) / 4.0;
  }
  return out;
}

}  // namespace

CostVolume aggregate(const CostVolume& volume, const AggregationConfig& config, int threads) {
  config.validate();
  if (config.method == AggregationConfig::Method::Box)
    return box_aggregate(volume, config.box_radius, threads);
  return sgm_aggregate(volume, config, threads);
}

CostVolume upsample_dense_volume(const CostVolume& coarse, int fine_width, int fine_height) {
  require(coarse.hypotheses.is_dense(), "fusion requires dense volumes");
  const int cw = coarse.width(), ch = coarse.height(), cp = coarse.planes();
  const int fp = 2 * cp;

  // Spatial pass, one plane at a time.
  PlaneVolume spatial(fine_width, fine_height, cp);
  Grid<double> plane(cw, ch);
  for (int n = 0; n < cp; ++n) {
    for (int y = 0; y < ch; ++y)
      for (int x = 0; x < cw; ++x) plane(x, y) = coarse.costs.at(x, y)[n];
    const Grid<double> up = resize_bilinear(plane, fine_width, fine_height);
    for (int y = 0; y < fine_height; ++y)
      for (int x = 0; x < fine_width; ++x) spatial.at(x, y)[n] = up(x, y);
  }

  // Plane pass: fine plane j sits at coarse position j/2; clamp past the end.
  CostVolume out{PlaneVolume(fine_width, fine_height, fp),
                 HypothesisSet::dense(fine_width, fine_height, fp)};
  for (int y = 0; y < fine_height; ++y) {
    for (int x = 0; x < fine_width; ++x) {
      const auto src = spatial.at(x, y);
      auto dst = out.costs.at(x, y);
      for (int j = 0; j < fp; ++j) {
        const int k0 = j / 2;
        const int k1 = std::min(k0 + 1, cp - 1);
        dst[j] = (j % 2 == 0) ? src[k0] : src[k0] + (src[k1] - src[k0]) * 0.5;
      }
    }
  }
  return out;
}

CostVolume fuse_dense_volumes(std::span<const CostVolume> volumes) {
  require(!volumes.empty(), "fusion needs at least one volume");
  for (const CostVolume& v : volumes) require(v.hypotheses.is_dense(), "fusion requires dense volumes");
  for (std::size_t i = 1; i < volumes.size(); ++i) {
    const CostVolume& fine = volumes[i - 1];
    const CostVolume& coarse = volumes[i];
    const bool chained = coarse.width() == (fine.width() + 1) / 2 &&
                         coarse.height() == (fine.height() + 1) / 2 &&
                         2 * coarse.planes() == fine.planes();
    if (!chained) fail(ErrorKind::InvalidArgument, "inconsistent scale chain in fusion input");
  }
  if (volumes.size() == 1) return volumes[0];

  const CostVolume& base = volumes[0];
  CostVolume sum = base;
  auto& acc = sum.costs.values();
  for (std::size_t i = 1; i < volumes.size(); ++i) {
    CostVolume up = volumes[i];
    for (std::size_t k = i; k-- > 0;)
      up = upsample_dense_volume(up, volumes[k].width(), volumes[k].height());
    const auto& src = up.costs.values();
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += src[j];
  }
  const double count = static_cast<double>(volumes.size());
  for (double& v : acc) v /= count;
  return sum;
}

ProbabilityVolume softmin_probabilities(const CostVolume& volume, double temperature,
                                        int threads) {
  require(temperature > 0.0, "softmin temperature must be positive");
  const int w = volume.width(), h = volume.height(), planes = volume.planes();
  ProbabilityVolume out{PlaneVolume(w, h, planes)};
  parallel_for(h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const auto c = volume.costs.at(x, y);
      auto p = out.probabilities.at(x, y);
      const double lowest = *std::min_element(c.begin(), c.end());
      double total = 0.0;
      for (int n = 0; n < planes; ++n) {
        p[n] = std::exp(-(c[n] - lowest) / temperature);
        total += p[n];
      }
      for (int n = 0; n < planes; ++n) p[n] /= total;
    }
  });
  return out;
}

}  // namespace ucs
