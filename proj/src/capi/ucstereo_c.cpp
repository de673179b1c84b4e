#include "ucstereo/ucstereo.h"

#include <algorithm>
#include <cmath>
#include <new>
#include <string>

#include "ucstereo/adapt.hpp"
#include "ucstereo/eval.hpp"
#include "ucstereo/stereogram.hpp"

struct ucs_raster {
  ucs::Grid<float> grid;
};

struct ucs_config {
  ucs::PipelineConfig config;
};

struct ucs_roc {
  ucs::RocCurve curve;
};

struct ucs_adapt_report {
  ucs::AdaptReport report;
};

namespace {

thread_local std::string last_error;

ucs_status status_of(ucs::ErrorKind kind) {
  switch (kind) {
    case ucs::ErrorKind::InvalidArgument: return UCS_ERR_INVALID_ARGUMENT;
    case ucs::ErrorKind::Io: return UCS_ERR_IO;
    case ucs::ErrorKind::Format: return UCS_ERR_FORMAT;
    case ucs::ErrorKind::NoSupervision: return UCS_ERR_NO_SUPERVISION;
    case ucs::ErrorKind::Internal: return UCS_ERR_INTERNAL;
  }
  return UCS_ERR_INTERNAL;
}

// Runs fn, translating exceptions into a status and the thread's message.
template <class Fn>
ucs_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return UCS_OK;
  } catch (const ucs::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return UCS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return UCS_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return UCS_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) ucs::fail(ucs::ErrorKind::InvalidArgument, std::string(what) + " is null");
}

ucs_raster* wrap(ucs::Grid<float> grid) { return new ucs_raster{std::move(grid)}; }

ucs_raster* wrap(const ucs::Grid<double>& field) {
  ucs::Grid<float> out(field.width(), field.height());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = static_cast<float>(field[i]);
  return wrap(std::move(out));
}

ucs::RasterImage image_of(const ucs_raster* r, const char* what) {
  need(r, what);
  return ucs::RasterImage(r->grid);
}

ucs::DisparityRaster disparity_of(const ucs_raster* r, const char* what) {
  need(r, what);
  return ucs::DisparityRaster(r->grid);
}

ucs::Grid<double> field_of(const ucs_raster* r, const char* what) {
  need(r, what);
  ucs::Grid<double> out(r->grid.width(), r->grid.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r->grid[i];
  return out;
}

ucs::SparseLabelMap label_of(const ucs_raster* r) {
  need(r, "label");
  ucs::SparseLabelMap label{ucs::DisparityRaster(r->grid),
                            ucs::Grid<std::uint8_t>(r->grid.width(), r->grid.height(), 0)};
  for (std::size_t i = 0; i < r->grid.size(); ++i) label.valid[i] = !std::isnan(r->grid[i]);
  return label;
}

template <class T>
void put(T** out, T* value) {
  if (out) {
    *out = value;
  } else {
    delete value;
  }
}

}  // namespace

extern "C" {

const char* ucs_version(void) { return "0.1.0"; }

const char* ucs_last_error(void) { return last_error.c_str(); }

const char* ucs_status_name(ucs_status status) {
  switch (status) {
    case UCS_OK: return "ok";
    case UCS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case UCS_ERR_IO: return "i/o error";
    case UCS_ERR_FORMAT: return "format error";
    case UCS_ERR_NO_SUPERVISION: return "no supervision";
    case UCS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ucs_status ucs_raster_create(int width, int height, const float* data, ucs_raster** out) {
  return guarded([&] {
    need(out, "out");
    ucs::Grid<float> grid(width, height);
    if (data) std::copy(data, data + grid.size(), grid.values().begin());
    *out = wrap(std::move(grid));
  });
}

void ucs_raster_destroy(ucs_raster* raster) { delete raster; }
int ucs_raster_width(const ucs_raster* raster) { return raster ? raster->grid.width() : 0; }
int ucs_raster_height(const ucs_raster* raster) { return raster ? raster->grid.height() : 0; }
const float* ucs_raster_data(const ucs_raster* raster) {
  return raster ? raster->grid.values().data() : nullptr;
}
float* ucs_raster_data_mut(ucs_raster* raster) {
  return raster ? raster->grid.values().data() : nullptr;
}

ucs_status ucs_read_image(const char* path, ucs_raster** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(ucs::Grid<float>(ucs::read_image(path)));
  });
}

ucs_status ucs_write_image(const ucs_raster* image, const char* path) {
  return guarded([&] {
    need(path, "path");
    ucs::write_image_png16(image_of(image, "image"), path);
  });
}

ucs_status ucs_read_disparity(const char* path, ucs_raster** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(ucs::Grid<float>(ucs::read_disparity(path)));
  });
}

ucs_status ucs_write_disparity(const ucs_raster* disparity, const char* path) {
  return guarded([&] {
    need(path, "path");
    ucs::write_disparity(disparity_of(disparity, "disparity"), path);
  });
}

uint16_t ucs_kitti_encode(float disparity) { return ucs::encode_kitti_disparity(disparity); }
float ucs_kitti_decode(uint16_t stored) { return ucs::decode_kitti_disparity(stored); }

ucs_status ucs_config_create(ucs_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ucs_config{};
  });
}

void ucs_config_destroy(ucs_config* config) { delete config; }

ucs_status ucs_config_load(const char* path, ucs_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new ucs_config{ucs::load_config(path)};
  });
}

ucs_status ucs_config_save(const ucs_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    ucs::save_config(config->config, path);
  });
}

ucs_status ucs_config_parse(const char* text, ucs_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new ucs_config{ucs::parse_config(text)};
  });
}

ucs_status ucs_config_set(ucs_config* config, const char* key, double value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    ucs::PipelineConfig updated = config->config;
    ucs::set_config_number(updated, key, value);
    updated.validate();
    config->config = updated;
  });
}

ucs_status ucs_config_get(const ucs_config* config, const char* key, double* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    *value = ucs::get_config_value(config->config, key);
  });
}

size_t ucs_config_key_count(void) { return ucs::config_keys().size(); }

const char* ucs_config_key(size_t index) {
  const auto& keys = ucs::config_keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

void ucs_synth_spec_default(ucs_synth_spec* spec) {
  if (!spec) return;
  const ucs::StereogramSpec d;
  *spec = ucs_synth_spec{};
  spec->width = d.width;
  spec->height = d.height;
  spec->model = UCS_MODEL_CONSTANT;
  spec->dot_density = d.dot_density;
  spec->noise_sigma = d.noise_sigma;
  spec->brightness_offset = d.brightness_offset_right;
  spec->seed = d.seed;
  spec->d_max = d.d_max;
}

ucs_status ucs_synthesize(const ucs_synth_spec* spec, ucs_raster** left, ucs_raster** right,
                          ucs_raster** gt, ucs_raster** occluded) {
  return guarded([&] {
    need(spec, "spec");
    ucs::StereogramSpec s;
    s.width = spec->width;
    s.height = spec->height;
    switch (spec->model) {
      case UCS_MODEL_CONSTANT: s.model = ucs::ConstantDisparity{spec->disparity}; break;
      case UCS_MODEL_SLANTED:
        s.model = ucs::SlantedPlane{spec->plane[0], spec->plane[1], spec->plane[2]};
        break;
      case UCS_MODEL_TWO_LAYER:
        s.model = ucs::TwoLayer{spec->fg_disparity, spec->bg_disparity, spec->box[0],
                                spec->box[1],      spec->box[2],        spec->box[3]};
        break;
      default: ucs::fail(ucs::ErrorKind::InvalidArgument, "unknown disparity model");
    }
    s.dot_density = spec->dot_density;
    s.noise_sigma = spec->noise_sigma;
    s.brightness_offset_right = spec->brightness_offset;
    s.seed = spec->seed;
    s.d_max = spec->d_max;
    ucs::Stereogram g = ucs::generate_stereogram(s);
    ucs::Grid<float> occ(g.occluded.width(), g.occluded.height());
    for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = g.occluded[i] ? 1.0f : 0.0f;
    put(left, wrap(std::move(g.left)));
    put(right, wrap(std::move(g.right)));
    put(gt, wrap(std::move(g.gt)));
    put(occluded, wrap(std::move(occ)));
  });
}

ucs_status ucs_match(const ucs_config* config, const ucs_raster* left, const ucs_raster* right,
                     int threads, ucs_raster** disparity, ucs_raster** stddev) {
  return guarded([&] {
    need(config, "config");
    ucs::PipelineConfig c = config->config;
    c.cascade.threads = threads;
    const ucs::StageTrace trace = ucs::run_cascade(image_of(left, "left"),
                                                   image_of(right, "right"), c.features,
                                                   c.cascade);
    ucs::Grid<double> sd(trace.uncertainty.width(), trace.uncertainty.height());
    for (std::size_t i = 0; i < sd.size(); ++i) sd[i] = std::sqrt(trace.uncertainty[i]);
    put(disparity, wrap(trace.disparity));
    put(stddev, wrap(sd));
  });
}

ucs_status ucs_match_right_view(const ucs_config* config, const ucs_raster* left,
                                const ucs_raster* right, int threads, ucs_raster** disparity) {
  return guarded([&] {
    need(config, "config");
    need(disparity, "disparity");
    ucs::PipelineConfig c = config->config;
    c.cascade.threads = threads;
    const ucs::StageTrace trace = ucs::run_cascade_right_view(
        image_of(left, "left"), image_of(right, "right"), c.features, c.cascade);
    *disparity = wrap(trace.disparity);
  });
}

ucs_status ucs_pseudolabel(const ucs_config* config, const ucs_raster* left,
                           const ucs_raster* right, int threads, ucs_raster** label,
                           ucs_label_stats* stats) {
  return guarded([&] {
    need(config, "config");
    ucs::PipelineConfig c = config->config;
    c.cascade.threads = threads;
    const ucs::RasterImage l = image_of(left, "left");
    const ucs::StageTrace trace =
        ucs::run_cascade(l, image_of(right, "right"), c.features, c.cascade);
    const ucs::PseudoLabelResult r =
        ucs::generate_pseudo_labels(trace, l, c.t_pixel, c.t_area, c.area, threads);
    if (stats) {
      stats->pixel_density = r.pixel_label.density();
      stats->area_density = r.area_label.density();
      stats->density = r.label.density();
      stats->valid_count = r.label.valid_count();
    }
    put(label, wrap(ucs::Grid<float>(r.label.disparity)));
  });
}

ucs_status ucs_evaluate(const ucs_raster* disparity, const ucs_raster* gt, ucs_metrics* out) {
  return guarded([&] {
    need(out, "out");
    const ucs::MetricReport m =
        ucs::compute_metrics(disparity_of(disparity, "disparity"), disparity_of(gt, "gt"));
    *out = ucs_metrics{m.epe, m.d1_all, m.bad1, m.bad2, m.valid_count};
  });
}

ucs_status ucs_metrics_write_csv(const ucs_metrics* metrics, const char* path) {
  return guarded([&] {
    need(metrics, "metrics");
    need(path, "path");
    ucs::write_metrics_csv({metrics->epe, metrics->d1_all, metrics->bad1, metrics->bad2,
                            metrics->valid_count},
                           path);
  });
}

ucs_status ucs_roc_compute(const ucs_raster* disparity, const ucs_raster* gt,
                           const ucs_raster* uncertainty, double step, ucs_roc** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ucs_roc{ucs::roc_curve(disparity_of(disparity, "disparity"),
                                      disparity_of(gt, "gt"),
                                      field_of(uncertainty, "uncertainty"), step)};
  });
}

void ucs_roc_destroy(ucs_roc* roc) { delete roc; }
size_t ucs_roc_size(const ucs_roc* roc) { return roc ? roc->curve.points.size() : 0; }
double ucs_roc_auc(const ucs_roc* roc) { return roc ? roc->curve.auc : std::nan(""); }

ucs_status ucs_roc_point(const ucs_roc* roc, size_t index, double* removed_fraction,
                         double* density, double* d1) {
  return guarded([&] {
    need(roc, "roc");
    ucs::require(index < roc->curve.points.size(), "roc index out of range");
    const ucs::RocPoint& p = roc->curve.points[index];
    if (removed_fraction) *removed_fraction = p.removed_fraction;
    if (density) *density = p.density;
    if (d1) *d1 = p.d1;
  });
}

ucs_status ucs_roc_write_csv(const ucs_roc* roc, const char* path) {
  return guarded([&] {
    need(roc, "roc");
    need(path, "path");
    ucs::write_roc_csv(roc->curve, path);
  });
}

double ucs_smooth_l1(double x) { return ucs::smooth_l1(x); }

ucs_status ucs_silog_loss(const ucs_raster* prediction, const ucs_raster* label, double lambda,
                          double* out) {
  return guarded([&] {
    need(out, "out");
    ucs::LossConfig config;
    config.silog_lambda = lambda;
    *out = ucs::silog_loss(field_of(prediction, "prediction"), label_of(label), config);
  });
}

ucs_status ucs_bce_loss(const ucs_raster* u_area, const ucs_raster* mask, double* out) {
  return guarded([&] {
    need(out, "out");
    need(mask, "mask");
    ucs::BinaryMask m(mask->grid.width(), mask->grid.height(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const float v = mask->grid[i];
      m[i] = std::isnan(v) ? ucs::BinaryMask::kUndefined : static_cast<std::uint8_t>(v != 0.0f);
    }
    *out = ucs::bce_uncertainty_loss(field_of(u_area, "u_area"), m);
  });
}

ucs_status ucs_triangulate(const ucs_raster* input, double focal_length, double baseline,
                           ucs_raster** out) {
  return guarded([&] {
    need(out, "out");
    const ucs::CalibrationInfo calib{focal_length, baseline};
    *out = wrap(ucs::Grid<float>(ucs::disparity_to_depth(disparity_of(input, "input"), calib)));
  });
}

ucs_status ucs_adapt(const ucs_config* init, const ucs_raster* const* lefts,
                     const ucs_raster* const* rights, size_t pair_count, int iterations,
                     int threads, ucs_config** adapted, ucs_adapt_report** report) {
  return guarded([&] {
    need(init, "init");
    ucs::require(pair_count == 0 || (lefts && rights), "pair arrays are null");
    std::vector<ucs::StereoPair> pairs;
    for (size_t i = 0; i < pair_count; ++i)
      pairs.push_back({image_of(lefts[i], "left"), image_of(rights[i], "right")});
    ucs::AdaptResult r = ucs::adapt_params(pairs, init->config, iterations, {}, threads);
    put(adapted, new ucs_config{std::move(r.config)});
    put(report, new ucs_adapt_report{std::move(r.report)});
  });
}

void ucs_adapt_report_destroy(ucs_adapt_report* report) { delete report; }

size_t ucs_adapt_report_iterations(const ucs_adapt_report* report) {
  return report ? report->report.iterations.size() : 0;
}

ucs_status ucs_adapt_report_objective(const ucs_adapt_report* report, size_t iteration,
                                      double* initial, double* final_value) {
  return guarded([&] {
    need(report, "report");
    ucs::require(iteration < report->report.iterations.size(), "iteration out of range");
    const ucs::AdaptIteration& it = report->report.iterations[iteration];
    if (initial) *initial = it.objective_initial;
    if (final_value) *final_value = it.objective_final;
  });
}

size_t ucs_adapt_report_warning_count(const ucs_adapt_report* report) {
  return report ? report->report.warnings.size() : 0;
}

const char* ucs_adapt_report_warning(const ucs_adapt_report* report, size_t index) {
  if (!report || index >= report->report.warnings.size()) return nullptr;
  return report->report.warnings[index].c_str();
}

ucs_status ucs_adapt_report_write_csv(const ucs_adapt_report* report, const char* path) {
  return guarded([&] {
    need(report, "report");
    need(path, "path");
    ucs::write_adapt_report_csv(report->report, path);
  });
}

}  // extern "C"
