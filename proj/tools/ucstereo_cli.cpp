// ucstereo command-line front end. Talks to the library through the C API only.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ucstereo/ucstereo.h"

namespace {

namespace fs = std::filesystem;

enum ExitCode { kSuccess = 0, kUsage = 1, kInternal = 2 };

// Carries a failed library status up to main.
struct Failure {
  ucs_status status;
  std::string message;
};

void check(ucs_status s) {
  if (s != UCS_OK) throw Failure{s, ucs_last_error()};
}

struct RasterDeleter {
  void operator()(ucs_raster* r) const { ucs_raster_destroy(r); }
};
struct ConfigDeleter {
  void operator()(ucs_config* c) const { ucs_config_destroy(c); }
};
struct RocDeleter {
  void operator()(ucs_roc* r) const { ucs_roc_destroy(r); }
};
struct ReportDeleter {
  void operator()(ucs_adapt_report* r) const { ucs_adapt_report_destroy(r); }
};
using Raster = std::unique_ptr<ucs_raster, RasterDeleter>;
using Config = std::unique_ptr<ucs_config, ConfigDeleter>;

Raster read_image(const std::string& path) {
  ucs_raster* r = nullptr;
  check(ucs_read_image(path.c_str(), &r));
  return Raster(r);
}

Raster read_disparity(const std::string& path) {
  ucs_raster* r = nullptr;
  check(ucs_read_disparity(path.c_str(), &r));
  return Raster(r);
}

Config load_config(const std::string& path) {
  ucs_config* c = nullptr;
  check(path.empty() ? ucs_config_create(&c) : ucs_config_load(path.c_str(), &c));
  return Config(c);
}

struct Common {
  int threads = 1;
  std::string config;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--threads", common.threads, "Worker threads")
      ->check(CLI::Range(1, 256));
  cmd->add_option("--config", common.config, "Pipeline config file (key = value)");
}

struct MatchArgs {
  Common common;
  std::string left, right, out_disp, out_unc;
};

void run_match(const MatchArgs& a) {
  const Config config = load_config(a.common.config);
  const Raster left = read_image(a.left);
  const Raster right = read_image(a.right);
  ucs_raster* disp = nullptr;
  ucs_raster* sd = nullptr;
  check(ucs_match(config.get(), left.get(), right.get(), a.common.threads, &disp,
                  a.out_unc.empty() ? nullptr : &sd));
  const Raster disparity(disp), stddev(sd);
  check(ucs_write_disparity(disparity.get(), a.out_disp.c_str()));
  if (stddev) check(ucs_write_disparity(stddev.get(), a.out_unc.c_str()));
}

struct PseudoArgs {
  Common common;
  std::string left, right, out;
  double t_pixel = -1.0;
  double t_area = -1.0;
};

void run_pseudolabel(const PseudoArgs& a) {
  const Config config = load_config(a.common.config);
  if (a.t_pixel >= 0.0) check(ucs_config_set(config.get(), "t_pixel", a.t_pixel));
  if (a.t_area >= 0.0) check(ucs_config_set(config.get(), "t_area", a.t_area));
  const Raster left = read_image(a.left);
  const Raster right = read_image(a.right);
  ucs_raster* l = nullptr;
  ucs_label_stats stats{};
  check(ucs_pseudolabel(config.get(), left.get(), right.get(), a.common.threads, &l, &stats));
  const Raster label(l);
  check(ucs_write_disparity(label.get(), a.out.c_str()));
  std::printf("density %.6f pixel_density %.6f area_density %.6f labelled %zu\n", stats.density,
              stats.pixel_density, stats.area_density, stats.valid_count);
  if (stats.valid_count == 0)
    std::fprintf(stderr, "warning: no confident pseudo-labels; wrote an empty label\n");
}

struct EvalArgs {
  std::string disp, gt, out_csv;
};

void run_eval(const EvalArgs& a) {
  const Raster disp = read_disparity(a.disp);
  const Raster gt = read_disparity(a.gt);
  ucs_metrics m{};
  check(ucs_evaluate(disp.get(), gt.get(), &m));
  if (!a.out_csv.empty()) check(ucs_metrics_write_csv(&m, a.out_csv.c_str()));
  std::printf("epe %.6f d1_all %.6f bad1 %.6f bad2 %.6f valid %zu\n", m.epe, m.d1_all, m.bad1,
              m.bad2, m.valid_count);
}

struct RocArgs {
  std::string disp, gt, unc, out_csv;
  double step = 0.05;
};

void run_roc(const RocArgs& a) {
  const Raster disp = read_disparity(a.disp);
  const Raster gt = read_disparity(a.gt);
  const Raster unc = read_disparity(a.unc);
  ucs_roc* r = nullptr;
  check(ucs_roc_compute(disp.get(), gt.get(), unc.get(), a.step, &r));
  const std::unique_ptr<ucs_roc, RocDeleter> roc(r);
  if (!a.out_csv.empty()) check(ucs_roc_write_csv(roc.get(), a.out_csv.c_str()));
  std::printf("auc %.6f points %zu\n", ucs_roc_auc(roc.get()), ucs_roc_size(roc.get()));
}

struct AdaptArgs {
  Common common;
  std::string pairs, out_config, out_report;
  int iterations = 2;
};

// One pair per line: "<left> <right>", relative to the list file.
std::vector<std::pair<std::string, std::string>> read_pair_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{UCS_ERR_IO, "cannot open pair list '" + path + "'"};
  const fs::path base = fs::path(path).parent_path();
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string l, r, extra;
    if (!(fields >> l)) continue;
    if (!(fields >> r) || (fields >> extra))
      throw Failure{UCS_ERR_INVALID_ARGUMENT,
                    path + ":" + std::to_string(line_no) + ": expected '<left> <right>'"};
    pairs.emplace_back((base / l).string(), (base / r).string());
  }
  return pairs;
}

void run_adapt(const AdaptArgs& a) {
  const Config init = load_config(a.common.config);
  std::vector<Raster> images;
  std::vector<const ucs_raster*> lefts, rights;
  for (const auto& [l, r] : read_pair_list(a.pairs)) {
    images.push_back(read_image(l));
    lefts.push_back(images.back().get());
    images.push_back(read_image(r));
    rights.push_back(images.back().get());
  }
  ucs_config* out = nullptr;
  ucs_adapt_report* rep = nullptr;
  check(ucs_adapt(init.get(), lefts.data(), rights.data(), lefts.size(), a.iterations,
                  a.common.threads, &out, &rep));
  const Config adapted(out);
  const std::unique_ptr<ucs_adapt_report, ReportDeleter> report(rep);
  for (std::size_t i = 0; i < ucs_adapt_report_warning_count(report.get()); ++i)
    std::fprintf(stderr, "warning: %s\n", ucs_adapt_report_warning(report.get(), i));
  for (std::size_t i = 0; i < ucs_adapt_report_iterations(report.get()); ++i) {
    double before = 0.0, after = 0.0;
    check(ucs_adapt_report_objective(report.get(), i, &before, &after));
    std::printf("iteration %zu objective %.6f -> %.6f\n", i + 1, before, after);
  }
  check(ucs_config_save(adapted.get(), a.out_config.c_str()));
  if (!a.out_report.empty())
    check(ucs_adapt_report_write_csv(report.get(), a.out_report.c_str()));
}

struct SynthArgs {
  ucs_synth_spec spec{};
  std::string model = "constant";
  std::vector<double> plane;
  std::vector<int> box;
  std::string out_dir;
};

void run_synth(SynthArgs a) {
  ucs_synth_spec& s = a.spec;
  if (a.model == "constant") {
    s.model = UCS_MODEL_CONSTANT;
  } else if (a.model == "slanted") {
    s.model = UCS_MODEL_SLANTED;
    for (std::size_t i = 0; i < 3 && i < a.plane.size(); ++i) s.plane[i] = a.plane[i];
  } else {
    s.model = UCS_MODEL_TWO_LAYER;
    for (std::size_t i = 0; i < 4 && i < a.box.size(); ++i) s.box[i] = a.box[i];
  }
  ucs_raster *l = nullptr, *r = nullptr, *g = nullptr, *o = nullptr;
  check(ucs_synthesize(&s, &l, &r, &g, &o));
  const Raster left(l), right(r), gt(g), occluded(o);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Failure{UCS_ERR_IO, "cannot create '" + a.out_dir + "': " + ec.message()};
  const fs::path dir(a.out_dir);
  check(ucs_write_image(left.get(), (dir / "left.png").c_str()));
  check(ucs_write_image(right.get(), (dir / "right.png").c_str()));
  check(ucs_write_disparity(gt.get(), (dir / "gt.pfm").c_str()));
  check(ucs_write_image(occluded.get(), (dir / "occluded.png").c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-guided cascade stereo matching"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ucs_version());

  MatchArgs match;
  auto* m = app.add_subcommand("match", "Estimate a disparity map for a rectified pair");
  add_common(m, match.common);
  m->add_option("--left", match.left, "Left image")->required();
  m->add_option("--right", match.right, "Right image")->required();
  m->add_option("--out-disp", match.out_disp, "Disparity output (.pfm or .png)")->required();
  m->add_option("--out-unc", match.out_unc, "Standard-deviation output (.pfm or .png)");

  PseudoArgs pseudo;
  auto* p = app.add_subcommand("pseudolabel", "Write uncertainty-filtered pseudo-labels");
  add_common(p, pseudo.common);
  p->add_option("--left", pseudo.left, "Left image")->required();
  p->add_option("--right", pseudo.right, "Right image")->required();
  p->add_option("--t-pixel", pseudo.t_pixel, "Pixel-level threshold on sqrt(U), px");
  p->add_option("--t-area", pseudo.t_area, "Area-level threshold in (0, 1]");
  p->add_option("--out", pseudo.out, "Label output (.pfm or .png)")->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Compare a disparity map with ground truth");
  e->add_option("--disp", eval.disp, "Disparity")->required();
  e->add_option("--gt", eval.gt, "Ground truth")->required();
  e->add_option("--out-csv", eval.out_csv, "Metrics CSV");
  int eval_threads = 1;
  e->add_option("--threads", eval_threads, "Accepted for uniformity")->check(CLI::Range(1, 256));

  RocArgs roc;
  auto* r = app.add_subcommand("roc", "Sparsification curve of an uncertainty map");
  r->add_option("--disp", roc.disp, "Disparity")->required();
  r->add_option("--gt", roc.gt, "Ground truth")->required();
  r->add_option("--unc", roc.unc, "Uncertainty (higher = less trusted)")->required();
  r->add_option("--step", roc.step, "Removed-fraction step")->check(CLI::Range(1e-6, 1.0));
  r->add_option("--out-csv", roc.out_csv, "Curve CSV");
  int roc_threads = 1;
  r->add_option("--threads", roc_threads, "Accepted for uniformity")->check(CLI::Range(1, 256));

  AdaptArgs adapt;
  auto* a = app.add_subcommand("adapt", "Self-supervised parameter adaptation");
  add_common(a, adapt.common);
  a->add_option("--pairs", adapt.pairs, "File listing '<left> <right>' per line")->required();
  a->add_option("--iters", adapt.iterations, "Iterations (1-3)")->check(CLI::Range(1, 3));
  a->add_option("--out-config", adapt.out_config, "Adapted config output")->required();
  a->add_option("--out-report", adapt.out_report, "Per-iteration CSV report");

  SynthArgs synth;
  ucs_synth_spec_default(&synth.spec);
  auto* s = app.add_subcommand("synth", "Generate a random-dot stereogram with ground truth");
  s->add_option("--model", synth.model, "constant, slanted or two-layer")
      ->check(CLI::IsMember({"constant", "slanted", "two-layer"}));
  s->add_option("--disparity", synth.spec.disparity, "Constant disparity");
  s->add_option("--plane", synth.plane, "Slanted plane a b c")->expected(3);
  s->add_option("--fg", synth.spec.fg_disparity, "Foreground disparity");
  s->add_option("--bg", synth.spec.bg_disparity, "Background disparity");
  s->add_option("--box", synth.box, "Foreground box x0 y0 x1 y1")->expected(4);
  s->add_option("--width", synth.spec.width, "Width");
  s->add_option("--height", synth.spec.height, "Height");
  s->add_option("--density", synth.spec.dot_density, "Dot density");
  s->add_option("--noise", synth.spec.noise_sigma, "Additive Gaussian noise sigma");
  s->add_option("--offset", synth.spec.brightness_offset, "Right-view brightness offset");
  s->add_option("--seed", synth.spec.seed, "Random seed");
  s->add_option("--d-max", synth.spec.d_max, "Disparity bound");
  s->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  int synth_threads = 1;
  s->add_option("--threads", synth_threads, "Accepted for uniformity")
      ->check(CLI::Range(1, 256));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*m) run_match(match);
    if (*p) run_pseudolabel(pseudo);
    if (*e) run_eval(eval);
    if (*r) run_roc(roc);
    if (*a) run_adapt(adapt);
    if (*s) run_synth(synth);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.status == UCS_ERR_INTERNAL ? kInternal : kUsage;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kInternal;
  }
  return kSuccess;
}
