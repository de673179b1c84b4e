#include "ucstereo/adapt.hpp"

#include <cmath>
#include <fstream>

#include "ucstereo/eval.hpp"

namespace ucs {

namespace {

constexpr int kMaxIterations = 3;
constexpr int kMaxPasses = 3;
constexpr double kDisagreementThreshold = 1.0;

struct LossSum {
  double sum = 0.0;
  std::size_t count = 0;
};

PipelineConfig single_threaded(PipelineConfig config) {
  config.cascade.threads = 1;
  return config;
}

StageTrace match(const StereoPair& pair, const PipelineConfig& config) {
  return run_cascade(pair.left, pair.right, config.features, config.cascade);
}

std::vector<SparseLabelMap> freeze_labels(const std::vector<StereoPair>& pairs,
                                          const PipelineConfig& config, int threads) {
  std::vector<SparseLabelMap> labels(pairs.size());
  const PipelineConfig local = single_threaded(config);
  parallel_for(static_cast<int>(pairs.size()), threads, [&](int i) {
    const StageTrace trace = match(pairs[i], local);
    labels[i] = generate_pseudo_labels(trace, pairs[i].left, local.t_pixel, local.t_area,
                                       local.area)
                    .label;
  });
  return labels;
}

double pick_midpoint(const std::vector<StereoPair>& pairs, const std::vector<SparseLabelMap>& labels,
                     const PipelineConfig& config, const std::vector<double>& candidates,
                     int threads, double* best_bce) {
  const PipelineConfig local = single_threaded(config);
  struct PairFields {
    DisparityField refined;
    UncertaintyField uncertainty;
    BinaryMask mask;
    bool used = false;
  };
  std::vector<PairFields> fields(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), threads, [&](int i) {
    if (labels[i].valid_count() == 0) return;
    const StageTrace left = match(pairs[i], local);
    const StageTrace right =
        run_cascade_right_view(pairs[i].left, pairs[i].right, local.features, local.cascade);
    PairFields& f = fields[i];
    f.refined = refine_disparity(left.disparity);
    f.uncertainty = left.uncertainty;
    const Grid<double> gap = lrc_disagreement(left.disparity, right.disparity);
    f.mask = BinaryMask(gap.width(), gap.height(), 0);
    for (std::size_t p = 0; p < gap.size(); ++p) f.mask[p] = gap[p] > kDisagreementThreshold;
    f.used = true;
  });

  std::vector<double> values;
  values.push_back(config.area.midpoint);
  for (double v : candidates)
    if (v != config.area.midpoint) values.push_back(v);

  double best_value = config.area.midpoint;
  double best = std::numeric_limits<double>::infinity();
  for (double m : values) {
    AreaFilterConfig area = config.area;
    area.midpoint = m;
    std::vector<double> totals(pairs.size(), 0.0);
    parallel_for(static_cast<int>(pairs.size()), threads, [&](int i) {
      if (!fields[i].used) return;
      const AreaUncertaintyField u =
          area_uncertainty(fields[i].refined, fields[i].uncertainty, pairs[i].left, area);
      totals[i] = bce_uncertainty_loss(u, fields[i].mask) * static_cast<double>(u.size());
    });
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!fields[i].used) continue;
      sum += totals[i];
      count += pairs[i].left.size();
    }
    const double bce = sum / static_cast<double>(count);
    if (bce < best) {
      best = bce;
      best_value = m;
    }
  }
  *best_bce = best;
  return best_value;
}

}  // namespace

TunableParams TunableParams::from(const PipelineConfig& c) {
  return {c.cascade.alpha[3], c.cascade.alpha[2],       c.cascade.beta[3],
          c.cascade.beta[2],  c.cascade.temperature,    c.cascade.aggregation.p1,
          c.cascade.aggregation.p2, c.area.midpoint};
}

void TunableParams::apply_to(PipelineConfig& c) const {
  c.cascade.alpha[3] = alpha3;
  c.cascade.alpha[2] = alpha2;
  c.cascade.beta[3] = beta3;
  c.cascade.beta[2] = beta2;
  c.cascade.temperature = temperature;
  c.cascade.aggregation.p1 = sgm_p1;
  c.cascade.aggregation.p2 = sgm_p2;
  c.area.midpoint = area_midpoint;
}

double adaptation_objective(const std::vector<StereoPair>& pairs,
                            const std::vector<SparseLabelMap>& labels,
                            const PipelineConfig& config, int threads) {
  require(pairs.size() == labels.size(), "one label map per pair required");
  const PipelineConfig local = single_threaded(config);
  std::vector<LossSum> partial(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), threads, [&](int i) {
    if (labels[i].valid_count() == 0) return;
    const StageTrace trace = match(pairs[i], local);
    LossSum& s = partial[i];
    for (std::size_t p = 0; p < trace.disparity.size(); ++p) {
      if (!labels[i].valid[p]) continue;
      s.sum += smooth_l1(labels[i].disparity[p] - trace.disparity[p]);
      ++s.count;
    }
  });
  LossSum total;
  for (const LossSum& s : partial) {
    total.sum += s.sum;
    total.count += s.count;
  }
  if (total.count == 0) fail(ErrorKind::NoSupervision, "no supervision");
  return total.sum / static_cast<double>(total.count);
}

AdaptResult adapt_params(const std::vector<StereoPair>& pairs, const PipelineConfig& init,
                         int iterations, const SearchGrid& grid, int threads) {
  require(!pairs.empty(), "adaptation needs at least one stereo pair");
  require(iterations >= 1 && iterations <= kMaxIterations, "iterations must lie in [1, 3]");
  require(threads >= 1, "thread count must be positive");
  init.validate();

  const std::vector<std::pair<std::string, const std::vector<double>*>> coordinates = {
      {"alpha_3", &grid.alpha}, {"alpha_2", &grid.alpha},     {"beta_3", &grid.beta},
      {"beta_2", &grid.beta},   {"tau", &grid.temperature},   {"sgm_p1", &grid.sgm_p1},
      {"sgm_p2", &grid.sgm_p2}};

  AdaptResult result{init, {}};
  PipelineConfig& current = result.config;

  for (int it = 1; it <= iterations; ++it) {
    AdaptIteration record;
    record.index = it;

    const std::vector<SparseLabelMap> labels = freeze_labels(pairs, current, threads);
    std::size_t usable = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      record.label_density.push_back(labels[i].density());
      record.label_pixels += labels[i].valid_count();
      if (labels[i].valid_count() > 0) {
        ++usable;
      } else {
        result.report.warnings.push_back("iteration " + std::to_string(it) + ": pair " +
                                         std::to_string(i) +
                                         " has no confident pseudo-labels; skipped");
      }
    }
    if (usable == 0) fail(ErrorKind::NoSupervision, "no supervision");

    double objective = adaptation_objective(pairs, labels, current, threads);
    record.objective_initial = objective;

    for (int pass = 0; pass < kMaxPasses; ++pass) {
      bool changed = false;
      for (const auto& [key, values] : coordinates) {
        if ((key == "sgm_p1" || key == "sgm_p2") &&
            current.cascade.aggregation.method != AggregationConfig::Method::Sgm)
          continue;
        const double held = get_config_value(current, key);
        double best_value = held;
        for (double v : *values) {
          if (v == held) continue;
          PipelineConfig candidate = current;
          set_config_number(candidate, key, v);
          if (candidate.cascade.aggregation.p1 > candidate.cascade.aggregation.p2) continue;
          const double value = adaptation_objective(pairs, labels, candidate, threads);
          if (value < objective) {
            objective = value;
            best_value = v;
          }
        }
        if (best_value != held) {
          changed = true;
          set_config_number(current, key, best_value);
        }
        record.steps.push_back({key, best_value, objective});
      }
      if (!changed) break;
    }
    record.objective_final = objective;

    current.area.midpoint =
        pick_midpoint(pairs, labels, current, grid.area_midpoint, threads, &record.midpoint_bce);
    record.params = TunableParams::from(current);
    result.report.iterations.push_back(std::move(record));
  }
  return result;
}

void write_adapt_report_csv(const AdaptReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  const auto num = format_real;
  out << "iteration,label_pixels,mean_label_density,objective_initial,objective_final,"
         "midpoint_bce,alpha_3,alpha_2,beta_3,beta_2,tau,sgm_p1,sgm_p2,area_m\n";
  for (const AdaptIteration& it : report.iterations) {
    double density = 0.0;
    for (double d : it.label_density) density += d;
    if (!it.label_density.empty()) density /= static_cast<double>(it.label_density.size());
    const TunableParams& p = it.params;
    out << it.index << ',' << it.label_pixels << ',' << num(density) << ','
        << num(it.objective_initial) << ',' << num(it.objective_final) << ','
        << num(it.midpoint_bce) << ',' << num(p.alpha3) << ',' << num(p.alpha2) << ','
        << num(p.beta3) << ',' << num(p.beta2) << ',' << num(p.temperature) << ','
        << num(p.sgm_p1) << ',' << num(p.sgm_p2) << ',' << num(p.area_midpoint) << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace ucs
