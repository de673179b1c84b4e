#pragma once

#include <string>
#include <vector>

#include "ucstereo/config.hpp"

namespace ucs {

/// The free parameters self-adaptation may change.
struct TunableParams {
  double alpha3 = 0.0;
  double alpha2 = 0.0;
  double beta3 = 0.0;
  double beta2 = 0.0;
  double temperature = 0.1;
  double sgm_p1 = 0.1;
  double sgm_p2 = 0.4;
  double area_midpoint = 1.5;

  static TunableParams from(const PipelineConfig& config);
  void apply_to(PipelineConfig& config) const;
  friend bool operator==(const TunableParams&, const TunableParams&) = default;
};

/// Candidate values per coordinate. Alpha and beta grids apply to each stage
/// separately. The current value of a coordinate is always a candidate.
/// SGM penalties are searched only while SGM aggregation is selected.
struct SearchGrid {
  std::vector<double> alpha{0.0, 0.5, 1.0};
  std::vector<double> beta{0.0, 0.5, 1.0};
  std::vector<double> temperature{0.07, 0.1, 0.15, 0.25};
  std::vector<double> sgm_p1{0.05, 0.1, 0.2, 0.4};
  std::vector<double> sgm_p2{0.2, 0.4, 0.8, 1.6};
  std::vector<double> area_midpoint{1.0, 1.25, 1.5, 2.0};
};

struct StereoPair {
  RasterImage left;
  RasterImage right;
};

struct CoordinateStep {
  std::string key;
  double value = 0.0;
  double objective = 0.0;
};

struct AdaptIteration {
  int index = 0;
  std::vector<double> label_density;  // per pair, frozen labels of this iteration
  std::size_t label_pixels = 0;
  double objective_initial = 0.0;     // params entering the iteration
  double objective_final = 0.0;       // params leaving the iteration
  double midpoint_bce = 0.0;
  std::vector<CoordinateStep> steps;
  TunableParams params;
};

struct AdaptReport {
  std::vector<AdaptIteration> iterations;
  std::vector<std::string> warnings;
};

struct AdaptResult {
  PipelineConfig config;
  AdaptReport report;
};

/// Self-supervised parameter search. Each iteration freezes pseudo-labels
/// from the current parameters, coordinate-descends the cascade parameters
/// over `grid` to minimise the smooth-L1 loss of the raw stage-0 disparity
/// against those labels, then picks the area-filter midpoint minimising the
/// cross-entropy against a left-right disagreement mask. Pairs whose labels
/// are empty are skipped with a warning; if every pair is empty the call
/// fails with NoSupervision. Ground truth is never consulted.
AdaptResult adapt_params(const std::vector<StereoPair>& pairs, const PipelineConfig& init,
                         int iterations, const SearchGrid& grid = {}, int threads = 1);

/// Pooled smooth-L1 objective of `config` against frozen labels (one per
/// pair; pairs with empty labels are ignored).
double adaptation_objective(const std::vector<StereoPair>& pairs,
                            const std::vector<SparseLabelMap>& labels,
                            const PipelineConfig& config, int threads = 1);

void write_adapt_report_csv(const AdaptReport& report, const std::filesystem::path& path);

}  // namespace ucs
