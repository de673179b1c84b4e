#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ucstereo/pseudolabel.hpp"

namespace ucs {

/// Everything a pipeline run needs besides the images.
struct PipelineConfig {
  FeatureConfig features;
  CascadeParams cascade;
  AreaFilterConfig area;
  double t_pixel = 0.9;
  double t_area = 0.2;

  void validate() const;
};

/// Keys accepted in config files, in the order they are written.
const std::vector<std::string>& config_keys();

void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);
double get_config_value(const PipelineConfig& config, std::string_view key);
/// Numeric form of set_config_value; integer keys require an integral value.
void set_config_number(PipelineConfig& config, std::string_view key, double value);

/// `key = value` lines; blank lines and '#' comments are ignored. Unknown
/// keys and malformed lines are rejected; missing keys keep their defaults.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Every key, values printed with round-trip precision.
std::string format_config(const PipelineConfig& config);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

}  // namespace ucs
