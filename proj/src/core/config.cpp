#include "ucstereo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ucs {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_real(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    fail(ErrorKind::InvalidArgument, "bad value for key '" + std::string(key) + "': " + s);
  return v;
}

int parse_int(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    fail(ErrorKind::InvalidArgument, "bad integer for key '" + std::string(key) + "': " + s);
  return v;
}

// Accessor returning a reference to the numeric slot behind a key.
struct Slot {
  int* integer = nullptr;
  double* real = nullptr;
};

Slot slot_for(PipelineConfig& c, std::string_view key) {
  if (key == "d_max") return {&c.cascade.d_max};
  if (key == "planes_stage2") return {&c.cascade.planes_stage2};
  if (key == "planes_stage1") return {&c.cascade.planes_stage1};
  if (key == "alpha_3") return {nullptr, &c.cascade.alpha[3]};
  if (key == "alpha_2") return {nullptr, &c.cascade.alpha[2]};
  if (key == "beta_3") return {nullptr, &c.cascade.beta[3]};
  if (key == "beta_2") return {nullptr, &c.cascade.beta[2]};
  if (key == "tau") return {nullptr, &c.cascade.temperature};
  if (key == "sgm_p1") return {nullptr, &c.cascade.aggregation.p1};
  if (key == "sgm_p2") return {nullptr, &c.cascade.aggregation.p2};
  if (key == "census_radius") return {&c.features.census_radius};
  if (key == "groups") return {&c.features.group_count};
  if (key == "t_pixel") return {nullptr, &c.t_pixel};
  if (key == "t_area") return {nullptr, &c.t_area};
  if (key == "area_radius") return {&c.area.radius};
  if (key == "area_sigma_color") return {nullptr, &c.area.sigma_color};
  if (key == "area_sigma_disp") return {nullptr, &c.area.sigma_disparity};
  if (key == "area_m") return {nullptr, &c.area.midpoint};
  if (key == "area_s") return {nullptr, &c.area.slope};
  fail(ErrorKind::InvalidArgument, "unknown key '" + std::string(key) + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  cascade.validate();
  area.validate();
  require(features.census_radius >= 1, "census_radius must be >= 1");
  require(features.group_count >= 1 && feature_channel_count(features) % features.group_count == 0,
          "groups must divide the feature channel count");
  require(t_pixel > 0.0, "t_pixel must be positive");
  require(t_area > 0.0 && t_area <= 1.0, "t_area must lie in (0, 1]");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "d_max",   "planes_stage2", "planes_stage1", "alpha_3",       "alpha_2",
      "beta_3",  "beta_2",        "tau",           "box_radius",    "sgm_p1",  "sgm_p2",
      "census_radius", "groups",  "t_pixel",       "t_area",        "area_radius",
      "area_sigma_color", "area_sigma_disp", "area_m", "area_s"};
  return keys;
}

namespace {

// box_radius doubles as the aggregation switch: -1 selects SGM.
void set_box_radius(PipelineConfig& config, int radius) {
  require(radius >= -1, "box_radius must be >= -1");
  AggregationConfig& a = config.cascade.aggregation;
  if (radius < 0) {
    a.method = AggregationConfig::Method::Sgm;
  } else {
    a.method = AggregationConfig::Method::Box;
    a.box_radius = radius;
  }
}

}  // namespace

void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value) {
  if (key == "box_radius") return set_box_radius(config, parse_int(key, value));
  const Slot slot = slot_for(config, key);
  if (slot.integer)
    *slot.integer = parse_int(key, value);
  else
    *slot.real = parse_real(key, value);
}

void set_config_number(PipelineConfig& config, std::string_view key, double value) {
  if (key == "box_radius") {
    require(std::nearbyint(value) == value, "key 'box_radius' takes an integer");
    return set_box_radius(config, static_cast<int>(value));
  }
  const Slot slot = slot_for(config, key);
  if (slot.integer) {
    require(std::nearbyint(value) == value, "key '" + std::string(key) + "' takes an integer");
    *slot.integer = static_cast<int>(value);
  } else {
    *slot.real = value;
  }
}

double get_config_value(const PipelineConfig& config, std::string_view key) {
  if (key == "box_radius") {
    const AggregationConfig& a = config.cascade.aggregation;
    return a.method == AggregationConfig::Method::Sgm ? -1.0 : a.box_radius;
  }
  const Slot slot = slot_for(const_cast<PipelineConfig&>(config), key);
  return slot.integer ? static_cast<double>(*slot.integer) : *slot.real;
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::InvalidArgument,
           "config line " + std::to_string(line_no) + ": expected 'key = value'");
    set_config_value(config, trim(std::string_view(body).substr(0, eq)),
                     std::string_view(body).substr(eq + 1));
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string format_config(const PipelineConfig& config) {
  std::string out;
  for (const std::string& key : config_keys())
    out += key + " = " + format_real(get_config_value(config, key)) + "\n";
  return out;
}

void save_config(const PipelineConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << format_config(config);
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace ucs
