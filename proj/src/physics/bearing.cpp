#include "phyzzy/physics/bearing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "phyzzy/common/errors.hpp"
#include "phyzzy/fuzzy/fuzzy.hpp"

namespace phyzzy::physics {

void BearingGeometry::validate() const {
  if (!(pitch_diameter_m > ball_diameter_m && ball_diameter_m > 0.0)) {
    throw std::invalid_argument(
        "bearing geometry: pitch diameter must exceed ball diameter and both "
        "must be positive");
  }
  if (!(shaft_hz > 0.0) || !(sampling_hz > 0.0)) {
    throw std::invalid_argument(
        "bearing geometry: shaft and sampling frequencies must be positive");
  }
  if (fault_depth_m < 0.0) {
    throw std::invalid_argument("bearing geometry: negative fault depth");
  }
}

void SpallGrowthConfig::validate() const {
  if (!(growth_rate > 0.0) || !(sp_at_failure > 0.0) || !(t_max > 0.0)) {
    throw std::invalid_argument(
        "spall growth config: growth_rate, sp_at_failure and t_max must be "
        "positive");
  }
}

double spall_width(const BearingGeometry& geom, double sp) {
  if (sp < 0.0) {
    throw std::invalid_argument("spall_width: negative sample count");
  }
  const double dp = geom.pitch_diameter_m;
  const double db = geom.ball_diameter_m;
  const double delta = geom.fault_depth_m;
  const double passage =
      M_PI * geom.shaft_hz * (dp * dp - db * db) / (dp * geom.sampling_hz);
  return passage * sp + std::sqrt(db * delta + delta * delta);
}

double spall_floor(const BearingGeometry& geom) {
  return spall_width(geom, 1.0) / 10.0;
}

double rul_exponential(double spall_width_m, double weight,
                       const BearingGeometry& geom,
                       const SpallGrowthConfig& config) {
  const double l_max = spall_width(geom, config.sp_at_failure);
  const double l_eff = std::max(spall_width_m, spall_floor(geom));
  const double w =
      std::clamp(weight, fuzzy::kTruthEpsilon, 1.0);
  const double raw =
      std::log(w * l_max / l_eff) / std::log1p(config.growth_rate);
  return std::clamp(raw / config.t_max, 0.0, 1.0);
}

ndcore::Tensor rul_exponential(ndcore::Tape& tape,
                               const ndcore::Tensor& weight,
                               double spall_width_m,
                               const BearingGeometry& geom,
                               const SpallGrowthConfig& config) {
  const double l_max = spall_width(geom, config.sp_at_failure);
  const double l_eff = std::max(spall_width_m, spall_floor(geom));
  const ndcore::Tensor w = tape.clamp(weight, fuzzy::kTruthEpsilon, 1.0);
  const ndcore::Tensor ratio = tape.mul_scalar(w, l_max / l_eff);
  const ndcore::Tensor raw = tape.mul_scalar(
      tape.log(ratio), 1.0 / std::log1p(config.growth_rate));
  return tape.clamp(tape.mul_scalar(raw, 1.0 / config.t_max), 0.0, 1.0);
}

namespace {

const char* const kKeys[] = {"pitch_diameter_m", "ball_diameter_m",
                             "shaft_hz",         "sampling_hz",
                             "fault_depth_m",    "growth_rate",
                             "sp_at_failure",    "t_max"};

bool known_key(const std::string& key) {
  for (const char* k : kKeys) {
    if (key == k) return true;
  }
  return false;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

PhysicsConfig load_physics_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("physics config: cannot open " + path.string());
  }
  std::map<std::string, double> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("physics config: " + path.string() + ":" +
                      std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_key(key)) {
      throw DataError("physics config: " + path.string() + ":" +
                      std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    try {
      std::size_t used = 0;
      const double parsed = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      entries[key] = parsed;
    } catch (const std::exception&) {
      throw DataError("physics config: " + path.string() + ":" +
                      std::to_string(line_no) + ": bad number '" + value +
                      "'");
    }
  }
  PhysicsConfig config;
  const char* const required[] = {"pitch_diameter_m", "ball_diameter_m",
                                  "shaft_hz", "sampling_hz"};
  for (const char* key : required) {
    if (!entries.count(key)) {
      throw DataError("physics config: " + path.string() + ": missing key '" +
                      std::string(key) + "'");
    }
  }
  config.geometry.pitch_diameter_m = entries["pitch_diameter_m"];
  config.geometry.ball_diameter_m = entries["ball_diameter_m"];
  config.geometry.shaft_hz = entries["shaft_hz"];
  config.geometry.sampling_hz = entries["sampling_hz"];
  if (entries.count("fault_depth_m")) {
    config.geometry.fault_depth_m = entries["fault_depth_m"];
  }
  if (entries.count("growth_rate")) {
    config.growth.growth_rate = entries["growth_rate"];
  }
  if (entries.count("sp_at_failure")) {
    config.growth.sp_at_failure = entries["sp_at_failure"];
  }
  if (entries.count("t_max")) config.growth.t_max = entries["t_max"];
  try {
    config.geometry.validate();
    config.growth.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError("physics config: " + path.string() + ": " + e.what());
  }
  return config;
}

void save_physics_config(const std::filesystem::path& path,
                         const PhysicsConfig& config) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("physics config: cannot write " + path.string());
  }
  out.precision(17);
  out << "pitch_diameter_m = " << config.geometry.pitch_diameter_m << "\n"
      << "ball_diameter_m = " << config.geometry.ball_diameter_m << "\n"
      << "shaft_hz = " << config.geometry.shaft_hz << "\n"
      << "sampling_hz = " << config.geometry.sampling_hz << "\n"
      << "fault_depth_m = " << config.geometry.fault_depth_m << "\n"
      << "growth_rate = " << config.growth.growth_rate << "\n"
      << "sp_at_failure = " << config.growth.sp_at_failure << "\n"
      << "t_max = " << config.growth.t_max << "\n";
}

}  // namespace phyzzy::physics
