#pragma once

// Experiment configuration: flat `key = value` text with `#` comments.
//
// Every key has a default; an empty file reproduces the reference setup
// (200 nodes over a 2 km disc, 3 GHz / 5 MHz, 20 dBm, -173 dBm/Hz, p_tx 0.34,
// 10 pilot samples, 20 realizations). Command-line overrides are applied on top
// of the file using the same key names.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "ncota/channel.hpp"
#include "ncota/dgd.hpp"
#include "ncota/exchange.hpp"
#include "ncota/ota.hpp"

namespace ncota {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ObjectiveKind { kLogisticFmnist, kLogisticSynthetic, kQuadraticToy };

constexpr std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kLogisticFmnist: return "logistic-fmnist";
    case ObjectiveKind::kLogisticSynthetic: return "logistic-synthetic";
    case ObjectiveKind::kQuadraticToy: return "quadratic-toy";
  }
  return "unknown";
}

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t nodes = 200;
  double area_radius_m = 2000.0;
  double carrier_frequency_hz = 3e9;
  double bandwidth_hz = 5e6;
  double tx_power_dbm = 20.0;
  double noise_psd_dbm_hz = -173.0;
  double p_tx = 0.34;
  Estimator estimator = Estimator::kIrNcota;
  InterferenceKind interference = InterferenceKind::kNone;
  double jammer_x_m = 0.0;
  double jammer_y_m = 0.0;
  RotationMode rotation_mode = RotationMode::kSignFlip;
  std::size_t pilot_length = 10;
  std::size_t iterations = 5000;
  std::size_t realizations = 20;
  std::size_t metrics_stride = 10;
  std::size_t threads = 0;  // 0: one per hardware thread

  ObjectiveKind objective = ObjectiveKind::kLogisticSynthetic;
  double mu = 0.001;
  std::size_t classes = 10;
  std::size_t features = 50;
  std::size_t samples_per_node = 5;
  std::size_t test_per_class = 100;
  double synthetic_noise = 0.5;
  std::size_t quadratic_dim = 8;
  double quadratic_spread = 0.5;
  std::string fmnist_train_images;
  std::string fmnist_train_labels;
  std::string fmnist_test_images;
  std::string fmnist_test_labels;

  double gamma0 = 1.7e7;
  std::optional<double> eta0;
  std::optional<double> delta;

  bool dump_deployment = false;

  double tx_power_w() const { return dbm_to_watts(tx_power_dbm); }
  double noise_psd_w_per_hz() const { return dbm_to_watts(noise_psd_dbm_hz); }

  RadioParameters radio() const {
    return {carrier_frequency_hz, bandwidth_hz, tx_power_w(), noise_psd_w_per_hz()};
  }

  /// Dimension of the optimization variable implied by the objective.
  std::size_t dim() const {
    return objective == ObjectiveKind::kQuadraticToy ? quadratic_dim : (classes - 1) * features;
  }

  /// Explicit overrides win; otherwise eta0 = 2/(mu+L) and delta = 5/(4 mu eta0).
  Schedule schedule(double strong_convexity, double smoothness) const {
    Schedule s = Schedule::standard(strong_convexity, smoothness, gamma0);
    if (eta0) {
      s.eta0 = *eta0;
      s.delta = 5.0 / (4.0 * strong_convexity * s.eta0);
    }
    if (delta) s.delta = *delta;
    return s;
  }

  double frame_duration() const { return frame_duration_s(estimator, dim(), pilot_length, bandwidth_hz); }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !in.eof()) throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
  return value;
}

inline std::size_t parse_count(const std::string& key, const std::string& text) {
  if (!text.empty() && text.front() == '-') throw ConfigError("key '" + key + "' must be nonnegative");
  return parse_number<std::size_t>(key, text);
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("invalid boolean '" + text + "' for key '" + key + "'");
}

template <typename F>
auto wrap_enum(const std::string& key, const std::string& text, F parse) {
  try {
    return parse(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(e.what()) + " (key '" + key + "')");
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"nodes", [](auto& c, auto& k, auto& v) { c.nodes = parse_count(k, v); }},
      {"area_radius_m", [](auto& c, auto& k, auto& v) { c.area_radius_m = parse_number<double>(k, v); }},
      {"carrier_frequency_hz", [](auto& c, auto& k, auto& v) { c.carrier_frequency_hz = parse_number<double>(k, v); }},
      {"bandwidth_hz", [](auto& c, auto& k, auto& v) { c.bandwidth_hz = parse_number<double>(k, v); }},
      {"tx_power_dbm", [](auto& c, auto& k, auto& v) { c.tx_power_dbm = parse_number<double>(k, v); }},
      {"noise_psd_dbm_hz", [](auto& c, auto& k, auto& v) { c.noise_psd_dbm_hz = parse_number<double>(k, v); }},
      {"p_tx", [](auto& c, auto& k, auto& v) { c.p_tx = parse_number<double>(k, v); }},
      {"estimator", [](auto& c, auto& k, auto& v) { c.estimator = wrap_enum(k, v, parse_estimator); }},
      {"interference",
       [](auto& c, auto& k, auto& v) { c.interference = wrap_enum(k, v, parse_interference_kind); }},
      {"jammer_x_m", [](auto& c, auto& k, auto& v) { c.jammer_x_m = parse_number<double>(k, v); }},
      {"jammer_y_m", [](auto& c, auto& k, auto& v) { c.jammer_y_m = parse_number<double>(k, v); }},
      {"rotation_mode", [](auto& c, auto& k, auto& v) { c.rotation_mode = wrap_enum(k, v, parse_rotation_mode); }},
      {"n_P", [](auto& c, auto& k, auto& v) { c.pilot_length = parse_count(k, v); }},
      {"iterations", [](auto& c, auto& k, auto& v) { c.iterations = parse_count(k, v); }},
      {"realizations", [](auto& c, auto& k, auto& v) { c.realizations = parse_count(k, v); }},
      {"metrics_stride", [](auto& c, auto& k, auto& v) { c.metrics_stride = parse_count(k, v); }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = parse_count(k, v); }},
      {"objective",
       [](auto& c, auto& k, auto& v) {
         if (v == "logistic-fmnist") {
           c.objective = ObjectiveKind::kLogisticFmnist;
         } else if (v == "logistic-synthetic") {
           c.objective = ObjectiveKind::kLogisticSynthetic;
         } else if (v == "quadratic-toy") {
           c.objective = ObjectiveKind::kQuadraticToy;
         } else {
           throw ConfigError("unknown objective '" + v + "' (key '" + k + "')");
         }
       }},
      {"mu", [](auto& c, auto& k, auto& v) { c.mu = parse_number<double>(k, v); }},
      {"classes", [](auto& c, auto& k, auto& v) { c.classes = parse_count(k, v); }},
      {"features", [](auto& c, auto& k, auto& v) { c.features = parse_count(k, v); }},
      {"samples_per_node", [](auto& c, auto& k, auto& v) { c.samples_per_node = parse_count(k, v); }},
      {"test_per_class", [](auto& c, auto& k, auto& v) { c.test_per_class = parse_count(k, v); }},
      {"synthetic_noise", [](auto& c, auto& k, auto& v) { c.synthetic_noise = parse_number<double>(k, v); }},
      {"quadratic_dim", [](auto& c, auto& k, auto& v) { c.quadratic_dim = parse_count(k, v); }},
      {"quadratic_spread", [](auto& c, auto& k, auto& v) { c.quadratic_spread = parse_number<double>(k, v); }},
      {"fmnist_train_images", [](auto& c, auto&, auto& v) { c.fmnist_train_images = v; }},
      {"fmnist_train_labels", [](auto& c, auto&, auto& v) { c.fmnist_train_labels = v; }},
      {"fmnist_test_images", [](auto& c, auto&, auto& v) { c.fmnist_test_images = v; }},
      {"fmnist_test_labels", [](auto& c, auto&, auto& v) { c.fmnist_test_labels = v; }},
      {"gamma0", [](auto& c, auto& k, auto& v) { c.gamma0 = parse_number<double>(k, v); }},
      {"eta0", [](auto& c, auto& k, auto& v) { c.eta0 = parse_number<double>(k, v); }},
      {"delta", [](auto& c, auto& k, auto& v) { c.delta = parse_number<double>(k, v); }},
      {"dump_deployment", [](auto& c, auto& k, auto& v) { c.dump_deployment = parse_bool(k, v); }},
  };
  return table;
}

}  // namespace detail

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = detail::setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  it->second(cfg, key, value);
}

inline void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.nodes >= 2, "nodes must be at least 2");
  require(c.area_radius_m > 0.0, "area_radius_m must be positive");
  require(c.carrier_frequency_hz > 0.0, "carrier_frequency_hz must be positive");
  require(c.bandwidth_hz > 0.0, "bandwidth_hz must be positive");
  require(std::isfinite(c.tx_power_dbm), "tx_power_dbm must be finite");
  require(std::isfinite(c.noise_psd_dbm_hz), "noise_psd_dbm_hz must be finite");
  require(c.p_tx > 0.0 && c.p_tx < 1.0, "p_tx must lie in (0, 1)");
  require(c.pilot_length >= 2, "n_P must be at least 2");
  require(c.realizations >= 1, "realizations must be at least 1");
  require(c.metrics_stride >= 1, "metrics_stride must be at least 1");
  require(c.mu > 0.0, "mu must be positive");
  require(c.gamma0 >= 0.0, "gamma0 must be nonnegative");
  require(!c.eta0 || *c.eta0 > 0.0, "eta0 must be positive");
  require(!c.delta || *c.delta >= 0.0, "delta must be nonnegative");
  if (c.objective == ObjectiveKind::kQuadraticToy) {
    require(c.quadratic_dim >= 1, "quadratic_dim must be at least 1");
    return;
  }
  require(c.classes >= 2, "classes must be at least 2");
  require(c.samples_per_node >= 1, "samples_per_node must be at least 1");
  require(c.nodes % c.classes == 0, "nodes must be a multiple of classes");
  if (c.objective == ObjectiveKind::kLogisticFmnist) {
    require(!c.fmnist_train_images.empty() && !c.fmnist_train_labels.empty() && !c.fmnist_test_images.empty() &&
                !c.fmnist_test_labels.empty(),
            "objective logistic-fmnist requires fmnist_train_images, fmnist_train_labels, "
            "fmnist_test_images and fmnist_test_labels");
    require(c.features == 50, "logistic-fmnist uses 50 features (7x7 pixels + bias)");
  } else {
    require(c.features >= 1, "features must be at least 1");
    require(c.synthetic_noise >= 0.0, "synthetic_noise must be nonnegative");
  }
}

inline ExperimentConfig parse_config(std::istream& in, const ConfigOverrides& overrides = {}) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = detail::trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_config_value(cfg, detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1)));
  }
  for (const auto& [key, value] : overrides) set_config_value(cfg, key, value);
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in, overrides);
}

}  // namespace ncota
