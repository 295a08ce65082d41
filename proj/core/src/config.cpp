#include "hystloop/config.hpp"

#include <charconv>
#include <fstream>

#include "hystloop/csv.hpp"
#include "hystloop/errors.hpp"

namespace hystloop {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

FlatConfig FlatConfig::parse_string(const std::string& text, const std::string& origin) {
  FlatConfig fc;
  fc.origin_ = origin;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (fc.values_.contains(key))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    fc.values_[key] = value;
  }
  return fc;
}

FlatConfig FlatConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_string(text, path.string());
}

void FlatConfig::apply_override(const std::string& key_value) {
  const std::size_t eq = key_value.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must be key=value (got '" + key_value + "')");
  const std::string key = trim(key_value.substr(0, eq));
  const std::string value = trim(key_value.substr(eq + 1));
  if (key.empty()) throw ConfigError("override has an empty key");
  values_[key] = value;
}

bool FlatConfig::has(const std::string& key) const { return values_.contains(key); }

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::optional<std::string> FlatConfig::get_optional_string(const std::string& key) {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double FlatConfig::get_double(const std::string& key, double fallback) {
  const auto raw = get_optional_string(key);
  if (!raw) return fallback;
  double value = 0.0;
  const char* first = raw->data();
  const char* last = raw->data() + raw->size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError(key + ": expected a number (got '" + *raw + "')");
  return value;
}

std::optional<double> FlatConfig::get_optional_double(const std::string& key) {
  if (!has(key)) {
    consumed_.insert(key);
    return std::nullopt;
  }
  return get_double(key, 0.0);
}

long FlatConfig::get_long(const std::string& key, long fallback) {
  const auto raw = get_optional_string(key);
  if (!raw) return fallback;
  long value = 0;
  const char* first = raw->data();
  const char* last = raw->data() + raw->size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError(key + ": expected an integer (got '" + *raw + "')");
  return value;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) {
  const auto raw = get_optional_string(key);
  if (!raw) return fallback;
  if (*raw == "true") return true;
  if (*raw == "false") return false;
  throw ConfigError(key + ": expected true or false (got '" + *raw + "')");
}

void FlatConfig::consume_prefix(const std::string& prefix) {
  for (const auto& [key, value] : values_)
    if (key.rfind(prefix, 0) == 0) consumed_.insert(key);
}

void FlatConfig::ensure_fully_consumed() const {
  for (const auto& [key, value] : values_)
    if (!consumed_.contains(key)) throw ConfigError("unknown config key: " + key);
}

LoopConfig load_loop_config(FlatConfig& fc) {
  LoopConfig cfg;
  cfg.name = fc.get_string("run.name", "run");

  cfg.reference.shape = wave_shape_from_string(fc.get_string("reference.shape", "sine"));
  cfg.reference.frequency_hz = fc.get_double("reference.frequency_hz", 1.0);
  cfg.reference.amplitude = fc.get_double("reference.amplitude", 1.0);
  cfg.reference.phase_rad = fc.get_double("reference.phase_rad", 0.0);
  cfg.reference.periods = static_cast<int>(fc.get_long("reference.periods", 1));
  cfg.reference.samples_per_period =
      static_cast<int>(fc.get_long("reference.samples_per_period", 1000));

  cfg.plant.type = plant_type_from_string(fc.get_string("plant.kind", "ja_static"));
  cfg.plant.ja.Ms = fc.get_double("plant.ja.Ms_A_per_m", cfg.plant.ja.Ms);
  cfg.plant.ja.a = fc.get_double("plant.ja.a_A_per_m", cfg.plant.ja.a);
  cfg.plant.ja.k_pin = fc.get_double("plant.ja.k_pin_A_per_m", cfg.plant.ja.k_pin);
  cfg.plant.ja.c_rev = fc.get_double("plant.ja.c_rev", cfg.plant.ja.c_rev);
  cfg.plant.ja.alpha = fc.get_double("plant.ja.alpha", cfg.plant.ja.alpha);
  cfg.plant.ja.field_gain = fc.get_double("plant.ja.field_gain", cfg.plant.ja.field_gain);
  {
    const auto k_eddy = fc.get_optional_double("plant.ja.k_eddy");
    const auto k_excess = fc.get_optional_double("plant.ja.k_excess");
    if (k_eddy || k_excess || cfg.plant.type == PlantType::JaDynamic) {
      JaDynamicParams dyn;
      dyn.k_eddy = k_eddy.value_or(0.0);
      dyn.k_excess = k_excess.value_or(0.0);
      cfg.plant.ja.dynamic = dyn;
    }
  }
  cfg.plant.linear.gain = fc.get_double("plant.linear.gain", 1.0);
  cfg.plant.linear.time_constant = fc.get_double("plant.linear.time_constant_s", 1.0);
  cfg.plant.saturating.gain = fc.get_double("plant.saturating.gain", 1.0);
  cfg.plant.saturating.sat_level = fc.get_double("plant.saturating.sat_level", 1.0);

  if (fc.get_bool("controller.enabled", true)) {
    CtrlParams ctrl;
    ctrl.Kp = fc.get_double("controller.Kp", 1.0);
    ctrl.Ki = fc.get_double("controller.Ki", 0.0);
    ctrl.k_alpha = fc.get_double("controller.k_alpha", 0.0);
    ctrl.k_beta = fc.get_double("controller.k_beta", 0.0);
    ctrl.u_limit = fc.get_optional_double("controller.u_limit");
    ctrl.anti_windup = fc.get_bool("controller.anti_windup", false);
    ctrl.u_internal0 = fc.get_double("controller.u_internal0", 0.0);
    cfg.controller = ctrl;
  } else {
    // Open loop: gain keys may still be present; consume them untouched.
    for (const char* key : {"controller.Kp", "controller.Ki", "controller.k_alpha",
                            "controller.k_beta", "controller.u_limit", "controller.u_internal0"})
      fc.get_optional_double(key);
    fc.get_bool("controller.anti_windup", false);
  }

  cfg.init_cycles = static_cast<int>(fc.get_long("loop.init_cycles", 0));
  cfg.measure_periods = static_cast<int>(fc.get_long("loop.measure_periods", 1));
  cfg.seed = static_cast<std::uint64_t>(fc.get_long("loop.seed", 0));
  if (fc.get_bool("loop.symmetrization.enabled", false)) {
    SymmetrizationSpec sym;
    sym.lambda = fc.get_double("loop.symmetrization.lambda", 0.5);
    sym.target = sym_target_from_string(fc.get_string("loop.symmetrization.target", "u"));
    cfg.symmetrization = sym;
  } else {
    fc.get_double("loop.symmetrization.lambda", 0.5);
    fc.get_string("loop.symmetrization.target", "u");
  }
  cfg.disturbance.constant = fc.get_double("loop.disturbance.constant", 0.0);
  cfg.disturbance.step = fc.get_double("loop.disturbance.step", 0.0);
  cfg.disturbance.step_after_period =
      static_cast<int>(fc.get_long("loop.disturbance.step_after_period", 0));

  validate(cfg);
  return cfg;
}

TuneSpec load_tune_spec(FlatConfig& fc, LoopConfig base) {
  TuneSpec spec;
  spec.base_config = std::move(base);
  spec.objective = tune_objective_from_string(fc.get_string("tune.objective", "sq_error"));
  spec.w_err = fc.get_double("tune.weight_err", 1.0);
  spec.w_ff = fc.get_double("tune.weight_ff", 1.0);
  const std::string optimizer = fc.get_string("tune.optimizer", "grid");
  if (optimizer == "anneal")
    spec.optimizer = OptimizerKind::Anneal;
  else if (optimizer == "grid")
    spec.optimizer = OptimizerKind::Grid;
  else
    throw ConfigError("tune.optimizer must be 'anneal' or 'grid' (got '" + optimizer + "')");
  spec.budget = fc.get_long("tune.budget", 1000);
  spec.anneal.iters = static_cast<int>(fc.get_long("tune.anneal.iters", 500));
  spec.anneal.t0 = fc.get_double("tune.anneal.T0", 1.0);
  spec.anneal.cooling = fc.get_double("tune.anneal.cooling", 0.995);
  spec.anneal.seed = static_cast<std::uint64_t>(fc.get_long("tune.anneal.seed", 1));
  spec.grid.points_per_dim = static_cast<int>(fc.get_long("tune.grid.points_per_dim", 5));

  for (const char* name : {"Kp", "Ki", "k_alpha", "k_beta"}) {
    const std::string prefix = std::string("tune.space.") + name;
    const auto min = fc.get_optional_double(prefix + ".min");
    const auto max = fc.get_optional_double(prefix + ".max");
    // Gains span decades: log scale by default; the initialization constants
    // may be negative or zero, so they default to linear.
    const bool log_default = std::string(name) == "Kp" || std::string(name) == "Ki";
    const std::string scale = fc.get_string(prefix + ".scale", log_default ? "log" : "linear");
    if (min.has_value() != max.has_value())
      throw ConfigError(prefix + ": both .min and .max are required");
    if (min) {
      TuneDim dim;
      dim.name = name;
      dim.min = *min;
      dim.max = *max;
      dim.scale = scale_kind_from_string(scale);
      spec.dims.push_back(dim);
    }
  }

  validate(spec);
  return spec;
}

namespace {

std::string fmt(double v) { return format_double(v); }
std::string fmt(long v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

}  // namespace

std::vector<std::pair<std::string, std::string>> config_echo(const LoopConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  auto put = [&out](const std::string& key, std::string value) {
    out.emplace_back(key, std::move(value));
  };

  put("run.name", cfg.name);
  put("reference.shape", to_string(cfg.reference.shape));
  put("reference.frequency_hz", fmt(cfg.reference.frequency_hz));
  put("reference.amplitude", fmt(cfg.reference.amplitude));
  put("reference.phase_rad", fmt(cfg.reference.phase_rad));
  put("reference.periods", fmt(static_cast<long>(cfg.reference.periods)));
  put("reference.samples_per_period", fmt(static_cast<long>(cfg.reference.samples_per_period)));

  put("plant.kind", to_string(cfg.plant.type));
  if (is_ja(cfg.plant)) {
    put("plant.ja.Ms_A_per_m", fmt(cfg.plant.ja.Ms));
    put("plant.ja.a_A_per_m", fmt(cfg.plant.ja.a));
    put("plant.ja.k_pin_A_per_m", fmt(cfg.plant.ja.k_pin));
    put("plant.ja.c_rev", fmt(cfg.plant.ja.c_rev));
    put("plant.ja.alpha", fmt(cfg.plant.ja.alpha));
    put("plant.ja.field_gain", fmt(cfg.plant.ja.field_gain));
    if (cfg.plant.ja.dynamic) {
      put("plant.ja.k_eddy", fmt(cfg.plant.ja.dynamic->k_eddy));
      put("plant.ja.k_excess", fmt(cfg.plant.ja.dynamic->k_excess));
    }
  } else if (cfg.plant.type == PlantType::Linear) {
    put("plant.linear.gain", fmt(cfg.plant.linear.gain));
    put("plant.linear.time_constant_s", fmt(cfg.plant.linear.time_constant));
  } else {
    put("plant.saturating.gain", fmt(cfg.plant.saturating.gain));
    put("plant.saturating.sat_level", fmt(cfg.plant.saturating.sat_level));
  }

  put("controller.enabled", fmt(cfg.controller.has_value()));
  if (cfg.controller) {
    put("controller.Kp", fmt(cfg.controller->Kp));
    put("controller.Ki", fmt(cfg.controller->Ki));
    put("controller.k_alpha", fmt(cfg.controller->k_alpha));
    put("controller.k_beta", fmt(cfg.controller->k_beta));
    if (cfg.controller->u_limit) put("controller.u_limit", fmt(*cfg.controller->u_limit));
    put("controller.anti_windup", fmt(cfg.controller->anti_windup));
    put("controller.u_internal0", fmt(cfg.controller->u_internal0));
  }

  put("loop.init_cycles", fmt(static_cast<long>(cfg.init_cycles)));
  put("loop.measure_periods", fmt(static_cast<long>(cfg.measure_periods)));
  put("loop.seed", fmt(static_cast<long>(cfg.seed)));
  put("loop.symmetrization.enabled", fmt(cfg.symmetrization.has_value()));
  if (cfg.symmetrization) {
    put("loop.symmetrization.lambda", fmt(cfg.symmetrization->lambda));
    put("loop.symmetrization.target", to_string(cfg.symmetrization->target));
  }
  put("loop.disturbance.constant", fmt(cfg.disturbance.constant));
  put("loop.disturbance.step", fmt(cfg.disturbance.step));
  put("loop.disturbance.step_after_period",
      fmt(static_cast<long>(cfg.disturbance.step_after_period)));
  return out;
}

}  // namespace hystloop
