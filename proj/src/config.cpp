#include "tilthex/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace tilthex::harness {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
  }
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: bad boolean value for " + key + ": '" + value + "'");
}

sim::TrajectoryKind parse_kind(const std::string& key, const std::string& value) {
  if (value == "pitch_sweep") return sim::TrajectoryKind::PitchSweep;
  if (value == "figure8") return sim::TrajectoryKind::Figure8;
  if (value == "step") return sim::TrajectoryKind::Step;
  if (value == "hover") return sim::TrajectoryKind::Hover;
  throw ConfigError("config: unknown trajectory kind for " + key + ": '" + value + "'");
}

std::vector<sim::Excitation> parse_excitation(const std::string& key,
                                              const std::string& value) {
  std::vector<sim::Excitation> out;
  if (trim(value).empty() || value == "none") return out;
  std::stringstream ss(value);
  std::string term;
  while (std::getline(ss, term, ',')) {
    term = trim(term);
    if (term.empty()) continue;
    std::stringstream ts(term);
    std::string axis, amp, freq;
    if (!std::getline(ts, axis, ':') || !std::getline(ts, amp, ':') ||
        !std::getline(ts, freq, ':')) {
      throw ConfigError("config: excitation term must be axis:amplitude:frequency (comma-separated list), got '" +
                        term + "' in " + key);
    }
    sim::Excitation e;
    axis = trim(axis);
    if (axis == "x" || axis == "0") e.axis = 0;
    else if (axis == "y" || axis == "1") e.axis = 1;
    else if (axis == "z" || axis == "2") e.axis = 2;
    else throw ConfigError("config: excitation axis must be x/y/z in " + key);
    e.amplitude = parse_double(key, trim(amp));
    e.frequency = parse_double(key, trim(freq));
    out.push_back(e);
  }
  return out;
}

std::string render_excitation(const std::vector<sim::Excitation>& exc) {
  std::string s;
  char buf[96];
  const char* axes = "xyz";
  for (const auto& e : exc) {
    std::snprintf(buf, sizeof(buf), "%s%c:%.17g:%.17g", s.empty() ? "" : ",",
                  axes[e.axis], e.amplitude, e.frequency);
    s += buf;
  }
  return s.empty() ? "none" : s;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kMismatchKeys[] = {
    "interference_gain", "tilt_loss_gain", "bias_x", "bias_y",
    "bias_z", "servo_tau", "noise_std", "scale_spread"};

}  // namespace

ExperimentConfig::ExperimentConfig() {
  // The shipped defaults reproduce the simulation study: zero attitude
  // integral action, multi-axis tilt training up to high tilt angles, and a
  // figure-8 evaluation. See README for the real-flight gain preset.
  gains.attitude_integral_gain = 0.0;

  train_spec.kind = sim::TrajectoryKind::Hover;
  train_spec.amplitude = 0.0;
  train_spec.duration = 40.0;
  // Worst-case tilt is bounded by the amplitude sums: |(1.05, 1.05)| is
  // about 85 deg, which keeps every commanded attitude flyable.
  train_spec.excitation = {
      {0, 0.9, 0.05}, {1, 0.9, 0.0786},   // slow large tilts, all directions
      {0, 0.15, 0.3}, {1, 0.15, 0.5}, {2, 0.15, 0.7},
  };

  eval_spec.kind = sim::TrajectoryKind::Figure8;
  eval_spec.amplitude = 2.0;  // half-span, m
  eval_spec.duration = 20.0;
}

void ExperimentConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("config: expected section.key=value, got '" + assignment + "'");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));

  auto spec_key = [&](sim::TrajectorySpec& spec, const std::string& sub) -> bool {
    if (sub == "kind") spec.kind = parse_kind(key, value);
    else if (sub == "amplitude") spec.amplitude = parse_double(key, value);
    else if (sub == "amplitude_deg") spec.amplitude = parse_double(key, value) * M_PI / 180.0;
    else if (sub == "amplitude_m") spec.amplitude = parse_double(key, value);
    else if (sub == "duration") spec.duration = parse_double(key, value);
    else if (sub == "max_angular_accel") spec.max_angular_accel = parse_double(key, value);
    else if (sub == "excitation") spec.excitation = parse_excitation(key, value);
    else return false;
    return true;
  };

  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("config: key must be section.key, got '" + key + "'");
  }
  const std::string section = key.substr(0, dot);
  const std::string sub = key.substr(dot + 1);

  if (section == "vehicle") {
    if (sub == "mass") inertial.mass = parse_double(key, value);
    else if (sub == "arm_length") geometry.arm_length = parse_double(key, value);
    else if (sub == "thrust_max") geometry.thrust_max = parse_double(key, value);
    else if (sub == "drag_coefficient") geometry.drag_coefficient = parse_double(key, value);
    else if (sub == "gravity") gravity = parse_double(key, value);
    else if (sub == "gyroscopic") gyroscopic = parse_bool(key, value);
    else if (sub == "inertia_xx") inertial.inertia(0, 0) = parse_double(key, value);
    else if (sub == "inertia_yy") inertial.inertia(1, 1) = parse_double(key, value);
    else if (sub == "inertia_zz") inertial.inertia(2, 2) = parse_double(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  } else if (section == "mismatch") {
    if (sub == "preset") {
      if (value != "ideal" && value != "voliro-like") {
        throw ConfigError("config: unknown mismatch preset '" + value + "'");
      }
      mismatch_preset = value;
    } else if (std::find_if(std::begin(kMismatchKeys), std::end(kMismatchKeys),
                            [&](const char* k) { return sub == k; }) !=
               std::end(kMismatchKeys)) {
      mismatch_overrides[sub] = parse_double(key, value);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  } else if (section == "controller") {
    if (sub == "zeta_p") gains.zeta_p = parse_double(key, value);
    else if (sub == "omega_n_p") gains.omega_n_p = parse_double(key, value);
    else if (sub == "zeta_a_x") gains.zeta_a(0) = parse_double(key, value);
    else if (sub == "zeta_a_y") gains.zeta_a(1) = parse_double(key, value);
    else if (sub == "zeta_a_z") gains.zeta_a(2) = parse_double(key, value);
    else if (sub == "omega_n_a_x") gains.omega_n_a(0) = parse_double(key, value);
    else if (sub == "omega_n_a_y") gains.omega_n_a(1) = parse_double(key, value);
    else if (sub == "omega_n_a_z") gains.omega_n_a(2) = parse_double(key, value);
    else if (sub == "attitude_integral_gain") gains.attitude_integral_gain = parse_double(key, value);
    else if (sub == "integral_limit") gains.integral_limit = parse_double(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  } else if (section == "gp") {
    if (sub == "k") subsample_k = static_cast<int>(parse_int(key, value));
    else if (sub == "restarts") fit_restarts = static_cast<int>(parse_int(key, value));
    else if (sub == "axes") {
      if (value != "torque" && value != "all") {
        throw ConfigError("config: gp.axes must be 'torque' or 'all'");
      }
      gp_axes = value;
    }
    else throw ConfigError("config: unknown key '" + key + "'");
  } else if (section == "compensator") {
    if (sub == "residual_threshold") comp.residual_threshold = parse_double(key, value);
    else if (sub == "max_iterations") comp.max_iterations = static_cast<int>(parse_int(key, value));
    else if (sub == "regularization") comp.regularization = parse_double(key, value);
    else if (sub == "filter_a") comp.filter_a = parse_double(key, value);
    else if (sub == "filter_kappa") comp.filter_kappa = parse_double(key, value);
    else if (sub == "sigma_threshold") comp.sigma_threshold = parse_double(key, value);
    else if (sub == "warm_start") comp.warm_start = parse_bool(key, value);
    else if (sub == "filter_enabled") comp.filter_enabled = parse_bool(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  } else if (section == "train") {
    if (!spec_key(train_spec, sub)) throw ConfigError("config: unknown key '" + key + "'");
  } else if (section == "eval") {
    if (!spec_key(eval_spec, sub)) throw ConfigError("config: unknown key '" + key + "'");
  } else if (section == "sim") {
    if (sub == "measurement_noise_std") measurement_noise_std = parse_double(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  } else if (section == "run") {
    if (sub == "seed") seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (sub == "output_dir") output_dir = value;
    else if (sub == "repeats") repeats = static_cast<int>(parse_int(key, value));
    else throw ConfigError("config: unknown key '" + key + "'");
  } else {
    throw ConfigError("config: unknown section '" + section + "'");
  }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open '" + path + "'");
  }
  ExperimentConfig cfg;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config: malformed section header at line " +
                          std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
    }
    if (section.empty()) {
      throw ConfigError("config: key outside a [section] at line " + std::to_string(line_no));
    }
    cfg.apply_override(section + "." + trim(line.substr(0, eq)) + "=" +
                       trim(line.substr(eq + 1)));
  }
  return cfg;
}

double ExperimentConfig::mismatch_scale_spread() const {
  const auto it = mismatch_overrides.find("scale_spread");
  if (it != mismatch_overrides.end()) return it->second;
  return mismatch_preset == "voliro-like" ? 0.10 : 0.0;
}

actuation::MismatchParams ExperimentConfig::mismatch_params() const {
  actuation::MismatchParams mis =
      mismatch_preset == "voliro-like"
          ? actuation::MismatchParams::voliro_like(seed, mismatch_scale_spread())
          : actuation::MismatchParams::ideal();
  for (const auto& [key, value] : mismatch_overrides) {
    if (key == "interference_gain") mis.interference_gain = value;
    else if (key == "tilt_loss_gain") mis.tilt_loss_gain = value;
    else if (key == "bias_x") mis.torque_bias(0) = value;
    else if (key == "bias_y") mis.torque_bias(1) = value;
    else if (key == "bias_z") mis.torque_bias(2) = value;
    else if (key == "servo_tau") mis.servo_tau = value;
    else if (key == "noise_std") mis.noise_std = value;
  }
  return mis;
}

std::vector<int> ExperimentConfig::gp_axis_indices() const {
  return gp_axes == "all" ? std::vector<int>{0, 1, 2, 3, 4, 5}
                          : std::vector<int>{3, 4, 5};
}

sim::EpisodeSetup ExperimentConfig::episode_setup(bool compensation,
                                                  const gp::GpModel* model) const {
  sim::EpisodeSetup setup;
  setup.geometry = geometry;
  setup.inertial = inertial;
  setup.mismatch = mismatch_params();
  setup.gains = gains;
  setup.comp_cfg = comp;
  setup.compensation = compensation;
  setup.model = model;
  setup.gravity = gravity;
  setup.measurement_noise_std = measurement_noise_std;
  setup.gyroscopic_torque = gyroscopic;
  setup.config_hash = vehicle_hash();
  return setup;
}

std::string ExperimentConfig::canonical() const {
  const actuation::MismatchParams mis = mismatch_params();
  std::ostringstream out;
  out << "compensator.filter_a=" << fmt(comp.filter_a) << "\n"
      << "compensator.filter_enabled=" << (comp.filter_enabled ? "true" : "false") << "\n"
      << "compensator.filter_kappa=" << fmt(comp.filter_kappa) << "\n"
      << "compensator.max_iterations=" << comp.max_iterations << "\n"
      << "compensator.regularization=" << fmt(comp.regularization) << "\n"
      << "compensator.residual_threshold=" << fmt(comp.residual_threshold) << "\n"
      << "compensator.sigma_threshold=" << fmt(comp.sigma_threshold) << "\n"
      << "compensator.warm_start=" << (comp.warm_start ? "true" : "false") << "\n"
      << "controller.attitude_integral_gain=" << fmt(gains.attitude_integral_gain) << "\n"
      << "controller.integral_limit=" << fmt(gains.integral_limit) << "\n"
      << "controller.omega_n_a_x=" << fmt(gains.omega_n_a(0)) << "\n"
      << "controller.omega_n_a_y=" << fmt(gains.omega_n_a(1)) << "\n"
      << "controller.omega_n_a_z=" << fmt(gains.omega_n_a(2)) << "\n"
      << "controller.omega_n_p=" << fmt(gains.omega_n_p) << "\n"
      << "controller.zeta_a_x=" << fmt(gains.zeta_a(0)) << "\n"
      << "controller.zeta_a_y=" << fmt(gains.zeta_a(1)) << "\n"
      << "controller.zeta_a_z=" << fmt(gains.zeta_a(2)) << "\n"
      << "controller.zeta_p=" << fmt(gains.zeta_p) << "\n"
      << "eval.amplitude=" << fmt(eval_spec.amplitude) << "\n"
      << "eval.duration=" << fmt(eval_spec.duration) << "\n"
      << "eval.excitation=" << render_excitation(eval_spec.excitation) << "\n"
      << "eval.kind=" << eval_spec.kind_name() << "\n"
      << "eval.max_angular_accel=" << fmt(eval_spec.max_angular_accel) << "\n"
      << "gp.axes=" << gp_axes << "\n"
      << "gp.k=" << subsample_k << "\n"
      << "gp.restarts=" << fit_restarts << "\n"
      << "mismatch.bias_x=" << fmt(mis.torque_bias(0)) << "\n"
      << "mismatch.bias_y=" << fmt(mis.torque_bias(1)) << "\n"
      << "mismatch.bias_z=" << fmt(mis.torque_bias(2)) << "\n"
      << "mismatch.interference_gain=" << fmt(mis.interference_gain) << "\n"
      << "mismatch.noise_std=" << fmt(mis.noise_std) << "\n"
      << "mismatch.preset=" << mismatch_preset << "\n"
      << "mismatch.scale_spread=" << fmt(mismatch_scale_spread()) << "\n"
      << "mismatch.servo_tau=" << fmt(mis.servo_tau) << "\n"
      << "mismatch.tilt_loss_gain=" << fmt(mis.tilt_loss_gain) << "\n"
      << "run.repeats=" << repeats << "\n"
      << "run.seed=" << seed << "\n"
      << "sim.measurement_noise_std=" << fmt(measurement_noise_std) << "\n"
      << "train.amplitude=" << fmt(train_spec.amplitude) << "\n"
      << "train.duration=" << fmt(train_spec.duration) << "\n"
      << "train.excitation=" << render_excitation(train_spec.excitation) << "\n"
      << "train.kind=" << train_spec.kind_name() << "\n"
      << "train.max_angular_accel=" << fmt(train_spec.max_angular_accel) << "\n"
      << "vehicle.arm_length=" << fmt(geometry.arm_length) << "\n"
      << "vehicle.drag_coefficient=" << fmt(geometry.drag_coefficient) << "\n"
      << "vehicle.gravity=" << fmt(gravity) << "\n"
      << "vehicle.gyroscopic=" << (gyroscopic ? "true" : "false") << "\n"
      << "vehicle.inertia_xx=" << fmt(inertial.inertia(0, 0)) << "\n"
      << "vehicle.inertia_yy=" << fmt(inertial.inertia(1, 1)) << "\n"
      << "vehicle.inertia_zz=" << fmt(inertial.inertia(2, 2)) << "\n"
      << "vehicle.mass=" << fmt(inertial.mass) << "\n"
      << "vehicle.thrust_max=" << fmt(geometry.thrust_max) << "\n";
  return out.str();
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ExperimentConfig::vehicle_hash() const {
  // The plant definition: geometry/inertia, the mismatch instance (its
  // per-arm thrust scales derive from run.seed) and the measurement model.
  std::istringstream lines(canonical());
  std::string line, subset;
  while (std::getline(lines, line)) {
    if (line.rfind("vehicle.", 0) == 0 || line.rfind("mismatch.", 0) == 0 ||
        line.rfind("sim.", 0) == 0 || line.rfind("run.seed", 0) == 0) {
      subset += line + "\n";
    }
  }
  return fnv1a_hex(subset);
}

std::string ExperimentConfig::full_hash() const { return fnv1a_hex(canonical()); }

}  // namespace tilthex::harness
