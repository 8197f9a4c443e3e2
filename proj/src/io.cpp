#include "tilthex/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tilthex::io {

using nlohmann::json;

namespace {

void append(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), ",%.17g", v);
  s += buf;
}

const char* kColumns =
    "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,"
    "ref_px,ref_py,ref_pz,ref_qw,ref_qx,ref_qy,ref_qz,ref_wx,ref_wy,ref_wz,"
    "wdes_fx,wdes_fy,wdes_fz,wdes_mx,wdes_my,wdes_mz,"
    "dw_fx,dw_fy,dw_fz,dw_mx,dw_my,dw_mz,"
    "wcmd_fx,wcmd_fy,wcmd_fz,wcmd_mx,wcmd_my,wcmd_mz,"
    "f0,f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,f11,"
    "alpha0,alpha1,alpha2,alpha3,alpha4,alpha5,saturated,"
    "wreal_fx,wreal_fy,wreal_fz,wreal_mx,wreal_my,wreal_mz,"
    "mmeas_x,mmeas_y,mmeas_z,ep_x,ep_y,ep_z,er_x,er_y,er_z,"
    "beta,sigma,cost,iterations";

}  // namespace

void write_episode_csv(const sim::EpisodeLog& log, const std::string& path) {
  std::ostringstream out;
  out << "# trajectory=" << log.trajectory << "\n"
      << "# config_hash=" << log.config_hash << "\n"
      << "# seed=" << log.seed << "\n"
      << "# compensation=" << (log.compensation ? 1 : 0) << "\n"
      << "# unstable=" << (log.unstable ? 1 : 0) << "\n";
  {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "# tick_dt=%.17g\n", log.tick_dt);
    out << buf;
  }
  out << kColumns << "\n";

  std::string line;
  for (const auto& r : log.rows) {
    line.clear();
    char head[40];
    std::snprintf(head, sizeof(head), "%.17g", r.t);
    line += head;
    for (int i = 0; i < 3; ++i) append(line, r.state.position(i));
    for (int i = 0; i < 3; ++i) append(line, r.state.velocity(i));
    append(line, r.state.attitude.w());
    append(line, r.state.attitude.x());
    append(line, r.state.attitude.y());
    append(line, r.state.attitude.z());
    for (int i = 0; i < 3; ++i) append(line, r.state.angular_velocity(i));
    for (int i = 0; i < 3; ++i) append(line, r.ref_position(i));
    for (int i = 0; i < 4; ++i) append(line, r.ref_attitude(i));
    for (int i = 0; i < 3; ++i) append(line, r.ref_omega(i));
    for (int i = 0; i < 6; ++i) append(line, r.w_des(i));
    for (int i = 0; i < 6; ++i) append(line, r.delta_w(i));
    for (int i = 0; i < 6; ++i) append(line, r.w_cmd(i));
    for (int i = 0; i < 12; ++i) append(line, r.u_cmd.thrusts(i));
    for (int i = 0; i < 6; ++i) append(line, r.u_cmd.tilt_angles(i));
    line += r.saturated ? ",1" : ",0";
    for (int i = 0; i < 6; ++i) append(line, r.w_realized(i));
    for (int i = 0; i < 3; ++i) append(line, r.m_measured(i));
    for (int i = 0; i < 3; ++i) append(line, r.e_p(i));
    for (int i = 0; i < 3; ++i) append(line, r.e_R(i));
    append(line, r.beta);
    append(line, r.sigma);
    append(line, r.cost);
    line += "," + std::to_string(r.iterations);
    out << line << "\n";
  }
  write_text_file(path, out.str());
}

sim::EpisodeLog read_episode_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("io: cannot open '" + path + "'");

  sim::EpisodeLog log;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "trajectory") log.trajectory = value;
      else if (key == "config_hash") log.config_hash = value;
      else if (key == "seed") log.seed = std::stoull(value);
      else if (key == "compensation") log.compensation = value == "1";
      else if (key == "unstable") log.unstable = value == "1";
      else if (key == "tick_dt") log.tick_dt = std::stod(value);
      continue;
    }
    if (!header_seen) {
      if (line != kColumns) {
        throw std::runtime_error("io: unexpected episode CSV header in '" + path + "'");
      }
      header_seen = true;
      continue;
    }

    std::vector<double> v;
    v.reserve(80);
    const char* p = line.c_str();
    char* end = nullptr;
    while (*p != '\0') {
      v.push_back(std::strtod(p, &end));
      p = end;
      if (*p == ',') ++p;
    }
    if (v.size() != 80) {
      throw std::runtime_error("io: bad episode CSV row in '" + path + "'");
    }

    sim::EpisodeRow r;
    int c = 0;
    r.t = v[c++];
    for (int i = 0; i < 3; ++i) r.state.position(i) = v[c++];
    for (int i = 0; i < 3; ++i) r.state.velocity(i) = v[c++];
    {
      const double w = v[c++], x = v[c++], y = v[c++], z = v[c++];
      r.state.attitude = Quat(w, x, y, z);
    }
    for (int i = 0; i < 3; ++i) r.state.angular_velocity(i) = v[c++];
    for (int i = 0; i < 3; ++i) r.ref_position(i) = v[c++];
    for (int i = 0; i < 4; ++i) r.ref_attitude(i) = v[c++];
    for (int i = 0; i < 3; ++i) r.ref_omega(i) = v[c++];
    for (int i = 0; i < 6; ++i) r.w_des(i) = v[c++];
    for (int i = 0; i < 6; ++i) r.delta_w(i) = v[c++];
    for (int i = 0; i < 6; ++i) r.w_cmd(i) = v[c++];
    for (int i = 0; i < 12; ++i) r.u_cmd.thrusts(i) = v[c++];
    for (int i = 0; i < 6; ++i) r.u_cmd.tilt_angles(i) = v[c++];
    r.saturated = v[c++] != 0.0;
    for (int i = 0; i < 6; ++i) r.w_realized(i) = v[c++];
    for (int i = 0; i < 3; ++i) r.m_measured(i) = v[c++];
    for (int i = 0; i < 3; ++i) r.e_p(i) = v[c++];
    for (int i = 0; i < 3; ++i) r.e_R(i) = v[c++];
    r.beta = v[c++];
    r.sigma = v[c++];
    r.cost = v[c++];
    r.iterations = static_cast<int>(v[c++]);
    log.rows.push_back(r);
  }
  if (!header_seen) {
    throw std::runtime_error("io: '" + path + "' contains no episode header");
  }
  return log;
}

namespace {

json matrix_to_json(const Eigen::Matrix<double, Eigen::Dynamic, 6>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < 6; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::Matrix<double, Eigen::Dynamic, 6> matrix_from_json(const json& rows) {
  Eigen::Matrix<double, Eigen::Dynamic, 6> m(static_cast<Eigen::Index>(rows.size()), 6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 6) throw std::runtime_error("io: expected 6-wide rows");
    for (int j = 0; j < 6; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

void save_training_set(const gp::TrainingSet& set, const std::string& vehicle_hash,
                       std::uint64_t seed, const std::string& path) {
  json j;
  j["format"] = "tilthex-training-set";
  j["vehicle_hash"] = vehicle_hash;
  j["seed"] = seed;
  j["episode"] = set.episode;
  j["times"] = set.times;
  j["inputs"] = matrix_to_json(set.inputs);
  j["targets"] = matrix_to_json(set.targets);
  write_text_file(path, j.dump(1) + "\n");
}

gp::TrainingSet load_training_set(const std::string& path,
                                  std::string* vehicle_hash, std::uint64_t* seed) {
  const json j = json::parse(read_text_file(path));
  if (j.value("format", "") != "tilthex-training-set") {
    throw std::runtime_error("io: '" + path + "' is not a training set file");
  }
  gp::TrainingSet set;
  set.episode = j.value("episode", "");
  set.times = j.value("times", std::vector<double>{});
  set.inputs = matrix_from_json(j.at("inputs"));
  set.targets = matrix_from_json(j.at("targets"));
  if (vehicle_hash != nullptr) *vehicle_hash = j.value("vehicle_hash", "");
  if (seed != nullptr) *seed = j.value("seed", 0ULL);
  return set;
}

void save_model(const gp::GpModel& model, const std::string& path) {
  if (!model.fitted()) {
    throw std::runtime_error("io: refusing to save an unfitted model");
  }
  json j;
  j["format"] = "tilthex-gp-model";
  j["vehicle_hash"] = model.vehicle_hash();
  j["seed"] = model.seed();
  j["provenance"] = model.provenance();
  j["sigma_threshold_default"] = model.sigma_threshold_default();

  // All axes share the training inputs; store them once.
  const Eigen::Matrix<double, Eigen::Dynamic, 6>* inputs = nullptr;
  json axes = json::array();
  for (int axis = 0; axis < 6; ++axis) {
    if (!model.axis_trained(axis)) continue;
    const auto& gp_axis = model.axis(axis);
    if (inputs == nullptr) inputs = &gp_axis.inputs();
    json a;
    a["axis"] = axis;
    a["targets"] = std::vector<double>(
        gp_axis.targets().data(), gp_axis.targets().data() + gp_axis.targets().size());
    a["signal_variance"] = gp_axis.hyper().signal_variance;
    a["noise_variance"] = gp_axis.hyper().noise_variance;
    a["lengthscales"] = std::vector<double>(
        gp_axis.hyper().lengthscales.data(), gp_axis.hyper().lengthscales.data() + 6);
    a["log_marginal_likelihood"] =
        model.diagnostics()[static_cast<std::size_t>(axis)].log_marginal_likelihood;
    a["best_restart"] =
        model.diagnostics()[static_cast<std::size_t>(axis)].best_restart;
    axes.push_back(std::move(a));
  }
  j["inputs"] = matrix_to_json(*inputs);
  j["axes"] = std::move(axes);
  write_text_file(path, j.dump(1) + "\n");
}

gp::GpModel load_model(const std::string& path) {
  const json j = json::parse(read_text_file(path));
  if (j.value("format", "") != "tilthex-gp-model") {
    throw std::runtime_error("io: '" + path + "' is not a model file");
  }
  const auto inputs = matrix_from_json(j.at("inputs"));

  std::array<std::optional<gp::AxisGp>, 6> axes;
  for (const auto& a : j.at("axes")) {
    const int axis = a.at("axis").get<int>();
    gp::Hyperparameters hyper;
    hyper.signal_variance = a.at("signal_variance").get<double>();
    hyper.noise_variance = a.at("noise_variance").get<double>();
    const auto ls = a.at("lengthscales").get<std::vector<double>>();
    if (ls.size() != 6) throw std::runtime_error("io: model lengthscales must have 6 entries");
    for (int d = 0; d < 6; ++d) hyper.lengthscales(d) = ls[static_cast<std::size_t>(d)];
    const auto targets = a.at("targets").get<std::vector<double>>();
    Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(
        targets.data(), static_cast<Eigen::Index>(targets.size()));
    // AxisGp construction recomputes and verifies the Cholesky.
    axes[static_cast<std::size_t>(axis)].emplace(inputs, z, hyper);
  }
  return gp::GpModel::from_parts(std::move(axes),
                                 j.value("sigma_threshold_default", 0.0),
                                 j.value("seed", 0ULL),
                                 j.value("vehicle_hash", ""),
                                 j.value("provenance", ""));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io: cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("io: write failed for '" + path + "'");
}

}  // namespace tilthex::io
