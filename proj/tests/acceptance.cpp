// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Run from anywhere; artifacts go to a temp directory.

#include <Eigen/Dense>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "tilthex/actuation.hpp"
#include "tilthex/compensator.hpp"
#include "tilthex/controller.hpp"
#include "tilthex/gp.hpp"
#include "tilthex/harness.hpp"
#include "tilthex/io.hpp"
#include "tilthex/metrics.hpp"
#include "tilthex/random.hpp"
#include "tilthex/simulator.hpp"

using namespace tilthex;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s -- %s\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

using InputMatrix = Eigen::Matrix<double, Eigen::Dynamic, 6>;

gp::Hyperparameters random_hyper(Rng& rng) {
  gp::Hyperparameters h;
  h.signal_variance = std::exp(rng.uniform(-1.5, 1.5));
  for (int d = 0; d < 6; ++d) h.lengthscales(d) = std::exp(rng.uniform(-0.7, 1.5));
  h.noise_variance = std::exp(rng.uniform(-6.0, -2.0));
  return h;
}

// ----- criterion 1: exact GP inference vs a dense-inverse oracle -----

void criterion_gp_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    const int n = 20;
    InputMatrix x(n, 6);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < 6; ++d) x(i, d) = rng.uniform(-3.0, 3.0);
    }
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.normal();
    const auto h = random_hyper(rng);

    const gp::AxisGp model(x, z, h);

    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        k(i, j) = gp::kernel(x.row(i).transpose(), x.row(j).transpose(), h);
      }
    }
    k.diagonal().array() += h.noise_variance;
    const Eigen::MatrixXd k_inv = k.inverse();

    for (int q = 0; q < 10; ++q) {
      Vec6 query;
      for (int d = 0; d < 6; ++d) query(d) = rng.uniform(-4.0, 4.0);
      Eigen::VectorXd kv(n);
      for (int i = 0; i < n; ++i) {
        kv(i) = gp::kernel(query, x.row(i).transpose(), h);
      }
      const double mean_oracle = kv.dot(k_inv * z);
      const double var_oracle =
          h.signal_variance + h.noise_variance - kv.dot(k_inv * kv);
      worst = std::max(worst, std::abs(model.mean(query) - mean_oracle));
      worst = std::max(worst, std::abs(model.variance(query) - var_oracle));
    }
  }
  const double elapsed = seconds_since(t0);
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "max |Cholesky - dense inverse| = %.3g (tol 1e-8), %.2f s (limit 5 s)",
                worst, elapsed);
  report(1, "GP oracle equivalence", worst < 1e-8 && elapsed < 5.0, detail);
}

// ----- criterion 2: analytic mean Jacobian vs central differences -----

void criterion_gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2002);
  gp::TrainingSet set;
  const int n = 40;
  set.inputs.resize(n, 6);
  set.targets.resize(n, 6);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < 6; ++d) {
      set.inputs(i, d) = rng.uniform(-2.5, 2.5);
      set.targets(i, d) = rng.normal();
    }
  }
  const auto model = gp::GpModel::fit(set, {3, 4, 5}, 2, 42);

  const double step = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Vec6 q;
    for (int d = 0; d < 6; ++d) q(d) = rng.uniform(-3.0, 3.0);
    const Mat6 analytic = model.mean_jacobian(q);
    Mat6 fd = Mat6::Zero();
    for (int d = 0; d < 6; ++d) {
      Vec6 lo = q, hi = q;
      lo(d) -= step;
      hi(d) += step;
      const Vec6 mean_hi = model.predict(hi).mean;
      const Vec6 mean_lo = model.predict(lo).mean;
      fd.col(d) = (mean_hi - mean_lo) / (2.0 * step);
    }
    worst = std::max(worst, (analytic - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  const double elapsed = seconds_since(t0);
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "max relative error = %.3g (tol 1e-5), %.2f s (limit 5 s)", worst,
                elapsed);
  report(2, "mean-Jacobian gradient check", worst < 1e-5 && elapsed < 5.0, detail);
}

// ----- criterion 3: allocation round trip and injectivity -----

void criterion_allocation() {
  const actuation::VehicleGeometry geom;
  Rng rng(3003);
  const double f_scale = 0.5 * 12.0 * geom.thrust_max;
  const double m_scale = 0.3 * geom.arm_length * 12.0 * geom.thrust_max;

  double worst = 0.0;
  int rejected = 0;
  std::vector<Vec6> outputs;
  outputs.reserve(1000);
  for (int i = 0; i < 1000; ++i) {
    Vec6 w;
    while (true) {
      Vec3 f = rng.normal3();
      Vec3 m = rng.normal3();
      f = f / std::max(f.norm(), 1e-12) * rng.uniform(0.0, f_scale);
      m = m / std::max(m.norm(), 1e-12) * rng.uniform(0.0, m_scale);
      w << f, m;
      const auto res = actuation::allocate(Wrench::from_vector(w, Frame::Body), geom);
      if (!res.saturated) {
        const Vec6 back = actuation::forward_model(res.command, geom).as_vector();
        worst = std::max(worst, (back - w).cwiseAbs().maxCoeff());
        outputs.push_back(back);
        break;
      }
      ++rejected;  // corner of the sampling ball (saturating wrench)
    }
  }

  std::sort(outputs.begin(), outputs.end(), [](const Vec6& a, const Vec6& b) {
    for (int i = 0; i < 6; ++i) {
      if (a(i) != b(i)) return a(i) < b(i);
    }
    return false;
  });
  double min_gap = 1e300;
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    min_gap = std::min(min_gap, (outputs[i] - outputs[i - 1]).norm());
  }

  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "max round-trip error = %.3g (tol 1e-9), %d saturating corner "
                "draws resampled, min output separation = %.3g",
                worst, rejected, min_gap);
  report(3, "allocation round trip + injectivity",
         worst < 1e-9 && min_gap > 1e-9, detail);
}

// ----- criterion 4: fixed-point solver on known mismatches + timing -----

gp::GpModel fitted_dense_model(const std::function<Vec3(const Vec6&)>& g,
                               std::uint64_t seed) {
  Rng rng(seed);
  const int n = 100;
  gp::TrainingSet set;
  set.inputs.resize(n, 6);
  set.targets.resize(n, 6);
  for (int i = 0; i < n; ++i) {
    set.inputs(i, 0) = 0.2 * rng.normal();
    set.inputs(i, 1) = 0.2 * rng.normal();
    set.inputs(i, 2) = 4.0 * kGravity + 0.2 * rng.normal();
    for (int d = 3; d < 6; ++d) set.inputs(i, d) = rng.uniform(-3.0, 3.0);
    const Vec3 target = g(set.inputs.row(i).transpose());
    set.targets.row(i).setZero();
    set.targets.row(i).tail<3>() = target.transpose();
  }
  return gp::GpModel::fit(set, {3, 4, 5}, 3, seed);
}

void criterion_fixed_point() {
  const auto linear = fitted_dense_model(
      [](const Vec6& w) { return Vec3(-0.1 * w(3), -0.1 * w(4), -0.1 * w(5)); }, 4004);
  const auto constant = fitted_dense_model(
      [](const Vec6&) { return Vec3(0.0, 0.0, 0.45); }, 4005);

  compensator::CompensatorConfig cfg;
  Rng rng(4006);
  double worst_linear = 0.0, worst_const = 0.0, worst_cost = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Vec6 w_des;
    w_des << 0.0, 0.0, 4.0 * kGravity, rng.uniform(-1.5, 1.5),
        rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5);

    const auto res_lin =
        compensator::solve_compensation(w_des, linear, cfg, {});
    for (int axis = 3; axis < 6; ++axis) {
      worst_linear = std::max(
          worst_linear, std::abs(res_lin.delta(axis) - 0.1 * w_des(axis) / 0.9));
    }
    worst_cost = std::max(worst_cost, res_lin.cost);

    const auto res_const =
        compensator::solve_compensation(w_des, constant, cfg, {});
    worst_const = std::max(worst_const, std::abs(res_const.delta(5) + 0.45));
    worst_const = std::max(worst_const, std::abs(res_const.delta(3)));
    worst_const = std::max(worst_const, std::abs(res_const.delta(4)));
    worst_cost = std::max(worst_cost, res_const.cost);
  }

  // Timing at N = 100 with the warm-started loop configuration.
  std::vector<double> times;
  compensator::CompensatorState state;
  for (int i = 0; i < 200; ++i) {
    Vec6 w_des;
    w_des << 0.0, 0.0, 4.0 * kGravity, 1.5 * std::sin(0.05 * i),
        1.5 * std::cos(0.04 * i), 1.5 * std::sin(0.03 * i);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = compensator::solve_compensation(w_des, linear, cfg, state);
    times.push_back(1e3 * seconds_since(t0));
    state.last_iterate = res.delta;
  }
  std::sort(times.begin(), times.end());
  const double median_ms = times[times.size() / 2];

  char detail[220];
  std::snprintf(detail, sizeof(detail),
                "linear fixed-point error %.2g, constant %.2g (tol 1e-3); worst "
                "cost %.2g (tol 1e-4); median solve %.3f ms (limit 10 ms)",
                worst_linear, worst_const, worst_cost, median_ms);
  report(4, "fixed-point compensation solver",
         worst_linear < 1e-3 && worst_const < 1e-3 && worst_cost < 1e-4 &&
             median_ms < 10.0,
         detail);
}

// ----- criterion 5: closed-loop improvement via the default pipeline -----

struct PipelineArtifacts {
  double wall_s = 0.0;
  metrics::PredictionReport prediction;
  metrics::TrackingReport tracking;
  bool any_saturated = false;
  bool any_unstable = false;
};

PipelineArtifacts run_default_pipeline(const std::string& out_dir) {
  harness::ExperimentConfig cfg;
  cfg.output_dir = out_dir;

  const auto t0 = std::chrono::steady_clock::now();
  harness::cmd_collect(cfg);
  harness::cmd_train(cfg);
  harness::cmd_evaluate(cfg);

  PipelineArtifacts out;
  out.wall_s = seconds_since(t0);

  const auto model = io::load_model(harness::model_path(cfg));
  std::vector<sim::EpisodeLog> logs_on, logs_off;
  for (int r = 0; r < cfg.repeats; ++r) {
    logs_off.push_back(io::read_episode_csv(harness::log_path(cfg, false, r)));
    logs_on.push_back(io::read_episode_csv(harness::log_path(cfg, true, r)));
  }
  const auto pooled_off = sim::merge_logs(logs_off);
  const auto pooled_on = sim::merge_logs(logs_on);
  for (const auto& log : {pooled_off, pooled_on}) {
    out.any_unstable = out.any_unstable || log.unstable;
    for (const auto& row : log.rows) out.any_saturated |= row.saturated;
  }
  out.prediction = metrics::prediction_report(pooled_off, model);
  out.tracking = metrics::tracking_report(pooled_on, pooled_off);
  return out;
}

void criterion_closed_loop(const PipelineArtifacts& art) {
  bool pass = art.wall_s < 120.0 && !art.any_saturated && !art.any_unstable;
  double min_rms = 1e9, min_pred = 1e9;
  for (int axis = 0; axis < 3; ++axis) {
    min_rms = std::min(min_rms, art.tracking.rms_change_pct[axis]);
    min_pred = std::min(min_pred, art.prediction.reduction_pct[axis]);
  }
  pass = pass && min_rms >= 50.0 && min_pred >= 60.0;
  char detail[240];
  std::snprintf(detail, sizeof(detail),
                "RMS e_R reduction per axis (%.1f, %.1f, %.1f)%% (need >= 50); "
                "prediction reduction (%.1f, %.1f, %.1f)%% (need >= 60); "
                "pipeline %.1f s (limit 120); saturated=%d unstable=%d",
                art.tracking.rms_change_pct[0], art.tracking.rms_change_pct[1],
                art.tracking.rms_change_pct[2], art.prediction.reduction_pct[0],
                art.prediction.reduction_pct[1], art.prediction.reduction_pct[2],
                art.wall_s, art.any_saturated ? 1 : 0, art.any_unstable ? 1 : 0);
  report(5, "closed-loop figure-8 improvement", pass, detail);
}

// ----- criterion 6: uncertainty gating on an out-of-distribution step -----

void criterion_uncertainty_gate(const std::string& out_dir) {
  harness::ExperimentConfig cfg;
  cfg.output_dir = out_dir;
  // Pitch-only training data: planar pitching plus pitch-axis excitation.
  cfg.apply_override("train.kind=pitch_sweep");
  cfg.apply_override("train.amplitude_deg=60");
  cfg.apply_override("train.duration=20");
  cfg.apply_override("train.excitation=y:0.15:0.3, y:0.1:0.7");
  // Tilt-structured mismatch without constant offsets: constant biases are
  // learned as global constants (huge lengthscales), which leaves the model
  // confident far from the data and defeats the purpose of the gate test.
  cfg.apply_override("mismatch.bias_x=0");
  cfg.apply_override("mismatch.bias_y=0");
  cfg.apply_override("mismatch.bias_z=0");
  cfg.apply_override("mismatch.tilt_loss_gain=0.2");
  cfg.apply_override("mismatch.scale_spread=0.02");
  harness::cmd_collect(cfg);
  harness::cmd_train(cfg);
  const auto model = io::load_model(harness::model_path(cfg));

  sim::TrajectorySpec step;
  step.kind = sim::TrajectoryKind::Step;
  step.amplitude = 40.0 * M_PI / 180.0;
  step.duration = 6.0;

  auto setup = cfg.episode_setup(true, &model);
  const auto filtered = sim::run_episode(step, setup, 606);
  setup.comp_cfg.filter_enabled = false;
  const auto raw = sim::run_episode(step, setup, 606);

  const double sigma_th = model.sigma_threshold_default();
  const double a = cfg.comp.filter_a;

  // Locate the step and the high-uncertainty window behind it.
  const std::size_t step_tick = 100;  // reference switches at t = 1.0 s
  bool beta_high_at_step = false;
  bool sigma_exceeds = false;
  double peak_after_step = 0.0;
  for (std::size_t i = step_tick; i < std::min<std::size_t>(step_tick + 50, filtered.rows.size()); ++i) {
    if (filtered.rows[i].beta > 0.95) beta_high_at_step = true;
    if (filtered.rows[i].sigma > sigma_th) sigma_exceeds = true;
  }
  for (std::size_t i = step_tick; i < filtered.rows.size(); ++i) {
    peak_after_step = std::max(peak_after_step, filtered.rows[i].delta_w.norm());
  }

  // Geometric decay while the gate is closed: checked down to 5% of the
  // post-step peak, below which the (1 - beta) leak term dominates.
  bool decay_ok = true;
  double worst_ratio = 0.0;
  const double floor = std::max(1e-6, 0.05 * peak_after_step);
  for (std::size_t i = step_tick + 1; i < filtered.rows.size(); ++i) {
    const auto& prev = filtered.rows[i - 1];
    const auto& cur = filtered.rows[i];
    if (cur.beta > 0.95 && prev.beta > 0.95 && prev.delta_w.norm() > floor) {
      const double ratio = cur.delta_w.norm() / prev.delta_w.norm();
      worst_ratio = std::max(worst_ratio, ratio);
      if (ratio > a + 0.02) decay_ok = false;
    }
  }

  double peak_filtered = 0.0, peak_raw = 0.0;
  for (const auto& row : filtered.rows) peak_filtered = std::max(peak_filtered, row.delta_w.norm());
  for (const auto& row : raw.rows) peak_raw = std::max(peak_raw, row.delta_w.norm());

  const bool pass = beta_high_at_step && sigma_exceeds && decay_ok &&
                    !filtered.unstable && peak_raw >= 2.0 * peak_filtered;
  char detail[420];
  std::snprintf(detail, sizeof(detail),
                "beta>0.95 at step=%d, sigma>sigma_th(%.3f)=%d, worst decay ratio "
                "%.3f (limit %.2f), filtered stable=%d, unfiltered peak |dW| %.3f "
                "vs filtered %.3f (need >= 2x, unfiltered unstable=%d); the 2x "
                "contrast cannot occur here: the zero-mean SE posterior decays to "
                "the prior away from the data, so the unfiltered signal collapses "
                "toward zero out of distribution instead of growing",
                beta_high_at_step ? 1 : 0, sigma_th, sigma_exceeds ? 1 : 0,
                worst_ratio, a + 0.02, filtered.unstable ? 0 : 1, peak_raw,
                peak_filtered, raw.unstable ? 1 : 0);
  report(6, "uncertainty gating on 40 deg roll step", pass, detail);
}

// ----- criterion 7: controller second-order decay envelope -----

void criterion_controller_decay() {
  // Exactly as stated: 0.2 rad offset, gains (1.3, 3.5), eta = 0, and the
  // error must fall below 5% of its initial value within 5/(zeta w) s.
  sim::TrajectorySpec hover;
  hover.kind = sim::TrajectoryKind::Hover;
  hover.duration = 4.0;

  sim::EpisodeSetup setup;
  setup.mismatch = actuation::MismatchParams::ideal();
  setup.measurement_noise_std = 0.0;
  setup.gains.attitude_integral_gain = 0.0;
  setup.initial_attitude_offset = Vec3(0.2, 0.0, 0.0);

  const auto log = sim::run_episode(hover, setup, 707);
  const double zeta = setup.gains.zeta_a(0);
  const double wn = setup.gains.omega_n_a(0);
  const double deadline = 5.0 / (zeta * wn);
  const double initial = std::abs(log.rows.front().e_R(0));

  bool within = true;
  double crossing = -1.0;
  for (const auto& row : log.rows) {
    const double e = std::abs(row.e_R(0));
    if (crossing < 0.0 && e < 0.05 * initial) crossing = row.t;
    if (row.t >= deadline && e >= 0.05 * initial) within = false;
  }

  // Context: the exact overdamped solution of the imposed error dynamics.
  const double l1 = wn * (-zeta + std::sqrt(zeta * zeta - 1.0));
  const double l2 = wn * (-zeta - std::sqrt(zeta * zeta - 1.0));
  const double t_5pct_exact = std::log(l2 / (0.05 * (l2 - l1))) / (-l1);

  char detail[300];
  std::snprintf(detail, sizeof(detail),
                "|e_R| reached 5%% of 0.2 rad at t = %.3f s, required within "
                "%.3f s; the exact solution of the imposed dynamics (poles %.2f, "
                "%.2f) first reaches 5%% at t = %.3f s, so the stated deadline is "
                "unattainable for the overdamped (1.3, 3.5) gains",
                crossing, deadline, l1, l2, t_5pct_exact);
  report(7, "controller decay envelope", within, detail);
}

// ----- criterion 8: byte-identical pipeline rerun -----

void criterion_determinism(const std::string& dir1, const std::string& dir2) {
  harness::ExperimentConfig cfg1, cfg2;
  cfg1.output_dir = dir1;
  cfg2.output_dir = dir2;
  harness::cmd_collect(cfg2);
  harness::cmd_train(cfg2);
  harness::cmd_evaluate(cfg2);

  bool identical = io::read_text_file(harness::training_set_path(cfg1)) ==
                   io::read_text_file(harness::training_set_path(cfg2));
  identical = identical && io::read_text_file(harness::model_path(cfg1)) ==
                               io::read_text_file(harness::model_path(cfg2));
  int logs_equal = 0;
  for (int r = 0; r < cfg1.repeats; ++r) {
    for (bool comp : {false, true}) {
      if (io::read_text_file(harness::log_path(cfg1, comp, r)) ==
          io::read_text_file(harness::log_path(cfg2, comp, r))) {
        ++logs_equal;
      }
    }
  }
  identical = identical && logs_equal == 2 * cfg1.repeats;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "training set, model byte-identical; %d/%d episode logs byte-identical",
                logs_equal, 2 * cfg1.repeats);
  report(8, "pipeline determinism per seed", identical, detail);
}

}  // namespace

int main() {
  const fs::path base = fs::temp_directory_path() / "tilthex_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);

  criterion_gp_oracle();
  criterion_gradient_check();
  criterion_allocation();
  criterion_fixed_point();

  const auto artifacts = run_default_pipeline((base / "run1").string());
  criterion_closed_loop(artifacts);
  criterion_uncertainty_gate((base / "gate").string());
  criterion_controller_decay();
  criterion_determinism((base / "run1").string(), (base / "run2").string());

  std::printf("%d of 8 criteria passed\n", 8 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
