#include "tilthex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace tilthex::metrics {

namespace {

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

// Linear-interpolated quantile on a sorted copy (numpy default convention).
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

double rms_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double pct_reduction(double base, double improved) {
  if (base == 0.0) return 0.0;
  return 100.0 * (base - improved) / base;
}

std::string format_line(const char* fmt, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

}  // namespace

PredictionReport prediction_report(const sim::EpisodeLog& log,
                                   const gp::GpModel& model) {
  if (log.rows.empty()) {
    throw std::invalid_argument("prediction_report: empty log");
  }
  if (!model.vehicle_hash().empty() && !log.config_hash.empty() &&
      model.vehicle_hash() != log.config_hash) {
    throw std::invalid_argument(
        "prediction_report: log and model come from different vehicle configs");
  }

  std::array<std::vector<double>, 3> nominal, learned;
  for (const auto& row : log.rows) {
    const Vec6 mu = model.fitted() ? model.predict(row.w_cmd).mean : Vec6::Zero();
    for (int axis = 0; axis < 3; ++axis) {
      const double cmd = row.w_cmd(3 + axis);
      const double meas = row.m_measured(axis);
      nominal[axis].push_back(std::abs(cmd - meas));
      learned[axis].push_back(std::abs(cmd + mu(3 + axis) - meas));
    }
  }

  PredictionReport out;
  for (int axis = 0; axis < 3; ++axis) {
    out.nominal_mean[axis] = mean_of(nominal[axis]);
    out.nominal_std[axis] = std_of(nominal[axis], out.nominal_mean[axis]);
    out.learned_mean[axis] = mean_of(learned[axis]);
    out.learned_std[axis] = std_of(learned[axis], out.learned_mean[axis]);
    out.reduction_pct[axis] =
        pct_reduction(out.nominal_mean[axis], out.learned_mean[axis]);
  }
  return out;
}

TrackingReport tracking_report(const sim::EpisodeLog& log_on,
                               const sim::EpisodeLog& log_off) {
  if (log_on.rows.empty() || log_off.rows.empty()) {
    throw std::invalid_argument("tracking_report: empty log");
  }
  if (log_on.trajectory != log_off.trajectory) {
    throw std::invalid_argument("tracking_report: logs use different trajectories");
  }

  TrackingReport out;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> on, off;
    on.reserve(log_on.rows.size());
    off.reserve(log_off.rows.size());
    for (const auto& row : log_on.rows) on.push_back(std::abs(row.e_R(axis)));
    for (const auto& row : log_off.rows) off.push_back(std::abs(row.e_R(axis)));

    out.on_median[axis] = quantile(on, 0.5);
    out.off_median[axis] = quantile(off, 0.5);
    out.on_iqr[axis] = quantile(on, 0.75) - quantile(on, 0.25);
    out.off_iqr[axis] = quantile(off, 0.75) - quantile(off, 0.25);
    out.on_rms[axis] = rms_of(on);
    out.off_rms[axis] = rms_of(off);
    out.median_change_pct[axis] =
        pct_reduction(out.off_median[axis], out.on_median[axis]);
    out.rms_change_pct[axis] =
        pct_reduction(out.off_rms[axis], out.on_rms[axis]);
  }
  return out;
}

std::string to_text(const PredictionReport& r) {
  std::string s = "prediction error [N*m]      body x    body y    body z\n";
  s += format_line("  nominal mean            %8.4f  %8.4f  %8.4f\n",
                   r.nominal_mean[0], r.nominal_mean[1], r.nominal_mean[2]);
  s += format_line("  nominal std             %8.4f  %8.4f  %8.4f\n",
                   r.nominal_std[0], r.nominal_std[1], r.nominal_std[2]);
  s += format_line("  learned mean            %8.4f  %8.4f  %8.4f\n",
                   r.learned_mean[0], r.learned_mean[1], r.learned_mean[2]);
  s += format_line("  learned std             %8.4f  %8.4f  %8.4f\n",
                   r.learned_std[0], r.learned_std[1], r.learned_std[2]);
  s += format_line("  mean reduction [%%]      %8.1f  %8.1f  %8.1f\n",
                   r.reduction_pct[0], r.reduction_pct[1], r.reduction_pct[2]);
  return s;
}

std::string to_text(const TrackingReport& r) {
  std::string s = "|e_R| tracking [rad]        body x    body y    body z\n";
  s += format_line("  median off              %8.4f  %8.4f  %8.4f\n",
                   r.off_median[0], r.off_median[1], r.off_median[2]);
  s += format_line("  median on               %8.4f  %8.4f  %8.4f\n",
                   r.on_median[0], r.on_median[1], r.on_median[2]);
  s += format_line("  iqr off                 %8.4f  %8.4f  %8.4f\n",
                   r.off_iqr[0], r.off_iqr[1], r.off_iqr[2]);
  s += format_line("  iqr on                  %8.4f  %8.4f  %8.4f\n",
                   r.on_iqr[0], r.on_iqr[1], r.on_iqr[2]);
  s += format_line("  rms off                 %8.4f  %8.4f  %8.4f\n",
                   r.off_rms[0], r.off_rms[1], r.off_rms[2]);
  s += format_line("  rms on                  %8.4f  %8.4f  %8.4f\n",
                   r.on_rms[0], r.on_rms[1], r.on_rms[2]);
  s += format_line("  median change [%%]       %8.1f  %8.1f  %8.1f\n",
                   r.median_change_pct[0], r.median_change_pct[1],
                   r.median_change_pct[2]);
  s += format_line("  rms change [%%]          %8.1f  %8.1f  %8.1f\n",
                   r.rms_change_pct[0], r.rms_change_pct[1], r.rms_change_pct[2]);
  return s;
}

namespace {

std::string csv_row(const std::string& name, const std::array<double, 3>& v) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", name.c_str(), v[0],
                v[1], v[2]);
  return buf;
}

}  // namespace

std::string to_csv(const PredictionReport& r) {
  std::string s = "metric,body_x,body_y,body_z\n";
  s += csv_row("nominal_mean", r.nominal_mean);
  s += csv_row("nominal_std", r.nominal_std);
  s += csv_row("learned_mean", r.learned_mean);
  s += csv_row("learned_std", r.learned_std);
  s += csv_row("mean_reduction_pct", r.reduction_pct);
  return s;
}

std::string to_csv(const TrackingReport& r) {
  std::string s = "metric,body_x,body_y,body_z\n";
  s += csv_row("median_off", r.off_median);
  s += csv_row("median_on", r.on_median);
  s += csv_row("iqr_off", r.off_iqr);
  s += csv_row("iqr_on", r.on_iqr);
  s += csv_row("rms_off", r.off_rms);
  s += csv_row("rms_on", r.on_rms);
  s += csv_row("median_change_pct", r.median_change_pct);
  s += csv_row("rms_change_pct", r.rms_change_pct);
  return s;
}

}  // namespace tilthex::metrics
