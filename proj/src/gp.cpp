#include "tilthex/gp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "tilthex/optimizer.hpp"
#include "tilthex/random.hpp"

namespace tilthex::gp {

double kernel(const Vec6& p, const Vec6& q, const Hyperparameters& hyper) {
  if (!hyper.valid()) {
    throw std::invalid_argument("gp::kernel: invalid hyperparameters");
  }
  const Vec6 scaled = (p - q).cwiseQuotient(hyper.lengthscales);
  return hyper.signal_variance * std::exp(-0.5 * scaled.squaredNorm());
}

namespace {

constexpr double kJitterLadder[] = {0.0, 1e-9, 1e-8, 1e-7, 1e-6};

Eigen::MatrixXd kernel_matrix(const Eigen::Matrix<double, Eigen::Dynamic, 6>& x,
                              const Hyperparameters& hyper) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = hyper.signal_variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Vec6 scaled =
          (x.row(i) - x.row(j)).transpose().cwiseQuotient(hyper.lengthscales);
      const double v = hyper.signal_variance * std::exp(-0.5 * scaled.squaredNorm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace

AxisGp::AxisGp(Eigen::Matrix<double, Eigen::Dynamic, 6> inputs,
               Eigen::VectorXd targets, Hyperparameters hyper)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), hyper_(hyper) {
  if (inputs_.rows() < 1 || inputs_.rows() != targets_.rows()) {
    throw std::invalid_argument("AxisGp: need N >= 1 matching inputs/targets");
  }
  if (!inputs_.allFinite() || !targets_.allFinite()) {
    throw std::invalid_argument("AxisGp: non-finite training data");
  }
  if (!hyper_.valid()) {
    throw std::invalid_argument("AxisGp: invalid hyperparameters");
  }

  const Eigen::MatrixXd k = kernel_matrix(inputs_, hyper_);
  for (double jitter : kJitterLadder) {
    Eigen::MatrixXd k_sigma = k;
    k_sigma.diagonal().array() += hyper_.noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(k_sigma);
    if (llt.info() == Eigen::Success) {
      chol_lower_ = llt.matrixL();
      alpha_ = llt.solve(targets_);
      jitter_ = jitter;
      return;
    }
  }
  throw std::runtime_error("AxisGp: Cholesky failed after jitter escalation");
}

Eigen::VectorXd AxisGp::kernel_vector(const Vec6& query) const {
  const Eigen::Index n = inputs_.rows();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec6 scaled =
        (inputs_.row(i).transpose() - query).cwiseQuotient(hyper_.lengthscales);
    k(i) = hyper_.signal_variance * std::exp(-0.5 * scaled.squaredNorm());
  }
  return k;
}

double AxisGp::mean(const Vec6& query) const {
  return kernel_vector(query).dot(alpha_);
}

double AxisGp::variance(const Vec6& query) const {
  const Eigen::VectorXd k = kernel_vector(query);
  const Eigen::VectorXd v =
      chol_lower_.triangularView<Eigen::Lower>().solve(k);
  double var = hyper_.signal_variance + hyper_.noise_variance - v.squaredNorm();
  if (var < 0.0) {
    if (var < -1e-10) {
      std::cerr << "warning: negative posterior variance " << var
                << " clipped to zero\n";
    }
    var = 0.0;
  }
  return var;
}

Vec6 AxisGp::mean_gradient(const Vec6& query) const {
  // d k(q, x_i) / d q_d = k(q, x_i) (x_id - q_d) / l_d^2
  const Eigen::VectorXd k = kernel_vector(query);
  Vec6 grad = Vec6::Zero();
  const Vec6 inv_sq = hyper_.lengthscales.cwiseProduct(hyper_.lengthscales).cwiseInverse();
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    const Vec6 diff = inputs_.row(i).transpose() - query;
    grad += (alpha_(i) * k(i)) * diff.cwiseProduct(inv_sq);
  }
  return grad;
}

namespace {

// theta = (log l_1..6, log sigma_f, log sigma); bounds keep exp() sane.
// Lengthscales get a larger floor: below it the ARD kernel degenerates to a
// diagonal and starts absorbing measurement noise as signal.
constexpr double kLogLo = -18.0;
constexpr double kLogHi = 18.0;
constexpr double kLogLengthscaleLo = -9.2;  // ~1e-4 in input units

Hyperparameters unpack(const Eigen::VectorXd& theta) {
  Hyperparameters h;
  for (int d = 0; d < 6; ++d) h.lengthscales(d) = std::exp(theta(d));
  const double sf = std::exp(theta(6));
  const double sn = std::exp(theta(7));
  h.signal_variance = sf * sf;
  h.noise_variance = sn * sn;
  return h;
}

/// Negative log marginal likelihood and gradient in log-hyperparameters.
/// Returns +inf (caller's line search backs off) when out of bounds or the
/// factorization fails even with jitter.
double nll(const Eigen::Matrix<double, Eigen::Dynamic, 6>& x,
           const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
           Eigen::VectorXd& grad) {
  grad.setZero(8);
  if ((theta.array() < kLogLo).any() || (theta.array() > kLogHi).any() ||
      (theta.head<6>().array() < kLogLengthscaleLo).any() || !theta.allFinite()) {
    return std::numeric_limits<double>::infinity();
  }
  const Hyperparameters h = unpack(theta);
  const Eigen::Index n = x.rows();

  const Eigen::MatrixXd k_plain = kernel_matrix(x, h);
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool ok = false;
  for (double jitter : kJitterLadder) {
    Eigen::MatrixXd k_sigma = k_plain;
    k_sigma.diagonal().array() += h.noise_variance + jitter;
    llt.compute(k_sigma);
    if (llt.info() == Eigen::Success) {
      ok = true;
      break;
    }
  }
  if (!ok) return std::numeric_limits<double>::infinity();

  const Eigen::VectorXd alpha = llt.solve(z);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt.matrixL()(i, i));
  const double value = 0.5 * z.dot(alpha) + log_det +
                       0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
  if (!std::isfinite(value)) return std::numeric_limits<double>::infinity();

  // dnll/dtheta = -1/2 tr((alpha alpha^T - Ks^-1) dK/dtheta)
  const Eigen::MatrixXd k_inv =
      llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd a = alpha * alpha.transpose() - k_inv;
  const Eigen::MatrixXd b = a.cwiseProduct(k_plain);

  for (int d = 0; d < 6; ++d) {
    const double inv_lsq = 1.0 / (h.lengthscales(d) * h.lengthscales(d));
    double acc = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = 0; q < n; ++q) {
        const double diff = x(p, d) - x(q, d);
        acc += b(p, q) * diff * diff;
      }
    }
    grad(d) = -0.5 * acc * inv_lsq;
  }
  grad(6) = -b.sum();                       // d/d log sigma_f: dK = 2 K_plain
  grad(7) = -h.noise_variance * a.trace();  // d/d log sigma:   dK = 2 sigma^2 I
  return value;
}

}  // namespace

AxisGp fit_axis(const Eigen::Matrix<double, Eigen::Dynamic, 6>& inputs,
                const Eigen::VectorXd& targets, int restarts,
                std::uint64_t seed, FitDiagnostics* diag) {
  const Eigen::Index n = inputs.rows();
  if (n < 5) {
    throw std::invalid_argument("gp::fit_axis: need at least 5 samples");
  }
  if (restarts < 1) restarts = 1;

  // Data scales for the initial guesses.
  Vec6 input_scale;
  for (int d = 0; d < 6; ++d) {
    const double mean = inputs.col(d).mean();
    const double var = (inputs.col(d).array() - mean).square().sum() /
                       static_cast<double>(n);
    input_scale(d) = std::max(std::sqrt(var), 1e-3);
  }
  const double z_mean = targets.mean();
  const double z_std = std::max(
      std::sqrt((targets.array() - z_mean).square().sum() / static_cast<double>(n)),
      1e-4);

  Rng rng(seed);
  opt::Options opt_opts;
  opt_opts.max_iterations = 200;
  opt_opts.gradient_tolerance = 1e-7;

  Eigen::VectorXd best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  int best_restart = -1;
  int failed = 0;

  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd theta(8);
    if (r == 0) {
      for (int d = 0; d < 6; ++d) theta(d) = std::log(input_scale(d));
      theta(6) = std::log(z_std);
      theta(7) = std::log(0.1 * z_std);
    } else {
      // log-uniform over [1e-2, 1e2] times the data scale
      for (int d = 0; d < 6; ++d) {
        theta(d) = std::log(input_scale(d)) + rng.uniform(-2.0, 2.0) * std::log(10.0);
      }
      theta(6) = std::log(z_std) + rng.uniform(-2.0, 2.0) * std::log(10.0);
      theta(7) = std::log(z_std) + rng.uniform(-2.0, 0.0) * std::log(10.0);
    }
    for (int d = 0; d < 6; ++d) {
      theta(d) = std::max(theta(d), kLogLengthscaleLo + 0.1);
    }

    Eigen::VectorXd probe_grad;
    if (!std::isfinite(nll(inputs, targets, theta, probe_grad))) {
      std::cerr << "warning: gp restart " << r << " skipped (factorization failed)\n";
      ++failed;
      continue;
    }
    const auto res = opt::minimize(
        [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
          return nll(inputs, targets, t, g);
        },
        theta, opt_opts);
    if (std::isfinite(res.value) && res.value < best_value) {
      best_value = res.value;
      best_theta = res.x;
      best_restart = r;
    }
  }

  if (best_restart < 0) {
    throw std::runtime_error("gp::fit_axis: all restarts failed");
  }
  if (diag != nullptr) {
    diag->log_marginal_likelihood = -best_value;
    diag->best_restart = best_restart;
    diag->restarts_failed = failed;
  }
  return AxisGp(inputs, targets, unpack(best_theta));
}

GpModel GpModel::fit(const TrainingSet& train, const std::vector<int>& axes,
                     int restarts, std::uint64_t seed) {
  if (train.size() < 5) {
    throw std::invalid_argument("GpModel::fit: need at least 5 samples");
  }
  GpModel model;
  model.seed_ = seed;
  model.provenance_ = train.episode;
  for (int axis : axes) {
    if (axis < 0 || axis > 5) {
      throw std::invalid_argument("GpModel::fit: axis index out of range");
    }
    FitDiagnostics diag;
    model.axes_[axis].emplace(fit_axis(train.inputs, train.targets.col(axis),
                                       restarts, mix_seed(seed, 100 + axis),
                                       &diag));
    model.diag_[axis] = diag;
  }

  // Scale-aware default for the uncertainty gate.
  std::vector<double> worst_std(train.size());
  for (Eigen::Index i = 0; i < train.size(); ++i) {
    double worst = 0.0;
    for (int axis = 0; axis < 6; ++axis) {
      if (!model.axes_[axis]) continue;
      worst = std::max(worst,
                       std::sqrt(model.axes_[axis]->variance(
                           train.inputs.row(i).transpose())));
    }
    worst_std[static_cast<std::size_t>(i)] = worst;
  }
  std::sort(worst_std.begin(), worst_std.end());
  const double median = worst_std.empty()
                            ? 0.0
                            : worst_std[worst_std.size() / 2];
  model.sigma_threshold_default_ = 1.5 * median;
  return model;
}

GpModel GpModel::from_parts(std::array<std::optional<AxisGp>, 6> axes,
                            double sigma_threshold_default, std::uint64_t seed,
                            std::string vehicle_hash, std::string provenance) {
  GpModel model;
  model.axes_ = std::move(axes);
  model.sigma_threshold_default_ = sigma_threshold_default;
  model.seed_ = seed;
  model.vehicle_hash_ = std::move(vehicle_hash);
  model.provenance_ = std::move(provenance);
  return model;
}

bool GpModel::fitted() const {
  return std::any_of(axes_.begin(), axes_.end(),
                     [](const auto& a) { return a.has_value(); });
}

Prediction GpModel::predict(const Vec6& query) const {
  if (!fitted()) {
    throw std::runtime_error("GpModel::predict: model has no trained axes");
  }
  Prediction out;
  for (int axis = 0; axis < 6; ++axis) {
    if (!axes_[axis]) continue;
    out.mean(axis) = axes_[axis]->mean(query);
    out.std(axis) = std::sqrt(axes_[axis]->variance(query));
  }
  return out;
}

Mat6 GpModel::mean_jacobian(const Vec6& query) const {
  if (!fitted()) {
    throw std::runtime_error("GpModel::mean_jacobian: model has no trained axes");
  }
  Mat6 jac = Mat6::Zero();
  for (int axis = 0; axis < 6; ++axis) {
    if (!axes_[axis]) continue;
    jac.row(axis) = axes_[axis]->mean_gradient(query).transpose();
  }
  return jac;
}

namespace {

double sq_dist(const Eigen::Matrix<double, Eigen::Dynamic, 6>& x,
               Eigen::Index i, Eigen::Index j) {
  return (x.row(i) - x.row(j)).squaredNorm();
}

}  // namespace

TrainingSet kmedoids_subsample(const TrainingSet& points, int k,
                               std::uint64_t seed) {
  const Eigen::Index n_raw = points.size();
  if (k <= 0 || k > n_raw) {
    throw std::invalid_argument("gp::kmedoids_subsample: need 0 < k <= N");
  }
  if (k == n_raw) return points;

  // Collapse exact duplicate inputs (keep first occurrence) so the result
  // cannot contain duplicate rows and the kernel matrix stays well posed.
  std::vector<Eigen::Index> unique_rows;
  unique_rows.reserve(static_cast<std::size_t>(n_raw));
  for (Eigen::Index i = 0; i < n_raw; ++i) {
    bool duplicate = false;
    for (Eigen::Index u : unique_rows) {
      if ((points.inputs.row(i) - points.inputs.row(u)).cwiseAbs().maxCoeff() == 0.0) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) unique_rows.push_back(i);
  }

  auto take_rows = [&points](const std::vector<Eigen::Index>& rows) {
    TrainingSet out;
    out.inputs.resize(static_cast<Eigen::Index>(rows.size()), 6);
    out.targets.resize(static_cast<Eigen::Index>(rows.size()), 6);
    out.episode = points.episode;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.inputs.row(static_cast<Eigen::Index>(r)) = points.inputs.row(rows[r]);
      out.targets.row(static_cast<Eigen::Index>(r)) = points.targets.row(rows[r]);
      if (rows[r] < static_cast<Eigen::Index>(points.times.size())) {
        out.times.push_back(points.times[static_cast<std::size_t>(rows[r])]);
      }
    }
    return out;
  };

  const Eigen::Index n = static_cast<Eigen::Index>(unique_rows.size());
  if (n <= k) {
    std::cerr << "warning: only " << n << " unique inputs for k = " << k << "\n";
    return take_rows(unique_rows);
  }

  // Sub-matrix view of the unique inputs.
  Eigen::Matrix<double, Eigen::Dynamic, 6> x(n, 6);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = points.inputs.row(unique_rows[static_cast<std::size_t>(i)]);

  // Seeded init: k distinct indices by partial Fisher-Yates.
  Rng rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(
                           rng.integer(static_cast<std::uint64_t>(n - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<Eigen::Index> medoids(order.begin(), order.begin() + k);
  std::vector<char> is_medoid(static_cast<std::size_t>(n), 0);
  for (Eigen::Index m : medoids) is_medoid[static_cast<std::size_t>(m)] = 1;

  std::vector<double> d1(static_cast<std::size_t>(n)), d2(static_cast<std::size_t>(n));
  std::vector<int> n1(static_cast<std::size_t>(n));
  auto assign = [&]() {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      double second = std::numeric_limits<double>::infinity();
      int best_m = -1;
      for (int m = 0; m < k; ++m) {
        const double d = sq_dist(x, i, medoids[static_cast<std::size_t>(m)]);
        if (d < best) {
          second = best;
          best = d;
          best_m = m;
        } else if (d < second) {
          second = d;
        }
      }
      d1[static_cast<std::size_t>(i)] = best;
      d2[static_cast<std::size_t>(i)] = second;
      n1[static_cast<std::size_t>(i)] = best_m;
    }
  };
  assign();

  // FastPAM-style swap phase: one pass per candidate evaluates the swap
  // gain against every medoid simultaneously; steepest improving swap per
  // sweep, until no swap improves.
  std::vector<double> removal_gain(static_cast<std::size_t>(k));
  for (int sweep = 0; sweep < 500; ++sweep) {
    double best_delta = -1e-12;
    Eigen::Index best_c = -1;
    int best_m = -1;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (is_medoid[static_cast<std::size_t>(c)]) continue;
      double shared = 0.0;
      std::fill(removal_gain.begin(), removal_gain.end(), 0.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double dic = sq_dist(x, i, c);
        const double gain_keep = std::min(dic - d1[static_cast<std::size_t>(i)], 0.0);
        shared += gain_keep;
        removal_gain[static_cast<std::size_t>(n1[static_cast<std::size_t>(i)])] +=
            std::min(dic, d2[static_cast<std::size_t>(i)]) -
            d1[static_cast<std::size_t>(i)] - gain_keep;
      }
      for (int m = 0; m < k; ++m) {
        const double delta = shared + removal_gain[static_cast<std::size_t>(m)];
        if (delta < best_delta) {
          best_delta = delta;
          best_c = c;
          best_m = m;
        }
      }
    }
    if (best_c < 0) break;
    is_medoid[static_cast<std::size_t>(medoids[static_cast<std::size_t>(best_m)])] = 0;
    medoids[static_cast<std::size_t>(best_m)] = best_c;
    is_medoid[static_cast<std::size_t>(best_c)] = 1;
    assign();
  }

  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index m : medoids) rows.push_back(unique_rows[static_cast<std::size_t>(m)]);
  std::sort(rows.begin(), rows.end());
  return take_rows(rows);
}

}  // namespace tilthex::gp
