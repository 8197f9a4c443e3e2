#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tilthex/types.hpp"

namespace tilthex::gp {

/// Squared-exponential ARD kernel hyperparameters for one output axis.
/// All entries strictly positive.
struct Hyperparameters {
  double signal_variance = 1.0;        // sigma_f^2
  Vec6 lengthscales = Vec6::Ones();    // per input dimension
  double noise_variance = 1e-2;        // sigma^2

  bool valid() const {
    return signal_variance > 0.0 && noise_variance > 0.0 &&
           (lengthscales.array() > 0.0).all() &&
           std::isfinite(signal_variance) && std::isfinite(noise_variance) &&
           lengthscales.allFinite();
  }
};

/// k(p, q) = sigma_f^2 exp(-1/2 sum_d (p_d - q_d)^2 / l_d^2)
double kernel(const Vec6& p, const Vec6& q, const Hyperparameters& hyper);

/// Wrench-command inputs with per-axis mismatch observations. Targets are
/// stored for all six wrench axes; which axes get trained is the caller's
/// choice.
struct TrainingSet {
  Eigen::Matrix<double, Eigen::Dynamic, 6> inputs;
  Eigen::Matrix<double, Eigen::Dynamic, 6> targets;
  std::vector<double> times;  // tick timestamps, provenance
  std::string episode;        // provenance tag

  Eigen::Index size() const { return inputs.rows(); }
};

struct FitDiagnostics {
  double log_marginal_likelihood = 0.0;
  int best_restart = -1;
  int restarts_failed = 0;
};

/// One conditioned single-output GP with zero prior mean: caches the
/// Cholesky factor of (K + sigma^2 I) and alpha = (K + sigma^2 I)^-1 z.
/// Construction runs the jitter ladder (1e-9 .. 1e-6) and throws
/// std::runtime_error if the factorization never succeeds.
class AxisGp {
 public:
  AxisGp(Eigen::Matrix<double, Eigen::Dynamic, 6> inputs, Eigen::VectorXd targets,
         Hyperparameters hyper);

  double mean(const Vec6& query) const;
  /// Predictive variance including the noise term:
  /// k(q,q) + sigma^2 - k(q,X) (K + sigma^2 I)^-1 k(X,q), clipped at zero.
  double variance(const Vec6& query) const;
  /// Analytic gradient of the posterior mean w.r.t. the query.
  Vec6 mean_gradient(const Vec6& query) const;

  const Eigen::Matrix<double, Eigen::Dynamic, 6>& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  const Hyperparameters& hyper() const { return hyper_; }
  double jitter_used() const { return jitter_; }

 private:
  Eigen::VectorXd kernel_vector(const Vec6& query) const;

  Eigen::Matrix<double, Eigen::Dynamic, 6> inputs_;
  Eigen::VectorXd targets_;
  Hyperparameters hyper_;
  Eigen::MatrixXd chol_lower_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// Maximum-likelihood hyperparameter fit over log-parameters with random
/// restarts (restart 0 starts at the data scales). Deterministic per seed;
/// ties between restarts resolve to the lowest restart index.
AxisGp fit_axis(const Eigen::Matrix<double, Eigen::Dynamic, 6>& inputs,
                const Eigen::VectorXd& targets, int restarts,
                std::uint64_t seed, FitDiagnostics* diag = nullptr);

struct Prediction {
  Vec6 mean = Vec6::Zero();
  Vec6 std = Vec6::Zero();
};

/// Per-axis mismatch model: up to six independent GPs over the 6-d wrench
/// command. Untrained axes are pinned to zero mean and zero uncertainty.
class GpModel {
 public:
  GpModel() = default;

  /// Trains the requested axes (indices into the wrench vector; 3,4,5 are
  /// the torque axes). Requires at least 5 samples.
  static GpModel fit(const TrainingSet& train, const std::vector<int>& axes,
                     int restarts, std::uint64_t seed);

  /// Assembles a model from per-axis pieces (deserialization path; the
  /// AxisGp constructor re-runs and thereby verifies the Cholesky).
  static GpModel from_parts(std::array<std::optional<AxisGp>, 6> axes,
                            double sigma_threshold_default, std::uint64_t seed,
                            std::string vehicle_hash, std::string provenance);

  bool fitted() const;
  bool axis_trained(int axis) const { return axes_.at(axis).has_value(); }
  const AxisGp& axis(int i) const { return axes_.at(i).value(); }
  const std::array<FitDiagnostics, 6>& diagnostics() const { return diag_; }

  Prediction predict(const Vec6& query) const;
  /// Jacobian of the posterior mean vector: row l holds d mu_l / d query.
  Mat6 mean_jacobian(const Vec6& query) const;

  /// 1.5 x the median over training inputs of the worst-axis posterior std;
  /// the scale-aware default for the compensator's uncertainty gate.
  double sigma_threshold_default() const { return sigma_threshold_default_; }

  std::uint64_t seed() const { return seed_; }
  const std::string& vehicle_hash() const { return vehicle_hash_; }
  const std::string& provenance() const { return provenance_; }
  void set_vehicle_hash(std::string h) { vehicle_hash_ = std::move(h); }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

 private:
  std::array<std::optional<AxisGp>, 6> axes_;
  std::array<FitDiagnostics, 6> diag_{};
  double sigma_threshold_default_ = 0.0;
  std::uint64_t seed_ = 0;
  std::string vehicle_hash_;
  std::string provenance_;
};

/// PAM-style k-medoids on the input vectors under squared Euclidean
/// distance. Exact duplicate inputs are collapsed before clustering so the
/// result never contains duplicate rows. Returns the medoid rows (actual
/// dataset members) in their original order; deterministic per seed.
TrainingSet kmedoids_subsample(const TrainingSet& points, int k,
                               std::uint64_t seed);

}  // namespace tilthex::gp
