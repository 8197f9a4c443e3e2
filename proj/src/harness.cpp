#include "tilthex/harness.hpp"

#include <filesystem>
#include <future>
#include <iostream>
#include <vector>

#include "tilthex/io.hpp"
#include "tilthex/metrics.hpp"
#include "tilthex/random.hpp"

namespace tilthex::harness {

namespace fs = std::filesystem;

namespace {

void ensure_dirs(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  fs::create_directories(fs::path(cfg.output_dir) / "logs");
  fs::create_directories(fs::path(cfg.output_dir) / "reports");
  io::write_text_file((fs::path(cfg.output_dir) / "config.ini").string(),
                      cfg.canonical());
}

gp::GpModel load_checked_model(const ExperimentConfig& cfg) {
  if (!fs::exists(model_path(cfg))) {
    throw ConfigError("no model at " + model_path(cfg) +
                      " (run 'train' first)");
  }
  gp::GpModel model;
  try {
    model = io::load_model(model_path(cfg));
  } catch (const std::exception& e) {
    throw NumericalError(std::string("cannot load model: ") + e.what());
  }
  if (model.vehicle_hash() != cfg.vehicle_hash()) {
    throw ConfigError("model was trained for vehicle config " +
                      model.vehicle_hash() + " but the current config is " +
                      cfg.vehicle_hash());
  }
  return model;
}

}  // namespace

std::string training_set_path(const ExperimentConfig& cfg) {
  return (fs::path(cfg.output_dir) / "training_set.json").string();
}

std::string model_path(const ExperimentConfig& cfg) {
  return (fs::path(cfg.output_dir) / "model.json").string();
}

std::string log_path(const ExperimentConfig& cfg, bool compensation, int repeat) {
  const std::string name = std::string("eval_") + (compensation ? "on" : "off") +
                           "_" + std::to_string(repeat) + ".csv";
  return (fs::path(cfg.output_dir) / "logs" / name).string();
}

void cmd_collect(const ExperimentConfig& cfg) {
  ensure_dirs(cfg);
  const auto setup = cfg.episode_setup(false);
  gp::TrainingSet raw;
  try {
    raw = sim::collect_training_data(cfg.train_spec, setup, mix_seed(cfg.seed, 1));
  } catch (const std::runtime_error& e) {
    throw InstabilityError(e.what());
  }
  if (cfg.subsample_k > raw.size()) {
    throw ConfigError("collect: gp.k = " + std::to_string(cfg.subsample_k) +
                      " exceeds the " + std::to_string(raw.size()) +
                      " raw samples");
  }
  const auto subsampled =
      gp::kmedoids_subsample(raw, cfg.subsample_k, mix_seed(cfg.seed, 2));
  io::save_training_set(subsampled, cfg.vehicle_hash(), cfg.seed,
                        training_set_path(cfg));
  std::cout << "collect: " << raw.size() << " raw samples -> "
            << subsampled.size() << " medoids -> " << training_set_path(cfg)
            << "\n";
}

void cmd_train(const ExperimentConfig& cfg) {
  ensure_dirs(cfg);
  std::string set_hash;
  gp::TrainingSet train;
  try {
    train = io::load_training_set(training_set_path(cfg), &set_hash);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("train: cannot load training set: ") + e.what());
  }
  if (set_hash != cfg.vehicle_hash()) {
    throw ConfigError("train: training set vehicle config " + set_hash +
                      " does not match the current config " + cfg.vehicle_hash());
  }
  if (train.size() < 5) {
    throw ConfigError("train: need at least 5 training points");
  }

  gp::GpModel model;
  try {
    model = gp::GpModel::fit(train, cfg.gp_axis_indices(), cfg.fit_restarts,
                             mix_seed(cfg.seed, 3));
  } catch (const std::exception& e) {
    throw NumericalError(std::string("train: GP fit failed: ") + e.what());
  }
  model.set_vehicle_hash(cfg.vehicle_hash());
  io::save_model(model, model_path(cfg));

  std::cout << "train: fitted axes";
  for (int axis : cfg.gp_axis_indices()) {
    std::cout << " " << axis << " (lml "
              << model.diagnostics()[static_cast<std::size_t>(axis)]
                     .log_marginal_likelihood
              << ")";
  }
  std::cout << ", sigma_th default " << model.sigma_threshold_default()
            << " -> " << model_path(cfg) << "\n";
}

void cmd_evaluate(const ExperimentConfig& cfg) {
  ensure_dirs(cfg);
  const gp::GpModel model = load_checked_model(cfg);

  auto run_batch = [&](bool compensation) {
    std::vector<std::future<sim::EpisodeLog>> futures;
    futures.reserve(static_cast<std::size_t>(cfg.repeats));
    for (int r = 0; r < cfg.repeats; ++r) {
      futures.push_back(std::async(std::launch::async, [&, r, compensation]() {
        const auto setup = cfg.episode_setup(compensation, &model);
        return sim::run_episode(cfg.eval_spec, setup,
                                mix_seed(cfg.seed, (compensation ? 2000 : 1000) +
                                                        static_cast<std::uint64_t>(r)));
      }));
    }
    std::vector<sim::EpisodeLog> logs;
    logs.reserve(futures.size());
    for (auto& f : futures) logs.push_back(f.get());
    return logs;
  };

  const auto logs_off = run_batch(false);
  const auto logs_on = run_batch(true);
  bool unstable = false;
  for (int r = 0; r < cfg.repeats; ++r) {
    io::write_episode_csv(logs_off[static_cast<std::size_t>(r)], log_path(cfg, false, r));
    io::write_episode_csv(logs_on[static_cast<std::size_t>(r)], log_path(cfg, true, r));
    unstable = unstable || logs_off[static_cast<std::size_t>(r)].unstable ||
               logs_on[static_cast<std::size_t>(r)].unstable;
  }

  const auto pooled_off = sim::merge_logs(logs_off);
  const auto pooled_on = sim::merge_logs(logs_on);
  const auto prediction = metrics::prediction_report(pooled_off, model);
  const auto tracking = metrics::tracking_report(pooled_on, pooled_off);

  const fs::path reports = fs::path(cfg.output_dir) / "reports";
  io::write_text_file((reports / "prediction.csv").string(), metrics::to_csv(prediction));
  io::write_text_file((reports / "tracking.csv").string(), metrics::to_csv(tracking));
  std::cout << metrics::to_text(prediction) << "\n" << metrics::to_text(tracking);

  if (unstable) {
    throw InstabilityError("evaluate: at least one episode diverged (see logs)");
  }
}

void cmd_report(const ExperimentConfig& cfg) {
  const gp::GpModel model = load_checked_model(cfg);
  std::vector<sim::EpisodeLog> logs_off, logs_on;
  for (int r = 0; r < cfg.repeats; ++r) {
    logs_off.push_back(io::read_episode_csv(log_path(cfg, false, r)));
    logs_on.push_back(io::read_episode_csv(log_path(cfg, true, r)));
  }
  const auto prediction =
      metrics::prediction_report(sim::merge_logs(logs_off), model);
  const auto tracking =
      metrics::tracking_report(sim::merge_logs(logs_on), sim::merge_logs(logs_off));

  const fs::path reports = fs::path(cfg.output_dir) / "reports";
  fs::create_directories(reports);
  io::write_text_file((reports / "prediction.csv").string(), metrics::to_csv(prediction));
  io::write_text_file((reports / "tracking.csv").string(), metrics::to_csv(tracking));
  std::cout << metrics::to_text(prediction) << "\n" << metrics::to_text(tracking);
}

void cmd_all(const ExperimentConfig& cfg) {
  cmd_collect(cfg);
  cmd_train(cfg);
  cmd_evaluate(cfg);
}

int run_command(const std::string& command, const ExperimentConfig& cfg) {
  try {
    if (command == "collect") cmd_collect(cfg);
    else if (command == "train") cmd_train(cfg);
    else if (command == "evaluate") cmd_evaluate(cfg);
    else if (command == "report") cmd_report(cfg);
    else if (command == "all") cmd_all(cfg);
    else {
      std::cerr << "error: unknown command '" << command << "'\n";
      return kExitConfigError;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const InstabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInstability;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
  return kExitOk;
}

}  // namespace tilthex::harness
