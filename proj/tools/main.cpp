#include <iostream>
#include <string>
#include <vector>

#include "tilthex/harness.hpp"

namespace {

void print_usage() {
  std::cout <<
      "usage: tilthex <command> [options]\n"
      "\n"
      "commands:\n"
      "  collect    run the training trajectory and persist the subsampled set\n"
      "  train      fit the mismatch GPs on the persisted training set\n"
      "  evaluate   run the evaluation trajectory with and without compensation\n"
      "  report     recompute reports from persisted logs\n"
      "  all        collect + train + evaluate\n"
      "\n"
      "options:\n"
      "  --config FILE            load a config file before applying overrides\n"
      "  --out DIR                shorthand for --run.output_dir=DIR\n"
      "  --section.key=value      override any config key, e.g. --gp.k=200\n"
      "  --help                   show this message\n"
      "\n"
      "exit codes: 0 ok, 2 config error, 3 instability, 4 numerical failure\n";
}

}  // namespace

int main(int argc, char** argv) {
  using tilthex::harness::ExperimentConfig;

  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    print_usage();
    return args.empty() ? tilthex::harness::kExitConfigError : 0;
  }
  const std::string command = args[0];

  std::string config_file;
  std::vector<std::string> overrides;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg == "--help" || arg == "-h") {
      print_usage();
      return 0;
    }
    if (arg == "--config") {
      if (i + 1 >= args.size()) {
        std::cerr << "error: --config needs a file argument\n";
        return tilthex::harness::kExitConfigError;
      }
      config_file = args[++i];
      continue;
    }
    if (arg.rfind("--config=", 0) == 0) {
      config_file = arg.substr(9);
      continue;
    }
    if (arg == "--out") {
      if (i + 1 >= args.size()) {
        std::cerr << "error: --out needs a directory argument\n";
        return tilthex::harness::kExitConfigError;
      }
      overrides.push_back("run.output_dir=" + args[++i]);
      continue;
    }
    if (arg.rfind("--out=", 0) == 0) {
      overrides.push_back("run.output_dir=" + arg.substr(6));
      continue;
    }
    if (arg.rfind("--", 0) == 0 && arg.find('=') != std::string::npos) {
      overrides.push_back(arg.substr(2));
      continue;
    }
    std::cerr << "error: unrecognized argument '" << arg << "'\n";
    return tilthex::harness::kExitConfigError;
  }

  ExperimentConfig cfg;
  try {
    if (!config_file.empty()) {
      cfg = ExperimentConfig::from_file(config_file);
    }
    for (const auto& o : overrides) {
      cfg.apply_override(o);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tilthex::harness::kExitConfigError;
  }

  return tilthex::harness::run_command(command, cfg);
}
