#ifndef DISPERSIM_CONFIG_HPP
#define DISPERSIM_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dispersim/model.hpp"
#include "dispersim/spectral.hpp"

namespace dispersim {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InitialData {
  enum class Kind { packet, bound_state, file };
  Kind kind = Kind::packet;
  GaussianPacket packet;
  bool prepare_scattering = true;
  int channel = 0;  // bound_state source
  int index = 0;
  std::filesystem::path path;  // file source
};

struct CheckSpec {
  std::string name;
  nlohmann::json params;
};

struct ExperimentConfig {
  int dim = 1;
  int points = 64;
  double box_length = 40.0;

  bool matrix = false;
  std::vector<PotentialSpec> wells;
  std::vector<MatrixPotentialSpec> channels;

  InitialData initial;

  double t0 = 0.0;
  double t1 = 10.0;
  double dt = 1e-3;
  int stride = 100;

  std::vector<CheckSpec> checks;
  bool save_snapshots = false;
  unsigned seed = 1;

  nlohmann::json raw;  // original document, hashed into the manifest
};

/// Parse and validate a config document. Throws SchemaError on any
/// structural problem; velocity snapping is recorded in `adjustments`.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              std::vector<std::string>* adjustments = nullptr);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::vector<std::string>* adjustments = nullptr);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int threads = 0;  // 0: leave as-is; DISPERSIM_THREADS overrides
  bool dry_run = false;
};

/// Exit codes: 0 ok, 1 check hard-failure, 2 schema violation,
/// 3 propagation instability.
int run_experiment(const std::filesystem::path& config_path,
                   const RunOptions& opts);

}  // namespace dispersim

#endif
