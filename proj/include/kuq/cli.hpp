#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kuq/estimators.hpp"
#include "kuq/serialize.hpp"
#include "kuq/sysgen.hpp"

namespace kuq {

inline constexpr const char* kToolVersion = "0.1.0";

// Environment variable that overrides the built-in default seed (0). An
// explicit --seed flag or config entry still wins over the environment.
inline constexpr const char* kSeedEnvVar = "KUQ_SEED";

// Exactly one of the three noise characterization routes may be active.
struct NoiseOptions {
  std::optional<double> window_start;
  std::optional<double> window_end;
  std::optional<std::int64_t> detrend_degree;
  std::vector<double> manufacturer;  // empty = unset
};

struct GenOptions {
  SwingSystem system;
  double step = 0.01;
  double duration = 20.0;
  std::optional<double> delta0;   // default: equilibrium angle + 0.2 rad
  std::optional<double> domega0;  // default: 0
  bool derived_outputs = true;
  std::vector<double> inject_variances;  // empty = clean trajectory
};

// Zero-dynamics benchmark: pure-noise snapshots with a known ground truth,
// used to exercise the Monte Carlo validator without a trajectory.
struct SyntheticOptions {
  std::int64_t rows = 0;  // 0 = disabled
  std::vector<double> variances;
};

struct RunConfig {
  std::string command;
  std::filesystem::path input;
  std::filesystem::path output_dir = "out";
  double sample_period = 1.0;  // for CSV inputs without a time column
  EstimationMethod method = EstimationMethod::Dmd;
  DictionaryKind dictionary = DictionaryKind::Identity;
  double tol = kDefaultPinvTol;
  NoiseOptions noise;
  std::int64_t replicates = 1000;
  bool parallel = true;
  std::uint64_t seed = 0;
  GenOptions gen;
  SyntheticOptions synthetic;
  // Direct bulk-law parameters for `spectral` runs without input data.
  std::optional<double> mp_ratio;
  std::optional<double> mp_sigma2;
  std::int64_t haar_dim = 0;  // 0 = feature dimension (8 in direct mode)
  std::int64_t haar_samples = 100;
  std::filesystem::path mc_report;  // optional moment-delta source
};

// Applies settings from a JSON config file on top of the built-in defaults.
// Flag values are merged by the CLI entry point afterwards, so the
// precedence is flags > config file > environment seed > defaults.
// Returns true when the file set the seed.
bool apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Resolves the seed from the environment when neither a flag nor the
// config file set one.
void apply_env_seed(RunConfig& config, bool seed_already_set);

// Full resolved settings, embedded in every artifact this tool writes.
Json config_echo(const RunConfig& config);

// Executes one subcommand. Throws kuq::Error subtypes; the entry point
// maps them to exit codes. All outputs are computed before the first byte
// is written, so failed runs leave no partial artifacts.
int run_command(const RunConfig& config);

}  // namespace kuq
