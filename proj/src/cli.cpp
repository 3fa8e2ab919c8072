#include "kuq/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <initializer_list>
#include <optional>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "kuq/montecarlo.hpp"
#include "kuq/spectral.hpp"

namespace kuq {

namespace {

enum class NoiseRoute { Window, Detrend, Manufacturer };

NoiseRoute active_noise_route(const NoiseOptions& options) {
  int count = 0;
  NoiseRoute route = NoiseRoute::Manufacturer;
  if (options.window_start.has_value() || options.window_end.has_value()) {
    ++count;
    route = NoiseRoute::Window;
  }
  if (options.detrend_degree.has_value()) {
    ++count;
    route = NoiseRoute::Detrend;
  }
  if (!options.manufacturer.empty()) {
    ++count;
    route = NoiseRoute::Manufacturer;
  }
  if (count == 0) {
    throw ConfigError(
        "no noise source given; use --window-start/--window-end, "
        "--detrend-degree, or --manufacturer");
  }
  if (count > 1) {
    throw ConfigError("multiple noise sources given; pick exactly one");
  }
  if (route == NoiseRoute::Window &&
      !(options.window_start.has_value() && options.window_end.has_value())) {
    throw ConfigError(
        "steady-window noise needs both --window-start and --window-end");
  }
  return route;
}

NoiseModel resolve_noise(const RunConfig& config, const TimeSeries& series) {
  switch (active_noise_route(config.noise)) {
    case NoiseRoute::Window:
      return variance_steady_window(series, *config.noise.window_start,
                                    *config.noise.window_end);
    case NoiseRoute::Detrend:
      return variance_detrend_poly(series, *config.noise.detrend_degree);
    case NoiseRoute::Manufacturer: {
      NoiseModel model = variance_manufacturer(config.noise.manufacturer);
      if (static_cast<std::int64_t>(model.variances.size()) !=
          series.states()) {
        throw ShapeError("manufacturer noise lists " +
                         std::to_string(model.variances.size()) +
                         " variances, data has " +
                         std::to_string(series.states()) + " states");
      }
      return model;
    }
  }
  throw ConfigError("unreachable noise route");
}

Dictionary make_dictionary(const RunConfig& config, std::int64_t n) {
  if (config.method == EstimationMethod::Dmd) {
    if (config.dictionary != DictionaryKind::Identity) {
      throw ConfigError(
          "dmd always uses the identity dictionary; use --method edmd "
          "for a quadratic dictionary");
    }
    return Dictionary::identity(n);
  }
  return config.dictionary == DictionaryKind::Quadratic
             ? Dictionary::quadratic(n)
             : Dictionary::identity(n);
}

KoopmanEstimate run_estimator(const RunConfig& config,
                              const SnapshotPair& snapshots) {
  if (config.method == EstimationMethod::Dmd) {
    make_dictionary(config, snapshots.states());  // validates the combination
    return dmd_estimate(snapshots, config.tol);
  }
  return edmd_estimate(snapshots, make_dictionary(config, snapshots.states()),
                       config.tol);
}

TimeSeries load_input(const RunConfig& config) {
  if (config.input.empty()) {
    throw ConfigError("missing input file; pass --input");
  }
  CsvSchema schema;
  schema.default_sample_period = config.sample_period;
  return load_csv(config.input, schema);
}

std::filesystem::path prepare_output_dir(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" +
                  config.output_dir.string() + "': " + ec.message());
  }
  return config.output_dir;
}

// ----- config file -----

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return item.key() == k; });
    if (!known) {
      throw ConfigError("unknown config key '" + where + item.key() + "'");
    }
  }
}

template <typename T>
void maybe_get(const Json& j, const char* key, T& target,
               const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    return;
  }
  try {
    target = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + where + key + "': " + e.what());
  }
}

template <typename T>
void maybe_get_optional(const Json& j, const char* key,
                        std::optional<T>& target, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    return;
  }
  T value{};
  try {
    value = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + where + key + "': " + e.what());
  }
  target = value;
}

void maybe_get_enum(const Json& j, const char* key, EstimationMethod& target,
                    const std::string& where) {
  std::string name;
  maybe_get(j, key, name, where);
  if (!name.empty()) target = estimation_method_from_string(name);
}

void maybe_get_enum(const Json& j, const char* key, DictionaryKind& target,
                    const std::string& where) {
  std::string name;
  maybe_get(j, key, name, where);
  if (!name.empty()) target = dictionary_kind_from_string(name);
}

void maybe_get_path(const Json& j, const char* key,
                    std::filesystem::path& target, const std::string& where) {
  std::string value;
  maybe_get(j, key, value, where);
  if (!value.empty()) target = value;
}

}  // namespace

bool apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  if (!j.is_object()) {
    throw ConfigError("config file '" + path.string() +
                      "' must hold a JSON object");
  }
  check_keys(j,
             {"input", "output_dir", "sample_period", "method", "dictionary",
              "tol", "noise", "replicates", "parallel", "seed", "gen",
              "synthetic", "mp_ratio", "mp_sigma2", "haar_dim",
              "haar_samples", "mc_report"},
             "");

  maybe_get_path(j, "input", config.input, "");
  maybe_get_path(j, "output_dir", config.output_dir, "");
  maybe_get(j, "sample_period", config.sample_period, "");
  maybe_get_enum(j, "method", config.method, "");
  maybe_get_enum(j, "dictionary", config.dictionary, "");
  maybe_get(j, "tol", config.tol, "");
  maybe_get(j, "replicates", config.replicates, "");
  maybe_get(j, "parallel", config.parallel, "");

  bool seed_set = false;
  if (j.contains("seed") && !j["seed"].is_null()) {
    maybe_get(j, "seed", config.seed, "");
    seed_set = true;
  }

  if (j.contains("noise") && !j["noise"].is_null()) {
    const Json& n = j["noise"];
    check_keys(n,
               {"window_start", "window_end", "detrend_degree",
                "manufacturer"},
               "noise.");
    maybe_get_optional(n, "window_start", config.noise.window_start, "noise.");
    maybe_get_optional(n, "window_end", config.noise.window_end, "noise.");
    maybe_get_optional(n, "detrend_degree", config.noise.detrend_degree,
                       "noise.");
    maybe_get(n, "manufacturer", config.noise.manufacturer, "noise.");
  }

  if (j.contains("gen") && !j["gen"].is_null()) {
    const Json& g = j["gen"];
    check_keys(g,
               {"inertia_h", "omega_ref", "p_mech", "p_max", "damping",
                "step", "duration", "delta0", "domega0", "derived_outputs",
                "inject_variances"},
               "gen.");
    maybe_get(g, "inertia_h", config.gen.system.inertia_h, "gen.");
    maybe_get(g, "omega_ref", config.gen.system.omega_ref, "gen.");
    maybe_get(g, "p_mech", config.gen.system.p_mech, "gen.");
    maybe_get(g, "p_max", config.gen.system.p_max, "gen.");
    maybe_get(g, "damping", config.gen.system.damping, "gen.");
    maybe_get(g, "step", config.gen.step, "gen.");
    maybe_get(g, "duration", config.gen.duration, "gen.");
    maybe_get_optional(g, "delta0", config.gen.delta0, "gen.");
    maybe_get_optional(g, "domega0", config.gen.domega0, "gen.");
    maybe_get(g, "derived_outputs", config.gen.derived_outputs, "gen.");
    maybe_get(g, "inject_variances", config.gen.inject_variances, "gen.");
  }

  if (j.contains("synthetic") && !j["synthetic"].is_null()) {
    const Json& s = j["synthetic"];
    check_keys(s, {"rows", "variances"}, "synthetic.");
    maybe_get(s, "rows", config.synthetic.rows, "synthetic.");
    maybe_get(s, "variances", config.synthetic.variances, "synthetic.");
  }

  maybe_get_optional(j, "mp_ratio", config.mp_ratio, "");
  maybe_get_optional(j, "mp_sigma2", config.mp_sigma2, "");
  maybe_get(j, "haar_dim", config.haar_dim, "");
  maybe_get(j, "haar_samples", config.haar_samples, "");
  maybe_get_path(j, "mc_report", config.mc_report, "");
  return seed_set;
}

void apply_env_seed(RunConfig& config, bool seed_already_set) {
  if (seed_already_set) {
    return;
  }
  const char* raw = std::getenv(kSeedEnvVar);
  if (raw == nullptr || *raw == '\0') {
    return;
  }
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') {
    throw ConfigError(std::string(kSeedEnvVar) + " is not an integer: '" +
                      raw + "'");
  }
  config.seed = static_cast<std::uint64_t>(value);
}

Json config_echo(const RunConfig& config) {
  Json j;
  j["command"] = config.command;
  j["input"] = config.input.string();
  j["output_dir"] = config.output_dir.string();
  j["sample_period"] = config.sample_period;
  j["method"] = to_string(config.method);
  j["dictionary"] = to_string(config.dictionary);
  j["tol"] = config.tol;

  Json noise;
  noise["window_start"] = config.noise.window_start
                              ? Json(*config.noise.window_start)
                              : Json(nullptr);
  noise["window_end"] =
      config.noise.window_end ? Json(*config.noise.window_end) : Json(nullptr);
  noise["detrend_degree"] = config.noise.detrend_degree
                                ? Json(*config.noise.detrend_degree)
                                : Json(nullptr);
  noise["manufacturer"] = config.noise.manufacturer;
  j["noise"] = noise;

  j["replicates"] = config.replicates;
  j["parallel"] = config.parallel;
  j["seed"] = config.seed;

  Json gen;
  gen["inertia_h"] = config.gen.system.inertia_h;
  gen["omega_ref"] = config.gen.system.omega_ref;
  gen["p_mech"] = config.gen.system.p_mech;
  gen["p_max"] = config.gen.system.p_max;
  gen["damping"] = config.gen.system.damping;
  gen["step"] = config.gen.step;
  gen["duration"] = config.gen.duration;
  gen["delta0"] = config.gen.delta0 ? Json(*config.gen.delta0) : Json(nullptr);
  gen["domega0"] =
      config.gen.domega0 ? Json(*config.gen.domega0) : Json(nullptr);
  gen["derived_outputs"] = config.gen.derived_outputs;
  gen["inject_variances"] = config.gen.inject_variances;
  j["gen"] = gen;

  Json synthetic;
  synthetic["rows"] = config.synthetic.rows;
  synthetic["variances"] = config.synthetic.variances;
  j["synthetic"] = synthetic;

  j["mp_ratio"] = config.mp_ratio ? Json(*config.mp_ratio) : Json(nullptr);
  j["mp_sigma2"] = config.mp_sigma2 ? Json(*config.mp_sigma2) : Json(nullptr);
  j["haar_dim"] = config.haar_dim;
  j["haar_samples"] = config.haar_samples;
  j["mc_report"] = config.mc_report.string();
  return j;
}

namespace {

int run_gen_data(const RunConfig& config) {
  SimConfig sim;
  sim.step = config.gen.step;
  sim.duration = config.gen.duration;
  const double equilibrium = config.gen.system.equilibrium_angle();
  sim.initial_state = {config.gen.delta0.value_or(equilibrium + 0.2),
                       config.gen.domega0.value_or(0.0)};

  TimeSeries trajectory =
      swing_trajectory(config.gen.system, sim, config.gen.derived_outputs);
  if (!config.gen.inject_variances.empty()) {
    NoiseModel noise;
    noise.provenance = NoiseProvenance::Manufacturer;
    noise.variances = config.gen.inject_variances;
    trajectory = add_measurement_noise(trajectory, noise,
                                       RngHandle{config.seed, 1});
  }

  Json meta;
  meta["version"] = kToolVersion;
  meta["config"] = config_echo(config);
  meta["rows"] = trajectory.samples();
  meta["state_names"] = trajectory.state_names;

  const auto dir = prepare_output_dir(config);
  write_csv(trajectory, dir / "trajectory.csv");
  write_json_file(meta, dir / "run_config.json");
  return 0;
}

int run_estimate(const RunConfig& config) {
  const TimeSeries series = load_input(config);
  const SnapshotPair snapshots = build_snapshots(series);
  const KoopmanEstimate estimate = run_estimator(config, snapshots);

  const Dictionary dict = make_dictionary(config, snapshots.states());
  const Matrix g = lift(dict, snapshots.x_obs);
  const Matrix a = lift(dict, snapshots.y_obs);
  const Matrix residual = g * estimate.k_obs - a;

  Json out;
  out["version"] = kToolVersion;
  out["config"] = config_echo(config);
  out["estimate"] = to_json(estimate);
  out["residual_fro"] = residual.norm();
  out["residual_max"] =
      residual.size() > 0 ? residual.cwiseAbs().maxCoeff() : 0.0;

  const auto dir = prepare_output_dir(config);
  write_json_file(out, dir / "estimate.json");
  return 0;
}

int run_muq(const RunConfig& config) {
  const TimeSeries series = load_input(config);
  const SnapshotPair snapshots = build_snapshots(series);
  const KoopmanEstimate estimate = run_estimator(config, snapshots);
  const NoiseModel noise = resolve_noise(config, series);
  const NoiseModel lifted =
      lift_noise(make_dictionary(config, snapshots.states()), noise);
  const VarianceMatrix vm = analytic_variance(estimate, lifted);

  Json out;
  out["version"] = kToolVersion;
  out["config"] = config_echo(config);
  out["estimate"] = to_json(estimate);
  out["noise_model"] = to_json(noise);
  out["lifted_noise_model"] = to_json(lifted);
  out["variance_matrix"] = to_json(vm);

  Json dists = Json::array();
  for (Eigen::Index i = 0; i < vm.p; ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < vm.p; ++j) {
      const NormalParams params = element_distribution(vm, i, j);
      Json cell;
      cell["mean"] = params.mean;
      cell["variance"] = params.variance;
      row.push_back(cell);
    }
    dists.push_back(row);
  }
  out["element_distributions"] = dists;

  const auto dir = prepare_output_dir(config);
  write_json_file(out, dir / "muq.json");
  return 0;
}

int run_mc_validate(const RunConfig& config) {
  const bool synthetic = config.synthetic.rows > 0;
  SnapshotPair snapshots;
  NoiseModel noise;
  if (synthetic) {
    if (config.synthetic.variances.empty()) {
      throw ConfigError("synthetic mode needs --synthetic-variances");
    }
    for (double v : config.synthetic.variances) {
      if (v < 0.0) {
        throw InvalidParameter(
            "synthetic variances must be nonnegative, got " +
            std::to_string(v));
      }
    }
    const auto n =
        static_cast<Eigen::Index>(config.synthetic.variances.size());
    snapshots.x_obs = Matrix::Zero(config.synthetic.rows, n);
    snapshots.y_obs = Matrix::Zero(config.synthetic.rows, n);
    noise.provenance = NoiseProvenance::Manufacturer;
    noise.variances = config.synthetic.variances;
  } else {
    const TimeSeries series = load_input(config);
    snapshots = build_snapshots(series);
    noise = resolve_noise(config, series);
  }

  const KoopmanEstimate estimate = run_estimator(config, snapshots);

  MCConfig mc_config;
  mc_config.replicates = config.replicates;
  mc_config.rng = RngHandle{config.seed, 2};
  mc_config.method = config.method;
  mc_config.dictionary = make_dictionary(config, snapshots.states());
  mc_config.parallel = config.parallel;
  mc_config.tol = config.tol;
  const MCResult mc = mc_variance(snapshots, noise, mc_config);

  std::optional<VarianceMatrix> vm;
  std::optional<SpectralUQ> uq;
  std::optional<ComparisonReport> comparison;
  try {
    const NoiseModel lifted =
        lift_noise(make_dictionary(config, snapshots.states()), noise);
    vm = analytic_variance(estimate, lifted);
    uq = make_spectral_uq(*vm);
    comparison = compare_report(mc, *vm, *uq, RngHandle{config.seed, 3});
  } catch (const DegenerateVariance&) {
    // Zero injected variance is allowed in synthetic diagnostics; the
    // analytic law is undefined there, so only the Monte Carlo side is
    // reported. The characterization routes never produce zeros, hence
    // real-data runs always carry the full comparison.
    if (!synthetic) throw;
  }

  Json out;
  out["version"] = kToolVersion;
  out["config"] = config_echo(config);
  out["seed"] = config.seed;
  out["m"] = mc.m;
  out["p"] = mc.p;
  out["replicates"] = mc.replicates;
  out["k_obs"] = matrix_to_json(mc.k_obs);
  out["r_hat"] = matrix_to_json(mc.r_hat);
  out["r_hat_mean_centered"] = matrix_to_json(mc.r_hat_mean_centered);
  out["analytic"] = vm ? to_json(*vm) : Json(nullptr);
  out["spectral"] = uq ? to_json(*uq) : Json(nullptr);
  out["comparison"] = comparison ? to_json(*comparison) : Json(nullptr);

  std::vector<double> spectrum_pool;
  spectrum_pool.reserve(mc.centered_spectra.size() *
                        static_cast<std::size_t>(mc.p));
  for (const Vector& mags : mc.centered_spectra) {
    for (Eigen::Index i = 0; i < mags.size(); ++i) {
      spectrum_pool.push_back(mags(i) * mags(i));
    }
  }

  const auto dir = prepare_output_dir(config);
  write_json_file(out, dir / "report.json");
  write_element_histograms_csv(mc, 50, dir / "element_histograms.csv");
  write_values_histogram_csv(spectrum_pool, 50,
                             dir / "mc_spectrum_histogram.csv");
  if (uq) {
    write_density_csv(uq->mp, 512, dir / "mp_density.csv");
  }
  return 0;
}

int run_spectral(const RunConfig& config) {
  std::optional<MPParams> mp;
  std::vector<double> moments;
  std::optional<VarianceMatrix> vm;
  std::int64_t dim = 0;

  if (config.mp_ratio.has_value() || config.mp_sigma2.has_value()) {
    if (!(config.mp_ratio.has_value() && config.mp_sigma2.has_value())) {
      throw ConfigError(
          "direct bulk-law mode needs both --mp-ratio and --mp-sigma2");
    }
    mp.emplace(*config.mp_ratio, *config.mp_sigma2);
    moments = eigenvalue_moments(*mp, 4);
    dim = config.haar_dim > 0 ? config.haar_dim : 8;
  } else {
    const TimeSeries series = load_input(config);
    const SnapshotPair snapshots = build_snapshots(series);
    const KoopmanEstimate estimate = run_estimator(config, snapshots);
    const NoiseModel noise = resolve_noise(config, series);
    const NoiseModel lifted =
        lift_noise(make_dictionary(config, snapshots.states()), noise);
    vm = analytic_variance(estimate, lifted);
    const SpectralUQ uq = make_spectral_uq(*vm);
    mp.emplace(uq.mp);
    moments = uq.moments;
    dim = config.haar_dim > 0 ? config.haar_dim : uq.haar_dim;
  }

  if (config.haar_samples < 1) {
    throw InvalidParameter("spectral: need at least 1 rotation sample, got " +
                           std::to_string(config.haar_samples));
  }
  const std::vector<Matrix> rotations =
      haar_sample(RngHandle{config.seed, 4}, dim,
                  static_cast<std::size_t>(config.haar_samples));
  double defect = 0.0;
  const Matrix identity = Matrix::Identity(dim, dim);
  for (const Matrix& q : rotations) {
    defect =
        std::max(defect, (q.transpose() * q - identity).cwiseAbs().maxCoeff());
  }

  std::optional<std::vector<double>> deltas;
  if (!config.mc_report.empty()) {
    const Json previous = read_json_file(config.mc_report);
    const Json* comparison = nullptr;
    if (previous.contains("comparison") && !previous["comparison"].is_null()) {
      comparison = &previous["comparison"];
    } else if (previous.contains("mc_moments")) {
      comparison = &previous;
    }
    if (comparison == nullptr || !comparison->contains("mc_moments")) {
      throw ParseError("mc report '" + config.mc_report.string() +
                       "' lacks mc_moments");
    }
    std::vector<double> mc_moments;
    try {
      mc_moments = (*comparison)["mc_moments"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("mc report mc_moments: " + std::string(e.what()));
    }
    const std::size_t orders = std::min(moments.size(), mc_moments.size());
    deltas.emplace(orders);
    for (std::size_t k = 0; k < orders; ++k) {
      (*deltas)[k] = moments[k] - mc_moments[k];
    }
  }

  Json out;
  out["version"] = kToolVersion;
  out["config"] = config_echo(config);
  out["mp"] = to_json(*mp);
  out["moments"] = moments;
  Json haar;
  haar["dim"] = dim;
  haar["samples"] = config.haar_samples;
  haar["max_orthogonality_defect"] = defect;
  out["haar"] = haar;
  out["moment_deltas"] = deltas ? Json(*deltas) : Json(nullptr);
  out["variance_matrix"] = vm ? to_json(*vm) : Json(nullptr);

  const auto dir = prepare_output_dir(config);
  write_json_file(out, dir / "spectral.json");
  write_density_csv(*mp, 512, dir / "mp_density.csv");
  return 0;
}

}  // namespace

int run_command(const RunConfig& config) {
  if (config.command == "gen-data") return run_gen_data(config);
  if (config.command == "estimate") return run_estimate(config);
  if (config.command == "muq") return run_muq(config);
  if (config.command == "mc-validate") return run_mc_validate(config);
  if (config.command == "spectral") return run_spectral(config);
  throw ConfigError("unknown command '" + config.command + "'");
}

}  // namespace kuq
