#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kuq/cli.hpp"
#include "kuq/errors.hpp"

namespace {

// One shared flag store works because exactly one subcommand parses per
// invocation. Optionals (and empty vectors) mark flags the user did not
// pass, so config-file values survive the merge.
struct FlagValues {
  std::string config_path;
  std::optional<std::string> input;
  std::optional<std::string> output_dir;
  std::optional<double> sample_period;
  std::optional<std::string> method;
  std::optional<std::string> dictionary;
  std::optional<double> tol;
  std::optional<double> window_start;
  std::optional<double> window_end;
  std::optional<std::int64_t> detrend_degree;
  std::vector<double> manufacturer;
  std::optional<std::int64_t> replicates;
  bool no_parallel = false;
  std::optional<std::uint64_t> seed;
  // gen-data
  std::optional<double> inertia_h;
  std::optional<double> omega_ref;
  std::optional<double> p_mech;
  std::optional<double> p_max;
  std::optional<double> damping;
  std::optional<double> step;
  std::optional<double> duration;
  std::optional<double> delta0;
  std::optional<double> domega0;
  bool states_only = false;
  std::vector<double> inject;
  // mc-validate
  std::optional<std::int64_t> synthetic_rows;
  std::vector<double> synthetic_variances;
  // spectral
  std::optional<double> mp_ratio;
  std::optional<double> mp_sigma2;
  std::optional<std::int64_t> haar_dim;
  std::optional<std::int64_t> haar_samples;
  std::optional<std::string> mc_report;
};

void add_common_options(CLI::App* sub, FlagValues& v) {
  sub->add_option("--config", v.config_path,
                  "JSON config file; flags override its values");
  sub->add_option("--output-dir", v.output_dir,
                  "directory for result files (default: out)");
  sub->add_option("--seed", v.seed,
                  "RNG seed (overrides config file and " +
                      std::string(kuq::kSeedEnvVar) + ")");
}

void add_estimation_options(CLI::App* sub, FlagValues& v) {
  sub->add_option("--input", v.input, "input CSV time series");
  sub->add_option("--sample-period", v.sample_period,
                  "sample period in seconds for CSVs without a time column");
  sub->add_option("--method", v.method, "estimation method: dmd | edmd")
      ->check(CLI::IsMember({"dmd", "edmd"}));
  sub->add_option("--dictionary", v.dictionary,
                  "edmd dictionary: identity | quadratic")
      ->check(CLI::IsMember({"identity", "quadratic"}));
  sub->add_option("--tol", v.tol,
                  "relative singular-value cutoff for the pseudo-inverse");
}

void add_noise_options(CLI::App* sub, FlagValues& v) {
  sub->add_option("--window-start", v.window_start,
                  "steady-state window start time (s)");
  sub->add_option("--window-end", v.window_end,
                  "steady-state window end time (s)");
  sub->add_option("--detrend-degree", v.detrend_degree,
                  "polynomial degree for detrend-based noise estimation");
  sub->add_option("--manufacturer", v.manufacturer,
                  "comma-separated per-state noise variances")
      ->delimiter(',');
}

kuq::RunConfig build_config(const std::string& command, const FlagValues& v,
                            const CLI::App* sub) {
  kuq::RunConfig config;
  config.command = command;

  bool seed_set = false;
  if (!v.config_path.empty()) {
    seed_set = kuq::apply_config_file(config, v.config_path);
  }

  if (v.input) config.input = *v.input;
  if (v.output_dir) config.output_dir = *v.output_dir;
  if (v.sample_period) config.sample_period = *v.sample_period;
  if (v.method) {
    config.method = kuq::estimation_method_from_string(*v.method);
  }
  if (v.dictionary) {
    config.dictionary = kuq::dictionary_kind_from_string(*v.dictionary);
  }
  if (v.tol) config.tol = *v.tol;
  if (v.window_start) config.noise.window_start = *v.window_start;
  if (v.window_end) config.noise.window_end = *v.window_end;
  if (v.detrend_degree) config.noise.detrend_degree = *v.detrend_degree;
  if (!v.manufacturer.empty()) config.noise.manufacturer = v.manufacturer;
  if (v.replicates) config.replicates = *v.replicates;
  if (v.no_parallel) config.parallel = false;
  if (v.seed) {
    config.seed = *v.seed;
    seed_set = true;
  }

  if (v.inertia_h) config.gen.system.inertia_h = *v.inertia_h;
  if (v.omega_ref) config.gen.system.omega_ref = *v.omega_ref;
  if (v.p_mech) config.gen.system.p_mech = *v.p_mech;
  if (v.p_max) config.gen.system.p_max = *v.p_max;
  if (v.damping) config.gen.system.damping = *v.damping;
  if (v.step) config.gen.step = *v.step;
  if (v.duration) config.gen.duration = *v.duration;
  if (v.delta0) config.gen.delta0 = *v.delta0;
  if (v.domega0) config.gen.domega0 = *v.domega0;
  if (v.states_only) config.gen.derived_outputs = false;
  if (!v.inject.empty()) config.gen.inject_variances = v.inject;

  if (v.synthetic_rows) config.synthetic.rows = *v.synthetic_rows;
  if (!v.synthetic_variances.empty()) {
    config.synthetic.variances = v.synthetic_variances;
  }
  // An explicit flag may set a variance list that is all zeros; CLI11
  // cannot express "passed but empty", so empty means unset throughout.

  if (v.mp_ratio) config.mp_ratio = *v.mp_ratio;
  if (v.mp_sigma2) config.mp_sigma2 = *v.mp_sigma2;
  if (v.haar_dim) config.haar_dim = *v.haar_dim;
  if (v.haar_samples) config.haar_samples = *v.haar_samples;
  if (v.mc_report) config.mc_report = *v.mc_report;

  (void)sub;
  kuq::apply_env_seed(config, seed_set);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Push-forward operator estimation from sampled trajectories, with "
      "analytic and Monte Carlo measurement-uncertainty quantification"};
  app.set_version_flag("--version", kuq::kToolVersion);
  app.require_subcommand(1);

  FlagValues v;

  CLI::App* gen = app.add_subcommand(
      "gen-data", "simulate a swing trajectory and write it as CSV");
  add_common_options(gen, v);
  gen->add_option("--inertia", v.inertia_h, "inertia constant H (s)");
  gen->add_option("--omega-ref", v.omega_ref,
                  "reference angular frequency (rad/s)");
  gen->add_option("--p-mech", v.p_mech, "mechanical power (pu)");
  gen->add_option("--p-max", v.p_max, "peak electrical power (pu)");
  gen->add_option("--damping", v.damping, "damping coefficient (pu)");
  gen->add_option("--step", v.step, "integration step (s)");
  gen->add_option("--duration", v.duration, "simulated time span (s)");
  gen->add_option("--delta0", v.delta0,
                  "initial angle (rad; default equilibrium + 0.2)");
  gen->add_option("--domega0", v.domega0,
                  "initial speed deviation (rad/s; default 0)");
  gen->add_flag("--states-only", v.states_only,
                "omit the derived sin/cos observable columns");
  gen->add_option("--inject-noise", v.inject,
                  "comma-separated per-state measurement noise variances")
      ->delimiter(',');

  CLI::App* estimate = app.add_subcommand(
      "estimate", "fit the push-forward operator from a CSV time series");
  add_common_options(estimate, v);
  add_estimation_options(estimate, v);

  CLI::App* muq = app.add_subcommand(
      "muq",
      "analytic per-entry uncertainty of the estimated operator under "
      "measurement noise");
  add_common_options(muq, v);
  add_estimation_options(muq, v);
  add_noise_options(muq, v);

  CLI::App* mc = app.add_subcommand(
      "mc-validate",
      "Monte Carlo replication of the noise ensemble, compared against the "
      "analytic law");
  add_common_options(mc, v);
  add_estimation_options(mc, v);
  add_noise_options(mc, v);
  mc->add_option("--replicates", v.replicates,
                 "number of Monte Carlo replicates (default 1000)");
  mc->add_flag("--no-parallel", v.no_parallel,
               "run replicates on a single thread");
  mc->add_option("--synthetic-rows", v.synthetic_rows,
                 "pure-noise benchmark mode: snapshot count m");
  mc->add_option("--synthetic-variances", v.synthetic_variances,
                 "pure-noise benchmark mode: per-state variances")
      ->delimiter(',');

  CLI::App* spectral = app.add_subcommand(
      "spectral",
      "bulk eigenvalue law, moments, and rotation-ensemble summary");
  add_common_options(spectral, v);
  add_estimation_options(spectral, v);
  add_noise_options(spectral, v);
  spectral->add_option("--mp-ratio", v.mp_ratio,
                       "bulk-law aspect ratio (direct mode, skips input)");
  spectral->add_option("--mp-sigma2", v.mp_sigma2,
                       "bulk-law entry variance (direct mode, skips input)");
  spectral->add_option("--haar-dim", v.haar_dim,
                       "rotation dimension (default: feature dimension)");
  spectral->add_option("--haar-samples", v.haar_samples,
                       "rotation sample count (default 100)");
  spectral->add_option("--mc-report", v.mc_report,
                       "report.json from mc-validate for moment deltas");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // Usage problems map to exit code 2; --help and --version exit 0.
    return code == 0 ? 0 : 2;
  }

  CLI::App* parsed = app.get_subcommands().front();
  try {
    const kuq::RunConfig config =
        build_config(parsed->get_name(), v, parsed);
    return kuq::run_command(config);
  } catch (const kuq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
}
