// Command-line front end: filter synthesis, certificate verification,
// time-domain simulation, and the H-infinity vs Kalman comparison batch.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hifi/artifact.hpp"
#include "hifi/config.hpp"
#include "hifi/errors.hpp"
#include "hifi/lmi.hpp"
#include "hifi/model.hpp"
#include "hifi/simulator.hpp"
#include "hifi/solver.hpp"
#include "hifi/svg_plot.hpp"
#include "hifi/synthesis.hpp"
#include "hifi/trace_io.hpp"

namespace {

using namespace hifi;

struct SynthArgs {
  std::string config_path;
  std::string output = "gains.json";
  double gamma = 0.0;
  double tau_max = 0.0;
  bool has_gamma = false;
  bool has_tau_max = false;
  bool min_gamma = false;
};

struct VerifyArgs {
  std::string gains_path;
  double gamma = 0.0;
  double tau_max = 0.0;
  bool has_gamma = false;
  bool has_tau_max = false;
};

struct SimulateArgs {
  std::string gains_path;
  std::string config_path;
  std::string output = "trace.csv";
  std::string plot;
  double delay = 0.0;
  unsigned long long seed = 0;
  bool has_delay = false;
  bool has_seed = false;
};

struct CompareArgs {
  std::string gains_path;
  std::string config_path;
  std::string output = "compare.json";
  std::vector<double> delays = {0.0, 0.2, 0.45};
  int seeds = 10;
};

int run_synth(const SynthArgs& args) {
  Config config = load_config(args.config_path);
  if (args.has_gamma) config.gamma = args.gamma;
  if (args.has_tau_max) config.tau_max = args.tau_max;

  const AugmentedDelaySystem sys = make_system(config);
  SynthesisOptions opts;
  opts.q1_min = config.q1_min;
  opts.q1_max = config.q1_max;
  opts.epsilon_override = config.epsilon;

  const SynthesisResult result =
      args.min_gamma ? minimize_gamma(sys, config.tau_max, opts)
                     : synthesize(sys, config.gamma, opts);

  const GainsArtifact artifact =
      make_artifact(result, sys, hash_file(args.config_path));
  write_artifact(args.output, artifact);

  std::printf("gamma=%.17g\n", result.gamma);
  std::printf("q1=%.17g\n", result.q1_selected);
  std::printf("margin=%.17g\n", result.margin);
  std::printf("iterations=%d\n", result.iterations);
  std::printf("wrote %s\n", args.output.c_str());
  return 0;
}

int run_verify(const VerifyArgs& args) {
  const GainsArtifact artifact = read_artifact(args.gains_path);
  const double gamma = args.has_gamma ? args.gamma : artifact.gamma;
  const double tau_max = args.has_tau_max ? args.tau_max : artifact.tau_max;

  const LmiProblem problem =
      assemble_verification_lmi(artifact.system, artifact.gains, gamma, tau_max);
  const SdpCertificate cert = solve_feasibility(problem);
  const double check = certify(problem, cert.values);

  std::printf("gamma=%.17g\n", gamma);
  std::printf("tau_max=%.17g\n", tau_max);
  std::printf("margin=%.17g\n", cert.margin);
  std::printf("certify=%.17g\n", check);
  const bool certified = cert.status == SolveStatus::kFeasible;
  std::printf("%s\n", certified ? "certified" : "not certified");
  return certified ? 0 : 2;
}

int run_simulate(const SimulateArgs& args) {
  const GainsArtifact artifact = read_artifact(args.gains_path);
  Config config = load_config(args.config_path);
  if (args.has_seed) config.sim.seed = args.seed;

  const AugmentedDelaySystem sys = make_system(config);
  const DelayProfile delay =
      args.has_delay ? DelayProfile::constant(args.delay) : config.delay;
  const RoadProfile road = demo_road();

  const SimTrace trace = simulate(sys, artifact.gains, road, delay, config.sim);
  write_trace_csv(args.output, trace);
  std::printf("wrote %s (%lld rows)\n", args.output.c_str(),
              static_cast<long long>(trace.rows()));
  if (!args.plot.empty()) {
    write_trace_svg(args.plot, trace);
    std::printf("wrote %s\n", args.plot.c_str());
  }
  return 0;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int run_compare(const CompareArgs& args) {
  if (args.seeds < 1) {
    throw std::invalid_argument("--seeds must be at least 1");
  }
  if (args.delays.empty()) {
    throw std::invalid_argument("--delays must list at least one delay");
  }

  const GainsArtifact artifact = read_artifact(args.gains_path);
  const Config config = load_config(args.config_path);
  const AugmentedDelaySystem sys = make_system(config);
  const Plant plant = make_plant(config);
  const KalmanBaseline baseline =
      kalman_baseline(plant, config.q_w, config.r_diag);
  const RoadProfile road = demo_road();

  struct RunResult {
    double hinf_x3, hinf_x4, kalman_x3, kalman_x4;
  };

  // One task per (delay, seed) pair; results land in slots keyed by the
  // pair's indices, so assembly does not depend on completion order.
  const std::size_t n_delays = args.delays.size();
  const std::size_t n_seeds = static_cast<std::size_t>(args.seeds);
  std::vector<std::vector<RunResult>> results(
      n_delays, std::vector<RunResult>(n_seeds));
  std::vector<std::future<RunResult>> futures;
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  for (std::size_t di = 0; di < n_delays; ++di) {
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const double delay = args.delays[di];
      const unsigned long long seed = config.sim.seed + si;
      futures.push_back(std::async(std::launch::async, [&, delay, seed] {
        SimConfig cfg = config.sim;
        cfg.seed = seed;
        const SimTrace ht = simulate(sys, artifact.gains, road,
                                     DelayProfile::constant(delay), cfg);
        const SimTrace kt = simulate_kalman(plant, baseline, road, cfg);
        const Metrics hm = metrics(ht);
        const Metrics km = metrics(kt);
        return RunResult{hm.rmse(2), hm.rmse(3), km.rmse(2), km.rmse(3)};
      }));
      keys.emplace_back(di, si);
    }
  }
  for (std::size_t i = 0; i < futures.size(); ++i) {
    results[keys[i].first][keys[i].second] = futures[i].get();
  }

  nlohmann::json summary;
  summary["schema_version"] = 1;
  summary["kind"] = "hifi-compare";
  summary["provenance"] = {{"config_hash", hash_file(args.config_path)},
                           {"gains_hash", hash_file(args.gains_path)},
                           {"tool_version", kToolVersion}};
  summary["seeds"] = args.seeds;
  summary["seed_start"] = config.sim.seed;
  summary["delays"] = nlohmann::json::array();

  std::printf("%-8s %14s %14s %14s %14s  %s\n", "delay", "hinf_rmse_x3",
              "hinf_rmse_x4", "kalman_rmse_x3", "kalman_rmse_x4", "winner");
  for (std::size_t di = 0; di < n_delays; ++di) {
    std::vector<double> h3, h4, k3, k4;
    for (const RunResult& r : results[di]) {
      h3.push_back(r.hinf_x3);
      h4.push_back(r.hinf_x4);
      k3.push_back(r.kalman_x3);
      k4.push_back(r.kalman_x4);
    }
    const double mh3 = median(h3), mh4 = median(h4);
    const double mk3 = median(k3), mk4 = median(k4);
    const bool wins3 = mh3 < mk3;
    const bool wins4 = mh4 < mk4;
    const bool loses3 = mk3 < mh3;
    const bool loses4 = mk4 < mh4;
    const char* winner = (wins3 && wins4)     ? "hinf"
                         : (loses3 && loses4) ? "kalman"
                                              : "mixed";
    summary["delays"].push_back(
        {{"delay", args.delays[di]},
         {"hinf", {{"median_rmse_x3", mh3}, {"median_rmse_x4", mh4}}},
         {"kalman", {{"median_rmse_x3", mk3}, {"median_rmse_x4", mk4}}},
         {"winner", winner}});
    std::printf("%-8.3f %14.6e %14.6e %14.6e %14.6e  %s\n", args.delays[di],
                mh3, mh4, mk3, mk4, winner);
  }

  std::ofstream out(args.output);
  if (!out) throw ParseError("cannot open '" + args.output + "' for writing");
  out << summary.dump(2) << '\n';
  if (!out) throw ParseError("failed while writing '" + args.output + "'");
  std::printf("wrote %s\n", args.output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Delay-aware H-infinity filter toolkit for the cloud-aided "
      "quarter-car suspension"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "Synthesize filter gains and write a gains artifact");
  synth->add_option("config", synth_args.config_path, "configuration file")
      ->required();
  auto* synth_gamma =
      synth->add_option("--gamma", synth_args.gamma, "attenuation level");
  auto* synth_tau =
      synth->add_option("--tau-max", synth_args.tau_max, "delay bound [s]");
  synth->add_flag("--min-gamma", synth_args.min_gamma,
                  "bisect for the smallest certified attenuation level");
  synth->add_option("-o,--output", synth_args.output, "artifact path")
      ->capture_default_str();

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand(
      "verify", "Re-certify a gains artifact at a requested operating point");
  verify->add_option("gains", verify_args.gains_path, "gains artifact")
      ->required();
  auto* verify_gamma =
      verify->add_option("--gamma", verify_args.gamma, "attenuation level");
  auto* verify_tau =
      verify->add_option("--tau-max", verify_args.tau_max, "delay bound [s]");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Integrate the closed estimation loop and write a trace");
  simulate->add_option("gains", sim_args.gains_path, "gains artifact")
      ->required();
  simulate->add_option("config", sim_args.config_path, "configuration file")
      ->required();
  auto* sim_delay = simulate->add_option("--delay", sim_args.delay,
                                         "constant delay override [s]");
  auto* sim_seed =
      simulate->add_option("--seed", sim_args.seed, "noise seed override");
  simulate->add_option("-o,--output", sim_args.output, "trace CSV path")
      ->capture_default_str();
  simulate->add_option("--plot", sim_args.plot, "optional SVG plot path");

  CompareArgs compare_args;
  CLI::App* compare = app.add_subcommand(
      "compare", "Median RMSE comparison against the Kalman baseline");
  compare->add_option("gains", compare_args.gains_path, "gains artifact")
      ->required();
  compare->add_option("config", compare_args.config_path, "configuration file")
      ->required();
  compare
      ->add_option("--delays", compare_args.delays,
                   "comma-separated constant delays [s]")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--seeds", compare_args.seeds, "number of seeds")
      ->capture_default_str();
  compare->add_option("-o,--output", compare_args.output, "summary JSON path")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  synth_args.has_gamma = synth_gamma->count() > 0;
  synth_args.has_tau_max = synth_tau->count() > 0;
  verify_args.has_gamma = verify_gamma->count() > 0;
  verify_args.has_tau_max = verify_tau->count() > 0;
  sim_args.has_delay = sim_delay->count() > 0;
  sim_args.has_seed = sim_seed->count() > 0;

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (verify->parsed()) return run_verify(verify_args);
    if (simulate->parsed()) return run_simulate(sim_args);
    if (compare->parsed()) return run_compare(compare_args);
    return 1;
  } catch (const SynthesisInfeasible& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    std::fprintf(stderr, "  %-14s %s\n", "q1", "best margin");
    for (const auto& [q1, margin] : e.q1_margins) {
      std::fprintf(stderr, "  %-14.6g %+.6e\n", q1, margin);
    }
    return 2;
  } catch (const CertificationFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const hifi::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
