// Command-line front end: config-driven experiment runner, synthetic data
// generator, and report emitter.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pubdp/errors.hpp"
#include "pubdp/experiment.hpp"
#include "pubdp/io.hpp"
#include "pubdp/synth.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> trials;
  std::optional<int> threads;
  bool zero_noise = false;
};

pubdp::ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw pubdp::ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw pubdp::ConfigError(std::string("config parse error: ") + e.what());
  }
  pubdp::ExperimentConfig cfg = pubdp::ExperimentConfig::from_json(j);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.out) cfg.out_path = *ov.out;
  if (ov.trials) cfg.trials = *ov.trials;
  if (ov.threads) cfg.threads = *ov.threads;
  if (ov.zero_noise) cfg.zero_noise = true;
  cfg.validate();
  return cfg;
}

int run_estimation(const std::string& config_path, const Overrides& ov, bool gmm) {
  const pubdp::ExperimentConfig cfg = load_config(config_path, ov);
  const bool is_gmm = cfg.task == "gmm_hard" || cfg.task == "gmm_easy";
  if (gmm != is_gmm)
    throw pubdp::ConfigError("task '" + cfg.task + "' does not match this subcommand");
  const auto rows = pubdp::run_experiment(cfg);
  int successes = 0;
  for (const auto& r : rows)
    if (r.success) ++successes;
  std::cout << "wrote " << cfg.out_path << ": " << successes << "/" << rows.size()
            << " trials succeeded\n";
  return 0;
}

int run_synth(const std::string& config_path, const Overrides& ov) {
  const pubdp::ExperimentConfig cfg = load_config(config_path, ov);
  pubdp::RngStream rng(cfg.seed, 0, false);
  const pubdp::MixtureParams mix = pubdp::make_separated_mixture(
      cfg.d, cfg.k, cfg.separation_multiplier, cfg.w_min, cfg.spread, rng);
  const pubdp::LabeledDataset data = pubdp::sample_mixture(mix, cfg.n, rng);
  pubdp::write_dataset_csv(cfg.out_path, data);
  pubdp::write_mixture_json(cfg.out_path + ".params.json", mix);
  std::cout << "wrote " << cfg.out_path << " (" << data.rows.rows() << " rows) and "
            << cfg.out_path << ".params.json\n";
  return 0;
}

int run_report(const std::string& results_path, const std::string& out_prefix) {
  const pubdp::ReportSummary s =
      pubdp::emit_report(results_path, out_prefix + ".csv", out_prefix + ".json");
  if (s.no_data)
    std::cout << "wrote " << out_prefix << ".{csv,json}: no data\n";
  else
    std::cout << "wrote " << out_prefix << ".{csv,json}: success_rate=" << s.success_rate
              << " over " << s.trials << " trials\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Public-data-assisted private estimation of Gaussians and mixtures"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path;
  std::string results_path;
  std::string out_prefix = "summary";

  const auto add_common = [&](CLI::App* sub, bool config_required) {
    sub->add_option("--config", config_path, "JSON config file")->required(config_required);
    sub->add_option("--seed", ov.seed, "override RNG seed");
    sub->add_option("--out", ov.out, "override output path");
    sub->add_option("--trials", ov.trials, "override trial count");
    sub->add_option("--threads", ov.threads, "override worker-thread count");
    sub->add_flag("--zero-noise", ov.zero_noise, "disable noise draws (test mode)");
  };

  CLI::App* gauss = app.add_subcommand("estimate-gaussian",
                                       "run a Gaussian / robust / one-sample-mean experiment");
  add_common(gauss, true);
  CLI::App* gmm = app.add_subcommand("estimate-gmm", "run a mixture estimation experiment");
  add_common(gmm, true);
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic mixture dataset");
  add_common(synth, true);
  CLI::App* report = app.add_subcommand("report", "summarize a results file");
  report->add_option("results", results_path, "results CSV from a previous run")->required();
  report->add_option("--out", out_prefix, "output prefix for the CSV/JSON summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gauss->parsed()) return run_estimation(config_path, ov, false);
    if (gmm->parsed()) return run_estimation(config_path, ov, true);
    if (synth->parsed()) return run_synth(config_path, ov);
    if (report->parsed()) return run_report(results_path, out_prefix);
  } catch (const pubdp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const pubdp::InputError& e) {
    // Bad runtime inputs (missing or malformed data files) are run failures,
    // not configuration mistakes.
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
