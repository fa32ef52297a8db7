#ifndef PUBDP_EXPERIMENT_HPP
#define PUBDP_EXPERIMENT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pubdp/budget.hpp"
#include "pubdp/clustering.hpp"
#include "pubdp/errors.hpp"
#include "pubdp/evaluate.hpp"
#include "pubdp/io.hpp"
#include "pubdp/learner.hpp"
#include "pubdp/rng.hpp"
#include "pubdp/synth.hpp"
#include "pubdp/tv.hpp"

namespace pubdp {

/// One experiment: a task name, instance sizes, accuracy/confidence targets,
/// a privacy budget, and a trial count. Parsed from a single JSON document;
/// unknown keys are a hard error so typos in sweep scripts cannot silently
/// fall back to defaults.
struct ExperimentConfig {
  std::string task = "gaussian";  // gaussian | gaussian_robust | gmm_hard | gmm_easy | mean_1sample
  int d = 2;
  int k = 1;
  std::int64_t n = 1000;
  std::int64_t m = 10;
  double alpha = 0.2;
  double beta = 0.1;
  double gamma = 0.0;
  double w_min = 1.0;
  double separation_multiplier = 10.0;
  double spread = 4.0;
  PrivacyBudget budget = PrivacyBudget::Zcdp(1.0);
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out_path = "results.csv";
  int threads = 1;
  bool zero_noise = false;

  void validate() const {
    static const std::set<std::string> kTasks = {"gaussian", "gaussian_robust", "gmm_hard",
                                                 "gmm_easy", "mean_1sample"};
    if (!kTasks.count(task)) throw ConfigError("config: unknown task '" + task + "'");
    if (d < 1) throw ConfigError("config: d must be >= 1");
    if (k < 1) throw ConfigError("config: k must be >= 1");
    if (n < 1) throw ConfigError("config: n must be >= 1");
    if (m < 1) throw ConfigError("config: m must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("config: alpha must lie in (0,1)");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("config: beta must lie in (0,1)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("config: gamma must lie in [0,1)");
    if (!(w_min > 0.0 && w_min <= 1.0)) throw ConfigError("config: w_min must lie in (0,1]");
    if (k * w_min > 1.0 + 1e-12) throw ConfigError("config: need k * w_min <= 1");
    if (!(spread >= 1.0)) throw ConfigError("config: spread must be >= 1");
    if (trials < 0) throw ConfigError("config: trials must be >= 0");
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
    if (budget.kind == BudgetKind::kZCDP) {
      if (!(budget.rho > 0.0)) throw ConfigError("config: budget.rho must be > 0");
    } else {
      if (!(budget.eps > 0.0) || !(budget.delta > 0.0 && budget.delta < 1.0))
        throw ConfigError("config: budget needs eps > 0 and delta in (0,1)");
    }
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["task"] = task;
    j["d"] = d;
    j["k"] = k;
    j["n"] = n;
    j["m"] = m;
    j["alpha"] = alpha;
    j["beta"] = beta;
    j["gamma"] = gamma;
    j["w_min"] = w_min;
    j["separation_multiplier"] = separation_multiplier;
    j["spread"] = spread;
    if (budget.kind == BudgetKind::kZCDP)
      j["budget"] = nlohmann::json{{"kind", "zcdp"}, {"rho", budget.rho}};
    else
      j["budget"] =
          nlohmann::json{{"kind", "approx"}, {"eps", budget.eps}, {"delta", budget.delta}};
    j["trials"] = trials;
    j["seed"] = seed;
    j["out_path"] = out_path;
    j["threads"] = threads;
    j["zero_noise"] = zero_noise;
    return j;
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    static const std::set<std::string> kKeys = {
        "task",   "d",      "k",        "n",        "m",       "alpha",
        "beta",   "gamma",  "w_min",    "separation_multiplier", "spread",
        "budget", "trials", "seed",     "out_path", "threads", "zero_noise"};
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!kKeys.count(it.key())) throw ConfigError("config: unknown key '" + it.key() + "'");

    ExperimentConfig c;
    c.task = j.value("task", c.task);
    c.d = j.value("d", c.d);
    c.k = j.value("k", c.k);
    c.n = j.value("n", c.n);
    c.m = j.value("m", c.m);
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.gamma = j.value("gamma", c.gamma);
    c.w_min = j.value("w_min", c.w_min);
    c.separation_multiplier = j.value("separation_multiplier", c.separation_multiplier);
    c.spread = j.value("spread", c.spread);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.out_path = j.value("out_path", c.out_path);
    c.threads = j.value("threads", c.threads);
    c.zero_noise = j.value("zero_noise", c.zero_noise);
    if (j.contains("budget")) {
      const auto& b = j.at("budget");
      static const std::set<std::string> kBudgetKeys = {"kind", "rho", "eps", "delta"};
      for (auto it = b.begin(); it != b.end(); ++it)
        if (!kBudgetKeys.count(it.key()))
          throw ConfigError("config: unknown budget key '" + it.key() + "'");
      const std::string kind = b.value("kind", "zcdp");
      if (kind == "zcdp") {
        if (b.contains("eps") || b.contains("delta"))
          throw ConfigError("config: zcdp budget takes 'rho' only");
        c.budget = PrivacyBudget::Zcdp(b.value("rho", 1.0));
      } else if (kind == "approx") {
        if (b.contains("rho")) throw ConfigError("config: approx budget takes 'eps'/'delta'");
        c.budget = PrivacyBudget::Approx(b.value("eps", 1.0), b.value("delta", 1e-6));
      } else {
        throw ConfigError("config: unknown budget kind '" + kind + "'");
      }
    }
    c.validate();
    return c;
  }
};

/// One trial's outcome row. Wall time is recorded but excluded from the
/// determinism contract.
struct TrialRecord {
  int trial_index = 0;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
  std::string status = "ok";
  bool success = false;
  double max_tv = std::numeric_limits<double>::quiet_NaN();
  double mean_tv = std::numeric_limits<double>::quiet_NaN();
  double max_weight_err = std::numeric_limits<double>::quiet_NaN();
  bool clean = false;
  double spent_fraction = 0.0;
};

namespace detail {

inline GaussianParams random_truth_gaussian(Eigen::Index d, RngStream& rng) {
  GaussianParams p;
  const Eigen::MatrixXd q = random_rotation(d, rng);
  Eigen::VectorXd ev(d);
  for (Eigen::Index j = 0; j < d; ++j) ev[j] = 1.0 + 3.0 * rng.uniform();
  p.cov = q * ev.asDiagonal() * q.transpose();
  p.mean.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) p.mean[j] = 3.0 * rng.normal();
  return p;
}

// Clean clustering oracle: exactly k non-empty clusters, each label-pure,
// labels pairwise distinct, and every private point assigned.
inline bool clustering_clean(const ClusteringResult& clusters, const std::vector<int>& labels,
                             int k) {
  if (static_cast<int>(clusters.clusters.size()) != k) return false;
  std::set<int> seen;
  std::size_t total = 0;
  for (const auto& c : clusters.clusters) {
    if (c.private_indices.empty()) return false;
    const int lbl = labels[static_cast<std::size_t>(c.private_indices.front())];
    for (const int idx : c.private_indices)
      if (labels[static_cast<std::size_t>(idx)] != lbl) return false;
    if (!seen.insert(lbl).second) return false;
    total += c.private_indices.size();
  }
  return total == labels.size();
}

inline std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  return fmt_double(v);
}

}  // namespace detail

/// Run one trial. The RNG stream is derived from (config.seed, trial_index),
/// so trials are independent of scheduling order and the whole run is
/// reproducible; pipeline errors are recorded in the row, never thrown.
inline TrialRecord run_trial(const ExperimentConfig& cfg, int trial_index) {
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.seed = cfg.seed;
  const auto t0 = std::chrono::steady_clock::now();
  RngStream rng(cfg.seed, static_cast<std::uint64_t>(trial_index) + 1, cfg.zero_noise);
  try {
    BudgetAccountant acct(cfg.budget);
    if (cfg.task == "gaussian" || cfg.task == "gaussian_robust") {
      const GaussianParams truth = detail::random_truth_gaussian(cfg.d, rng);
      GaussianParams pub_source = truth;
      if (cfg.task == "gaussian_robust")
        pub_source = make_gamma_far_params(truth, cfg.gamma, rng);
      const LabeledDataset pub = sample_gaussian(pub_source, cfg.m, rng);
      const LabeledDataset priv = sample_gaussian(truth, cfg.n, rng);
      const PrivacyBudget spend = acct.charge(1, 1);
      const double gamma = cfg.task == "gaussian_robust" ? cfg.gamma : 0.0;
      const GaussianParams est =
          pub_dp_gaussian_estimator(pub.rows, priv.rows, cfg.alpha, cfg.beta, spend, gamma, rng);
      RngStream tv_rng = rng.fork(999);
      const double tv = tv_distance(truth, est, tv_rng, 20000).estimate;
      rec.max_tv = rec.mean_tv = tv;
      rec.max_weight_err = 0.0;
      rec.clean = true;
      rec.success = tv <= cfg.alpha;
    } else if (cfg.task == "mean_1sample") {
      GaussianParams truth;
      truth.mean.resize(cfg.d);
      for (int j = 0; j < cfg.d; ++j) truth.mean[j] = 3.0 * rng.normal();
      truth.cov = Eigen::MatrixXd::Identity(cfg.d, cfg.d);
      const LabeledDataset pub = sample_gaussian(truth, 1, rng);
      const LabeledDataset priv = sample_gaussian(truth, cfg.n, rng);
      const PrivacyBudget spend = acct.charge(1, 1);
      if (spend.kind != BudgetKind::kZCDP)
        throw ConfigError("mean_1sample requires a zcdp budget");
      const Eigen::VectorXd mu_hat = one_sample_mean_estimator(
          pub.rows.row(0).transpose(), priv.rows, cfg.alpha, cfg.beta, spend.rho, rng);
      const double err = (mu_hat - truth.mean).norm();
      rec.max_tv = rec.mean_tv = err;
      rec.max_weight_err = 0.0;
      rec.clean = true;
      rec.success = err <= cfg.alpha;
    } else {  // gmm_hard | gmm_easy
      const MixtureParams mix = make_separated_mixture(cfg.d, cfg.k, cfg.separation_multiplier,
                                                       cfg.w_min, cfg.spread, rng);
      const LabeledDataset priv = sample_mixture(mix, cfg.n, rng);
      const LabeledDataset pub = sample_mixture(mix, cfg.m, rng);
      ClusteringResult clusters;
      MixtureEstimate est;
      if (cfg.task == "gmm_hard")
        est = dp_hard_pipeline(pub.rows, priv.rows, cfg.k, cfg.w_min, cfg.alpha, cfg.beta,
                               cfg.budget, rng, &acct, &clusters);
      else
        est = easy_pipeline(pub.rows, priv.rows, cfg.k, cfg.w_min, cfg.alpha, cfg.beta,
                            cfg.budget, rng, &acct, &clusters);
      rec.clean = detail::clustering_clean(clusters, priv.labels, cfg.k);
      RngStream ev_rng = rng.fork(1000);
      const LearningReport rep = evaluate_learning(mix, est.params, cfg.alpha, ev_rng);
      rec.success = rep.pass;
      rec.max_tv = rep.max_tv;
      rec.max_weight_err = rep.max_weight_error;
      double sum = 0.0;
      for (const double tv : rep.component_tv) sum += tv;
      rec.mean_tv = rep.component_tv.empty()
                        ? std::numeric_limits<double>::quiet_NaN()
                        : sum / static_cast<double>(rep.component_tv.size());
    }
    if (!acct.within_declared()) throw ConfigError("budget accountant overspent");
    rec.spent_fraction = acct.spent_fraction();
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    rec.status = "error: " + msg;
    rec.success = false;
  }
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return rec;
}

inline const char* kResultsHeader =
    "trial_index,seed,wall_time_ms,status,success,max_tv,mean_tv,max_weight_err,clean,"
    "spent_fraction";

/// Run all trials (optionally on a worker pool; rows are written in trial
/// order regardless of completion order) and write the results file: a
/// comment line carrying the canonical config JSON, a header, one row per
/// trial.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialRecord> rows(static_cast<std::size_t>(cfg.trials));
  const int workers = std::max(1, std::min(cfg.threads, cfg.trials));
  if (workers <= 1) {
    for (int t = 0; t < cfg.trials; ++t) rows[static_cast<std::size_t>(t)] = run_trial(cfg, t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1))
          rows[static_cast<std::size_t>(t)] = run_trial(cfg, t);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::ofstream out(cfg.out_path);
  if (!out) throw InputError("run_experiment: cannot open " + cfg.out_path);
  out << "# " << cfg.to_json().dump() << '\n';
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.trial_index << ',' << r.seed << ',' << detail::csv_double(r.wall_time_ms) << ','
        << r.status << ',' << (r.success ? 1 : 0) << ',' << detail::csv_double(r.max_tv) << ','
        << detail::csv_double(r.mean_tv) << ',' << detail::csv_double(r.max_weight_err) << ','
        << (r.clean ? 1 : 0) << ',' << detail::csv_double(r.spent_fraction) << '\n';
  }
  return rows;
}

/// Aggregated view of a results file; the single source of truth for both
/// the CSV and the JSON summary.
struct ReportSummary {
  ExperimentConfig config;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double mean_tv = std::numeric_limits<double>::quiet_NaN();
  double median_tv = std::numeric_limits<double>::quiet_NaN();
  double mean_ms = std::numeric_limits<double>::quiet_NaN();
  bool no_data = false;
};

/// Wilson 95% score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(int successes, int trials, double z = 1.959964) {
  if (trials <= 0) return {0.0, 0.0};
  const double nn = trials;
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = p + z2 / (2.0 * nn);
  const double spread = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {(center - spread) / denom, (center + spread) / denom};
}

/// Parse a results file back into (config, rows). Malformed lines raise an
/// input error that names the line number.
inline std::pair<ExperimentConfig, std::vector<TrialRecord>> read_results(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("read_results: cannot open " + path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw InputError("read_results: missing config comment at line 1");
  ++line_no;
  ExperimentConfig cfg;
  try {
    cfg = ExperimentConfig::from_json(nlohmann::json::parse(line.substr(2)));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("read_results: bad config JSON at line 1");
  }
  if (!std::getline(in, line) || line != kResultsHeader)
    throw InputError("read_results: bad header at line 2");
  ++line_no;

  std::vector<TrialRecord> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10)
      throw InputError("read_results: expected 10 columns at line " + std::to_string(line_no));
    try {
      TrialRecord r;
      r.trial_index = std::stoi(cells[0]);
      r.seed = std::stoull(cells[1]);
      r.wall_time_ms = std::stod(cells[2]);
      r.status = cells[3];
      r.success = cells[4] == "1";
      r.max_tv = std::stod(cells[5]);
      r.mean_tv = std::stod(cells[6]);
      r.max_weight_err = std::stod(cells[7]);
      r.clean = cells[8] == "1";
      r.spent_fraction = std::stod(cells[9]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw InputError("read_results: bad row at line " + std::to_string(line_no));
    }
  }
  return {std::move(cfg), std::move(rows)};
}

inline ReportSummary summarize_results(const std::string& path) {
  auto [cfg, rows] = read_results(path);
  ReportSummary s;
  s.config = cfg;
  s.trials = static_cast<int>(rows.size());
  if (rows.empty()) {
    s.no_data = true;
    return s;
  }
  std::vector<double> tvs;
  double ms_sum = 0.0;
  for (const auto& r : rows) {
    if (r.success) ++s.successes;
    if (std::isfinite(r.max_tv)) tvs.push_back(r.max_tv);
    ms_sum += r.wall_time_ms;
  }
  s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.trials);
  std::tie(s.ci_lo, s.ci_hi) = wilson_interval(s.successes, s.trials);
  if (!tvs.empty()) {
    double sum = 0.0;
    for (const double v : tvs) sum += v;
    s.mean_tv = sum / static_cast<double>(tvs.size());
    std::sort(tvs.begin(), tvs.end());
    const std::size_t mid = tvs.size() / 2;
    s.median_tv = tvs.size() % 2 == 1 ? tvs[mid] : 0.5 * (tvs[mid - 1] + tvs[mid]);
  }
  s.mean_ms = ms_sum / static_cast<double>(s.trials);
  return s;
}

inline nlohmann::json summary_to_json(const ReportSummary& s) {
  nlohmann::json j;
  j["task"] = s.config.task;
  j["d"] = s.config.d;
  j["k"] = s.config.k;
  j["n"] = s.config.n;
  j["m"] = s.config.m;
  j["alpha"] = s.config.alpha;
  j["beta"] = s.config.beta;
  j["gamma"] = s.config.gamma;
  j["budget_kind"] = s.config.budget.kind == BudgetKind::kZCDP ? "zcdp" : "approx";
  j["budget_value"] =
      s.config.budget.kind == BudgetKind::kZCDP ? s.config.budget.rho : s.config.budget.eps;
  j["trials"] = s.trials;
  j["success_rate"] = s.success_rate;
  j["ci_lo"] = s.ci_lo;
  j["ci_hi"] = s.ci_hi;
  j["mean_tv"] = s.mean_tv;
  j["median_tv"] = s.median_tv;
  j["mean_ms"] = s.mean_ms;
  if (s.no_data) j["no_data"] = true;
  return j;
}

/// Write the CSV and JSON summaries (field-for-field identical content).
/// A zero-trial results file yields a header-only CSV with an explicit
/// "no data" marker and a JSON document flagged no_data.
inline ReportSummary emit_report(const std::string& results_path, const std::string& csv_path,
                                 const std::string& json_path) {
  const ReportSummary s = summarize_results(results_path);
  std::ofstream csv(csv_path);
  if (!csv) throw InputError("emit_report: cannot open " + csv_path);
  csv << "task,d,k,n,m,alpha,beta,gamma,budget_kind,budget_value,trials,success_rate,ci_lo,"
         "ci_hi,mean_tv,median_tv,mean_ms\n";
  if (s.no_data) {
    csv << "# no data\n";
  } else {
    const nlohmann::json j = summary_to_json(s);
    csv << j["task"].get<std::string>() << ',' << s.config.d << ',' << s.config.k << ','
        << s.config.n << ',' << s.config.m << ',' << detail::csv_double(s.config.alpha) << ','
        << detail::csv_double(s.config.beta) << ',' << detail::csv_double(s.config.gamma) << ','
        << j["budget_kind"].get<std::string>() << ','
        << detail::csv_double(j["budget_value"].get<double>()) << ',' << s.trials << ','
        << detail::csv_double(s.success_rate) << ',' << detail::csv_double(s.ci_lo) << ','
        << detail::csv_double(s.ci_hi) << ',' << detail::csv_double(s.mean_tv) << ','
        << detail::csv_double(s.median_tv) << ',' << detail::csv_double(s.mean_ms) << '\n';
  }
  std::ofstream js(json_path);
  if (!js) throw InputError("emit_report: cannot open " + json_path);
  js << summary_to_json(s).dump(2) << '\n';
  return s;
}

}  // namespace pubdp

#endif  // PUBDP_EXPERIMENT_HPP
