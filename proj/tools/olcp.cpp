// olcp: simulate | run | report

#include "olcp/clinical.hpp"
#include "olcp/config.hpp"
#include "olcp/data.hpp"
#include "olcp/report.hpp"
#include "olcp/simulate.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace olcp;

namespace {

enum Exit { ok = 0, usage = 1, data = 2, invariant = 3 };

struct CommonFlags {
  std::vector<double> alphas;
  std::string arms;
  int budget = 0;
  int bootstrap = 0;
  int window = 0;
  int refit_step = 0;
  bool refit = false;
  std::string feedback;
  std::uint64_t seed = 0;
  std::string reward_mode;
  double beta_grid_step = 0.0;
  std::string aggregator;
  int threads = 1;
  std::string config_path;
  std::string out = "olcp-out";
};

void add_common(CLI::App& app, CommonFlags& f) {
  app.add_option("--alpha", f.alphas, "Miscoverage level(s), comma separated")->delimiter(',');
  app.add_option("--arms", f.arms, "Learner specs, comma separated (ridge[:lambda], knn:k, tree:depth)");
  app.add_option("--budget", f.budget, "Online rounds");
  app.add_option("--bootstrap", f.bootstrap, "Bootstrap models per arm");
  app.add_option("--window", f.window, "Residual window size");
  app.add_option("--refit-step", f.refit_step, "Rounds between refits");
  app.add_flag("--refit", f.refit, "Refit ensembles online");
  app.add_option("--feedback", f.feedback, "full or bandit");
  app.add_option("--seed", f.seed, "Master seed");
  app.add_option("--reward-mode", f.reward_mode, "neg-abs-error, utility-increment or external");
  app.add_option("--beta-grid-step", f.beta_grid_step, "Step of the beta grid");
  app.add_option("--aggregator", f.aggregator, "mean or median");
  app.add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--config", f.config_path, "JSON config file; flags override it");
  app.add_option("--out", f.out, "Output directory");
}

ExperimentConfig build_config(const CLI::App& app, const CommonFlags& f, const std::string& default_arms) {
  ExperimentConfig c = f.config_path.empty() ? ExperimentConfig{} : load_config(f.config_path);
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--budget")) c.budget = f.budget;
  if (given("--bootstrap")) c.bootstrap_count = f.bootstrap;
  if (given("--window")) c.window_size = f.window;
  if (given("--refit-step")) c.refit_step = f.refit_step;
  if (given("--refit")) c.is_refit = f.refit;
  if (given("--feedback")) c.feedback_mode = parse_feedback_mode(f.feedback);
  if (given("--seed")) c.seed = f.seed;
  if (given("--reward-mode")) c.reward_mode = parse_reward_mode(f.reward_mode);
  if (given("--beta-grid-step")) c.beta_grid_step = f.beta_grid_step;
  if (given("--aggregator")) c.aggregator = parse_aggregator(f.aggregator);
  c.threads = f.threads;
  if (given("--arms") || c.learners.empty()) {
    c.learners.clear();
    std::stringstream ss(given("--arms") ? f.arms : default_arms);
    for (std::string item; std::getline(ss, item, ',');) c.learners.push_back(parse_predictor_spec(item));
  }
  c.num_arms = static_cast<int>(c.learners.size());
  return c;
}

std::vector<double> alpha_list(const CommonFlags& f, const ExperimentConfig& base) {
  return f.alphas.empty() ? std::vector<double>{base.alpha} : f.alphas;
}

void check(const ExperimentConfig& c) {
  if (auto v = validate_config(c); !v.empty()) throw InvalidArgument(v.front());
}

fs::path run_dir(const fs::path& out, double alpha, std::size_t runs) {
  return runs == 1 ? out : out / ("alpha-" + format_number(alpha));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw DataError(path.string() + ": write failed");
}

void write_outputs(const fs::path& dir, const ExperimentConfig& config, const ExperimentResult& result,
                   const std::map<std::string, double>& metrics) {
  fs::create_directories(dir);
  std::ostringstream rounds, regret, doc;
  write_rounds_csv(rounds, config, result.records);
  write_regret_csv(regret, result.records);
  write_metrics(doc, metrics);
  write_file(dir / "rounds.csv", rounds.str());
  write_file(dir / "regret.csv", regret.str());
  write_file(dir / "metrics.txt", doc.str());
  write_file(dir / "config.json", dump_config(config) + "\n");

  const RoundsFile back = read_rounds_csv(dir / "rounds.csv");
  if (back.rows.size() != result.records.size()) throw DataError((dir / "rounds.csv").string() + ": validation failed");
  std::ifstream m(dir / "metrics.txt");
  if (read_metrics(m).size() != metrics.size()) throw DataError((dir / "metrics.txt").string() + ": validation failed");
}

int cmd_simulate(const CLI::App& app, const CommonFlags& f, const SimulationOptions& sim) {
  ExperimentConfig base = build_config(app, f, "ridge,knn:5,tree:3");
  const auto alphas = alpha_list(f, base);
  for (double alpha : alphas) {
    ExperimentConfig c = base;
    c.alpha = alpha;
    check(c);
    const Stream stream = simulated_stream(c, sim);
    const ExperimentResult result = run_experiment(c, stream);
    auto metrics = run_summary(result);
    const SynthSpec arms = simulation_arms(static_cast<std::size_t>(c.num_arms), sim, RngSeed{c.seed});
    std::size_t best = 0;
    for (std::size_t k = 1; k < arms.arms.size(); ++k) {
      if (arms.arms[k].intercept > arms.arms[best].intercept) best = k;
    }
    metrics["best_arm_by_intercept"] = static_cast<double>(best + 1);
    write_outputs(run_dir(f.out, alpha, alphas.size()), c, result, metrics);
  }
  return ok;
}

struct CohortFlags {
  std::string data_dir;
  std::vector<std::string> context_cols;
  std::size_t train_septic = 0, train_nonseptic = 0, test_septic = 0, test_nonseptic = 0;
  double threshold = 0.5;
};

int cmd_run(const CLI::App& app, const CommonFlags& f, const CohortFlags& cf) {
  ExperimentConfig base = build_config(app, f, "ridge,knn:5,tree:2");
  if (!fs::is_directory(cf.data_dir)) throw DataError(cf.data_dir + ": not a directory");
  const Cohort cohort = impute(read_cohort(cf.data_dir));
  const std::size_t septic = cohort.septic_count();
  const std::size_t nonseptic = cohort.patients.size() - septic;
  const bool any = cf.train_septic + cf.train_nonseptic + cf.test_septic + cf.test_nonseptic > 0;
  const std::size_t trs = any ? cf.train_septic : septic / 2;
  const std::size_t trn = any ? cf.train_nonseptic : nonseptic / 2;
  const std::size_t tes = any ? cf.test_septic : septic - septic / 2;
  const std::size_t ten = any ? cf.test_nonseptic : nonseptic - nonseptic / 2;

  ClinicalOptions options;
  options.context_columns = cf.context_cols;
  options.threshold = cf.threshold;

  const auto alphas = alpha_list(f, base);
  for (double alpha : alphas) {
    ExperimentConfig c = base;
    c.alpha = alpha;
    check(c);
    const CohortSplit split = split_cohort(cohort, trs, trn, tes, ten, derive_substream(RngSeed{c.seed}, {{StreamTag::split, 0}}));
    std::size_t hours = 0;
    for (const auto& p : split.test.patients) hours += static_cast<std::size_t>(p.hours());
    if (!app.count("--budget") && f.config_path.empty()) c.budget = static_cast<int>(hours);
    const ClinicalRun run = run_clinical(c, split.train, split.test, options);
    auto metrics = run_summary(run.result);
    const auto scores = selected_scores(run);
    for (const auto& [key, value] : clinical_metrics(run, scores, 0, options)) metrics[key] = value;
    for (std::size_t a = 0; a < static_cast<std::size_t>(c.num_arms); ++a) {
      std::vector<double> arm(run.arm_scores.size());
      for (std::size_t t = 0; t < arm.size(); ++t) arm[t] = run.arm_scores[t][a];
      for (const auto& [key, value] : clinical_metrics(run, arm, 0, options))
        metrics["arm" + std::to_string(a + 1) + "_" + key] = value;
    }
    write_outputs(run_dir(f.out, alpha, alphas.size()), c, run.result, metrics);
  }
  return ok;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<RoundsFile> files;
  for (const auto& p : inputs) files.push_back(read_rounds_csv(p));
  const std::string table = comparison_table(files);
  if (out.empty()) {
    std::cout << table;
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    write_file(out, table);
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online selection among competing predictors with conformal gap bandits"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  SimulationOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Synthetic linear-arm experiment");
  add_common(*simulate, sim_flags);
  simulate->add_option("--dim", sim.dimension, "Context dimension");
  simulate->add_option("--train-size", sim.train_size, "Offline samples per arm");
  simulate->add_option("--noise", sim.noise_sd, "Reward noise standard deviation");
  simulate->add_option("--arm-spacing", sim.arm_spacing, "Intercept spacing between arms");
  simulate->add_option("--slope-scale", sim.slope_scale, "Scale of the random arm slopes");

  CommonFlags run_flags;
  CohortFlags cohort;
  auto* run = app.add_subcommand("run", "PSV cohort experiment");
  add_common(*run, run_flags);
  run->add_option("--data", cohort.data_dir, "Directory of PSV files")->required();
  run->add_option("--context-cols", cohort.context_cols, "Context columns, comma separated")->delimiter(',');
  run->add_option("--train-septic", cohort.train_septic, "Septic training patients");
  run->add_option("--train-nonseptic", cohort.train_nonseptic, "Non-septic training patients");
  run->add_option("--test-septic", cohort.test_septic, "Septic test patients");
  run->add_option("--test-nonseptic", cohort.test_nonseptic, "Non-septic test patients");
  run->add_option("--threshold", cohort.threshold, "Score threshold for a positive prediction");

  std::vector<std::string> inputs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Combine rounds files into a comparison table");
  report->add_option("inputs", inputs, "Rounds CSV files")->required();
  report->add_option("--out", report_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  try {
    if (*simulate) return cmd_simulate(*simulate, sim_flags, sim);
    if (*run) return cmd_run(*run, run_flags, cohort);
    return cmd_report(inputs, report_out);
  } catch (const InvariantViolation& e) {
    std::cerr << "olcp: invariant violation: " << e.what() << '\n';
    return invariant;
  } catch (const DataError& e) {
    std::cerr << "olcp: data error: " << e.what() << '\n';
    return data;
  } catch (const InvalidArgument& e) {
    std::cerr << "olcp: " << e.what() << '\n';
    return usage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "olcp: " << e.what() << '\n';
    return data;
  } catch (const std::exception& e) {
    std::cerr << "olcp: internal error: " << e.what() << '\n';
    return invariant;
  }
}
