// Acceptance suite: one PASS/FAIL line per criterion.

#include "olcp/bayesgap.hpp"
#include "olcp/clinical.hpp"
#include "olcp/data.hpp"
#include "olcp/enbpi.hpp"
#include "olcp/metrics.hpp"
#include "olcp/report.hpp"
#include "olcp/selector.hpp"
#include "olcp/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace olcp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Records from criteria 1 and 2, checked again by criterion 6.
std::vector<std::vector<RoundRecord>> g_logs;

Outcome coverage() {
  Outcome out{true, ""};
  for (double alpha : {0.05, 0.10, 0.25}) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig c;
    c.alpha = alpha;
    c.num_arms = 3;
    c.budget = 2000;
    c.bootstrap_count = 25;
    c.window_size = 100;
    c.seed = 2024;
    c.learners.assign(3, parse_predictor_spec("ridge"));
    SimulationOptions o;
    o.dimension = 3;
    o.train_size = 100;
    o.noise_sd = 0.1;
    o.slope_scale = 0.5;
    const auto res = run_experiment(c, simulated_stream(c, o));
    double worst = 0.0;
    std::string per_arm;
    for (std::size_t k = 0; k < 3; ++k) {
      double hit = 0.0;
      for (const auto& rec : res.records) {
        const auto& a = rec.arms[k];
        if (a.lower <= a.reward && a.reward <= a.upper) hit += 1.0;
      }
      const double rate = hit / static_cast<double>(res.records.size());
      worst = std::max(worst, std::abs(rate - (1.0 - alpha)));
      per_arm += fmt("%s%.4f", k ? "/" : "", rate);
    }
    const double secs = seconds_since(start);
    const bool ok = worst <= 0.03 && secs < 60.0;
    out.pass = out.pass && ok;
    // Expected coverage of the beta=0 interval [r(1), r(ceil((1-alpha)m))] for exchangeable residuals.
    const double m = 100.0;
    const double fixed_beta = (std::ceil((1.0 - alpha) * m - 1e-9) - 1.0) / (m + 1.0);
    out.detail += fmt("%salpha=%.2f coverage=%s (target %.2f, beta=0 expectation %.4f, %.2fs)",
                      out.detail.empty() ? "" : "; ", alpha, per_arm.c_str(), 1.0 - alpha, fixed_beta, secs);
    g_logs.push_back(res.records);
  }
  return out;
}

Outcome regret() {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t seeds = 50;
  double early = 0.0, late = 0.0;
  std::size_t correct = 0;
  double min_gap = INFINITY;
  for (std::size_t s = 0; s < seeds; ++s) {
    ExperimentConfig c;
    c.alpha = 0.1;
    c.num_arms = 5;
    c.budget = 1000;
    c.bootstrap_count = 25;
    c.window_size = 100;
    c.is_refit = true;
    c.refit_step = 10;
    c.feedback_mode = FeedbackMode::bandit;
    c.seed = 1000 + s;
    c.learners.assign(5, parse_predictor_spec("ridge"));
    SimulationOptions o;
    o.dimension = 3;
    o.train_size = 5;
    o.noise_sd = 0.1;
    o.arm_spacing = 0.25;
    o.slope_scale = 0.2;

    // Best and second-best expected means under the (zero-mean) contexts.
    const SynthSpec arms = simulation_arms(5, o, RngSeed{c.seed});
    std::vector<double> means;
    for (const auto& a : arms.arms) means.push_back(a.intercept);
    std::vector<double> sorted = means;
    std::sort(sorted.rbegin(), sorted.rend());
    min_gap = std::min(min_gap, sorted[0] - sorted[1]);
    const auto best = static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin());

    const auto res = run_experiment(c, simulated_stream(c, o));
    std::vector<double> r;
    std::vector<double> zero(res.records.size(), 0.0);
    for (const auto& rec : res.records) r.push_back(rec.regret);
    const auto series = average_regret(zero, r);
    early += series.running_average[49];
    late += series.running_average[999];
    if (res.recommendation == best) ++correct;
    g_logs.push_back(res.records);
  }
  early /= seeds;
  late /= seeds;
  const double secs = seconds_since(start);
  const double ratio = late / early;
  const bool pass = early > 0.0 && ratio <= 0.4 && correct * 5 >= seeds * 4 && min_gap >= 0.2 && secs < 300.0;
  return {pass, fmt("avg regret t=50 %.4f, t=1000 %.4f (ratio %.3f <= 0.40); best arm recommended %zu/%zu; "
                    "mean gap %.2f; %.1fs",
                    early, late, ratio, correct, seeds, min_gap, secs)};
}

Outcome posterior() {
  Rng rng = make_rng(RngSeed{303});
  double worst_mean = 0.0, worst_cov = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(uniform_index(rng, 5));
    const Eigen::Index t = static_cast<Eigen::Index>(uniform_index(rng, 51));
    const bayes::PriorSpec<double> prior{0.05 + 2.0 * uniform01(rng), 0.05 + 2.0 * uniform01(rng)};
    Matrix c(t, d);
    Vector y(t);
    for (Eigen::Index i = 0; i < t; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) c(i, j) = standard_normal(rng);
      y(i) = 3.0 * standard_normal(rng);
    }
    const auto post = bayes::posterior_update(prior, c, y, d);
    const Matrix sigma = (c.transpose() * c / prior.sigma2 + Matrix::Identity(d, d) / prior.tau2).inverse();
    const Vector psi = sigma * (c.transpose() * y) / prior.sigma2;
    worst_cov = std::max(worst_cov, (post.covariance - sigma).norm() / sigma.norm());
    worst_mean = std::max(worst_mean, (post.mean - psi).norm() / std::max(psi.norm(), 1e-300));
  }
  return {worst_mean <= 1e-9 && worst_cov <= 1e-9,
          fmt("200 instances, max relative error psi %.2e, Sigma %.2e", worst_mean, worst_cov)};
}

Outcome beta_optimality() {
  Rng rng = make_rng(RngSeed{404});
  const double coarse = 0.01;
  std::size_t bad_grid = 0, bad_fine = 0, near_argmin = 0;
  double worst_excess = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 20 + uniform_index(rng, 481);
    const double alpha = 0.05 + 0.2 * uniform01(rng);
    ResidualWindow w(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = standard_normal(rng);
      w.push(trial % 2 ? std::exp(z) - 1.0 : z);
    }
    const auto sorted = w.sorted();
    const auto p = optimize_beta(w, alpha, coarse);
    const double width = interval_width_sorted(sorted, alpha, p.beta_hat);
    for (double b : beta_grid(alpha, coarse)) {
      if (width > interval_width_sorted(sorted, alpha, b)) ++bad_grid;
    }
    const auto fine = beta_grid(alpha, coarse / 10.0);
    double best = INFINITY, best_beta = 0.0;
    for (double b : fine) {
      const double v = interval_width_sorted(sorted, alpha, b);
      if (v < best) {
        best = v;
        best_beta = b;
      }
    }
    // Worst fine-grid width within one coarse step of the fine optimum.
    double envelope = best;
    for (double b : fine) {
      if (std::abs(b - best_beta) <= coarse + 1e-12) envelope = std::max(envelope, interval_width_sorted(sorted, alpha, b));
    }
    if (width > envelope) ++bad_fine;
    if (std::abs(p.beta_hat - best_beta) <= coarse + 1e-12) ++near_argmin;
    worst_excess = std::max(worst_excess, width - best);
  }
  return {bad_grid == 0 && bad_fine == 0,
          fmt("100 windows: %zu coarse-grid violations, %zu outside the one-step envelope of the fine oracle; "
              "beta within one step of fine argmin in %zu/100; max width excess %.3g",
              bad_grid, bad_fine, near_argmin, worst_excess)};
}

double pairwise_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

double step_auprc(const std::vector<double>& s, const std::vector<int>& y) {
  const std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  double area = 0.0, prev = 0.0;
  for (double thr : thresholds) {
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= thr) (y[i] ? tp : fp) += 1.0;
    }
    area += (tp / positives - prev) * tp / (tp + fp);
    prev = tp / positives;
  }
  return area;
}

Outcome metric_oracles() {
  Rng rng = make_rng(RngSeed{505});
  double worst_roc = 0.0, worst_pr = 0.0;
  std::size_t tied_sets = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 199);
    const std::uint64_t levels = trial % 3 == 0 ? 1000000 : 2 + uniform_index(rng, 20);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(uniform_index(rng, levels)) / static_cast<double>(levels);
      y[i] = uniform01(rng) < 0.35;
    }
    y[0] = 1;
    y[n - 1] = 0;
    if (std::set<double>(s.begin(), s.end()).size() < n) ++tied_sets;
    worst_roc = std::max(worst_roc, std::abs(auroc(s, y) - pairwise_auroc(s, y)));
    worst_pr = std::max(worst_pr, std::abs(auprc(s, y) - step_auprc(s, y)));
  }
  return {worst_roc <= 1e-12 && worst_pr <= 1e-12 && tied_sets > 0,
          fmt("100 sets (%zu with ties): max |AUROC - pairwise| %.2e, max |AUPRC - step curve| %.2e", tied_sets,
              worst_roc, worst_pr)};
}

Outcome lemma_invariants() {
  std::size_t rounds = 0, contained = 0, violations = 0;
  for (const auto& log : g_logs) {
    rounds += log.size();
    for (const auto& rec : log) contained += rec.contained();
    violations += count_lemma_violations(log);
  }
  return {violations == 0 && rounds > 0,
          fmt("%zu rounds from criteria 1-2 (%zu with all rewards contained): %zu violations", rounds, contained,
              violations)};
}

Outcome ensemble_selection() {
  const std::size_t seeds = 10;
  double sel = 0.0, best = 0.0, worst = 0.0;
  std::size_t per_seed = 0;
  for (std::size_t s = 0; s < seeds; ++s) {
    SynthCohortSpec spec;
    spec.septic = 40;
    spec.nonseptic = 40;
    spec.signal = {5.0, 3.0, 0.0, 0.0};
    const Cohort cohort = impute(synth_cohort(spec, RngSeed{700 + s}));
    const auto split = split_cohort(cohort, 20, 20, 20, 20, RngSeed{800 + s});

    ExperimentConfig c;
    c.alpha = 0.1;
    c.num_arms = 3;
    c.budget = 100000;
    c.bootstrap_count = 25;
    c.window_size = 100;
    c.seed = 900 + s;
    c.learners = {parse_predictor_spec("knn:25"), parse_predictor_spec("tree:1"), parse_predictor_spec("tree:0")};
    const ClinicalOptions options;
    const auto run = run_clinical(c, split.train, split.test, options);
    const std::size_t burn = run.labels.size() / 5;

    const double selector = clinical_metrics(run, selected_scores(run), burn, options).at("auroc");
    double hi = -INFINITY, lo = INFINITY;
    for (std::size_t a = 0; a < 3; ++a) {
      std::vector<double> arm(run.arm_scores.size());
      for (std::size_t t = 0; t < arm.size(); ++t) arm[t] = run.arm_scores[t][a];
      const double v = clinical_metrics(run, arm, burn, options).at("auroc");
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    sel += selector;
    best += hi;
    worst += lo;
    if (selector >= lo + 0.05 && selector >= hi - 0.02) ++per_seed;
  }
  sel /= seeds;
  best /= seeds;
  worst /= seeds;
  return {sel >= worst + 0.05 && sel >= best - 0.02,
          fmt("mean AUROC after 20%% burn-in: selector %.4f, best arm %.4f, worst arm %.4f; per-seed pass %zu/%zu",
              sel, best, worst, per_seed, seeds)};
}

bool same_bits(const PatientRecord& a, const PatientRecord& b) {
  if (a.columns != b.columns || a.labels != b.labels || a.values.rows() != b.values.rows()) return false;
  for (Eigen::Index i = 0; i < a.values.size(); ++i) {
    const double x = a.values.data()[i], y = b.values.data()[i];
    if (std::isnan(x) != std::isnan(y)) return false;
    if (!std::isnan(x) && std::memcmp(&x, &y, sizeof(double)) != 0) return false;
  }
  return true;
}

Outcome psv_round_trip() {
  Rng rng = make_rng(RngSeed{808});
  std::size_t identical = 0, missing = 0, imputed_ok = 0;
  Cohort cohort;
  for (int i = 0; i < 100; ++i) {
    PatientRecord rec;
    rec.columns = {"HR", "O2Sat", "Temp", "Lactate", "SepsisLabel"};
    rec.label_column = 4;
    const auto hours = static_cast<Eigen::Index>(1 + uniform_index(rng, 48));
    rec.values.resize(hours, 5);
    rec.labels.resize(static_cast<std::size_t>(hours));
    const auto onset = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(2 * hours)));
    for (Eigen::Index h = 0; h < hours; ++h) {
      for (Eigen::Index c = 0; c < 4; ++c) {
        const double v = c == 3 ? std::ldexp(standard_normal(rng), -20) : 80.0 * uniform01(rng) + 1e-7 * c;
        rec.values(h, c) = uniform01(rng) < 0.25 ? std::nan("") : v;
        missing += std::isnan(rec.values(h, c));
      }
      rec.labels[static_cast<std::size_t>(h)] = h >= onset;
      rec.values(h, 4) = h >= onset;
    }
    const auto once = parse_psv(serialize_psv(rec));
    const auto twice = parse_psv(serialize_psv(once));
    if (same_bits(once, rec) && same_bits(twice, rec) && serialize_psv(once) == serialize_psv(rec)) ++identical;
    cohort.patients.push_back(std::move(rec));
  }
  const Cohort filled = impute(cohort);
  for (std::size_t p = 0; p < cohort.patients.size(); ++p) {
    bool ok = true;
    const auto& a = cohort.patients[p].values;
    const auto& b = filled.patients[p].values;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double x = a.data()[i], y = b.data()[i];
      if (std::isnan(y)) ok = false;
      if (!std::isnan(x) && std::memcmp(&x, &y, sizeof(double)) != 0) ok = false;
    }
    imputed_ok += ok;
  }
  return {identical == 100 && imputed_ok == 100 && missing > 0,
          fmt("%zu/100 records round-trip bit-identically (%zu missing cells); imputation preserved observed values "
              "in %zu/100",
              identical, missing, imputed_ok)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "olcp_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string base = std::string(OLCP_CLI_PATH) +
                           " simulate --seed 31337 --budget 300 --refit --refit-step 7 --arms ridge,knn:4,tree:3,ridge:0.1"
                           " --out ";
  std::vector<std::string> outputs;
  int failures = 0;
  for (const char* run : {"a --threads 1", "b --threads 1", "c --threads 2", "d --threads 8"}) {
    std::string name(run);
    const std::string sub = name.substr(0, 1);
    const std::string cmd = base + (dir / sub).string() + name.substr(1) + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) ++failures;
    outputs.push_back(slurp(dir / sub / "rounds.csv"));
  }
  bool same = !outputs[0].empty();
  for (const auto& o : outputs) same = same && o == outputs[0];
  return {failures == 0 && same,
          fmt("4 simulate runs (threads 1, 1, 2, 8): %s rounds CSV, %zu bytes", same ? "byte-identical" : "differing",
              outputs[0].size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"marginal coverage", coverage},
      {"regret convergence", regret},
      {"posterior oracle", posterior},
      {"beta optimality", beta_optimality},
      {"metric oracles", metric_oracles},
      {"lemma invariants", lemma_invariants},
      {"ensemble selection", ensemble_selection},
      {"PSV round trip", psv_round_trip},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
