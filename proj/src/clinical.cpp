#include "olcp/clinical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace olcp {

std::vector<int> resolve_columns(const PatientRecord& reference, std::span<const std::string> names) {
  std::vector<int> out;
  if (names.empty()) {
    for (std::size_t c = 0; c < reference.columns.size(); ++c) {
      if (c != reference.label_column) out.push_back(static_cast<int>(c));
    }
    return out;
  }
  for (const auto& name : names) {
    const int idx = reference.column_index(name);
    if (idx < 0) throw InvalidArgument("unknown context column '" + name + "'");
    if (static_cast<std::size_t>(idx) == reference.label_column)
      throw InvalidArgument("SepsisLabel cannot be a context column");
    out.push_back(idx);
  }
  return out;
}

TrainingSet flatten(const Cohort& cohort, std::span<const int> columns) {
  Eigen::Index rows = 0;
  for (const auto& p : cohort.patients) rows += p.hours();
  TrainingSet set{Matrix(rows, static_cast<Eigen::Index>(columns.size())), Vector(rows)};
  Eigen::Index r = 0;
  for (const auto& p : cohort.patients) {
    for (Eigen::Index h = 0; h < p.hours(); ++h, ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) set.features(r, static_cast<Eigen::Index>(c)) = p.values(h, columns[c]);
      set.targets(r) = p.labels[static_cast<std::size_t>(h)];
    }
  }
  return set;
}

namespace {

double clamp_score(double s) { return std::clamp(s, 0.0, 1.0); }

double round_reward(double score, int label, double hour, std::optional<double> t_sepsis, const ExperimentConfig& config,
                    const ClinicalOptions& options) {
  switch (config.reward_mode) {
    case RewardMode::neg_abs_error: return reward_of(score, label, config.reward_mode);
    case RewardMode::utility_increment:
      return hourly_utility(score >= options.threshold, hour, t_sepsis, options.utility);
    case RewardMode::external: break;
  }
  throw InvalidArgument("cohort runs derive rewards from labels; reward mode 'external' is not available");
}

}  // namespace

ClinicalRun run_clinical(const ExperimentConfig& config, const Cohort& train, const Cohort& test,
                         const ClinicalOptions& options) {
  if (auto v = validate_config(config); !v.empty()) throw InvalidArgument(v.front());
  if (train.patients.size() < 2) throw DataError("cohort run needs at least two training patients");
  if (test.patients.empty()) throw DataError("cohort run needs at least one test patient");
  const auto columns = resolve_columns(train.patients.front(), options.context_columns);

  Cohort scorer_part;
  Cohort reward_part;
  for (std::size_t i = 0; i < train.patients.size(); ++i) {
    (i % 2 == 0 ? scorer_part : reward_part).patients.push_back(train.patients[i]);
  }
  const TrainingSet scorer_rows = flatten(scorer_part, columns);
  const TrainingSet reward_rows = flatten(reward_part, columns);

  const auto k = static_cast<std::size_t>(config.num_arms);
  std::vector<Model> scorers;
  for (std::size_t a = 0; a < k; ++a) scorers.push_back(fit(config.learners[a], scorer_rows));

  auto score = [&](std::size_t a, const Eigen::Ref<const Vector>& x) { return clamp_score(predict(scorers[a], x)); };

  Stream stream;
  stream.offline.resize(k);
  {
    std::vector<std::optional<double>> onset;
    for (const auto& p : reward_part.patients) onset.push_back(sepsis_time(p.labels, options.utility));
    for (std::size_t a = 0; a < k; ++a) {
      TrainingSet& set = stream.offline[a];
      set.features = reward_rows.features;
      set.targets.resize(reward_rows.size());
      Eigen::Index r = 0;
      for (std::size_t p = 0; p < reward_part.patients.size(); ++p) {
        for (Eigen::Index h = 0; h < reward_part.patients[p].hours(); ++h, ++r) {
          const Vector x = reward_rows.features.row(r).transpose();
          set.targets(r) = round_reward(score(a, x), static_cast<int>(reward_rows.targets(r)), static_cast<double>(h),
                                        onset[p], config, options);
        }
      }
    }
  }

  ClinicalRun run;
  run.test_patients = test.patients.size();
  const TrainingSet test_rows = flatten(test, columns);
  Eigen::Index r = 0;
  for (std::size_t p = 0; p < test.patients.size(); ++p) {
    const auto t_sepsis = sepsis_time(test.patients[p].labels, options.utility);
    for (Eigen::Index h = 0; h < test.patients[p].hours(); ++h, ++r) {
      StreamRound round;
      round.x = test_rows.features.row(r).transpose();
      const int label = test.patients[p].labels[static_cast<std::size_t>(h)];
      std::vector<double> scores(k);
      for (std::size_t a = 0; a < k; ++a) {
        scores[a] = score(a, round.x);
        round.rewards.push_back(round_reward(scores[a], label, static_cast<double>(h), t_sepsis, config, options));
      }
      stream.rounds.push_back(std::move(round));
      run.arm_scores.push_back(std::move(scores));
      run.labels.push_back(label);
      run.patient.push_back(p);
      run.hour.push_back(static_cast<std::size_t>(h));
    }
  }

  run.result = run_experiment(config, stream);
  const std::size_t played = run.result.records.size();
  run.arm_scores.resize(played);
  run.labels.resize(played);
  run.patient.resize(played);
  run.hour.resize(played);
  return run;
}

std::vector<double> selected_scores(const ClinicalRun& run) {
  std::vector<double> out(run.result.records.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = run.arm_scores[t][run.result.records[t].chosen];
  return out;
}

std::map<std::string, double> clinical_metrics(const ClinicalRun& run, std::span<const double> scores,
                                               std::size_t from, const ClinicalOptions& options) {
  const std::size_t end = std::min(scores.size(), run.labels.size());
  if (from >= end) throw InvalidArgument("clinical_metrics: empty round range");
  const std::span<const double> s = scores.subspan(from, end - from);
  const std::span<const int> y(run.labels.data() + from, end - from);

  std::map<std::string, double> out;
  const auto positives = std::count(y.begin(), y.end(), 1);
  const bool both = positives > 0 && positives < static_cast<std::ptrdiff_t>(y.size());
  out["auroc"] = both ? auroc(s, y) : std::numeric_limits<double>::quiet_NaN();
  out["auprc"] = positives > 0 ? auprc(s, y) : std::numeric_limits<double>::quiet_NaN();
  const ConfusionMetrics cm = confusion_metrics(s, y, options.threshold);
  out["accuracy"] = cm.accuracy;
  out["f_measure"] = cm.f_measure;

  // Per-hour utilities against each patient's full label history.
  std::vector<std::vector<int>> labels_by_patient(run.test_patients);
  for (std::size_t t = 0; t < run.labels.size(); ++t) labels_by_patient[run.patient[t]].push_back(run.labels[t]);
  double observed = 0.0;
  double inaction = 0.0;
  double optimal = 0.0;
  for (std::size_t t = from; t < end; ++t) {
    const auto t_sepsis = sepsis_time(labels_by_patient[run.patient[t]], options.utility);
    const auto hour = static_cast<double>(run.hour[t]);
    observed += hourly_utility(scores[t] >= options.threshold, hour, t_sepsis, options.utility);
    inaction += hourly_utility(false, hour, t_sepsis, options.utility);
    optimal += hourly_utility(run.labels[t] == 1, hour, t_sepsis, options.utility);
  }
  out["utility"] = optimal != inaction ? (observed - inaction) / (optimal - inaction)
                                       : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace olcp
