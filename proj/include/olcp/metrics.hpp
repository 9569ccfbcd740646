#pragma once

// Regret series, interval coverage and the classification / clinical
// utility metrics used to score a selector run.

#include "olcp/core.hpp"
#include "olcp/enbpi.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace olcp {

struct RegretSeries {
  std::vector<double> instantaneous;
  std::vector<double> running_average;  // prefix means of instantaneous
};

/// regret_t = best_t - chosen_t, plus its running average.
RegretSeries average_regret(std::span<const double> chosen_rewards, std::span<const double> best_rewards);

/// Mann-Whitney AUROC; ties between a positive and a negative count 1/2.
/// Requires at least one positive and one negative label.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Area under the precision-recall step curve: descending-score sweep, tied
/// scores processed as one block, rectangle integration.
double auprc(std::span<const double> scores, std::span<const int> labels);

struct ConfusionMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

/// Predicted positive iff score >= threshold. Undefined ratios are 0.
ConfusionMetrics confusion_metrics(std::span<const double> scores, std::span<const int> labels, double threshold);

double coverage_rate(std::span<const PredictionInterval> intervals, std::span<const double> realized);

/// Piecewise per-hour weights relative to the sepsis time t_s, where t_s is
/// the first positive label hour minus dt_optimal. Defaults follow the
/// challenge scoring shape; all are configurable.
struct UtilityParams {
  double dt_early = -12.0;
  double dt_optimal = -6.0;
  double dt_late = 3.0;
  double max_u_tp = 1.0;
  double min_u_fn = -2.0;
  double u_fp = -0.05;
  double u_tn = 0.0;
};

std::vector<std::string> utility_violations(const UtilityParams& params);

/// t_s for a patient, or nullopt when no hour is labelled positive.
std::optional<double> sepsis_time(std::span<const int> labels, const UtilityParams& params);

/// Utility of one hourly decision.
double hourly_utility(bool predicted, double hour, std::optional<double> t_sepsis, const UtilityParams& params);

/// Raw utility of one patient's hourly binary predictions.
double patient_utility(std::span<const int> predictions, std::span<const int> labels, const UtilityParams& params);

/// (observed - inaction) / (optimal - inaction) summed over patients, where
/// inaction predicts all negatives and optimal reproduces the labels.
double clinical_utility(std::span<const std::vector<int>> predictions, std::span<const std::vector<int>> labels,
                        const UtilityParams& params);

}  // namespace olcp
