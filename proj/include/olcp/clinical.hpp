#pragma once

// Cohort-mode experiment: each arm is a sepsis scorer fitted on part of the
// training cohort; the selector tracks the reward each scorer earns per
// patient-hour and chooses whose score to report.

#include "olcp/config.hpp"
#include "olcp/data.hpp"
#include "olcp/metrics.hpp"
#include "olcp/selector.hpp"

#include <map>
#include <string>
#include <vector>

namespace olcp {

struct ClinicalOptions {
  // Context columns by name; empty selects every column except SepsisLabel.
  std::vector<std::string> context_columns;
  double threshold = 0.5;
  UtilityParams utility;
};

struct ClinicalRun {
  ExperimentResult result;
  std::vector<std::vector<double>> arm_scores;  // [round][arm], in [0, 1]
  std::vector<int> labels;                      // per round
  std::vector<std::size_t> patient;             // test-cohort patient index per round
  std::vector<std::size_t> hour;                // hour within that patient
  std::size_t test_patients = 0;
};

/// Flattens selected columns of every patient-hour into rows.
TrainingSet flatten(const Cohort& cohort, std::span<const int> columns);

/// Column indices for `names` (or every non-label column when empty).
std::vector<int> resolve_columns(const PatientRecord& reference, std::span<const std::string> names);

/// Expects imputed cohorts. Training patients alternate between fitting the
/// scorers (even positions) and the offline reward data (odd positions).
ClinicalRun run_clinical(const ExperimentConfig& config, const Cohort& train, const Cohort& test,
                         const ClinicalOptions& options);

/// Scores reported by the selector: the chosen arm's score each round.
std::vector<double> selected_scores(const ClinicalRun& run);

/// auroc, auprc, accuracy, f_measure, utility for the given per-round
/// scores over rounds [from, end). AUROC/AUPRC are NaN when a class is absent.
std::map<std::string, double> clinical_metrics(const ClinicalRun& run, std::span<const double> scores,
                                               std::size_t from, const ClinicalOptions& options);

}  // namespace olcp
