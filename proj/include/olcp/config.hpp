#pragma once

#include "olcp/core.hpp"
#include "olcp/learners.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace olcp {

enum class FeedbackMode { full, bandit };
enum class RewardMode { neg_abs_error, utility_increment, external };

std::string to_string(FeedbackMode mode);
std::string to_string(RewardMode mode);
FeedbackMode parse_feedback_mode(const std::string& text);
RewardMode parse_reward_mode(const std::string& text);

struct ExperimentConfig {
  double alpha = 0.1;
  int num_arms = 3;
  int budget = 200;
  int bootstrap_count = 25;
  int window_size = 100;
  int refit_step = 10;
  bool is_refit = false;
  FeedbackMode feedback_mode = FeedbackMode::full;
  double beta_grid_step = 0.01;
  std::uint64_t seed = 0;
  std::vector<PredictorSpec> learners;
  RewardMode reward_mode = RewardMode::neg_abs_error;
  Aggregator aggregator = Aggregator::mean;
  // Worker threads; has no effect on results.
  int threads = 1;
};

/// Every violated constraint, in field order. Empty means valid.
std::vector<std::string> validate_config(const ExperimentConfig& config);

/// Reads a JSON object whose keys are the ExperimentConfig field names.
/// Missing keys keep their defaults; unknown keys are an error.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& config);

}  // namespace olcp
