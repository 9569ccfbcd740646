#pragma once

// Online selection among competing predictors: per-arm conformal intervals,
// gap quantities, the arm choice, state updates and the final recommendation.

#include "olcp/config.hpp"
#include "olcp/core.hpp"
#include "olcp/enbpi.hpp"
#include "olcp/learners.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace olcp {

/// Gap quantities for one round. Arm indices are 0-based.
struct GapQuantities {
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<double> gap;    // B_k = max_{i != k} U_i - L_k
  std::vector<double> width;  // s_k = U_k - L_k
  std::size_t leader = 0;     // J: argmin B, lowest index on ties
  std::size_t runner_up = 0;  // j: argmax U over k != J, lowest index on ties
};

/// Requires K >= 2 and U_k >= L_k for every arm.
GapQuantities gap_quantities(std::span<const double> upper, std::span<const double> lower);

/// Picks the wider of {J, j}, ties to J. The runner-up is eligible only when
/// it also holds the overall largest upper bound (lowest index on ties), which
/// is the condition under which the rule coincides with taking j over all
/// arms; it keeps B_a <= s_a for the chosen arm.
std::size_t choose_arm(const GapQuantities& g);

struct GapRecord {
  std::int64_t round = 0;
  std::size_t leader = 0;
  double leader_gap = 0.0;
};

/// J of the round with the smallest B_J; ties go to the earliest round.
std::size_t recommend(std::span<const GapRecord> history);

/// neg-abs-error: 1 - |prediction - label|. Other modes carry their own
/// reward definitions and are rejected here.
double reward_of(double prediction, int label, RewardMode mode);

struct ArmState {
  std::size_t arm = 0;
  PredictorSpec spec;
  BootstrapEnsemble ensemble;
  ResidualWindow window{2};
  std::deque<bool> window_fallback;  // parallel to window entries
  std::size_t pull_count = 0;
  IntervalParams interval_params;
  // Most recent training pairs (capacity = window_size), used by refits.
  std::deque<std::pair<Vector, double>> history;
};

/// Fits the arm's ensemble on its offline data and seeds its residual window
/// with the out-of-bag residuals (most recent window_size kept).
ArmState init_arm(std::size_t arm, const PredictorSpec& spec, const TrainingSet& offline,
                  const ExperimentConfig& config);

/// Per-arm view of one round.
struct ArmRound {
  double f_hat = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  double width = 0.0;
  double beta_hat = 0.0;
  bool fallback = false;
  double reward = 0.0;      // realized reward of this arm
  bool updated = false;     // residual pushed this round
  std::size_t window = 0;   // window length after the update
};

struct RoundRecord {
  std::int64_t t = 0;
  std::vector<ArmRound> arms;
  std::size_t leader = 0;
  std::size_t runner_up = 0;
  std::size_t chosen = 0;
  double reward = 0.0;
  double regret = 0.0;
  bool refit = false;

  bool contained() const;  // every realized reward inside its interval
};

struct StepContext {
  std::int64_t t = 0;               // global round index, > training_size
  std::int64_t training_size = 0;   // T
};

/// One round: intervals for every arm, gap quantities, arm choice, reward
/// observation and state updates (plus a refit when due). `rewards` holds the
/// realized reward of every arm; in bandit mode only the chosen arm's reward
/// reaches its state. Throws InvariantViolation if the chosen arm breaks
/// a_t in {J, j} or B_a <= s_a.
RoundRecord step(std::vector<ArmState>& states, const Eigen::Ref<const Vector>& x, std::span<const double> rewards,
                 const ExperimentConfig& config, const StepContext& ctx);

struct StreamRound {
  Vector x;
  std::vector<double> rewards;             // realized, one per arm
  std::optional<std::vector<double>> means;  // noiseless arm means, when known
};

struct Stream {
  std::vector<TrainingSet> offline;  // per arm
  std::vector<StreamRound> rounds;
};

struct ExperimentResult {
  std::vector<RoundRecord> records;
  std::size_t recommendation = 0;
  std::vector<std::size_t> pull_counts;
};

/// Runs min(budget, rounds) online rounds. Regret per round uses the
/// noiseless means when the stream has them, else the realized best reward.
ExperimentResult run_experiment(const ExperimentConfig& config, const Stream& stream);

/// a_t in {J, j}, B_a <= s_a and, on rounds where every realized reward lies
/// in its interval, max_{k != a} r_k - r_a <= B_a. Returns the number of
/// violating rounds.
std::size_t count_lemma_violations(std::span<const RoundRecord> records);

}  // namespace olcp
