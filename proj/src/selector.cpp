#include "olcp/selector.hpp"

#include "olcp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace olcp {

GapQuantities gap_quantities(std::span<const double> upper, std::span<const double> lower) {
  const std::size_t k = upper.size();
  if (k < 2) throw InvalidArgument("gap_quantities: need at least two arms");
  if (lower.size() != k) throw InvalidArgument("gap_quantities: upper and lower differ in length");
  for (std::size_t a = 0; a < k; ++a) {
    if (!(upper[a] >= lower[a])) throw InvalidArgument("gap_quantities: U < L for arm " + std::to_string(a + 1));
  }

  GapQuantities g;
  g.upper.assign(upper.begin(), upper.end());
  g.lower.assign(lower.begin(), lower.end());
  g.gap.resize(k);
  g.width.resize(k);

  // Largest and second-largest upper bounds give max_{i != a} U_i in O(K).
  std::size_t top = 0;
  for (std::size_t a = 1; a < k; ++a) {
    if (upper[a] > upper[top]) top = a;
  }
  double second = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a) {
    if (a != top) second = std::max(second, upper[a]);
  }
  for (std::size_t a = 0; a < k; ++a) {
    g.gap[a] = (a == top ? second : upper[top]) - lower[a];
    g.width[a] = upper[a] - lower[a];
  }

  for (std::size_t a = 1; a < k; ++a) {
    if (g.gap[a] < g.gap[g.leader]) g.leader = a;
  }
  g.runner_up = g.leader == 0 ? 1 : 0;
  for (std::size_t a = 0; a < k; ++a) {
    if (a != g.leader && upper[a] > upper[g.runner_up]) g.runner_up = a;
  }
  return g;
}

std::size_t choose_arm(const GapQuantities& g) {
  const std::size_t J = g.leader;
  const std::size_t j = g.runner_up;
  const bool runner_up_tops = g.upper[j] > g.upper[J] || (g.upper[j] == g.upper[J] && j < J);
  return (g.width[j] > g.width[J] && runner_up_tops) ? j : J;
}

std::size_t recommend(std::span<const GapRecord> history) {
  if (history.empty()) throw InvalidArgument("recommend: empty history");
  const GapRecord* best = &history.front();
  for (const auto& rec : history) {
    if (rec.leader_gap < best->leader_gap) best = &rec;
  }
  return best->leader;
}

double reward_of(double prediction, int label, RewardMode mode) {
  if (!(prediction >= 0.0 && prediction <= 1.0)) throw InvalidArgument("reward_of: prediction outside [0,1]");
  if (label != 0 && label != 1) throw InvalidArgument("reward_of: label must be 0 or 1");
  if (mode != RewardMode::neg_abs_error)
    throw InvalidArgument("reward_of: mode " + to_string(mode) + " needs its own reward source");
  return 1.0 - std::abs(prediction - static_cast<double>(label));
}

namespace {

TrainingSet history_set(const ArmState& state) {
  const auto rows = static_cast<Eigen::Index>(state.history.size());
  const Eigen::Index d = state.history.front().first.size();
  TrainingSet set{Matrix(rows, d), Vector(rows)};
  for (Eigen::Index r = 0; r < rows; ++r) {
    set.features.row(r) = state.history[static_cast<std::size_t>(r)].first.transpose();
    set.targets(r) = state.history[static_cast<std::size_t>(r)].second;
  }
  return set;
}

void push_history(ArmState& state, const Eigen::Ref<const Vector>& x, double y, std::size_t capacity) {
  state.history.emplace_back(x, y);
  while (state.history.size() > capacity) state.history.pop_front();
}

void push_window(ArmState& state, double residual, bool fallback) {
  state.window.push(residual);
  state.window_fallback.push_back(fallback);
  while (state.window_fallback.size() > state.window.size()) state.window_fallback.pop_front();
}

}  // namespace

ArmState init_arm(std::size_t arm, const PredictorSpec& spec, const TrainingSet& offline,
                  const ExperimentConfig& config) {
  check_training_set(offline);
  ArmState state;
  state.arm = arm;
  state.spec = spec;
  const RngSeed seed = derive_substream(RngSeed{config.seed}, {{StreamTag::arm, arm}, {StreamTag::round, 0}});
  state.ensemble = fit_ensemble(offline, spec, static_cast<std::size_t>(config.bootstrap_count), config.aggregator,
                                seed, config.threads);
  state.ensemble.fitted_at_round = offline.size();

  const auto capacity = static_cast<std::size_t>(config.window_size);
  state.window = ResidualWindow(capacity);
  // Out-of-bag residuals in training order, each tagged with its fallback flag.
  std::vector<LooPrediction> loo(static_cast<std::size_t>(offline.size()));
  parallel_for(loo.size(), config.threads, [&](std::size_t i) {
    loo[i] = loo_aggregate(state.ensemble, i, offline.features.row(static_cast<Eigen::Index>(i)).transpose());
  });
  for (std::size_t i = 0; i < loo.size(); ++i) {
    push_window(state, offline.targets(static_cast<Eigen::Index>(i)) - loo[i].value, loo[i].fallback_used);
  }
  for (Eigen::Index i = 0; i < offline.size(); ++i) {
    push_history(state, offline.features.row(i).transpose(), offline.targets(i), capacity);
  }
  state.interval_params = IntervalParams{config.alpha, 0.0, config.beta_grid_step};
  return state;
}

bool RoundRecord::contained() const {
  return std::all_of(arms.begin(), arms.end(),
                     [](const ArmRound& a) { return a.lower <= a.reward && a.reward <= a.upper; });
}

RoundRecord step(std::vector<ArmState>& states, const Eigen::Ref<const Vector>& x, std::span<const double> rewards,
                 const ExperimentConfig& config, const StepContext& ctx) {
  const std::size_t k = states.size();
  if (k == 0) throw InvalidArgument("step: no arms");
  if (rewards.size() != k) throw InvalidArgument("step: need one realized reward per arm");
  for (const auto& s : states) {
    if (s.window.empty()) throw InvalidArgument("step: empty residual window");
  }

  RoundRecord rec;
  rec.t = ctx.t;
  rec.arms.resize(k);

  parallel_for(k, config.threads, [&](std::size_t a) {
    ArmState& s = states[a];
    ArmRound& out = rec.arms[a];
    const auto sorted = s.window.sorted();
    s.interval_params = optimize_beta_sorted(sorted, config.alpha, config.beta_grid_step);
    out.f_hat = ensemble_predict(s.ensemble, x);
    const PredictionInterval pi = prediction_interval_sorted(out.f_hat, sorted, s.interval_params);
    out.lower = pi.lower;
    out.upper = pi.upper;
    out.width = pi.upper - pi.lower;
    out.beta_hat = s.interval_params.beta_hat;
    out.fallback = std::find(s.window_fallback.begin(), s.window_fallback.end(), true) != s.window_fallback.end();
    out.reward = rewards[a];
  });

  if (k == 1) {
    rec.arms[0].gap = std::numeric_limits<double>::quiet_NaN();
    rec.leader = rec.runner_up = rec.chosen = 0;
  } else {
    std::vector<double> upper(k);
    std::vector<double> lower(k);
    for (std::size_t a = 0; a < k; ++a) {
      upper[a] = rec.arms[a].upper;
      lower[a] = rec.arms[a].lower;
    }
    const GapQuantities g = gap_quantities(upper, lower);
    for (std::size_t a = 0; a < k; ++a) rec.arms[a].gap = g.gap[a];
    rec.leader = g.leader;
    rec.runner_up = g.runner_up;
    rec.chosen = choose_arm(g);
    if (rec.chosen != rec.leader && rec.chosen != rec.runner_up)
      throw InvariantViolation("round " + std::to_string(ctx.t) + ": chosen arm is neither J nor j");
    if (!(g.gap[rec.chosen] <= g.width[rec.chosen]))
      throw InvariantViolation("round " + std::to_string(ctx.t) + ": B_a exceeds s_a");
  }
  rec.reward = rewards[rec.chosen];

  const auto capacity = static_cast<std::size_t>(config.window_size);
  for (std::size_t a = 0; a < k; ++a) {
    ArmState& s = states[a];
    const bool update = config.feedback_mode == FeedbackMode::full || a == rec.chosen;
    if (update) {
      push_window(s, rewards[a] - rec.arms[a].f_hat, false);
      push_history(s, x, rewards[a], capacity);
      ++s.pull_count;
    }
    rec.arms[a].updated = update;
  }

  if (refit_due(ctx.t, ctx.training_size, config.refit_step, config.is_refit)) {
    rec.refit = true;
    parallel_for(k, config.threads, [&](std::size_t a) {
      ArmState& s = states[a];
      const RngSeed seed = derive_substream(RngSeed{config.seed},
                                            {{StreamTag::arm, a}, {StreamTag::refit, static_cast<std::uint64_t>(ctx.t)}});
      s.ensemble = fit_ensemble(history_set(s), s.spec, static_cast<std::size_t>(config.bootstrap_count),
                                config.aggregator, seed, 1);
      s.ensemble.fitted_at_round = ctx.t;
    });
  }

  for (std::size_t a = 0; a < k; ++a) rec.arms[a].window = states[a].window.size();
  return rec;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Stream& stream) {
  if (auto violations = validate_config(config); !violations.empty()) throw InvalidArgument(violations.front());
  const auto k = static_cast<std::size_t>(config.num_arms);
  if (stream.offline.size() != k) throw InvalidArgument("run_experiment: need offline data for every arm");
  if (stream.rounds.empty()) throw InvalidArgument("run_experiment: empty stream");
  const Eigen::Index training_size = stream.offline.front().size();
  for (const auto& set : stream.offline) {
    if (set.size() != training_size) throw InvalidArgument("run_experiment: offline sets differ in size");
  }

  std::vector<ArmState> states;
  states.reserve(k);
  for (std::size_t a = 0; a < k; ++a) states.push_back(init_arm(a, config.learners[a], stream.offline[a], config));

  ExperimentResult result;
  const std::size_t horizon = std::min(static_cast<std::size_t>(config.budget), stream.rounds.size());
  result.records.reserve(horizon);
  std::vector<GapRecord> gaps;
  gaps.reserve(horizon);
  for (std::size_t r = 0; r < horizon; ++r) {
    const StreamRound& round = stream.rounds[r];
    const StepContext ctx{training_size + static_cast<std::int64_t>(r) + 1, training_size};
    RoundRecord rec = step(states, round.x, round.rewards, config, ctx);
    if (round.means) {
      const auto& mu = *round.means;
      rec.regret = *std::max_element(mu.begin(), mu.end()) - mu[rec.chosen];
    } else {
      rec.regret = *std::max_element(round.rewards.begin(), round.rewards.end()) - round.rewards[rec.chosen];
    }
    gaps.push_back(GapRecord{rec.t, rec.leader, k == 1 ? 0.0 : rec.arms[rec.leader].gap});
    result.records.push_back(std::move(rec));
  }
  result.recommendation = recommend(gaps);
  for (const auto& s : states) result.pull_counts.push_back(s.pull_count);
  return result;
}

std::size_t count_lemma_violations(std::span<const RoundRecord> records) {
  std::size_t violations = 0;
  for (const auto& rec : records) {
    if (rec.arms.size() < 2) continue;
    const auto& chosen = rec.arms[rec.chosen];
    bool bad = rec.chosen != rec.leader && rec.chosen != rec.runner_up;
    bad = bad || !(chosen.gap <= chosen.width);
    if (rec.contained()) {
      double rival = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < rec.arms.size(); ++a) {
        if (a != rec.chosen) rival = std::max(rival, rec.arms[a].reward);
      }
      bad = bad || !(rival - chosen.reward <= chosen.gap);
    }
    if (bad) ++violations;
  }
  return violations;
}

}  // namespace olcp
