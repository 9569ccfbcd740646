#include "olcp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace olcp {

namespace {

void check_scored(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
  }
}

// Indices ordered by descending score; equal scores stay adjacent.
std::vector<std::size_t> descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

RegretSeries average_regret(std::span<const double> chosen_rewards, std::span<const double> best_rewards) {
  if (chosen_rewards.size() != best_rewards.size()) throw InvalidArgument("average_regret: length mismatch");
  RegretSeries out;
  out.instantaneous.resize(chosen_rewards.size());
  out.running_average.resize(chosen_rewards.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < chosen_rewards.size(); ++t) {
    out.instantaneous[t] = best_rewards[t] - chosen_rewards[t];
    sum += out.instantaneous[t];
    out.running_average[t] = sum / static_cast<double>(t + 1);
  }
  return out;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_scored(scores, labels);
  const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const auto negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) throw InvalidArgument("auroc: need both classes");

  // Walk tie blocks from the lowest score up; each positive beats every
  // negative already passed and splits the block's negatives.
  auto order = descending(scores);
  std::reverse(order.begin(), order.end());
  double wins = 0.0;
  double negatives_below = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t end = i;
    double pos = 0.0;
    double neg = 0.0;
    while (end < order.size() && scores[order[end]] == scores[order[i]]) {
      (labels[order[end]] == 1 ? pos : neg) += 1.0;
      ++end;
    }
    wins += pos * negatives_below + 0.5 * pos * neg;
    negatives_below += neg;
    i = end;
  }
  return wins / (positives * negatives);
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  check_scored(scores, labels);
  const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0.0) throw InvalidArgument("auprc: no positive labels");

  const auto order = descending(scores);
  double tp = 0.0;
  double fp = 0.0;
  double area = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t end = i;
    while (end < order.size() && scores[order[end]] == scores[order[i]]) {
      (labels[order[end]] == 1 ? tp : fp) += 1.0;
      ++end;
    }
    const double recall = tp / positives;
    area += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    i = end;
  }
  return area;
}

ConfusionMetrics confusion_metrics(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_scored(scores, labels);
  double tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) (predicted ? tp : fn) += 1.0;
    else (predicted ? fp : tn) += 1.0;
  }
  ConfusionMetrics m;
  const double total = tp + fp + fn + tn;
  m.accuracy = total > 0 ? (tp + tn) / total : 0.0;
  m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  m.f_measure = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

double coverage_rate(std::span<const PredictionInterval> intervals, std::span<const double> realized) {
  if (intervals.size() != realized.size()) throw InvalidArgument("coverage_rate: length mismatch");
  if (intervals.empty()) throw InvalidArgument("coverage_rate: empty input");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].contains(realized[i])) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(intervals.size());
}

std::vector<std::string> utility_violations(const UtilityParams& p) {
  std::vector<std::string> v;
  if (!(p.dt_early < p.dt_optimal)) v.emplace_back("utility: dt_early must be < dt_optimal");
  if (!(p.dt_optimal < p.dt_late)) v.emplace_back("utility: dt_optimal must be < dt_late");
  return v;
}

std::optional<double> sepsis_time(std::span<const int> labels, const UtilityParams& params) {
  const auto it = std::find(labels.begin(), labels.end(), 1);
  if (it == labels.end()) return std::nullopt;
  return static_cast<double>(it - labels.begin()) - params.dt_optimal;
}

double hourly_utility(bool predicted, double hour, std::optional<double> t_sepsis, const UtilityParams& p) {
  if (!t_sepsis) return predicted ? p.u_fp : p.u_tn;
  const double rel = hour - *t_sepsis;
  if (rel > p.dt_late) return 0.0;
  if (predicted) {
    if (rel <= p.dt_optimal) {
      const double slope = p.max_u_tp / (p.dt_optimal - p.dt_early);
      return std::max(slope * (rel - p.dt_early), p.u_fp);
    }
    const double slope = -p.max_u_tp / (p.dt_late - p.dt_optimal);
    return slope * (rel - p.dt_late);
  }
  if (rel <= p.dt_optimal) return 0.0;
  const double slope = p.min_u_fn / (p.dt_late - p.dt_optimal);
  return slope * (rel - p.dt_optimal);
}

double patient_utility(std::span<const int> predictions, std::span<const int> labels, const UtilityParams& params) {
  if (predictions.size() != labels.size()) throw InvalidArgument("patient_utility: length mismatch");
  const auto t_sepsis = sepsis_time(labels, params);
  double total = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    total += hourly_utility(predictions[t] != 0, static_cast<double>(t), t_sepsis, params);
  }
  return total;
}

double clinical_utility(std::span<const std::vector<int>> predictions, std::span<const std::vector<int>> labels,
                        const UtilityParams& params) {
  if (predictions.size() != labels.size()) throw InvalidArgument("clinical_utility: patient count mismatch");
  if (auto v = utility_violations(params); !v.empty()) throw InvalidArgument(v.front());
  double observed = 0.0;
  double inaction = 0.0;
  double optimal = 0.0;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const std::vector<int> none(labels[p].size(), 0);
    observed += patient_utility(predictions[p], labels[p], params);
    inaction += patient_utility(none, labels[p], params);
    optimal += patient_utility(labels[p], labels[p], params);
  }
  if (optimal == inaction) throw InvalidArgument("clinical_utility: optimal and inaction utilities coincide");
  return (observed - inaction) / (optimal - inaction);
}

}  // namespace olcp
