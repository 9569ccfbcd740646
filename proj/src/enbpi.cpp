#include "olcp/enbpi.hpp"

#include "olcp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace olcp {

std::vector<IndexSet> sample_bootstrap_indices(std::size_t m, std::size_t count, RngSeed rng) {
  if (m == 0 || count == 0) throw InvalidArgument("sample_bootstrap_indices: m and B must be >= 1");
  std::vector<IndexSet> sets(count);
  for (std::size_t b = 0; b < count; ++b) {
    Rng gen = make_rng(derive_substream(rng, {{StreamTag::bootstrap, b}}));
    sets[b].resize(m);
    for (auto& idx : sets[b]) idx = static_cast<std::size_t>(uniform_index(gen, m));
  }
  return sets;
}

TrainingSet resample(const TrainingSet& train, const IndexSet& indices) {
  TrainingSet out{Matrix(static_cast<Eigen::Index>(indices.size()), train.dimension()),
                  Vector(static_cast<Eigen::Index>(indices.size()))};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(indices[r]);
    out.features.row(static_cast<Eigen::Index>(r)) = train.features.row(src);
    out.targets(static_cast<Eigen::Index>(r)) = train.targets(src);
  }
  return out;
}

BootstrapEnsemble make_ensemble(std::vector<Model> models, std::vector<IndexSet> index_sets,
                                std::size_t training_size, Aggregator phi) {
  if (models.empty() || models.size() != index_sets.size())
    throw InvalidArgument("make_ensemble: need one index set per model");
  BootstrapEnsemble ens;
  ens.phi = phi;
  ens.training_size = training_size;
  ens.in_bag.assign(models.size(), std::vector<bool>(training_size, false));
  for (std::size_t b = 0; b < index_sets.size(); ++b) {
    for (std::size_t i : index_sets[b]) {
      if (i >= training_size) throw InvalidArgument("make_ensemble: index out of range");
      ens.in_bag[b][i] = true;
    }
  }
  ens.models = std::move(models);
  ens.index_sets = std::move(index_sets);
  return ens;
}

BootstrapEnsemble fit_ensemble(const TrainingSet& train, const PredictorSpec& spec, std::size_t count,
                               Aggregator phi, RngSeed rng, int threads) {
  check_training_set(train);
  const auto m = static_cast<std::size_t>(train.size());
  auto index_sets = sample_bootstrap_indices(m, count, rng);

  std::vector<std::optional<Model>> fitted(count);
  parallel_for(count, threads, [&](std::size_t b) { fitted[b].emplace(fit(spec, resample(train, index_sets[b]))); });

  std::vector<Model> models;
  models.reserve(count);
  for (auto& model : fitted) models.push_back(std::move(*model));
  return make_ensemble(std::move(models), std::move(index_sets), m, phi);
}

LooPrediction loo_aggregate(const BootstrapEnsemble& ensemble, std::size_t i, const Eigen::Ref<const Vector>& x) {
  if (i >= ensemble.training_size) throw InvalidArgument("loo_aggregate: training index out of range");
  std::vector<double> preds;
  preds.reserve(ensemble.size());
  for (std::size_t b = 0; b < ensemble.size(); ++b) {
    if (!ensemble.contains(b, i)) preds.push_back(predict(ensemble.models[b], x));
  }
  if (!preds.empty()) return {aggregate(preds, ensemble.phi), false};
  return {ensemble_predict(ensemble, x), true};
}

LooResiduals loo_residuals(const BootstrapEnsemble& ensemble, const TrainingSet& train, int threads) {
  check_training_set(train);
  const auto m = static_cast<std::size_t>(train.size());
  if (m != ensemble.training_size) throw InvalidArgument("loo_residuals: ensemble was fit on a different set");
  std::vector<LooPrediction> loo(m);
  parallel_for(m, threads, [&](std::size_t i) {
    loo[i] = loo_aggregate(ensemble, i, train.features.row(static_cast<Eigen::Index>(i)).transpose());
  });
  LooResiduals out;
  out.values.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.values[i] = train.targets(static_cast<Eigen::Index>(i)) - loo[i].value;
    if (loo[i].fallback_used) ++out.fallback_count;
  }
  return out;
}

double ensemble_predict(const BootstrapEnsemble& ensemble, const Eigen::Ref<const Vector>& x) {
  std::vector<double> preds(ensemble.size());
  for (std::size_t b = 0; b < ensemble.size(); ++b) preds[b] = predict(ensemble.models[b], x);
  return aggregate(preds, ensemble.phi);
}

ResidualWindow::ResidualWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("residual window capacity must be >= 1");
}

void ResidualWindow::push(double r) {
  if (!std::isfinite(r)) throw InvalidArgument("push_residual: non-finite residual");
  entries_.push_back(r);
  if (entries_.size() > capacity_) entries_.pop_front();
}

std::vector<double> ResidualWindow::sorted() const {
  std::vector<double> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end());
  return out;
}

ResidualWindow push_residual(ResidualWindow window, double r) {
  window.push(r);
  return window;
}

double empirical_quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("empirical_quantile: empty window");
  const auto m = static_cast<double>(sorted.size());
  // The 1e-9 slack keeps q*m that should be an integer from rounding up.
  const double rank = std::ceil(std::clamp(q, 0.0, 1.0) * m - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, m));
  return sorted[idx - 1];
}

double empirical_quantile(const ResidualWindow& window, double q) {
  if (window.empty()) throw InvalidArgument("empirical_quantile: empty window");
  const auto sorted = window.sorted();
  return empirical_quantile_sorted(sorted, q);
}

std::vector<double> beta_grid(double alpha, double grid_step) {
  if (!(grid_step > 0.0)) throw InvalidArgument("beta grid step must be positive");
  const auto steps = static_cast<std::size_t>(std::floor(alpha / grid_step + 1e-9));
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) grid[i] = std::min(alpha, static_cast<double>(i) * grid_step);
  return grid;
}

double interval_width_sorted(std::span<const double> sorted, double alpha, double beta) {
  return empirical_quantile_sorted(sorted, 1.0 - alpha + beta) - empirical_quantile_sorted(sorted, beta);
}

IntervalParams optimize_beta_sorted(std::span<const double> sorted, double alpha, double grid_step) {
  if (sorted.empty()) throw InvalidArgument("optimize_beta: empty window");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("optimize_beta: alpha out of (0,1)");
  IntervalParams params{alpha, 0.0, grid_step};
  double best = 0.0;
  bool first = true;
  for (double beta : beta_grid(alpha, grid_step)) {
    const double width = interval_width_sorted(sorted, alpha, beta);
    if (first || width < best) {
      best = width;
      params.beta_hat = beta;
      first = false;
    }
  }
  return params;
}

IntervalParams optimize_beta(const ResidualWindow& window, double alpha, double grid_step) {
  const auto sorted = window.sorted();
  return optimize_beta_sorted(sorted, alpha, grid_step);
}

PredictionInterval prediction_interval_sorted(double f_hat, std::span<const double> sorted,
                                              const IntervalParams& params) {
  PredictionInterval out;
  out.center = f_hat;
  out.lower = f_hat + empirical_quantile_sorted(sorted, params.beta_hat);
  out.upper = f_hat + empirical_quantile_sorted(sorted, 1.0 - params.alpha + params.beta_hat);
  return out;
}

PredictionInterval prediction_interval(double f_hat, const ResidualWindow& window, const IntervalParams& params) {
  if (window.empty()) throw InvalidArgument("prediction_interval: empty window");
  const auto sorted = window.sorted();
  return prediction_interval_sorted(f_hat, sorted, params);
}

bool refit_due(std::int64_t t, std::int64_t training_size, std::int64_t refit_step, bool is_refit) {
  if (t <= training_size) throw InvalidArgument("refit_due: requires t > T");
  if (!is_refit) return false;
  if (refit_step <= 0) throw InvalidArgument("refit_due: refit_step must be positive");
  return (t - training_size) % refit_step == 0;
}

}  // namespace olcp
