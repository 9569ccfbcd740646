#pragma once

// Bootstrap-ensemble conformal prediction intervals: ensembles fitted on
// resampled training sets, out-of-bag (leave-one-out) residuals, sliding
// residual windows, width-minimizing quantile offsets and the intervals
// built from them.

#include "olcp/core.hpp"
#include "olcp/learners.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace olcp {

/// Bootstrap multiset of training indices. Stored 0-based.
using IndexSet = std::vector<std::size_t>;

/// B multisets, each holding m indices drawn uniformly with replacement
/// from [0, m). Multiset b draws from derive_substream(rng, {bootstrap, b}).
std::vector<IndexSet> sample_bootstrap_indices(std::size_t m, std::size_t count, RngSeed rng);

struct BootstrapEnsemble {
  std::vector<Model> models;
  std::vector<IndexSet> index_sets;
  Aggregator phi = Aggregator::mean;
  std::int64_t fitted_at_round = 0;
  std::size_t training_size = 0;

  // in_bag[b][i] is true when training index i appears in multiset b.
  std::vector<std::vector<bool>> in_bag;

  std::size_t size() const { return models.size(); }
  bool contains(std::size_t b, std::size_t i) const { return in_bag[b][i]; }
};

/// Assembles an ensemble from already-fitted models and their index sets.
BootstrapEnsemble make_ensemble(std::vector<Model> models, std::vector<IndexSet> index_sets,
                                std::size_t training_size, Aggregator phi);

/// Model b is fit(spec, train restricted to S_b with multiplicity).
/// Work is split over b across `threads` workers; results do not depend on it.
BootstrapEnsemble fit_ensemble(const TrainingSet& train, const PredictorSpec& spec, std::size_t count,
                               Aggregator phi, RngSeed rng, int threads = 1);

/// Rows of `train` selected by `indices`, repeated with multiplicity.
TrainingSet resample(const TrainingSet& train, const IndexSet& indices);

struct LooPrediction {
  double value = 0.0;
  bool fallback_used = false;
};

/// Aggregates the models whose multiset excludes training index i. If every
/// model saw i, aggregates all of them and flags the fallback.
LooPrediction loo_aggregate(const BootstrapEnsemble& ensemble, std::size_t i, const Eigen::Ref<const Vector>& x);

struct LooResiduals {
  std::vector<double> values;  // y_i - f_{-i}(x_i)
  std::size_t fallback_count = 0;
};

LooResiduals loo_residuals(const BootstrapEnsemble& ensemble, const TrainingSet& train, int threads = 1);

double ensemble_predict(const BootstrapEnsemble& ensemble, const Eigen::Ref<const Vector>& x);

/// FIFO of the most recent residuals, bounded by capacity.
class ResidualWindow {
 public:
  explicit ResidualWindow(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::deque<double>& entries() const { return entries_; }

  /// Appends r, evicting the oldest entry when full. Throws on non-finite r.
  void push(double r);

  /// Entries sorted ascending.
  std::vector<double> sorted() const;

 private:
  std::size_t capacity_;
  std::deque<double> entries_;
};

ResidualWindow push_residual(ResidualWindow window, double r);

/// Lower empirical quantile r(max(1, ceil(q*m))) of an ascending sample.
double empirical_quantile_sorted(std::span<const double> sorted, double q);
double empirical_quantile(const ResidualWindow& window, double q);

struct IntervalParams {
  double alpha = 0.1;
  double beta_hat = 0.0;
  double grid_step = 0.01;
};

/// Grid {0, step, 2 step, ...} truncated at alpha.
std::vector<double> beta_grid(double alpha, double grid_step);

/// Width F^{-1}(1 - alpha + beta) - F^{-1}(beta) of an ascending sample.
double interval_width_sorted(std::span<const double> sorted, double alpha, double beta);

/// Width-minimizing beta over beta_grid(alpha, grid_step); ties go to the
/// smallest beta.
IntervalParams optimize_beta(const ResidualWindow& window, double alpha, double grid_step);
IntervalParams optimize_beta_sorted(std::span<const double> sorted, double alpha, double grid_step);

struct PredictionInterval {
  double center = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool fallback_used = false;

  double width() const { return upper - lower; }
  bool contains(double y) const { return lower <= y && y <= upper; }
};

PredictionInterval prediction_interval(double f_hat, const ResidualWindow& window, const IntervalParams& params);
PredictionInterval prediction_interval_sorted(double f_hat, std::span<const double> sorted,
                                              const IntervalParams& params);

/// True iff is_refit and (t - T) mod refit_step == 0. Requires t > T.
bool refit_due(std::int64_t t, std::int64_t training_size, std::int64_t refit_step, bool is_refit);

}  // namespace olcp
