#pragma once

// Pluggable predictors ("arms") and the ensemble aggregation functions.

#include "olcp/core.hpp"

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace olcp {

/// Rows of `features` are samples; `targets(i)` belongs to row i.
struct TrainingSet {
  Matrix features;
  Vector targets;

  Eigen::Index size() const { return targets.size(); }
  Eigen::Index dimension() const { return features.cols(); }
};

/// Throws InvalidArgument unless the set is nonempty and shape-consistent.
void check_training_set(const TrainingSet& data);

enum class PredictorKind { ridge, knn, tree };

struct PredictorSpec {
  PredictorKind kind = PredictorKind::ridge;
  double lambda = 1.0;       // ridge penalty, >= 0
  bool fit_intercept = true; // ridge: unpenalized intercept
  int k = 5;                 // knn neighbours, >= 1
  int max_depth = 3;         // tree depth, >= 0
};

/// Empty when the hyperparameters are valid for the kind.
std::vector<std::string> spec_violations(const PredictorSpec& spec);

/// "ridge", "ridge:0.5", "knn:7", "tree:4", "ridge:0.5:nointercept".
PredictorSpec parse_predictor_spec(const std::string& text);
std::string to_string(const PredictorSpec& spec);
std::string to_string(PredictorKind kind);

struct ConstantModel {
  double value = 0.0;
};

struct RidgeModel {
  Vector coefficients;
  double intercept = 0.0;
};

struct KnnModel {
  Matrix features;
  Vector targets;
  int k = 1;
};

struct TreeNode {
  // Leaf when feature < 0.
  int feature = -1;
  double threshold = 0.0;
  double value = 0.0;
  int left = -1;
  int right = -1;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

/// Immutable fitted predictor; cheap to copy and safe to share across threads.
class Model {
 public:
  using Impl = std::variant<ConstantModel, RidgeModel, KnnModel, TreeModel>;

  Model(Impl impl, Eigen::Index dimension)
      : impl_(std::make_shared<const Impl>(std::move(impl))), dimension_(dimension) {}

  const Impl& impl() const { return *impl_; }
  Eigen::Index dimension() const { return dimension_; }

 private:
  std::shared_ptr<const Impl> impl_;
  Eigen::Index dimension_;
};

/// Fits `spec` on `data`. All-equal targets give a ConstantModel, except for
/// ridge without intercept, which has no constant term to absorb them.
Model fit(const PredictorSpec& spec, const TrainingSet& data);

double predict(const Model& model, const Eigen::Ref<const Vector>& x);

enum class Aggregator { mean, median };

std::string to_string(Aggregator phi);
Aggregator parse_aggregator(const std::string& text);

double aggregate(std::span<const double> values, Aggregator phi);

}  // namespace olcp
