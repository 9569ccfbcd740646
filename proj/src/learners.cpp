#include "olcp/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace olcp {

void check_training_set(const TrainingSet& data) {
  if (data.targets.size() == 0) throw InvalidArgument("training set is empty");
  if (data.features.rows() != data.targets.size())
    throw InvalidArgument("training set: features and targets differ in length");
  if (data.features.cols() == 0) throw InvalidArgument("training set: zero-dimensional features");
  if (!data.features.allFinite() || !data.targets.allFinite())
    throw InvalidArgument("training set contains non-finite values");
}

std::vector<std::string> spec_violations(const PredictorSpec& spec) {
  std::vector<std::string> out;
  switch (spec.kind) {
    case PredictorKind::ridge:
      if (!(spec.lambda >= 0.0) || !std::isfinite(spec.lambda)) out.emplace_back("ridge lambda must be >= 0");
      break;
    case PredictorKind::knn:
      if (spec.k < 1) out.emplace_back("knn k must be >= 1");
      break;
    case PredictorKind::tree:
      if (spec.max_depth < 0) out.emplace_back("tree max_depth must be >= 0");
      break;
  }
  return out;
}

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::ridge: return "ridge";
    case PredictorKind::knn: return "knn";
    case PredictorKind::tree: return "tree";
  }
  return "unknown";
}

std::string to_string(const PredictorSpec& spec) {
  std::ostringstream os;
  os << to_string(spec.kind) << ':';
  switch (spec.kind) {
    case PredictorKind::ridge:
      os << spec.lambda;
      if (!spec.fit_intercept) os << ":nointercept";
      break;
    case PredictorKind::knn: os << spec.k; break;
    case PredictorKind::tree: os << spec.max_depth; break;
  }
  return os.str();
}

PredictorSpec parse_predictor_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.empty() || parts.size() > 3) throw InvalidArgument("bad learner spec '" + text + "'");

  PredictorSpec spec;
  const std::string& kind = parts[0];
  try {
    if (kind == "ridge") {
      spec.kind = PredictorKind::ridge;
      if (parts.size() >= 2) spec.lambda = std::stod(parts[1]);
      if (parts.size() == 3) {
        if (parts[2] != "nointercept") throw InvalidArgument("bad ridge option '" + parts[2] + "'");
        spec.fit_intercept = false;
      }
    } else if (kind == "knn" && parts.size() <= 2) {
      spec.kind = PredictorKind::knn;
      if (parts.size() == 2) spec.k = std::stoi(parts[1]);
    } else if (kind == "tree" && parts.size() <= 2) {
      spec.kind = PredictorKind::tree;
      if (parts.size() == 2) spec.max_depth = std::stoi(parts[1]);
    } else {
      throw InvalidArgument("unknown learner spec '" + text + "'");
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const InvalidArgument*>(&e)) throw;
    throw InvalidArgument("bad learner hyperparameter in '" + text + "'");
  }
  if (auto v = spec_violations(spec); !v.empty()) throw InvalidArgument(v.front());
  return spec;
}

namespace {

bool constant_targets(const Vector& y) { return (y.array() == y(0)).all(); }

RidgeModel fit_ridge(const PredictorSpec& spec, const TrainingSet& data) {
  const Eigen::Index d = data.dimension();
  Matrix x = data.features;
  Vector y = data.targets;
  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(d);
  double y_mean = 0.0;
  if (spec.fit_intercept) {
    x_mean = x.colwise().mean();
    y_mean = y.mean();
    x.rowwise() -= x_mean;
    y.array() -= y_mean;
  }

  RidgeModel model;
  if (spec.lambda > 0.0) {
    Matrix gram = x.transpose() * x;
    gram.diagonal().array() += spec.lambda;
    model.coefficients = gram.llt().solve(x.transpose() * y);
  } else {
    // Minimum-norm least squares; covers rank-deficient designs.
    model.coefficients = x.completeOrthogonalDecomposition().solve(y);
  }
  model.intercept = y_mean - x_mean.dot(model.coefficients);
  return model;
}

KnnModel fit_knn(const PredictorSpec& spec, const TrainingSet& data) {
  return KnnModel{data.features, data.targets, spec.k};
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, int max_depth) : data_(data), max_depth_(max_depth) {}

  TreeModel build() {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(data_.size()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    grow(rows, 0);
    return TreeModel{std::move(nodes_)};
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double sse = 0.0;
  };

  double mean_of(const std::vector<Eigen::Index>& rows) const {
    double sum = 0.0;
    for (auto r : rows) sum += data_.targets(r);
    return sum / static_cast<double>(rows.size());
  }

  int grow(std::vector<Eigen::Index>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0.0, mean_of(rows), -1, -1});
    if (depth >= max_depth_ || rows.size() < 2) return id;

    const Split split = best_split(rows);
    if (split.feature < 0) return id;

    std::vector<Eigen::Index> left;
    std::vector<Eigen::Index> right;
    for (auto r : rows) {
      (data_.features(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Scans midpoints between consecutive distinct values per feature.
  // A candidate replaces the incumbent only on a strict decrease beyond
  // rounding noise, so ties resolve to (lowest feature, lowest threshold).
  Split best_split(std::vector<Eigen::Index>& rows) const {
    const auto n = rows.size();
    double total = 0.0;
    double total_sq = 0.0;
    for (auto r : rows) {
      total += data_.targets(r);
      total_sq += data_.targets(r) * data_.targets(r);
    }
    const double parent_sse = total_sq - total * total / static_cast<double>(n);

    Split best;
    best.sse = parent_sse;
    std::vector<Eigen::Index> order(rows);
    for (int f = 0; f < data_.dimension(); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return data_.features(a, f) < data_.features(b, f);
      });
      double left_sum = 0.0;
      double left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double y = data_.targets(order[i]);
        left_sum += y;
        left_sq += y * y;
        const double lo = data_.features(order[i], f);
        const double hi = data_.features(order[i + 1], f);
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        const double right_sum = total - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
        if (sse < best.sse - 1e-12 * (1.0 + std::abs(best.sse))) {
          best = Split{f, 0.5 * (lo + hi), sse};
        }
      }
    }
    return best;
  }

  const TrainingSet& data_;
  int max_depth_;
  std::vector<TreeNode> nodes_;
};

struct Predictor {
  const Eigen::Ref<const Vector>& x;

  double operator()(const ConstantModel& m) const { return m.value; }

  double operator()(const RidgeModel& m) const { return m.intercept + m.coefficients.dot(x); }

  double operator()(const KnnModel& m) const {
    const auto n = static_cast<std::size_t>(m.targets.size());
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(m.k), n);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = {(m.features.row(static_cast<Eigen::Index>(i)).transpose() - x).squaredNorm(), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += m.targets(static_cast<Eigen::Index>(dist[i].second));
    return sum / static_cast<double>(k);
  }

  double operator()(const TreeModel& m) const {
    int node = 0;
    while (m.nodes[node].feature >= 0) {
      const TreeNode& n = m.nodes[node];
      node = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return m.nodes[node].value;
  }
};

}  // namespace

Model fit(const PredictorSpec& spec, const TrainingSet& data) {
  check_training_set(data);
  if (auto v = spec_violations(spec); !v.empty()) throw InvalidArgument(v.front());
  const Eigen::Index d = data.dimension();
  const bool through_origin = spec.kind == PredictorKind::ridge && !spec.fit_intercept;
  if (!through_origin && constant_targets(data.targets)) return Model(ConstantModel{data.targets(0)}, d);

  switch (spec.kind) {
    case PredictorKind::ridge: return Model(fit_ridge(spec, data), d);
    case PredictorKind::knn: return Model(fit_knn(spec, data), d);
    case PredictorKind::tree: return Model(TreeBuilder(data, spec.max_depth).build(), d);
  }
  throw InvalidArgument("unknown predictor kind");
}

double predict(const Model& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.dimension()) {
    throw InvalidArgument("predict: dimension mismatch (expected " + std::to_string(model.dimension()) +
                          ", got " + std::to_string(x.size()) + ")");
  }
  return std::visit(Predictor{x}, model.impl());
}

std::string to_string(Aggregator phi) { return phi == Aggregator::mean ? "mean" : "median"; }

Aggregator parse_aggregator(const std::string& text) {
  if (text == "mean") return Aggregator::mean;
  if (text == "median") return Aggregator::median;
  throw InvalidArgument("unknown aggregator '" + text + "'");
}

double aggregate(std::span<const double> values, Aggregator phi) {
  if (values.empty()) throw InvalidArgument("aggregate: empty input");
  if (phi == Aggregator::mean) {
    double sum = 0.0;
    for (double v : values) sum += v;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    // Rounding in the sum can push the mean a few ulps outside the range.
    return std::clamp(sum / static_cast<double>(values.size()), *lo, *hi);
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return sorted[mid];
  return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

}  // namespace olcp
