#include <doctest.h>

#include "olcp/metrics.hpp"

#include <algorithm>
#include <set>

using namespace olcp;

namespace {

double pairwise_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Thresholds at every distinct score, descending; precision and recall of
// "score >= threshold"; area as sum of recall increments times precision.
double step_auprc(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  double area = 0.0;
  double prev_recall = 0.0;
  for (double thr : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= thr) (y[i] ? tp : fp) += 1.0;
    }
    const double recall = tp / positives;
    area += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
  }
  return area;
}

}  // namespace

TEST_CASE("average regret") {
  const std::vector<double> best{1, 2, 3};
  CHECK(average_regret(best, best).running_average == std::vector<double>{0, 0, 0});

  const std::vector<double> chosen{0, 0, 0, 0}, gap{1, 0, 0, 0};
  const auto r = average_regret(chosen, gap);
  CHECK(r.instantaneous == gap);
  CHECK(r.running_average[0] == 1.0);
  CHECK(r.running_average[1] == 0.5);
  CHECK(r.running_average[2] == doctest::Approx(1.0 / 3.0));
  CHECK(r.running_average[3] == 0.25);

  const std::vector<double> g(10, 0.3), z(10, 0.0);
  for (double v : average_regret(z, g).running_average) CHECK(v == doctest::Approx(0.3));
}

TEST_CASE("auroc basics") {
  CHECK(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
  CHECK(auroc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{0, 1, 1}) == 0.5);
  CHECK_THROWS_AS(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), InvalidArgument);
}

TEST_CASE("auroc and auprc match their oracles with ties") {
  Rng rng = make_rng(RngSeed{21});
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(uniform_index(rng, 12)) / 4.0;
      y[i] = uniform01(rng) < 0.3 ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    CHECK(std::abs(auroc(s, y) - pairwise_auroc(s, y)) <= 1e-12);
    CHECK(std::abs(auprc(s, y) - step_auprc(s, y)) <= 1e-12);
  }
}

TEST_CASE("auroc invariances") {
  Rng rng = make_rng(RngSeed{22});
  std::vector<double> s(150), t(150), neg(150);
  std::vector<int> y(150);
  for (std::size_t i = 0; i < 150; ++i) {
    s[i] = standard_normal(rng);
    y[i] = uniform01(rng) < 0.4;
    t[i] = std::exp(3.0 * s[i]) + 1.0;
    neg[i] = -s[i];
  }
  CHECK(auroc(s, y) == doctest::Approx(auroc(t, y)).epsilon(1e-14));
  CHECK(auroc(s, y) + auroc(neg, y) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("auprc anchors") {
  CHECK(auprc(std::vector<double>{0.9, 0.8, 0.1, 0.2}, std::vector<int>{1, 1, 0, 0}) == 1.0);
  for (std::size_t n : {2u, 5u, 17u}) {
    std::vector<double> s(n);
    std::vector<int> y(n, 0);
    for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<double>(n - i);
    y[n - 1] = 1;
    CHECK(auprc(s, y) == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-14));
  }
}

TEST_CASE("auprc of random scores is near the prevalence") {
  Rng rng = make_rng(RngSeed{23});
  for (double p : {0.1, 0.3, 0.6}) {
    std::vector<double> s(10000);
    std::vector<int> y(10000);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = uniform01(rng);
      y[i] = uniform01(rng) < p;
    }
    CHECK(std::abs(auprc(s, y) - p) <= 0.03);
  }
}

TEST_CASE("confusion metrics") {
  const auto all = confusion_metrics(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}, 0.5);
  CHECK(all.accuracy == 1.0);
  CHECK(all.f_measure == 1.0);

  const auto none = confusion_metrics(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 0}, 0.5);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f_measure == 0.0);

  const auto half = confusion_metrics(std::vector<double>{0.9, 0.9, 0.1, 0.1}, std::vector<int>{1, 0, 1, 0}, 0.5);
  CHECK(half.accuracy == 0.5);
  CHECK(half.precision == 0.5);
  CHECK(half.recall == 0.5);
  CHECK(half.f_measure == 0.5);

  Rng rng = make_rng(RngSeed{3});
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(20);
    std::vector<int> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
      s[i] = uniform01(rng);
      y[i] = uniform01(rng) < 0.5;
    }
    const auto m = confusion_metrics(s, y, uniform01(rng));
    CHECK(m.accuracy >= 0.0);
    CHECK(m.accuracy <= 1.0);
    CHECK(m.f_measure >= 0.0);
    CHECK(m.f_measure <= 1.0);
  }
}

TEST_CASE("coverage rate") {
  const std::vector<PredictionInterval> iv{{0, -1, 1, false}, {0, -1, 1, false}, {0, -1, 1, false},
                                           {0, -1, 1, false}};
  CHECK(coverage_rate(iv, std::vector<double>{0, 0, 0, 0}) == 1.0);
  CHECK(coverage_rate(iv, std::vector<double>{2, 3, 4, 5}) == 0.0);
  CHECK(coverage_rate(iv, std::vector<double>{0, 5, 1, -2}) == 0.5);
}

TEST_CASE("clinical utility anchors") {
  const UtilityParams p;
  const std::vector<std::vector<int>> labels{
      std::vector<int>(30, 0), [] {
        std::vector<int> v(40, 0);
        std::fill(v.begin() + 20, v.end(), 1);
        return v;
      }()};
  CHECK(clinical_utility(labels, labels, p) == 1.0);
  std::vector<std::vector<int>> none;
  for (const auto& l : labels) none.emplace_back(l.size(), 0);
  CHECK(clinical_utility(none, labels, p) == 0.0);
}

TEST_CASE("clinical utility on a hand-evaluated toy cohort") {
  UtilityParams p;
  p.dt_early = -4;
  p.dt_optimal = -2;
  p.dt_late = 1;
  p.max_u_tp = 1;
  p.min_u_fn = -2;
  p.u_fp = -0.1;
  p.u_tn = 0;
  const std::vector<std::vector<int>> labels{{0, 0, 0, 1, 1}, {0, 0, 0}, {0, 1}};
  const std::vector<std::vector<int>> preds{{1, 0, 1, 1, 0}, {1, 0, 1}, {0, 0}};
  // Patient 1: t_s = 5; hours at -5..-1 relative: -0.1, 0, 0.5, 1, -2/3.
  CHECK(patient_utility(preds[0], labels[0], p) == doctest::Approx(-0.1 + 0.5 + 1.0 - 2.0 / 3.0));
  CHECK(patient_utility(preds[1], labels[1], p) == doctest::Approx(-0.2));
  CHECK(patient_utility(preds[2], labels[2], p) == 0.0);
  // Inaction -2/3; optimal 1 + 2/3 + 1.
  CHECK(clinical_utility(preds, labels, p) == doctest::Approx(1.2 / (8.0 / 3.0 + 2.0 / 3.0)));
}

TEST_CASE("flipping a false negative to a true positive never lowers utility") {
  const UtilityParams p;
  Rng rng = make_rng(RngSeed{5});
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + uniform_index(rng, 40);
    std::vector<int> y(n, 0);
    std::fill(y.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, n)), y.end(), 1);
    std::vector<int> pred(n);
    for (auto& v : pred) v = uniform01(rng) < 0.5;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1 && pred[t] == 0) {
        auto flipped = pred;
        flipped[t] = 1;
        CHECK(patient_utility(flipped, y, p) >= patient_utility(pred, y, p) - 1e-12);
      }
    }
  }
}

TEST_CASE("utility parameter validation and sepsis time") {
  UtilityParams bad;
  bad.dt_early = 0;
  CHECK_FALSE(utility_violations(bad).empty());
  CHECK(utility_violations(UtilityParams{}).empty());
  CHECK_FALSE(sepsis_time(std::vector<int>{0, 0}, UtilityParams{}).has_value());
  CHECK(*sepsis_time(std::vector<int>{0, 0, 1}, UtilityParams{}) == 8.0);
}
