#include <doctest.h>

#include <cmath>

#include "moltx/metrics.hpp"
#include "moltx/rng.hpp"
#include "oracles.hpp"

using namespace moltx;
using metrics::BinaryEval;

TEST_CASE("roc_auc examples") {
  CHECK(metrics::roc_auc({{0.9, 0.1}, {1, 0}}) == 1.0);
  CHECK(metrics::roc_auc({{0.5, 0.5, 0.5}, {1, 0, 1}}) == 0.5);
  CHECK(metrics::roc_auc({{0.9, 0.8, 0.3}, {1, 0, 1}}) == 0.5);
  CHECK_THROWS_AS(metrics::roc_auc({{0.1, 0.2}, {1, 1}}), DegenerateLabels);
}

TEST_CASE("roc_auc equals pairwise brute force with ties") {
  Rng rng(161803);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform(11));
    BinaryEval e;
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // Coarse grid scores make ties common.
      e.scores.push_back(static_cast<double>(rng.uniform(5)) / 4.0);
      e.labels.push_back(static_cast<int>(rng.uniform(2)));
      has_pos |= e.labels.back() == 1;
      has_neg |= e.labels.back() == 0;
    }
    if (!has_pos || !has_neg) continue;
    CHECK(metrics::roc_auc(e) ==
          oracle::roc_auc_bruteforce(e.scores, e.labels));
  }
}

TEST_CASE("roc_auc invariant under strictly monotone transforms") {
  Rng rng(999);
  for (int trial = 0; trial < 50; ++trial) {
    BinaryEval e;
    for (int i = 0; i < 10; ++i) {
      e.scores.push_back(rng.uniform_real(-3.0, 3.0));
      e.labels.push_back(static_cast<int>(rng.uniform(2)));
    }
    e.labels[0] = 1;
    e.labels[1] = 0;
    BinaryEval t = e;
    for (auto& s : t.scores) s = std::exp(0.5 * s) + 7.0;
    CHECK(metrics::roc_auc(e) == metrics::roc_auc(t));
  }
}

TEST_CASE("pr_auc examples") {
  CHECK(metrics::pr_auc({{0.9, 0.8, 0.2}, {1, 1, 0}}) == doctest::Approx(1.0));
  // single positive ranked last of n = 4
  CHECK(metrics::pr_auc({{0.9, 0.8, 0.7, 0.1}, {0, 0, 0, 1}}) ==
        doctest::Approx(0.25));
  CHECK(metrics::pr_auc({{0.9, 0.8, 0.3}, {1, 0, 1}}) ==
        doctest::Approx(0.5 * (1.0 + 2.0 / 3.0)).epsilon(1e-9));
}

TEST_CASE("confusion metrics") {
  const auto all_good = metrics::confusion_metrics({{0.9, 0.1}, {1, 0}});
  CHECK(all_good.precision == 1.0);
  CHECK(all_good.sensitivity == 1.0);
  CHECK(all_good.accuracy == 1.0);
  CHECK(all_good.f1 == 1.0);

  const auto none_pred = metrics::confusion_metrics({{0.1, 0.2}, {1, 0}});
  CHECK(none_pred.precision == 0.0);
  CHECK(none_pred.sensitivity == 0.0);
  CHECK(none_pred.f1 == 0.0);
  CHECK(none_pred.accuracy == 0.5);

  // TP = FP = FN = TN = 1
  const auto even =
      metrics::confusion_metrics({{0.9, 0.8, 0.1, 0.2}, {1, 0, 1, 0}});
  CHECK(even.precision == 0.5);
  CHECK(even.sensitivity == 0.5);
  CHECK(even.accuracy == 0.5);
  CHECK(even.f1 == 0.5);
}

TEST_CASE("recall@k and ndcg@k") {
  // truth order (a, b, c) with activities (3, 2, 1); scores put b first.
  const std::vector<double> activities = {3.0, 2.0, 1.0};
  const std::vector<double> scores = {0.5, 0.9, 0.1};

  CHECK(metrics::recall_at(activities, scores, 2) == doctest::Approx(1.0));
  const double expected_ndcg =
      (1.0 * 1.0 + 2.0 / std::log2(3.0)) / (2.0 * 1.0 + 1.0 / std::log2(3.0));
  CHECK(metrics::ndcg_at(activities, scores, 2) ==
        doctest::Approx(expected_ndcg).epsilon(1e-9));

  // perfect ranking
  const std::vector<double> aligned = {0.9, 0.5, 0.1};
  for (int k = 1; k <= 3; ++k) {
    CHECK(metrics::recall_at(activities, aligned, k) == doctest::Approx(1.0));
    CHECK(metrics::ndcg_at(activities, aligned, k) == doctest::Approx(1.0));
  }

  // k = n: recall 1 regardless of order
  CHECK(metrics::recall_at(activities, {0.1, 0.2, 0.9}, 3) ==
        doctest::Approx(1.0));

  CHECK_THROWS_AS(metrics::recall_at(activities, scores, 4), Error);
  CHECK_THROWS_AS(metrics::ndcg_at(activities, scores, 0), Error);
}

TEST_CASE("ndcg stays within [0, 1]") {
  Rng rng(2718);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform(9));
    std::vector<double> acts, scores;
    for (int i = 0; i < n; ++i) {
      acts.push_back(static_cast<double>(i) + rng.uniform_real(0.0, 0.5));
      scores.push_back(rng.uniform_real(-1.0, 1.0));
    }
    const int k = 1 + static_cast<int>(rng.uniform(n));
    const double v = metrics::ndcg_at(acts, scores, k);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("percent variants take ceil(p n / 100)") {
  std::vector<double> acts = {5, 4, 3, 2, 1}, scores = {5, 4, 3, 2, 1};
  // 5% of 5 -> ceil(0.25) = 1
  CHECK(metrics::recall_at_percent(acts, scores, 5.0) == 1.0);
  CHECK(metrics::ndcg_at_percent(acts, scores, 40.0) == doctest::Approx(1.0));
}
