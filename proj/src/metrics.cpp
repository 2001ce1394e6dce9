#include "moltx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "moltx/error.hpp"

namespace moltx::metrics {

namespace {

void check_eval(const BinaryEval& e) {
  if (e.scores.size() != e.labels.size())
    throw DimensionMismatch("scores/labels length mismatch");
  std::int64_t pos = 0;
  for (int y : e.labels) pos += y;
  if (pos == 0 || pos == static_cast<std::int64_t>(e.labels.size()))
    throw DegenerateLabels("need at least one positive and one negative");
}

std::vector<int> order_by_score_desc(const std::vector<double>& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[a] > scores[b];
  });
  return order;
}

}  // namespace

double roc_auc(const BinaryEval& e) {
  check_eval(e);
  const std::size_t n = e.scores.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return e.scores[a] < e.scores[b]; });

  // Doubled average ranks stay integral under ties.
  std::vector<std::int64_t> rank2(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && e.scores[order[j + 1]] == e.scores[order[i]]) ++j;
    // 1-based ranks i+1 .. j+1 tie; doubled average = (i+1) + (j+1).
    const std::int64_t r2 = static_cast<std::int64_t>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    i = j + 1;
  }

  std::int64_t n_pos = 0;
  std::int64_t rank2_pos_sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (e.labels[k] == 1) {
      ++n_pos;
      rank2_pos_sum += rank2[k];
    }
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  // 2U = sum(rank2+) - 2 * n_pos(n_pos+1)/2
  const std::int64_t u2 = rank2_pos_sum - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(n_pos) *
                                    static_cast<double>(n_neg));
}

double pr_auc(const BinaryEval& e) {
  check_eval(e);
  const std::vector<int> order = order_by_score_desc(e.scores);
  std::int64_t total_pos = 0;
  for (int y : e.labels) total_pos += y;

  double ap = 0.0;
  std::int64_t tp = 0, seen = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::int64_t group_pos = e.labels[order[i]];
    while (j + 1 < order.size() &&
           e.scores[order[j + 1]] == e.scores[order[i]]) {
      ++j;
      group_pos += e.labels[order[j]];
    }
    const std::int64_t group_size = static_cast<std::int64_t>(j - i + 1);
    tp += group_pos;
    seen += group_size;
    if (group_pos > 0) {
      const double precision =
          static_cast<double>(tp) / static_cast<double>(seen);
      const double recall_inc =
          static_cast<double>(group_pos) / static_cast<double>(total_pos);
      ap += precision * recall_inc;
    }
    i = j + 1;
  }
  return ap;
}

ConfusionMetrics confusion_metrics(const BinaryEval& e, double threshold) {
  if (e.scores.size() != e.labels.size())
    throw DimensionMismatch("scores/labels length mismatch");
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < e.scores.size(); ++i) {
    const bool pred = e.scores[i] >= threshold;
    if (pred && e.labels[i] == 1) ++tp;
    else if (pred) ++fp;
    else if (e.labels[i] == 1) ++fn;
    else ++tn;
  }
  ConfusionMetrics m;
  m.precision = (tp + fp) > 0
                    ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                    : 0.0;
  m.sensitivity = (tp + fn) > 0
                      ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                      : 0.0;
  m.accuracy = static_cast<double>(tp + tn) /
               static_cast<double>(tp + fp + tn + fn);
  m.f1 = (m.precision + m.sensitivity) > 0.0
             ? 2.0 * m.precision * m.sensitivity /
                   (m.precision + m.sensitivity)
             : 0.0;
  return m;
}

namespace {

void check_ranked(const std::vector<double>& activities,
                  const std::vector<double>& scores, int k) {
  if (activities.size() != scores.size())
    throw DimensionMismatch("activities/scores length mismatch");
  if (k < 1 || static_cast<std::size_t>(k) > activities.size())
    throw Error("k out of range: " + std::to_string(k));
}

std::vector<int> order_desc(const std::vector<double>& xs) {
  std::vector<int> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return xs[a] > xs[b]; });
  return order;
}

int k_from_percent(std::size_t n, double percent) {
  return static_cast<int>(
      std::ceil(percent * static_cast<double>(n) / 100.0));
}

}  // namespace

double recall_at(const std::vector<double>& activities,
                 const std::vector<double>& scores, int k) {
  check_ranked(activities, scores, k);
  const auto by_truth = order_desc(activities);
  const auto by_score = order_desc(scores);
  std::vector<char> top_truth(activities.size(), 0);
  for (int i = 0; i < k; ++i) top_truth[by_truth[i]] = 1;
  int hits = 0;
  for (int i = 0; i < k; ++i) hits += top_truth[by_score[i]];
  return static_cast<double>(hits) / static_cast<double>(k);
}

double ndcg_at(const std::vector<double>& activities,
               const std::vector<double>& scores, int k) {
  check_ranked(activities, scores, k);
  const std::size_t n = activities.size();
  const auto by_truth = order_desc(activities);
  std::vector<double> rel(n);
  for (std::size_t pos = 0; pos < n; ++pos)
    rel[by_truth[pos]] = static_cast<double>(n - 1 - pos);

  const auto by_score = order_desc(scores);
  double dcg = 0.0, idcg = 0.0;
  for (int pos = 0; pos < k; ++pos) {
    const double discount = 1.0 / std::log2(static_cast<double>(pos) + 2.0);
    dcg += rel[by_score[pos]] * discount;
    idcg += rel[by_truth[pos]] * discount;
  }
  return idcg > 0.0 ? dcg / idcg : 1.0;
}

double recall_at_percent(const std::vector<double>& activities,
                         const std::vector<double>& scores, double percent) {
  return recall_at(activities, scores, k_from_percent(activities.size(), percent));
}

double ndcg_at_percent(const std::vector<double>& activities,
                       const std::vector<double>& scores, double percent) {
  return ndcg_at(activities, scores, k_from_percent(activities.size(), percent));
}

}  // namespace moltx::metrics
