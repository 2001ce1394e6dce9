#pragma once

#include <vector>

namespace moltx::metrics {

struct BinaryEval {
  std::vector<double> scores;
  std::vector<int> labels;  // 0 / 1
};

// Mann-Whitney statistic: P(score+ > score-) + 0.5 P(score+ = score-) over
// all positive-negative pairs. Exact (integer numerator) so it agrees with
// the brute-force pairwise definition bit for bit.
double roc_auc(const BinaryEval& e);

// Average precision with tied scores grouped at a single cut.
double pr_auc(const BinaryEval& e);

struct ConfusionMetrics {
  double precision = 0.0;
  double sensitivity = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
};

// Threshold predictions at `threshold`; precision and F1 are 0 when no
// positives are predicted.
ConfusionMetrics confusion_metrics(const BinaryEval& e,
                                   double threshold = 0.5);

// Ranking metrics against a ground-truth ordering given by real-valued
// activities (higher is better; values must be distinct).

// |top-k by score  intersect  top-k by activity| / k.
double recall_at(const std::vector<double>& activities,
                 const std::vector<double>& scores, int k);

// DCG/IDCG with linear gain rel_i = n - true_rank(i) (best item n-1) and
// 1/log2(position + 1) discount.
double ndcg_at(const std::vector<double>& activities,
               const std::vector<double>& scores, int k);

// k = ceil(percent * n / 100) variants.
double recall_at_percent(const std::vector<double>& activities,
                         const std::vector<double>& scores, double percent);
double ndcg_at_percent(const std::vector<double>& activities,
                       const std::vector<double>& scores, double percent);

}  // namespace moltx::metrics
