#pragma once

#include <span>
#include <vector>

#include "moltx/dmpnn.hpp"
#include "moltx/molgraph.hpp"
#include "moltx/params.hpp"
#include "moltx/tape.hpp"

namespace moltx {

// Compound prioritization: a linear scorer over encoder embeddings trained
// end-to-end with a pairwise logistic surrogate of the non-concordance
// index, plus an L2 penalty over every trainable parameter.

// Fraction of ground-truth-ordered pairs the scores rank incorrectly; ties
// count as incorrect. CI = 1 - nCI.
double nci(const std::vector<double>& activities,
           const std::vector<double>& scores);

// dmpna / dmpn score learned embeddings; the fingerprint baselines score
// fixed Morgan vectors with the same loss.
enum class RankFeatures { kDmpna, kDmpn, kMorgan, kMorganCount };

const char* rank_features_name(RankFeatures f);
std::optional<RankFeatures> rank_features_from_name(std::string_view name);

struct RankingConfig {
  RankFeatures features = RankFeatures::kDmpna;
  EncoderConfig encoder;
  int fp_radius = 2;
  int fp_dim = 2048;
  double l2_lambda = 1e-6;
  int epochs = 50;
  int batch_size = 128;
  double lr = 1e-3;
  std::uint64_t seed = 0;

  void normalize();  // aligns encoder pooling with the feature choice
  bool uses_encoder() const {
    return features == RankFeatures::kDmpna || features == RankFeatures::kDmpn;
  }
};

struct RankingModel {
  RankingConfig cfg;
  ParamSet params;  // [enc.*] plus "scorer.w"

  static RankingModel make(const RankingConfig& cfg);
};

// phi(r) = w . r
double score(const std::vector<double>& embedding,
             const std::vector<double>& w);

// Mean over all ground-truth-ordered within-batch pairs of
// log(1 + exp(-(phi_i - phi_j))); requires at least one ordered pair.
Value build_rank_loss(Tape& tape, std::span<const Value> scores,
                      std::span<const double> activities);

// rank loss + l2_lambda * sum of squared parameters, on one minibatch.
struct RankGraph {
  Value objective;
  Value rank_loss;
};

RankGraph build_rank_objective(Tape& tape, RankingModel& model,
                               std::span<const CompoundRecord* const> batch);

std::vector<double> predict_rank_scores(
    RankingModel& model, std::span<const CompoundRecord> records);

struct RankEpochStats {
  int epoch = 0;
  double objective = 0.0;
  double train_nci = 0.0;
};

struct RankTrainResult {
  std::vector<RankEpochStats> history;
};

RankTrainResult train_gnncp(RankingModel& model, const Dataset& train);

}  // namespace moltx
