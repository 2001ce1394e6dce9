#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moltx/dmpnn.hpp"
#include "moltx/fingerprint.hpp"
#include "moltx/molgraph.hpp"
#include "moltx/params.hpp"
#include "moltx/tape.hpp"

namespace moltx {

// TAc trains one classifier jointly on both domains with an alpha-weighted
// source loss. The -f / -c / -fc variants add a feature-wise discriminator
// (per-dimension source probability, entropy-scales the embedding), a
// compound-wise discriminator, or both, trained adversarially through a
// gradient reversal layer. DANN is the labeled-source / unlabeled-target
// baseline with a plain domain classifier on r.
enum class Variant { kTAc, kTAcF, kTAcC, kTAcFC, kDANN, kNoT, kDT };

const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);
bool variant_has_feature_disc(Variant v);
bool variant_has_compound_disc(Variant v);

struct TransferConfig {
  Variant variant = Variant::kTAc;
  double alpha = 0.5;    // source classification weight
  double lambda = 0.01;  // discriminator weight; forced to 0 for TAc
  EncoderConfig encoder;
  int classifier_hidden = 100;
  int disc_hidden = 100;
  int epochs = 40;
  int batch_size = 10;   // per domain
  double lr_start = 1e-3;
  double lr_end = 1e-4;
  std::uint64_t seed = 0;

  void normalize();  // applies variant-forced settings
};

// Two-layer net, ReLU hidden, sigmoid output.
struct HeadConfig {
  int in = 0;
  int hidden = 100;
  int out = 1;
};

void add_head_params(ParamSet& params, const std::string& prefix,
                     const HeadConfig& cfg, std::uint64_t seed);

struct HeadRef {
  Value W1, b1, W2, b2;
};

HeadRef head_leaves(Tape& tape, ParamSet& params, const std::string& prefix);
Value head_forward(Tape& tape, const HeadRef& head, Value x);

struct TransferModel {
  TransferConfig cfg;
  ParamSet params;  // enc.* cls.* [fdisc.*] [gdisc.*]

  static TransferModel make(const TransferConfig& cfg);
};

struct TransferLeaves {
  EncoderRef enc;
  HeadRef cls;
  HeadRef fdisc;  // valid iff variant has the feature-wise discriminator
  HeadRef gdisc;  // valid iff variant has the compound-wise one (or DANN)
};

TransferLeaves transfer_leaves(Tape& tape, TransferModel& model);

struct TransferGraphOptions {
  // fd-suite mutation hook: >= 0 removes the reversal (plain pass-through).
  double grl_scale = -1.0;
  // When set, the classifier-path entropy gains are overridden with these
  // captured constants (batchS order then batchT order).
  const std::vector<Tensor>* frozen_gains = nullptr;
};

// One minibatch objective: total = lambda (L_l + L_g) + L_c where every
// discriminator input passes through the GRL, so a single backward descends
// the discriminators on their own losses while the encoder receives the
// negated discriminator gradient plus the classification gradient. The
// classifier consumes z = (1 + H) .* r with H detached: gradients of L_c
// never reach the feature-wise discriminator (and with lambda = 0 the
// discriminator parameters receive exactly zero).
struct TransferBatchGraph {
  Value total;
  Value l_c;
  Value l_l;  // invalid when the variant has no feature-wise discriminator
  Value l_g;  // invalid when the variant has no compound-wise discriminator
  std::vector<Tensor> gains;  // per-compound H values (S then T)
};

TransferBatchGraph build_transfer_graph(
    Tape& tape, TransferModel& model,
    std::span<const CompoundRecord* const> batch_source,
    std::span<const CompoundRecord* const> batch_target,
    const TransferGraphOptions& opts = {});

// Forward-only classifier probabilities (variant feed: z when the model has
// a feature-wise discriminator, r otherwise).
std::vector<double> predict_scores(TransferModel& model,
                                   std::span<const CompoundRecord> records);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_roc_auc = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ParamSet best_params;
  int best_epoch = 0;
  double best_val_roc_auc = 0.0;
  std::vector<EpochStats> history;
};

// Minibatch loop with per-epoch exponential lr decay from lr_start to
// lr_end and early stopping on validation ROC-AUC (best epoch returned).
// DANN ignores target-train labels entirely.
TrainResult train(TransferModel& model, const Dataset& source,
                  const Dataset& target_train, const Dataset& target_val);

TrainResult train_dann(TransferModel& model, const Dataset& source,
                       const Dataset& target_train_unlabeled,
                       const Dataset& target_val);

// Single-task baselines: a 2-layer classifier over fingerprints or the
// encoder, trained on the target fold only (NoT) or on the pooled union of
// all source compounds and the target fold (DT).
enum class BaselineFeatures { kMorgan, kMorganCount, kEncoder };
enum class BaselineMode { kNoT, kDT };

const char* baseline_features_name(BaselineFeatures f);
std::optional<BaselineFeatures> baseline_features_from_name(
    std::string_view name);

struct BaselineConfig {
  BaselineFeatures features = BaselineFeatures::kEncoder;
  BaselineMode mode = BaselineMode::kNoT;
  int fp_radius = 3;
  int fp_dim = 2048;
  EncoderConfig encoder;
  int classifier_hidden = 100;
  int epochs = 40;
  int batch_size = 10;
  double lr_start = 1e-3;
  double lr_end = 1e-4;
  std::uint64_t seed = 0;
};

struct BaselineModel {
  BaselineConfig cfg;
  ParamSet params;

  static BaselineModel make(const BaselineConfig& cfg);
};

std::vector<double> predict_scores(BaselineModel& model,
                                   std::span<const CompoundRecord> records);

// Mean cross-entropy of the current model over `records` (full batch).
double evaluate_loss(BaselineModel& model,
                     std::span<const CompoundRecord> records);

TrainResult train_baseline(BaselineModel& model, const Dataset& source,
                           const Dataset& target_train,
                           const Dataset& target_val);

// Shared per-epoch schedule: geometric interpolation from lr_start (first
// epoch) to lr_end (last epoch).
double lr_at_epoch(double lr_start, double lr_end, int epoch, int n_epochs);

}  // namespace moltx
