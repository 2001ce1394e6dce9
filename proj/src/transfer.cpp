#include "moltx/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "moltx/metrics.hpp"
#include "moltx/rng.hpp"

namespace moltx {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kTAc: return "TAc";
    case Variant::kTAcF: return "TAc-f";
    case Variant::kTAcC: return "TAc-c";
    case Variant::kTAcFC: return "TAc-fc";
    case Variant::kDANN: return "DANN";
    case Variant::kNoT: return "NoT";
    case Variant::kDT: return "DT";
  }
  return "TAc";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  if (name == "TAc") return Variant::kTAc;
  if (name == "TAc-f") return Variant::kTAcF;
  if (name == "TAc-c") return Variant::kTAcC;
  if (name == "TAc-fc") return Variant::kTAcFC;
  if (name == "DANN") return Variant::kDANN;
  if (name == "NoT") return Variant::kNoT;
  if (name == "DT") return Variant::kDT;
  return std::nullopt;
}

bool variant_has_feature_disc(Variant v) {
  return v == Variant::kTAcF || v == Variant::kTAcFC;
}

bool variant_has_compound_disc(Variant v) {
  return v == Variant::kTAcC || v == Variant::kTAcFC ||
         v == Variant::kDANN;
}

void TransferConfig::normalize() {
  if (variant == Variant::kTAc) lambda = 0.0;
}

void add_head_params(ParamSet& params, const std::string& prefix,
                     const HeadConfig& cfg, std::uint64_t seed) {
  auto mk = [&](const std::string& name, int r, int c, bool bias) {
    params.add(name, init_param(name, r, c, seed, bias));
  };
  mk(prefix + ".W1", cfg.hidden, cfg.in, false);
  mk(prefix + ".b1", cfg.hidden, 1, true);
  mk(prefix + ".W2", cfg.out, cfg.hidden, false);
  mk(prefix + ".b2", cfg.out, 1, true);
}

HeadRef head_leaves(Tape& tape, ParamSet& params, const std::string& prefix) {
  HeadRef h;
  h.W1 = tape.leaf(params.at(prefix + ".W1"));
  h.b1 = tape.leaf(params.at(prefix + ".b1"));
  h.W2 = tape.leaf(params.at(prefix + ".W2"));
  h.b2 = tape.leaf(params.at(prefix + ".b2"));
  return h;
}

Value head_forward(Tape& tape, const HeadRef& head, Value x) {
  Value hidden = tape.relu(tape.dense(x, head.W1, head.b1));
  return tape.sigmoid(tape.dense(hidden, head.W2, head.b2));
}

TransferModel TransferModel::make(const TransferConfig& raw) {
  TransferModel m;
  m.cfg = raw;
  m.cfg.normalize();
  const int d = m.cfg.encoder.d;
  add_encoder_params(m.params, m.cfg.encoder, m.cfg.seed);
  add_head_params(m.params, "cls", {d, m.cfg.classifier_hidden, 1},
                  m.cfg.seed);
  if (variant_has_feature_disc(m.cfg.variant))
    add_head_params(m.params, "fdisc", {d, m.cfg.disc_hidden, d}, m.cfg.seed);
  if (variant_has_compound_disc(m.cfg.variant))
    add_head_params(m.params, "gdisc", {d, m.cfg.disc_hidden, 1}, m.cfg.seed);
  return m;
}

TransferLeaves transfer_leaves(Tape& tape, TransferModel& model) {
  TransferLeaves lv;
  lv.enc = encoder_leaves(tape, model.params, model.cfg.encoder);
  lv.cls = head_leaves(tape, model.params, "cls");
  if (variant_has_feature_disc(model.cfg.variant))
    lv.fdisc = head_leaves(tape, model.params, "fdisc");
  if (variant_has_compound_disc(model.cfg.variant))
    lv.gdisc = head_leaves(tape, model.params, "gdisc");
  return lv;
}

namespace {

Value maybe_grl(Tape& tape, Value x, double grl_scale) {
  return grl_scale < 0.0 ? tape.grad_reverse(x) : x;
}

// y log(yhat) + (1-y) log(1-yhat), as a (negative) per-compound term.
Value ce_term(Tape& tape, Value yhat, int y) {
  Value log_p = tape.log_clamped(yhat);
  Value log_1mp = tape.log1m_clamped(yhat);
  return tape.add(tape.scale(log_p, static_cast<double>(y)),
                  tape.scale(log_1mp, static_cast<double>(1 - y)));
}

struct CompoundPaths {
  Value r;
  Value z_cls;             // classifier input
  Value p_disc;            // feature-disc probabilities (GRL side)
  Value z_disc;            // compound-disc input (GRL side)
  Tensor gain;             // captured H values
};

CompoundPaths build_compound(Tape& tape, const CompoundRecord& rec,
                             const TransferLeaves& lv,
                             const TransferConfig& cfg,
                             const TransferGraphOptions& opts,
                             const Tensor* frozen_gain) {
  CompoundPaths out;
  out.r = encode(tape, rec.graph, lv.enc, cfg.encoder);
  const bool has_l = variant_has_feature_disc(cfg.variant);
  const bool has_g = variant_has_compound_disc(cfg.variant);
  const bool dann = cfg.variant == Variant::kDANN;

  Value r_rev;
  if (has_l || has_g) r_rev = maybe_grl(tape, out.r, opts.grl_scale);

  Value gain_factor;  // (1 + H), gradient-detached for the classifier path
  if (has_l) {
    out.p_disc = head_forward(tape, lv.fdisc, r_rev);
    Value entropy = tape.binary_entropy(out.p_disc);
    out.gain = Tensor(entropy.rows(), entropy.cols());
    out.gain.v = entropy.data();
    if (frozen_gain != nullptr) {
      gain_factor = tape.add_const(tape.constant(*frozen_gain), 1.0);
    } else {
      gain_factor = tape.add_const(tape.detach(entropy), 1.0);
    }
    // Discriminator-side z: both factors live behind the GRL so every
    // encoder path through L_g is reversed exactly once.
    out.z_disc = tape.mul(tape.add_const(entropy, 1.0), r_rev);
  } else if (has_g) {
    out.z_disc = r_rev;  // H == 0 without the feature-wise discriminator
  }

  if (has_l && !dann) {
    out.z_cls = tape.mul(gain_factor, out.r);
  } else {
    out.z_cls = out.r;  // TAc, TAc-c (H == 0) and DANN classify r
  }
  return out;
}

}  // namespace

TransferBatchGraph build_transfer_graph(
    Tape& tape, TransferModel& model,
    std::span<const CompoundRecord* const> batch_source,
    std::span<const CompoundRecord* const> batch_target,
    const TransferGraphOptions& opts) {
  const TransferConfig& cfg = model.cfg;
  if (cfg.variant == Variant::kNoT || cfg.variant == Variant::kDT)
    throw Error("build_transfer_graph: NoT/DT are baseline settings");
  if (batch_source.empty()) throw EmptySet("empty source batch");
  if (batch_target.empty()) throw EmptySet("empty target batch");

  TransferLeaves lv = transfer_leaves(tape, model);
  const bool has_l = variant_has_feature_disc(cfg.variant);
  const bool has_g = variant_has_compound_disc(cfg.variant);
  const bool dann = cfg.variant == Variant::kDANN;

  TransferBatchGraph out;
  std::vector<Value> ce_source, ce_target;
  std::vector<Value> ll_source, ll_target;
  std::vector<Value> lg_source, lg_target;

  std::size_t gain_idx = 0;
  auto next_frozen = [&]() -> const Tensor* {
    if (!has_l || opts.frozen_gains == nullptr) return nullptr;
    if (gain_idx >= opts.frozen_gains->size())
      throw Error("frozen_gains shorter than the batch");
    return &(*opts.frozen_gains)[gain_idx++];
  };

  for (const CompoundRecord* rec : batch_source) {
    CompoundPaths cp = build_compound(tape, *rec, lv, cfg, opts,
                                      next_frozen());
    if (has_l) out.gains.push_back(cp.gain);
    ce_source.push_back(
        tape.reduce_mean(ce_term(tape, head_forward(tape, lv.cls, cp.z_cls),
                                 rec->label())));
    if (has_l)
      ll_source.push_back(tape.reduce_mean(tape.log_clamped(cp.p_disc)));
    if (has_g)
      lg_source.push_back(tape.reduce_mean(
          tape.log_clamped(head_forward(tape, lv.gdisc, cp.z_disc))));
  }
  for (const CompoundRecord* rec : batch_target) {
    CompoundPaths cp = build_compound(tape, *rec, lv, cfg, opts,
                                      next_frozen());
    if (has_l) out.gains.push_back(cp.gain);
    if (!dann) {
      ce_target.push_back(
          tape.reduce_mean(ce_term(tape, head_forward(tape, lv.cls, cp.z_cls),
                                   rec->label())));
    }
    if (has_l)
      ll_target.push_back(tape.reduce_mean(tape.log1m_clamped(cp.p_disc)));
    if (has_g)
      lg_target.push_back(tape.reduce_mean(
          tape.log1m_clamped(head_forward(tape, lv.gdisc, cp.z_disc))));
  }

  // L_c = -alpha mean_S [CE] - mean_T [CE]; DANN keeps the source term only
  // (weight 1) and never reads target labels.
  if (dann) {
    out.l_c = tape.scale(tape.mean(ce_source), -1.0);
  } else {
    out.l_c = tape.add(tape.scale(tape.mean(ce_source), -cfg.alpha),
                       tape.scale(tape.mean(ce_target), -1.0));
  }

  Value disc_sum;
  if (has_l) {
    out.l_l = tape.scale(
        tape.add(tape.mean(ll_source), tape.mean(ll_target)), -1.0);
    disc_sum = out.l_l;
  }
  if (has_g) {
    out.l_g = tape.scale(
        tape.add(tape.mean(lg_source), tape.mean(lg_target)), -1.0);
    disc_sum = disc_sum.valid() ? tape.add(disc_sum, out.l_g) : out.l_g;
  }

  out.total = disc_sum.valid()
                  ? tape.add(tape.scale(disc_sum, cfg.lambda), out.l_c)
                  : out.l_c;
  return out;
}

std::vector<double> predict_scores(TransferModel& model,
                                   std::span<const CompoundRecord> records) {
  std::vector<double> scores;
  scores.reserve(records.size());
  const bool has_l = variant_has_feature_disc(model.cfg.variant);
  for (const CompoundRecord& rec : records) {
    Tape tape;
    TransferLeaves lv = transfer_leaves(tape, model);
    Value r = encode(tape, rec.graph, lv.enc, model.cfg.encoder);
    Value input = r;
    if (has_l && model.cfg.variant != Variant::kDANN) {
      Value p = head_forward(tape, lv.fdisc, r);
      input = tape.mul(tape.add_const(tape.binary_entropy(p), 1.0), r);
    }
    scores.push_back(head_forward(tape, lv.cls, input).scalar());
  }
  return scores;
}

double lr_at_epoch(double lr_start, double lr_end, int epoch, int n_epochs) {
  if (n_epochs <= 1) return lr_start;
  const double t = static_cast<double>(epoch) /
                   static_cast<double>(n_epochs - 1);
  return lr_start * std::pow(lr_end / lr_start, t);
}

namespace {

// Deterministic minibatch stream: shuffled epoch-independent cycling.
class BatchCycler {
 public:
  BatchCycler(std::size_t n, Rng& rng) : rng_(&rng), idx_(n) {
    for (std::size_t i = 0; i < n; ++i) idx_[i] = i;
    rng_->shuffle(idx_);
  }

  std::vector<std::size_t> next(std::size_t k) {
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      if (pos_ == idx_.size()) {
        rng_->shuffle(idx_);
        pos_ = 0;
      }
      out.push_back(idx_[pos_++]);
    }
    return out;
  }

 private:
  Rng* rng_;
  std::vector<std::size_t> idx_;
  std::size_t pos_ = 0;
};

double val_roc_auc(TransferModel& model, const Dataset& val) {
  metrics::BinaryEval e;
  e.scores = predict_scores(model, val);
  e.labels.reserve(val.size());
  for (const auto& rec : val) e.labels.push_back(rec.label());
  return metrics::roc_auc(e);
}

TrainResult train_impl(TransferModel& model, const Dataset& source,
                       const Dataset& target_train,
                       const Dataset& target_val) {
  if (source.empty() || target_train.empty() || target_val.empty())
    throw EmptySet("train: empty split");

  const TransferConfig& cfg = model.cfg;
  Rng rng(Rng::derive(cfg.seed, 0x7261696e));
  Adam adam;
  BatchCycler src_stream(source.size(), rng);
  BatchCycler tgt_stream(target_train.size(), rng);

  const std::size_t batch =
      static_cast<std::size_t>(std::max(1, cfg.batch_size));
  const std::size_t per_epoch = std::max(source.size(), target_train.size());
  const std::size_t steps = (per_epoch + batch - 1) / batch;

  TrainResult result;
  result.best_val_roc_auc = -1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg.lr_start, cfg.lr_end, epoch, cfg.epochs);
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      std::vector<const CompoundRecord*> bs, bt;
      for (std::size_t i : src_stream.next(std::min(batch, source.size())))
        bs.push_back(&source[i]);
      for (std::size_t i :
           tgt_stream.next(std::min(batch, target_train.size())))
        bt.push_back(&target_train[i]);

      model.params.zero_grad();
      Tape tape;
      TransferBatchGraph g = build_transfer_graph(tape, model, bs, bt);
      tape.backward(g.total);
      adam.step(model.params, lr);
      loss_sum += g.total.scalar();
    }

    EpochStats st;
    st.epoch = epoch;
    st.train_loss = loss_sum / static_cast<double>(steps);
    st.val_roc_auc = val_roc_auc(model, target_val);
    st.lr = lr;
    result.history.push_back(st);

    if (st.val_roc_auc > result.best_val_roc_auc) {
      result.best_val_roc_auc = st.val_roc_auc;
      result.best_epoch = epoch;
      result.best_params = model.params.clone_values();
    }
  }
  model.params.assign_values(result.best_params);
  return result;
}

}  // namespace

TrainResult train(TransferModel& model, const Dataset& source,
                  const Dataset& target_train, const Dataset& target_val) {
  if (model.cfg.variant == Variant::kDANN)
    return train_dann(model, source, target_train, target_val);
  return train_impl(model, source, target_train, target_val);
}

TrainResult train_dann(TransferModel& model, const Dataset& source,
                       const Dataset& target_train_unlabeled,
                       const Dataset& target_val) {
  if (model.cfg.variant != Variant::kDANN)
    throw Error("train_dann requires the DANN variant");
  return train_impl(model, source, target_train_unlabeled, target_val);
}

const char* baseline_features_name(BaselineFeatures f) {
  switch (f) {
    case BaselineFeatures::kMorgan: return "morgan";
    case BaselineFeatures::kMorganCount: return "morgan-c";
    case BaselineFeatures::kEncoder: return "encoder";
  }
  return "encoder";
}

std::optional<BaselineFeatures> baseline_features_from_name(
    std::string_view name) {
  if (name == "morgan") return BaselineFeatures::kMorgan;
  if (name == "morgan-c" || name == "morganc")
    return BaselineFeatures::kMorganCount;
  if (name == "encoder") return BaselineFeatures::kEncoder;
  return std::nullopt;
}

BaselineModel BaselineModel::make(const BaselineConfig& cfg) {
  BaselineModel m;
  m.cfg = cfg;
  int in = cfg.fp_dim;
  if (cfg.features == BaselineFeatures::kEncoder) {
    add_encoder_params(m.params, cfg.encoder, cfg.seed);
    in = cfg.encoder.d;
  }
  add_head_params(m.params, "cls", {in, cfg.classifier_hidden, 1}, cfg.seed);
  return m;
}

namespace {

std::vector<double> fingerprint_input(const BaselineConfig& cfg,
                                      const MolecularGraph& g) {
  FingerprintVector fp =
      cfg.features == BaselineFeatures::kMorgan
          ? morgan_binary(g, cfg.fp_radius, cfg.fp_dim)
          : morgan_count(g, cfg.fp_radius, cfg.fp_dim);
  std::vector<double> x(fp.counts.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = static_cast<double>(fp.counts[i]);
  return x;
}

Value baseline_score(Tape& tape, BaselineModel& model, const HeadRef& cls,
                     const EncoderRef* enc, const CompoundRecord& rec) {
  if (model.cfg.features == BaselineFeatures::kEncoder) {
    Value r = encode(tape, rec.graph, *enc, model.cfg.encoder);
    return head_forward(tape, cls, r);
  }
  Value x = tape.constant(fingerprint_input(model.cfg, rec.graph));
  return head_forward(tape, cls, x);
}

Value baseline_batch_loss(Tape& tape, BaselineModel& model,
                          std::span<const CompoundRecord* const> batch) {
  HeadRef cls = head_leaves(tape, model.params, "cls");
  EncoderRef enc;
  if (model.cfg.features == BaselineFeatures::kEncoder)
    enc = encoder_leaves(tape, model.params, model.cfg.encoder);
  std::vector<Value> terms;
  terms.reserve(batch.size());
  for (const CompoundRecord* rec : batch) {
    Value yhat = baseline_score(tape, model, cls, &enc, *rec);
    terms.push_back(tape.reduce_mean(ce_term(tape, yhat, rec->label())));
  }
  return tape.scale(tape.mean(terms), -1.0);
}

}  // namespace

std::vector<double> predict_scores(BaselineModel& model,
                                   std::span<const CompoundRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const CompoundRecord& rec : records) {
    Tape tape;
    HeadRef cls = head_leaves(tape, model.params, "cls");
    EncoderRef enc;
    if (model.cfg.features == BaselineFeatures::kEncoder)
      enc = encoder_leaves(tape, model.params, model.cfg.encoder);
    out.push_back(baseline_score(tape, model, cls, &enc, rec).scalar());
  }
  return out;
}

double evaluate_loss(BaselineModel& model,
                     std::span<const CompoundRecord> records) {
  if (records.empty()) throw EmptySet("evaluate_loss: empty dataset");
  std::vector<const CompoundRecord*> ptrs;
  ptrs.reserve(records.size());
  for (const auto& r : records) ptrs.push_back(&r);
  Tape tape;
  return baseline_batch_loss(tape, model, ptrs).scalar();
}

TrainResult train_baseline(BaselineModel& model, const Dataset& source,
                           const Dataset& target_train,
                           const Dataset& target_val) {
  if (target_train.empty() || target_val.empty())
    throw EmptySet("train_baseline: empty split");

  // DT with an empty source degenerates to NoT.
  Dataset pool = target_train;
  if (model.cfg.mode == BaselineMode::kDT)
    pool.insert(pool.end(), source.begin(), source.end());

  const BaselineConfig& cfg = model.cfg;
  Rng rng(Rng::derive(cfg.seed, 0x666370));
  Adam adam;
  BatchCycler stream(pool.size(), rng);
  const std::size_t batch =
      static_cast<std::size_t>(std::max(1, cfg.batch_size));
  const std::size_t steps = (pool.size() + batch - 1) / batch;

  TrainResult result;
  result.best_val_roc_auc = -1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg.lr_start, cfg.lr_end, epoch, cfg.epochs);
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      std::vector<const CompoundRecord*> b;
      for (std::size_t i : stream.next(std::min(batch, pool.size())))
        b.push_back(&pool[i]);
      model.params.zero_grad();
      Tape tape;
      Value loss = baseline_batch_loss(tape, model, b);
      tape.backward(loss);
      adam.step(model.params, lr);
      loss_sum += loss.scalar();
    }

    EpochStats st;
    st.epoch = epoch;
    st.train_loss = loss_sum / static_cast<double>(steps);
    {
      metrics::BinaryEval e;
      e.scores = predict_scores(model, target_val);
      for (const auto& rec : target_val) e.labels.push_back(rec.label());
      st.val_roc_auc = metrics::roc_auc(e);
    }
    st.lr = lr;
    result.history.push_back(st);

    if (st.val_roc_auc > result.best_val_roc_auc) {
      result.best_val_roc_auc = st.val_roc_auc;
      result.best_epoch = epoch;
      result.best_params = model.params.clone_values();
    }
  }
  model.params.assign_values(result.best_params);
  return result;
}

}  // namespace moltx
