#include "moltx/ranking.hpp"

#include <algorithm>

#include "moltx/fingerprint.hpp"
#include "moltx/rng.hpp"

namespace moltx {

double nci(const std::vector<double>& activities,
           const std::vector<double>& scores) {
  if (activities.size() != scores.size())
    throw DimensionMismatch("nci: activities/scores length mismatch");
  if (activities.size() < 2)
    throw Error("nci: need at least two compounds");
  std::int64_t pairs = 0, wrong = 0;
  for (std::size_t i = 0; i < activities.size(); ++i) {
    for (std::size_t j = 0; j < activities.size(); ++j) {
      if (activities[i] > activities[j]) {
        ++pairs;
        if (scores[i] <= scores[j]) ++wrong;
      }
    }
  }
  if (pairs == 0) throw Error("nci: no ordered pairs (all activities equal)");
  return static_cast<double>(wrong) / static_cast<double>(pairs);
}

double score(const std::vector<double>& embedding,
             const std::vector<double>& w) {
  if (embedding.size() != w.size())
    throw DimensionMismatch("score: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * embedding[i];
  return acc;
}

const char* rank_features_name(RankFeatures f) {
  switch (f) {
    case RankFeatures::kDmpna: return "dmpna";
    case RankFeatures::kDmpn: return "dmpn";
    case RankFeatures::kMorgan: return "morgan";
    case RankFeatures::kMorganCount: return "morgan-c";
  }
  return "dmpna";
}

std::optional<RankFeatures> rank_features_from_name(std::string_view name) {
  if (name == "dmpna") return RankFeatures::kDmpna;
  if (name == "dmpn") return RankFeatures::kDmpn;
  if (name == "morgan") return RankFeatures::kMorgan;
  if (name == "morgan-c" || name == "morganc")
    return RankFeatures::kMorganCount;
  return std::nullopt;
}

void RankingConfig::normalize() {
  if (features == RankFeatures::kDmpna) encoder.pooling = Pooling::kAttention;
  if (features == RankFeatures::kDmpn) encoder.pooling = Pooling::kMean;
}

RankingModel RankingModel::make(const RankingConfig& raw) {
  RankingModel m;
  m.cfg = raw;
  m.cfg.normalize();
  int dim = m.cfg.fp_dim;
  if (m.cfg.uses_encoder()) {
    add_encoder_params(m.params, m.cfg.encoder, m.cfg.seed);
    dim = m.cfg.encoder.d;
  }
  m.params.add("scorer.w", init_param("scorer.w", dim, 1, m.cfg.seed, false));
  return m;
}

namespace {

std::vector<double> rank_fp_input(const RankingConfig& cfg,
                                  const MolecularGraph& g) {
  FingerprintVector fp = cfg.features == RankFeatures::kMorgan
                             ? morgan_binary(g, cfg.fp_radius, cfg.fp_dim)
                             : morgan_count(g, cfg.fp_radius, cfg.fp_dim);
  std::vector<double> x(fp.counts.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = static_cast<double>(fp.counts[i]);
  return x;
}

}  // namespace

Value build_rank_loss(Tape& tape, std::span<const Value> scores,
                      std::span<const double> activities) {
  if (scores.size() != activities.size())
    throw DimensionMismatch("build_rank_loss: length mismatch");
  // All ground-truth-ordered pairs contribute the smooth surrogate; the
  // support set does not depend on the current scores.
  std::vector<Value> terms;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j)
      if (activities[i] > activities[j])
        terms.push_back(
            tape.softplus_of_neg(tape.sub(scores[i], scores[j])));
  if (terms.empty())
    throw EmptySet("build_rank_loss: no ordered pairs in batch");
  return tape.mean(terms);
}

RankGraph build_rank_objective(Tape& tape, RankingModel& model,
                               std::span<const CompoundRecord* const> batch) {
  const bool use_enc = model.cfg.uses_encoder();
  EncoderRef enc;
  if (use_enc) enc = encoder_leaves(tape, model.params, model.cfg.encoder);
  Value w = tape.leaf(model.params.at("scorer.w"));

  std::vector<Value> scores;
  std::vector<double> activities;
  scores.reserve(batch.size());
  for (const CompoundRecord* rec : batch) {
    Value r = use_enc
                  ? encode(tape, rec->graph, enc, model.cfg.encoder)
                  : tape.constant(rank_fp_input(model.cfg, rec->graph));
    scores.push_back(tape.reduce_sum(tape.mul(w, r)));
    activities.push_back(rec->activity());
  }

  RankGraph g;
  g.rank_loss = build_rank_loss(tape, scores, activities);

  std::vector<Value> penalties;
  for (std::size_t i = 0; i < model.params.size(); ++i)
    penalties.push_back(
        tape.squared_norm(tape.leaf(model.params[i])));
  Value l2 = tape.scale(tape.sum(penalties), model.cfg.l2_lambda);
  g.objective = tape.add(g.rank_loss, l2);
  return g;
}

std::vector<double> predict_rank_scores(
    RankingModel& model, std::span<const CompoundRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  const std::vector<double>& w = model.params.at("scorer.w").value.v;
  for (const CompoundRecord& rec : records) {
    if (model.cfg.uses_encoder()) {
      Tape tape;
      EncoderRef enc = encoder_leaves(tape, model.params, model.cfg.encoder);
      Value r = encode(tape, rec.graph, enc, model.cfg.encoder);
      out.push_back(score(r.data(), w));
    } else {
      out.push_back(score(rank_fp_input(model.cfg, rec.graph), w));
    }
  }
  return out;
}

RankTrainResult train_gnncp(RankingModel& model, const Dataset& train) {
  if (train.size() < 2) throw EmptySet("train_gnncp: need >= 2 compounds");
  const RankingConfig& cfg = model.cfg;
  Rng rng(Rng::derive(cfg.seed, 0x726b));
  Adam adam;

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t batch = std::min<std::size_t>(
      train.size(), static_cast<std::size_t>(std::max(2, cfg.batch_size)));

  RankTrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double obj_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::vector<const CompoundRecord*> b;
      for (std::size_t i = start; i < std::min(start + batch, order.size());
           ++i)
        b.push_back(&train[order[i]]);
      if (b.size() < 2) continue;  // a lone tail compound has no pairs

      model.params.zero_grad();
      Tape tape;
      RankGraph g = build_rank_objective(tape, model, b);
      tape.backward(g.objective);
      adam.step(model.params, cfg.lr);
      obj_sum += g.objective.scalar();
      ++steps;
    }

    RankEpochStats st;
    st.epoch = epoch;
    st.objective = steps > 0 ? obj_sum / static_cast<double>(steps) : 0.0;
    {
      std::vector<double> scores = predict_rank_scores(model, train);
      std::vector<double> acts;
      for (const auto& rec : train) acts.push_back(rec.activity());
      st.train_nci = nci(acts, scores);
    }
    result.history.push_back(st);
  }
  return result;
}

}  // namespace moltx
