#include "moltx/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "moltx/ranking.hpp"
#include "moltx/tape.hpp"
#include "moltx/transfer.hpp"

namespace moltx {

double fd_max_rel_err(
    ParamSet& params, const std::vector<std::string>& names,
    const std::function<double()>& eval,
    const std::map<std::string, std::vector<double>>& analytic,
    double h) {
  double worst = 0.0;
  for (const std::string& name : names) {
    Param& p = params.at(name);
    const auto it = analytic.find(name);
    const std::vector<double>* grad =
        it == analytic.end() ? nullptr : &it->second;
    for (std::size_t i = 0; i < p.value.v.size(); ++i) {
      const double saved = p.value.v[i];
      p.value.v[i] = saved + h;
      const double up = eval();
      p.value.v[i] = saved - h;
      const double down = eval();
      p.value.v[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grad ? (*grad)[i] : 0.0;
      const double rel =
          std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

MolecularGraph random_test_graph(Rng& rng, int min_atoms, int max_atoms) {
  const int n = rng.uniform_int(min_atoms, max_atoms);
  std::vector<RawAtom> atoms;
  std::vector<RawBond> bonds;
  constexpr int kElems[] = {6, 6, 6, 7, 8, 16, 9};
  for (int i = 0; i < n; ++i) {
    RawAtom a;
    a.element = kElems[rng.uniform(std::size(kElems))];
    if (rng.bernoulli(0.1)) a.formal_charge = rng.bernoulli(0.5) ? 1 : -1;
    atoms.push_back(a);
  }
  for (int i = 1; i < n; ++i) {
    RawBond b;
    b.u = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(i)));
    b.v = i;
    b.order = rng.bernoulli(0.2) ? BondOrder::kDouble : BondOrder::kSingle;
    bonds.push_back(b);
  }
  // Occasionally close a ring to exercise cyclic message passing.
  if (n >= 3 && rng.bernoulli(0.4)) {
    const int u = 0;
    const int v = n - 1;
    bool exists = false;
    for (const auto& b : bonds)
      exists |= (b.u == u && b.v == v) || (b.u == v && b.v == u);
    if (!exists) bonds.push_back({u, v, BondOrder::kSingle});
  }
  return finalize_graph(atoms, bonds);
}

namespace {

// Central differences sit on ReLU kinks when preactivations are exactly
// zero (zero-initialized biases meet zero-clamped embeddings), so every
// suite perturbs its parameters to a generic point first.
void jitter_params(ParamSet& params, Rng& rng, double amp = 0.05) {
  for (std::size_t i = 0; i < params.size(); ++i)
    for (auto& x : params[i].value.v) x += rng.uniform_real(-amp, amp);
}

std::map<std::string, std::vector<double>> harvest_grads(
    const ParamSet& params, const std::vector<std::string>& names) {
  std::map<std::string, std::vector<double>> out;
  for (const std::string& name : names) out[name] = params.at(name).grad.v;
  return out;
}

std::vector<std::string> names_with_prefix(const ParamSet& params,
                                           std::string_view prefix) {
  std::vector<std::string> out;
  for (const std::string& name : params.names())
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  return out;
}

EncoderConfig tiny_encoder(Pooling pooling) {
  EncoderConfig enc;
  enc.d = 6;
  enc.tau = 2;
  enc.pooling = pooling;
  enc.attn_hidden = 5;
  return enc;
}

GradCheckResult check_mlp3(const GradCheckOptions& opts) {
  Rng rng(Rng::derive(opts.seed, 1));
  ParamSet params;
  const int in = 5, h1 = 4, h2 = 4;
  params.add("W1", init_glorot(h1, in, rng));
  params.add("b1", init_glorot(h1, 1, rng));
  params.add("W2", init_glorot(h2, h1, rng));
  params.add("b2", init_glorot(h2, 1, rng));
  params.add("W3", init_glorot(1, h2, rng));
  params.add("b3", init_glorot(1, 1, rng));

  jitter_params(params, rng);

  std::vector<double> input(in), target = {0.3};
  for (auto& x : input) x = rng.uniform_real(-1.0, 1.0);

  auto build = [&](Tape& tape) {
    Value x = tape.constant(input);
    Value h = tape.relu(tape.dense(x, tape.leaf(params.at("W1")),
                                   tape.leaf(params.at("b1"))));
    h = tape.relu(tape.dense(h, tape.leaf(params.at("W2")),
                             tape.leaf(params.at("b2"))));
    Value y = tape.sigmoid(tape.dense(h, tape.leaf(params.at("W3")),
                                      tape.leaf(params.at("b3"))));
    Value diff = tape.sub(y, tape.constant(target));
    return tape.reduce_mean(tape.mul(diff, diff));
  };

  params.zero_grad();
  Tape tape;
  tape.backward(build(tape));
  auto analytic = harvest_grads(params, params.names());

  auto eval = [&]() {
    Tape t;
    return build(t).scalar();
  };
  GradCheckResult res;
  res.name = "nn_core.mlp3";
  res.max_rel_err =
      fd_max_rel_err(params, params.names(), eval, analytic, opts.h);
  res.pass = res.max_rel_err < opts.tol;
  return res;
}

GradCheckResult check_encoder(const GradCheckOptions& opts, Pooling pooling) {
  Rng rng(Rng::derive(opts.seed, pooling == Pooling::kMean ? 2 : 3));
  EncoderConfig enc_cfg = tiny_encoder(pooling);
  ParamSet params;
  add_encoder_params(params, enc_cfg, rng.next_u64());
  jitter_params(params, rng);

  std::vector<MolecularGraph> graphs;
  for (int i = 0; i < 3; ++i) graphs.push_back(random_test_graph(rng, 2, 5));
  std::vector<double> probe(enc_cfg.d);
  for (auto& x : probe) x = rng.uniform_real(-1.0, 1.0);

  auto build = [&](Tape& tape) {
    EncoderRef enc = encoder_leaves(tape, params, enc_cfg);
    std::vector<Value> terms;
    for (const auto& g : graphs) {
      Value r = encode(tape, g, enc, enc_cfg);
      terms.push_back(tape.reduce_sum(tape.mul(r, tape.constant(probe))));
    }
    return tape.reduce_mean(tape.concat(terms));
  };

  params.zero_grad();
  Tape tape;
  tape.backward(build(tape));
  auto analytic = harvest_grads(params, params.names());
  auto eval = [&]() {
    Tape t;
    return build(t).scalar();
  };

  GradCheckResult res;
  res.name = std::string("dmpnn.encode.") + pooling_name(pooling);
  res.max_rel_err =
      fd_max_rel_err(params, params.names(), eval, analytic, opts.h);
  res.pass = res.max_rel_err < opts.tol;
  return res;
}

struct TransferFixture {
  TransferModel model;
  Dataset source, target;
  std::vector<const CompoundRecord*> bs, bt;

  TransferFixture(Variant variant, const GradCheckOptions& opts,
                  std::uint64_t salt) {
    Rng rng(Rng::derive(opts.seed, salt));
    TransferConfig cfg;
    cfg.variant = variant;
    cfg.alpha = 0.7;
    cfg.lambda = 0.3;  // large enough that sign errors dominate tolerances
    cfg.encoder = tiny_encoder(Pooling::kAttention);
    cfg.classifier_hidden = 6;
    cfg.disc_hidden = 6;
    cfg.seed = rng.next_u64();
    model = TransferModel::make(cfg);
    jitter_params(model.params, rng);
    for (int i = 0; i < 2; ++i) {
      CompoundRecord rec;
      rec.id = "s" + std::to_string(i);
      rec.graph = random_test_graph(rng, 2, 5);
      rec.set_label(static_cast<int>(rng.uniform(2)));
      source.push_back(std::move(rec));
      CompoundRecord rec2;
      rec2.id = "t" + std::to_string(i);
      rec2.graph = random_test_graph(rng, 2, 5);
      rec2.set_label(static_cast<int>(rng.uniform(2)));
      target.push_back(std::move(rec2));
    }
    for (const auto& r : source) bs.push_back(&r);
    for (const auto& r : target) bt.push_back(&r);
  }
};

// Standalone losses are plain differentiable scalars: built with the
// reversal disabled so analytic gradients equal the loss's own derivative.
GradCheckResult check_standalone_loss(const GradCheckOptions& opts,
                                      const std::string& which) {
  TransferFixture fx(Variant::kTAcFC, opts, Rng::hash_str(which));
  TransferGraphOptions gopts;
  gopts.grl_scale = 1.0;  // pass-through

  auto pick = [&](const TransferBatchGraph& g) {
    if (which == "L_c") return g.l_c;
    if (which == "L_l") return g.l_l;
    return g.l_g;
  };

  // Capture classifier gains once; L_c is defined with the entropy gain as
  // a constant factor.
  std::vector<Tensor> gains;
  {
    Tape tape;
    auto g = build_transfer_graph(tape, fx.model, fx.bs, fx.bt, gopts);
    gains = g.gains;
  }
  TransferGraphOptions frozen = gopts;
  frozen.frozen_gains = &gains;
  const bool needs_frozen = which == "L_c";
  const TransferGraphOptions& build_opts = needs_frozen ? frozen : gopts;

  fx.model.params.zero_grad();
  {
    Tape tape;
    auto g = build_transfer_graph(tape, fx.model, fx.bs, fx.bt, build_opts);
    tape.backward(pick(g));
  }
  auto names = fx.model.params.names();
  auto analytic = harvest_grads(fx.model.params, names);
  auto eval = [&]() {
    Tape tape;
    auto g = build_transfer_graph(tape, fx.model, fx.bs, fx.bt, build_opts);
    return pick(g).scalar();
  };

  GradCheckResult res;
  res.name = "transfer." + which;
  res.max_rel_err = fd_max_rel_err(fx.model.params, names, eval, analytic,
                                   opts.h);
  res.pass = res.max_rel_err < opts.tol;
  return res;
}

// Composite objective: one backward of the GRL graph must realize, per
// group, the gradient of that group's effective objective.
GradCheckResult check_total(const GradCheckOptions& opts, Variant variant) {
  TransferFixture fx(variant, opts, Rng::hash_str(variant_name(variant)));
  const double lambda = fx.model.cfg.lambda;

  TransferGraphOptions gopts;
  if (opts.inject_grl_bug) gopts.grl_scale = 1.0;

  std::vector<Tensor> gains;
  {
    Tape tape;
    auto g = build_transfer_graph(tape, fx.model, fx.bs, fx.bt, gopts);
    gains = g.gains;
  }
  TransferGraphOptions frozen = gopts;
  frozen.frozen_gains = &gains;

  fx.model.params.zero_grad();
  {
    Tape tape;
    auto g = build_transfer_graph(tape, fx.model, fx.bs, fx.bt, frozen);
    tape.backward(g.total);
  }
  auto analytic = harvest_grads(fx.model.params, fx.model.params.names());

  auto eval_parts = [&](double& l_c, double& disc) {
    Tape tape;
    auto g = build_transfer_graph(tape, fx.model, fx.bs, fx.bt, frozen);
    l_c = g.l_c.scalar();
    disc = 0.0;
    if (g.l_l.valid()) disc += g.l_l.scalar();
    if (g.l_g.valid()) disc += g.l_g.scalar();
  };

  double worst = 0.0;
  // Encoder + classifier descend -lambda (L_l + L_g) + L_c.
  {
    auto eval = [&]() {
      double l_c, disc;
      eval_parts(l_c, disc);
      return -lambda * disc + l_c;
    };
    auto names = names_with_prefix(fx.model.params, "enc.");
    worst = std::max(worst, fd_max_rel_err(fx.model.params, names, eval,
                                           analytic, opts.h));
  }
  {
    auto eval = [&]() {
      double l_c, disc;
      eval_parts(l_c, disc);
      return l_c;
    };
    auto names = names_with_prefix(fx.model.params, "cls.");
    worst = std::max(worst, fd_max_rel_err(fx.model.params, names, eval,
                                           analytic, opts.h));
  }
  // Discriminators descend +lambda (L_l + L_g).
  {
    auto eval = [&]() {
      double l_c, disc;
      eval_parts(l_c, disc);
      return lambda * disc;
    };
    for (const char* prefix : {"fdisc.", "gdisc."}) {
      auto names = names_with_prefix(fx.model.params, prefix);
      if (names.empty()) continue;
      worst = std::max(worst, fd_max_rel_err(fx.model.params, names, eval,
                                             analytic, opts.h));
    }
  }

  GradCheckResult res;
  res.name = std::string("transfer.total.") + variant_name(variant);
  res.max_rel_err = worst;
  res.pass = res.max_rel_err < opts.tol;
  return res;
}

GradCheckResult check_rank_loss(const GradCheckOptions& opts) {
  Rng rng(Rng::derive(opts.seed, 9));
  RankingConfig cfg;
  cfg.encoder = tiny_encoder(Pooling::kAttention);
  cfg.l2_lambda = 1e-3;
  cfg.seed = rng.next_u64();
  RankingModel model = RankingModel::make(cfg);
  jitter_params(model.params, rng);

  Dataset data;
  for (int i = 0; i < 4; ++i) {
    CompoundRecord rec;
    rec.id = "r" + std::to_string(i);
    rec.graph = random_test_graph(rng, 2, 5);
    rec.set_activity(rng.uniform_real(0.0, 10.0) + 0.01 * i);
    data.push_back(std::move(rec));
  }
  std::vector<const CompoundRecord*> batch;
  for (const auto& r : data) batch.push_back(&r);

  model.params.zero_grad();
  {
    Tape tape;
    auto g = build_rank_objective(tape, model, batch);
    tape.backward(g.objective);
  }
  auto analytic = harvest_grads(model.params, model.params.names());
  auto eval = [&]() {
    Tape tape;
    return build_rank_objective(tape, model, batch).objective.scalar();
  };

  GradCheckResult res;
  res.name = "ranking.L_rank";
  res.max_rel_err = fd_max_rel_err(model.params, model.params.names(), eval,
                                   analytic, opts.h);
  res.pass = res.max_rel_err < opts.tol;
  return res;
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suites(
    const GradCheckOptions& opts) {
  std::vector<GradCheckResult> out;
  out.push_back(check_mlp3(opts));
  out.push_back(check_encoder(opts, Pooling::kMean));
  out.push_back(check_encoder(opts, Pooling::kAttention));
  out.push_back(check_standalone_loss(opts, "L_c"));
  out.push_back(check_standalone_loss(opts, "L_l"));
  out.push_back(check_standalone_loss(opts, "L_g"));
  out.push_back(check_total(opts, Variant::kTAc));
  out.push_back(check_total(opts, Variant::kTAcF));
  out.push_back(check_total(opts, Variant::kTAcC));
  out.push_back(check_total(opts, Variant::kTAcFC));
  out.push_back(check_total(opts, Variant::kDANN));
  out.push_back(check_rank_loss(opts));
  return out;
}

}  // namespace moltx
