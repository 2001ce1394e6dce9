#include <doctest.h>

#include <cmath>

#include "moltx/dmpnn.hpp"
#include "moltx/gradcheck.hpp"
#include "oracles.hpp"

using namespace moltx;

namespace {

EncoderConfig small_cfg(Pooling pooling, int tau = 2) {
  EncoderConfig cfg;
  cfg.d = 5;
  cfg.tau = tau;
  cfg.pooling = pooling;
  cfg.attn_hidden = 4;
  return cfg;
}

oracle::EncoderWeights weights_of(const ParamSet& params, int d) {
  oracle::EncoderWeights w;
  w.W0 = params.at("enc.W0").value.v;
  w.W = params.at("enc.W").value.v;
  w.We = params.at("enc.We").value.v;
  w.d = d;
  return w;
}

}  // namespace

TEST_CASE("init_edge_hidden: zero W0 gives zero states") {
  EncoderConfig cfg = small_cfg(Pooling::kMean);
  ParamSet params;
  add_encoder_params(params, cfg, 1);
  params.at("enc.W0").value.fill(0.0);

  MolecularGraph g = parse_smiles("CCO");
  Tape tape;
  EncoderRef enc = encoder_leaves(tape, params, cfg);
  GraphInputs in = graph_inputs(tape, g);
  EdgeState st = init_edge_hidden(tape, g, in, enc);
  for (const Value& h : st.h)
    for (double v : h.data()) CHECK(v == 0.0);
}

TEST_CASE("two-atom molecule: messages are empty sums") {
  EncoderConfig cfg = small_cfg(Pooling::kMean);
  ParamSet params;
  add_encoder_params(params, cfg, 2);

  MolecularGraph g = parse_smiles("CO");
  Tape tape;
  EncoderRef enc = encoder_leaves(tape, params, cfg);
  GraphInputs in = graph_inputs(tape, g);
  EdgeState st0 = init_edge_hidden(tape, g, in, enc);
  EdgeState st1 = message_pass(tape, g, st0, enc);
  // h1 = relu(h0 + W * 0) = h0 (h0 is already non-negative).
  for (std::size_t e = 0; e < st0.h.size(); ++e)
    CHECK(st1.h[e].data() == st0.h[e].data());
}

TEST_CASE("path a-b-c: the only message into (b,c) is h0 of (a,b)") {
  EncoderConfig cfg = small_cfg(Pooling::kMean);
  ParamSet params;
  add_encoder_params(params, cfg, 3);
  // Make W the identity so the message passes through unchanged, and
  // disable the skip contribution by zeroing W0? No: h1_bc = relu(h0_bc +
  // W m). With W = I, m_bc = h0_ab.
  Param& W = params.at("enc.W");
  W.value.fill(0.0);
  for (int i = 0; i < cfg.d; ++i) W.value(i, i) = 1.0;

  MolecularGraph g = parse_smiles("CCO");  // atoms a=0, b=1, c=2
  Tape tape;
  EncoderRef enc = encoder_leaves(tape, params, cfg);
  GraphInputs in = graph_inputs(tape, g);
  EdgeState st0 = init_edge_hidden(tape, g, in, enc);
  EdgeState st1 = message_pass(tape, g, st0, enc);

  // Locate directed edges (0->1) and (1->2).
  int e_ab = -1, e_bc = -1;
  for (std::size_t e = 0; e < g.directed_edges.size(); ++e) {
    if (g.directed_edges[e].u == 0 && g.directed_edges[e].v == 1)
      e_ab = static_cast<int>(e);
    if (g.directed_edges[e].u == 1 && g.directed_edges[e].v == 2)
      e_bc = static_cast<int>(e);
  }
  REQUIRE(e_ab >= 0);
  REQUIRE(e_bc >= 0);
  const auto& h0_ab = st0.h[e_ab].data();
  const auto& h0_bc = st0.h[e_bc].data();
  const auto& h1_bc = st1.h[e_bc].data();
  for (int i = 0; i < cfg.d; ++i)
    CHECK(h1_bc[i] == doctest::Approx(h0_bc[i] + h0_ab[i]).epsilon(1e-12));
}

TEST_CASE("iterative encoder equals the recursive enumeration oracle") {
  Rng rng(909);
  for (int trial = 0; trial < 10; ++trial) {
    for (int tau : {0, 1, 2}) {
      EncoderConfig cfg = small_cfg(Pooling::kMean, tau);
      ParamSet params;
      add_encoder_params(params, cfg, rng.next_u64());
      MolecularGraph g = random_test_graph(rng, 2, 4);

      Tape tape;
      EncoderRef enc = encoder_leaves(tape, params, cfg);
      Value r = encode(tape, g, enc, cfg);
      const auto expect =
          oracle::encode_mean_recursive(g, weights_of(params, cfg.d), tau);
      for (int i = 0; i < cfg.d; ++i)
        CHECK(std::fabs(r.data()[i] - expect[i]) < 1e-12);
    }
  }
}

TEST_CASE("atom_readout: isolated atom aggregates nothing") {
  EncoderConfig cfg = small_cfg(Pooling::kMean);
  ParamSet params;
  add_encoder_params(params, cfg, 5);
  // Single atom; no edges at all.
  MolecularGraph g = finalize_graph({RawAtom{6, 0, false}}, {});
  Tape tape;
  EncoderRef enc = encoder_leaves(tape, params, cfg);
  GraphInputs in = graph_inputs(tape, g);
  EdgeState st = init_edge_hidden(tape, g, in, enc);
  auto s = atom_readout(tape, g, in, st, enc);
  REQUIRE(s.size() == 1);

  // Expected: relu(We [a, 0]).
  std::vector<double> cat = g.atoms[0].encoded;
  cat.resize(cat.size() + cfg.d, 0.0);
  auto expect = oracle::relu(oracle::matvec(params.at("enc.We").value.v, cat,
                                            cfg.d,
                                            static_cast<int>(cat.size())));
  for (int i = 0; i < cfg.d; ++i)
    CHECK(s[0].data()[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("pool_mean identities") {
  Tape tape;
  std::vector<Value> xs = {tape.constant({1.0, 2.0}),
                           tape.constant({1.0, 2.0}),
                           tape.constant({1.0, 2.0})};
  Value m = pool_mean(tape, xs);
  CHECK(m.data()[0] == doctest::Approx(1.0));
  CHECK(m.data()[1] == doctest::Approx(2.0));

  std::vector<Value> one = {tape.constant({3.0, -4.0})};
  CHECK(pool_mean(tape, one).data() == std::vector<double>{3.0, -4.0});

  std::vector<Value> three = {tape.constant({1.0}), tape.constant({2.0}),
                              tape.constant({4.0})};
  CHECK(pool_mean(tape, three).scalar() == doctest::Approx(7.0 / 3.0));
}

TEST_CASE("attention pooling identities") {
  EncoderConfig cfg = small_cfg(Pooling::kAttention);
  ParamSet params;
  add_encoder_params(params, cfg, 6);

  SUBCASE("single atom: r = 2 s exactly") {
    MolecularGraph g = finalize_graph({RawAtom{6, 0, false}}, {});
    Tape tape;
    EncoderRef enc = encoder_leaves(tape, params, cfg);
    GraphInputs in = graph_inputs(tape, g);
    EdgeState st = init_edge_hidden(tape, g, in, enc);
    auto s = atom_readout(tape, g, in, st, enc);
    Value r = pool_attention(tape, s, enc);
    for (int i = 0; i < cfg.d; ++i)
      CHECK(r.data()[i] == 2.0 * s[0].data()[i]);
  }

  SUBCASE("n identical atoms: r = (n+1) s") {
    const int n = 4;
    std::vector<RawAtom> atoms(n, RawAtom{6, 0, false});
    MolecularGraph g = finalize_graph(atoms, {});
    Tape tape;
    EncoderRef enc = encoder_leaves(tape, params, cfg);
    GraphInputs in = graph_inputs(tape, g);
    EdgeState st = init_edge_hidden(tape, g, in, enc);
    auto s = atom_readout(tape, g, in, st, enc);
    Value r = pool_attention(tape, s, enc);
    for (int i = 0; i < cfg.d; ++i)
      CHECK(std::fabs(r.data()[i] - (n + 1) * s[0].data()[i]) < 1e-10);
  }

  SUBCASE("weights sum to one") {
    Rng rng(4242);
    for (int trial = 0; trial < 20; ++trial) {
      MolecularGraph g = random_test_graph(rng, 2, 6);
      Tape tape;
      EncoderRef enc = encoder_leaves(tape, params, cfg);
      GraphInputs in = graph_inputs(tape, g);
      EdgeState st = init_edge_hidden(tape, g, in, enc);
      auto s = atom_readout(tape, g, in, st, enc);
      auto ws = attention_weights(tape, s, enc);
      double total = 0.0;
      for (const Value& w : ws) {
        const double v = w.scalar();
        CHECK(v > 0.0);
        CHECK(v < 1.0 + 1e-12);
        total += v;
      }
      CHECK(std::fabs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("encode is invariant under atom relabeling") {
  Rng rng(31337);
  for (Pooling pooling : {Pooling::kMean, Pooling::kAttention}) {
    EncoderConfig cfg = small_cfg(pooling);
    ParamSet params;
    add_encoder_params(params, cfg, 77);
    for (int trial = 0; trial < 15; ++trial) {
      MolecularGraph g = random_test_graph(rng, 2, 7);
      MolecularGraph h = oracle::permute_graph(
          g, oracle::random_permutation(g.num_atoms(), rng));
      Tape tape;
      EncoderRef enc = encoder_leaves(tape, params, cfg);
      Value rg = encode(tape, g, enc, cfg);
      Value rh = encode(tape, h, enc, cfg);
      for (int i = 0; i < cfg.d; ++i)
        CHECK(std::fabs(rg.data()[i] - rh.data()[i]) < 1e-10);
    }
  }
}

TEST_CASE("receptive field: tau bounds information flow on a path") {
  // Path of 6 carbons; perturb the far-end atom's element and check that
  // edge states within the tau-hop horizon of the near end are unchanged.
  const int n = 6;
  std::vector<RawAtom> atoms(n, RawAtom{6, 0, false});
  std::vector<RawBond> bonds;
  for (int i = 0; i + 1 < n; ++i)
    bonds.push_back({i, i + 1, BondOrder::kSingle});
  MolecularGraph base = finalize_graph(atoms, bonds);
  std::vector<RawAtom> changed = atoms;
  changed[n - 1].element = 8;  // far end becomes oxygen
  MolecularGraph mutated = finalize_graph(changed, bonds);

  for (int tau : {0, 1, 2}) {
    EncoderConfig cfg = small_cfg(Pooling::kMean, tau);
    ParamSet params;
    add_encoder_params(params, cfg, 99);
    Tape tape;
    EncoderRef enc = encoder_leaves(tape, params, cfg);

    auto edge_states = [&](const MolecularGraph& g) {
      GraphInputs in = graph_inputs(tape, g);
      EdgeState st = init_edge_hidden(tape, g, in, enc);
      for (int t = 0; t < tau; ++t) st = message_pass(tape, g, st, enc);
      return st;
    };
    EdgeState a = edge_states(base);
    EdgeState b = edge_states(mutated);

    // Edge (0 -> 1): the deepest source feature it can see after tau
    // iterations is atom tau+1 away along the path, so a change at atom
    // n-1 > tau+1 cannot reach it.
    int e01 = -1;
    for (std::size_t e = 0; e < base.directed_edges.size(); ++e)
      if (base.directed_edges[e].u == 0 && base.directed_edges[e].v == 1)
        e01 = static_cast<int>(e);
    REQUIRE(e01 >= 0);
    REQUIRE(n - 1 > tau + 1);
    CHECK(a.h[e01].data() == b.h[e01].data());
  }
}

TEST_CASE("tau = 0 pools readouts of initial states only") {
  EncoderConfig cfg = small_cfg(Pooling::kMean, 0);
  ParamSet params;
  add_encoder_params(params, cfg, 123);
  MolecularGraph g = parse_smiles("CCO");

  Tape tape;
  EncoderRef enc = encoder_leaves(tape, params, cfg);
  Value r = encode(tape, g, enc, cfg);
  const auto expect =
      oracle::encode_mean_recursive(g, weights_of(params, cfg.d), 0);
  for (int i = 0; i < cfg.d; ++i)
    CHECK(r.data()[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}
