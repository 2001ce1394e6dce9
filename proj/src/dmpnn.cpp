#include "moltx/dmpnn.hpp"

namespace moltx {

const char* pooling_name(Pooling p) {
  return p == Pooling::kMean ? "mean" : "attention";
}

std::optional<Pooling> pooling_from_name(std::string_view name) {
  if (name == "mean") return Pooling::kMean;
  if (name == "attention") return Pooling::kAttention;
  return std::nullopt;
}

void add_encoder_params(ParamSet& params, const EncoderConfig& cfg,
                        std::uint64_t seed, const std::string& prefix) {
  const int aw = cfg.atom_width;
  const int bw = cfg.bond_width;
  auto mk = [&](const std::string& name, int r, int c, bool bias) {
    params.add(name, init_param(name, r, c, seed, bias));
  };
  mk(prefix + ".W0", cfg.d, aw + bw, false);
  mk(prefix + ".W", cfg.d, cfg.d, false);
  mk(prefix + ".We", cfg.d, aw + cfg.d, false);
  if (cfg.pooling == Pooling::kAttention) {
    mk(prefix + ".attn.W1", cfg.attn_hidden, cfg.d, false);
    mk(prefix + ".attn.b1", cfg.attn_hidden, 1, true);
    mk(prefix + ".attn.W2", 1, cfg.attn_hidden, false);
    mk(prefix + ".attn.b2", 1, 1, true);
  }
}

EncoderRef encoder_leaves(Tape& tape, ParamSet& params,
                          const EncoderConfig& cfg,
                          const std::string& prefix) {
  EncoderRef enc;
  enc.W0 = tape.leaf(params.at(prefix + ".W0"));
  enc.W = tape.leaf(params.at(prefix + ".W"));
  enc.We = tape.leaf(params.at(prefix + ".We"));
  if (cfg.pooling == Pooling::kAttention) {
    enc.attn_W1 = tape.leaf(params.at(prefix + ".attn.W1"));
    enc.attn_b1 = tape.leaf(params.at(prefix + ".attn.b1"));
    enc.attn_W2 = tape.leaf(params.at(prefix + ".attn.W2"));
    enc.attn_b2 = tape.leaf(params.at(prefix + ".attn.b2"));
  }
  return enc;
}

GraphInputs graph_inputs(Tape& tape, const MolecularGraph& g) {
  GraphInputs in;
  in.atom_features.reserve(g.atoms.size());
  for (const auto& a : g.atoms)
    in.atom_features.push_back(tape.constant(a.encoded));
  in.bond_features.reserve(g.bonds.size());
  for (const auto& b : g.bonds)
    in.bond_features.push_back(tape.constant(b.features.encoded));
  return in;
}

EdgeState init_edge_hidden(Tape& tape, const MolecularGraph& g,
                           const GraphInputs& in, const EncoderRef& enc) {
  EdgeState st;
  st.iteration = 0;
  st.h.reserve(g.directed_edges.size());
  for (const auto& e : g.directed_edges) {
    Value cat = tape.concat(in.atom_features[e.u], in.bond_features[e.bond]);
    st.h.push_back(tape.relu(tape.dense(cat, enc.W0)));
  }
  st.h0 = st.h;
  return st;
}

EdgeState message_pass(Tape& tape, const MolecularGraph& g,
                       const EdgeState& state, const EncoderRef& enc) {
  EdgeState next;
  next.iteration = state.iteration + 1;
  next.h0 = state.h0;
  next.h.reserve(g.directed_edges.size());
  const int d = enc.W.rows();
  for (std::size_t e = 0; e < g.directed_edges.size(); ++e) {
    const auto& edge = g.directed_edges[e];
    const int reverse = g.reverse_edge(static_cast<int>(e));
    std::vector<Value> incoming;
    for (const auto& in : g.incoming[edge.u])
      if (in.edge != reverse) incoming.push_back(state.h[in.edge]);
    Value message = incoming.empty() ? tape.constant(Tensor(d, 1))
                                     : tape.sum(incoming);
    next.h.push_back(
        tape.relu(tape.add(state.h0[e], tape.dense(message, enc.W))));
  }
  return next;
}

std::vector<Value> atom_readout(Tape& tape, const MolecularGraph& g,
                                const GraphInputs& in, const EdgeState& state,
                                const EncoderRef& enc) {
  std::vector<Value> out;
  out.reserve(g.atoms.size());
  const int d = enc.W.rows();
  for (int u = 0; u < g.num_atoms(); ++u) {
    std::vector<Value> incoming;
    for (const auto& ie : g.incoming[u]) incoming.push_back(state.h[ie.edge]);
    Value hu = incoming.empty() ? tape.constant(Tensor(d, 1))
                                : tape.sum(incoming);
    Value cat = tape.concat(in.atom_features[u], hu);
    out.push_back(tape.relu(tape.dense(cat, enc.We)));
  }
  return out;
}

Value pool_mean(Tape& tape, std::span<const Value> atom_embeddings) {
  return tape.mean(atom_embeddings);
}

std::vector<Value> attention_weights(Tape& tape,
                                     std::span<const Value> atom_embeddings,
                                     const EncoderRef& enc) {
  std::vector<Value> scores;
  scores.reserve(atom_embeddings.size());
  for (const Value& s : atom_embeddings) {
    Value hidden = tape.relu(tape.dense(s, enc.attn_W1, enc.attn_b1));
    scores.push_back(tape.dense(hidden, enc.attn_W2, enc.attn_b2));
  }
  Value w = tape.softmax(tape.concat(scores));
  std::vector<Value> out;
  out.reserve(atom_embeddings.size());
  for (std::size_t u = 0; u < atom_embeddings.size(); ++u)
    out.push_back(tape.index(w, static_cast<int>(u)));
  return out;
}

Value pool_attention(Tape& tape, std::span<const Value> atom_embeddings,
                     const EncoderRef& enc) {
  std::vector<Value> weights = attention_weights(tape, atom_embeddings, enc);
  std::vector<Value> terms;
  terms.reserve(atom_embeddings.size());
  for (std::size_t u = 0; u < atom_embeddings.size(); ++u)
    terms.push_back(tape.scalar_mul(atom_embeddings[u],
                                    tape.add_const(weights[u], 1.0)));
  return tape.sum(terms);
}

Value encode(Tape& tape, const MolecularGraph& g, const EncoderRef& enc,
             const EncoderConfig& cfg) {
  if (g.num_atoms() == 0) throw Error("encode: empty graph");
  GraphInputs in = graph_inputs(tape, g);
  EdgeState st = init_edge_hidden(tape, g, in, enc);
  for (int t = 0; t < cfg.tau; ++t) st = message_pass(tape, g, st, enc);
  std::vector<Value> s = atom_readout(tape, g, in, st, enc);
  return cfg.pooling == Pooling::kMean ? pool_mean(tape, s)
                                       : pool_attention(tape, s, enc);
}

}  // namespace moltx
