#pragma once

#include <string>
#include <vector>

#include "moltx/molgraph.hpp"
#include "moltx/params.hpp"
#include "moltx/tape.hpp"

namespace moltx {

enum class Pooling { kMean, kAttention };

const char* pooling_name(Pooling p);
std::optional<Pooling> pooling_from_name(std::string_view name);

// Directed-edge message-passing encoder. Hidden states live on directed
// edges; an edge (u, v) is updated from the states of edges entering u,
// excluding the reverse edge (v, u), with a skip connection to the initial
// state. Readout sums incoming edge states per atom, re-mixes with the raw
// atom features, then pools (mean or softmax attention) into one d-vector.
struct EncoderConfig {
  int d = 50;
  int tau = 3;
  Pooling pooling = Pooling::kAttention;
  int attn_hidden = 100;
  int atom_width = AtomFeatures::kWidth;
  int bond_width = BondFeatures::kWidth;
};

void add_encoder_params(ParamSet& params, const EncoderConfig& cfg,
                        std::uint64_t seed,
                        const std::string& prefix = "enc");

// Tape-resident views of the encoder parameters for one forward build.
struct EncoderRef {
  Value W0;       // d x (atom_width + bond_width)
  Value W;        // d x d
  Value We;       // d x (atom_width + d)
  Value attn_W1;  // attn_hidden x d     (attention pooling only)
  Value attn_b1;
  Value attn_W2;  // 1 x attn_hidden
  Value attn_b2;
};

EncoderRef encoder_leaves(Tape& tape, ParamSet& params,
                          const EncoderConfig& cfg,
                          const std::string& prefix = "enc");

// Per-compound constants reused across the message-passing layers.
struct GraphInputs {
  std::vector<Value> atom_features;
  std::vector<Value> bond_features;
};

GraphInputs graph_inputs(Tape& tape, const MolecularGraph& g);

struct EdgeState {
  std::vector<Value> h;   // one state per directed edge
  std::vector<Value> h0;  // initial states, skip-connection target
  int iteration = 0;
};

// h0_uv = ReLU(W0 [a_u, e_uv]); the concatenation takes the source atom.
EdgeState init_edge_hidden(Tape& tape, const MolecularGraph& g,
                           const GraphInputs& in, const EncoderRef& enc);

// m_uv = sum of h_ku over neighbors k of u except v (zero when empty);
// h'_uv = ReLU(h0_uv + W m_uv).
EdgeState message_pass(Tape& tape, const MolecularGraph& g,
                       const EdgeState& state, const EncoderRef& enc);

// h_u = sum of incoming edge states; s_u = ReLU(We [a_u, h_u]).
std::vector<Value> atom_readout(Tape& tape, const MolecularGraph& g,
                                const GraphInputs& in, const EdgeState& state,
                                const EncoderRef& enc);

Value pool_mean(Tape& tape, std::span<const Value> atom_embeddings);

// w = softmax over atoms of f_a(s_u); r = sum of (1 + w_u) * s_u.
Value pool_attention(Tape& tape, std::span<const Value> atom_embeddings,
                     const EncoderRef& enc);

// Softmax weights only; exposed for the attention-identity checks.
std::vector<Value> attention_weights(Tape& tape,
                                     std::span<const Value> atom_embeddings,
                                     const EncoderRef& enc);

Value encode(Tape& tape, const MolecularGraph& g, const EncoderRef& enc,
             const EncoderConfig& cfg);

}  // namespace moltx
