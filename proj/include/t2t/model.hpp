#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "t2t/grammar.hpp"
#include "t2t/interp.hpp"
#include "t2t/params.hpp"
#include "t2t/tape.hpp"
#include "t2t/tree.hpp"

namespace t2t::model {

using autodiff::NodeId;
using autodiff::Tape;

// Binarized source with one (h, c) per node, the root state first, plus
// the stacked hidden matrix shared by every attention query.
struct EncodedTree {
  std::vector<std::pair<NodeId, NodeId>> states;  // preorder; [0] is the root
  NodeId h_matrix = -1;    // (n, d): rows are node hiddens in preorder
  NodeId h_matrix_t = -1;  // (d, n)
};

// Bottom-up tree-LSTM over the binarized source. For each node with
// embedding x: gate = sigmoid/tanh(w x + ul h_left + ur h_right + b),
// c = in*u + fl*c_left + fr*c_right, h = out*tanh(c); absent children
// contribute zero vectors.
EncodedTree encode(Tape& tape, const ParameterSet& params,
                   const syntax::BinaryTree& src);

// Dot-product attention: alpha = softmax(H h), e_s = H^T alpha.
NodeId attention_context(Tape& tape, const EncodedTree& enc, NodeId h);

// e_t = tanh(W_1 [e_s ; h]).
NodeId combined_embedding(Tape& tape, const ParameterSet& params, NodeId e_s,
                          NodeId h);

// Logits W e_t over the full target vocabulary plus EOS (baseline), or
// W_k e_t over members(k) only (grammar).
NodeId baseline_logits(Tape& tape, const ParameterSet& params, NodeId e_t);
NodeId grammar_logits(Tape& tape, const ParameterSet& params, NodeId e_t,
                      syntax::CategoryId k);

// Index of the largest probability; ties go to the lowest index (for the
// grammar decoder that is the lowest member position, hence the lowest
// token id, since member lists are ascending).
std::size_t greedy_pick(const autodiff::Tensor& distribution);

// (h_i, c_i) for child slot `child_index` (0-based): standard LSTM cell
// number child_index applied to state (h, c) with input
// [tgt_embed[token_row] ; e_t]. token_row indexes the embedding table B
// (target token id, or the EOS row for the baseline).
std::pair<NodeId, NodeId> child_states(Tape& tape, const ParameterSet& params,
                                       NodeId h, NodeId c, int token_row,
                                       NodeId e_t, int child_index);

struct GrammarDecodeResult {
  syntax::Tree tree;      // meaningful when !overflow
  bool overflow = false;  // node or depth limit hit
};

// Breadth-first greedy decode under grammar constraints, seeded with the
// encoder root state and the root category. Every non-overflow result
// passes validate by construction.
GrammarDecodeResult decode_grammar(Tape& tape, const ParameterSet& params,
                                   const EncodedTree& enc,
                                   const DecodeLimits& limits);

struct BaselineDecodeResult {
  syntax::BinaryTree binary;          // raw output; EOS tokens as leaves
  std::optional<syntax::Tree> tree;   // unbinarized, when well-formed
  bool overflow = false;
  bool valid = false;  // tree exists and passes the target grammar
};

// Breadth-first greedy decode over the full vocabulary; EOS closes a
// branch, any other token opens two child slots. The n-ary tree is
// recovered by stripping EOS and undoing the LCRS encoding; malformed
// outputs are flagged, never thrown.
BaselineDecodeResult decode_baseline(Tape& tape, const ParameterSet& params,
                                     const EncodedTree& enc,
                                     const DecodeLimits& limits);

struct LossBreakdown {
  NodeId loss = -1;           // scalar: mean cross-entropy over positions
  std::size_t positions = 0;  // predicted positions contributing to loss
  std::size_t correct = 0;    // argmax matches among them
};

// Teacher-forced loss of a gold pair. The grammar kind predicts each node
// of the n-ary target (tree_size positions); the baseline predicts each
// node of the binarized target plus one EOS per absent child slot
// (2*size+1 positions). Child states always come from gold tokens.
// Throws IllegalTarget when a gold token falls outside its slot's
// category (grammar kind).
LossBreakdown teacher_forced_loss(Tape& tape, const ParameterSet& params,
                                  const corpus::TranslationPair& pair,
                                  DecoderKind kind);

}  // namespace t2t::model
