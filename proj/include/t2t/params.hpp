#pragma once

#include <functional>
#include <string>
#include <vector>

#include "t2t/rng.hpp"
#include "t2t/tensor.hpp"

namespace t2t::model {

enum class DecoderKind { Grammar, Baseline };

std::string decoder_kind_name(DecoderKind k);
DecoderKind decoder_kind_from_name(const std::string& name);  // throws ConfigError

struct DecodeLimits {
  std::size_t max_nodes = 512;
  std::size_t max_depth = 64;
};

// The source grammar is always the imperative language, the target the
// functional one; both live in t2t::syntax as process-wide constants.
struct ModelConfig {
  int hidden_size = 64;  // d
  int embed_size = 64;   // e
  DecoderKind decoder = DecoderKind::Grammar;
  DecodeLimits limits;
  double init_scale = 0.1;

  // Child cells: one per child slot the decoder can generate. The grammar
  // decoder needs 4 (the widest target arity); the baseline generates
  // left/right slots of the binarized tree.
  int max_children() const {
    return decoder == DecoderKind::Grammar ? 4 : 2;
  }
};

void validate_model_config(const ModelConfig& config);  // throws ConfigError

// One gate of the binary tree-LSTM encoder: pre-activation
// w·x + ul·h_left + ur·h_right + b.
struct EncoderGate {
  autodiff::Tensor w;   // (d, e)
  autodiff::Tensor ul;  // (d, d)
  autodiff::Tensor ur;  // (d, d)
  autodiff::Tensor b;   // (d, 1)
};

struct EncoderCell {
  EncoderGate in, fl, fr, out, u;
};

// One standard LSTM cell (per child index), input size e+d, state size d.
struct ChildCell {
  autodiff::Tensor wi, ui, bi;  // input gate: (d,e+d), (d,d), (d,1)
  autodiff::Tensor wf, uf, bf;  // forget gate
  autodiff::Tensor wo, uo, bo;  // output gate
  autodiff::Tensor wu, uu, bu;  // candidate
};

struct ParameterSet {
  autodiff::Tensor src_embed;  // (|source vocab|, e)
  EncoderCell encoder;
  autodiff::Tensor combiner;                 // W_1: (d, 2d)
  autodiff::Tensor out_head;                 // W: (|target vocab|+1, d)
  autodiff::Tensor tgt_embed;                // B: (|target vocab|+1, e)
  std::vector<autodiff::Tensor> category_heads;  // W_k: (|members(k)|, d)
  std::vector<ChildCell> child_cells;        // max_children() cells

  // Visits every tensor in a fixed order with a stable name; the order
  // defines parameter ids for gradients, optimizer state and checkpoints.
  void visit(const std::function<void(const std::string&, autodiff::Tensor&)>& fn);

  std::vector<autodiff::Tensor*> tensors();
  std::vector<const autodiff::Tensor*> tensors() const;
  std::vector<std::string> tensor_names();
};

// Uniform [-init_scale, +init_scale] weights, zero biases, shapes per the
// config; the draw order is the visit order, so a seed pins every value.
ParameterSet init_params(const ModelConfig& config, Rng& rng);

}  // namespace t2t::model
