#pragma once

#include <vector>

#include "t2t/tensor.hpp"

namespace t2t::autodiff {

using NodeId = int;

// Append-only computation record for one example. Nodes are created in
// topological order by construction; backward() replays them in reverse.
// Trainable leaves reference their parameter tensors by pointer (the
// parameters outlive the tape), everything else owns its value.
class Tape {
 public:
  // Trainable leaf. `param_id` indexes the gradient vector passed to
  // backward(); the tensor must stay alive and unmodified while the tape
  // is in use.
  NodeId param(const Tensor& p, int param_id);

  // Non-trainable leaf (inputs, fixed masks, ...).
  NodeId constant(Tensor v);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId concat_rows(NodeId a, NodeId b);
  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId transpose(NodeId a);
  NodeId scale(NodeId a, double s);

  // Stacks single-column vectors (or scalars) as the rows of one matrix:
  // n inputs of shape (d,1) become (n,d). Rows of the output correspond to
  // inputs in order.
  NodeId stack_rows(const std::vector<NodeId>& xs);

  // Row `row` of a (V,d) matrix as a (d,1) column vector.
  NodeId row_lookup(NodeId table, int row);

  // Column vector -> column vector of probabilities (max-subtracted).
  NodeId softmax(NodeId a);

  // Scalar (1,1) node: -log softmax(logits)[gold], numerically stable.
  // The probability vector is saved on the node and readable via probs().
  NodeId softmax_cross_entropy(NodeId logits, int gold);

  // Sum of all entries as a (1,1) scalar.
  NodeId sum_all(NodeId a);

  const Tensor& value(NodeId id) const;
  // Saved probabilities of a softmax_cross_entropy node.
  const Tensor& probs(NodeId id) const;

  std::size_t node_count() const { return nodes_.size(); }

  // Reverse accumulation from the scalar `loss` node. Adds each parameter
  // gradient into param_grads[param_id] (allocating the right shape when
  // the slot is empty), so accumulation across examples is a sequence of
  // backward calls. Parameters not reachable from the loss are left
  // untouched. Throws NonFiniteValue on any non-finite gradient.
  void backward(NodeId loss, std::vector<Tensor>& param_grads) const;

 private:
  enum class Op {
    Param,
    Const,
    MatMul,
    Add,
    Mul,
    ConcatRows,
    Tanh,
    Sigmoid,
    Transpose,
    Scale,
    StackRows,
    RowLookup,
    Softmax,
    SoftmaxCE,
    SumAll,
  };

  struct Node {
    Op op;
    std::vector<NodeId> inputs;
    Tensor val;                     // owned value (empty for Param)
    const Tensor* ext = nullptr;    // parameter storage for Param
    Tensor saved;                   // softmax probabilities for SoftmaxCE
    int aux = 0;                    // param_id / gold index / lookup row
    double factor = 1.0;            // Scale multiplier
  };

  NodeId push(Node n);
  const Tensor& val_of(const Node& n) const { return n.ext ? *n.ext : n.val; }

  std::vector<Node> nodes_;
};

}  // namespace t2t::autodiff
