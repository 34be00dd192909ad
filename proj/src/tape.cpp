#include "t2t/tape.hpp"

#include <algorithm>
#include <cmath>

#include "t2t/errors.hpp"

namespace t2t::autodiff {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

[[noreturn]] void shape_error(const char* op, const Tensor& a,
                              const Tensor& b) {
  throw ShapeMismatch(std::string(op) + " on shapes " + shape_string(a) +
                      " and " + shape_string(b));
}

}  // namespace

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return NodeId(nodes_.size()) - 1;
}

const Tensor& Tape::value(NodeId id) const { return val_of(nodes_.at(id)); }

const Tensor& Tape::probs(NodeId id) const { return nodes_.at(id).saved; }

NodeId Tape::param(const Tensor& p, int param_id) {
  require_finite(p, "parameter");
  Node n;
  n.op = Op::Param;
  n.ext = &p;
  n.aux = param_id;
  return push(std::move(n));
}

NodeId Tape::constant(Tensor v) {
  require_finite(v, "constant");
  Node n;
  n.op = Op::Const;
  n.val = std::move(v);
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols != B.rows) shape_error("matmul", A, B);
  Tensor C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t p = 0; p < A.cols; ++p) {
      double av = A.at(i, p);
      if (av == 0.0) continue;
      const double* brow = &B.data[p * B.cols];
      double* crow = &C.data[i * C.cols];
      for (std::size_t j = 0; j < B.cols; ++j) crow[j] += av * brow[j];
    }
  require_finite(C, "matmul result");
  Node n;
  n.op = Op::MatMul;
  n.inputs = {a, b};
  n.val = std::move(C);
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) shape_error("add", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] += B.data[i];
  require_finite(C, "add result");
  Node n;
  n.op = Op::Add;
  n.inputs = {a, b};
  n.val = std::move(C);
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) shape_error("elementwise_mul", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] *= B.data[i];
  require_finite(C, "elementwise_mul result");
  Node n;
  n.op = Op::Mul;
  n.inputs = {a, b};
  n.val = std::move(C);
  return push(std::move(n));
}

NodeId Tape::concat_rows(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols != B.cols) shape_error("concat_rows", A, B);
  Tensor C(A.rows + B.rows, A.cols);
  std::copy(A.data.begin(), A.data.end(), C.data.begin());
  std::copy(B.data.begin(), B.data.end(), C.data.begin() + A.size());
  Node n;
  n.op = Op::ConcatRows;
  n.inputs = {a, b};
  n.val = std::move(C);
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId a) {
  Tensor C = value(a);
  for (double& v : C.data) v = std::tanh(v);
  Node n;
  n.op = Op::Tanh;
  n.inputs = {a};
  n.val = std::move(C);
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId a) {
  Tensor C = value(a);
  for (double& v : C.data) v = stable_sigmoid(v);
  Node n;
  n.op = Op::Sigmoid;
  n.inputs = {a};
  n.val = std::move(C);
  return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
  const Tensor& A = value(a);
  Tensor C(A.cols, A.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) C.at(j, i) = A.at(i, j);
  Node n;
  n.op = Op::Transpose;
  n.inputs = {a};
  n.val = std::move(C);
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
  Tensor C = value(a);
  for (double& v : C.data) v *= s;
  require_finite(C, "scale result");
  Node n;
  n.op = Op::Scale;
  n.inputs = {a};
  n.val = std::move(C);
  n.factor = s;
  return push(std::move(n));
}

NodeId Tape::stack_rows(const std::vector<NodeId>& xs) {
  if (xs.empty()) throw ShapeMismatch("stack_rows of nothing");
  std::size_t d = value(xs[0]).rows;
  Tensor C(xs.size(), d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Tensor& x = value(xs[i]);
    if (x.cols != 1 || x.rows != d) shape_error("stack_rows", value(xs[0]), x);
    std::copy(x.data.begin(), x.data.end(), C.data.begin() + i * d);
  }
  Node n;
  n.op = Op::StackRows;
  n.inputs = xs;
  n.val = std::move(C);
  return push(std::move(n));
}

NodeId Tape::row_lookup(NodeId table, int row) {
  const Tensor& T = value(table);
  if (row < 0 || std::size_t(row) >= T.rows)
    throw IndexOutOfRange("row " + std::to_string(row) + " of " +
                          shape_string(T));
  Tensor C(T.cols, 1);
  for (std::size_t j = 0; j < T.cols; ++j) C.data[j] = T.at(row, j);
  Node n;
  n.op = Op::RowLookup;
  n.inputs = {table};
  n.val = std::move(C);
  n.aux = row;
  return push(std::move(n));
}

NodeId Tape::softmax(NodeId a) {
  const Tensor& A = value(a);
  if (A.cols != 1) throw ShapeMismatch("softmax on " + shape_string(A));
  Tensor C = A;
  double mx = *std::max_element(C.data.begin(), C.data.end());
  double z = 0;
  for (double& v : C.data) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : C.data) v /= z;
  require_finite(C, "softmax result");
  Node n;
  n.op = Op::Softmax;
  n.inputs = {a};
  n.val = std::move(C);
  return push(std::move(n));
}

NodeId Tape::softmax_cross_entropy(NodeId logits, int gold) {
  const Tensor& L = value(logits);
  if (L.cols != 1)
    throw ShapeMismatch("softmax_cross_entropy on " + shape_string(L));
  if (gold < 0 || std::size_t(gold) >= L.rows)
    throw IndexOutOfRange("gold index " + std::to_string(gold) +
                          " for logits " + shape_string(L));
  double mx = *std::max_element(L.data.begin(), L.data.end());
  Tensor p = L;
  double z = 0;
  for (double& v : p.data) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : p.data) v /= z;
  Tensor loss(1, 1);
  loss.data[0] = std::log(z) - (L.data[gold] - mx);
  require_finite(loss, "cross-entropy loss");
  Node n;
  n.op = Op::SoftmaxCE;
  n.inputs = {logits};
  n.val = std::move(loss);
  n.saved = std::move(p);
  n.aux = gold;
  return push(std::move(n));
}

NodeId Tape::sum_all(NodeId a) {
  const Tensor& A = value(a);
  Tensor C(1, 1);
  for (double v : A.data) C.data[0] += v;
  require_finite(C, "sum result");
  Node n;
  n.op = Op::SumAll;
  n.inputs = {a};
  n.val = std::move(C);
  return push(std::move(n));
}

void Tape::backward(NodeId loss, std::vector<Tensor>& param_grads) const {
  const Tensor& lv = value(loss);
  if (lv.rows != 1 || lv.cols != 1)
    throw ShapeMismatch("backward from non-scalar node " + shape_string(lv));

  std::vector<Tensor> grad(nodes_.size());
  auto slot = [&](NodeId id) -> Tensor& {
    Tensor& g = grad[id];
    if (g.size() == 0) {
      const Tensor& v = val_of(nodes_[id]);
      g = Tensor(v.rows, v.cols);
    }
    return g;
  };

  slot(loss).data[0] = 1.0;

  for (NodeId i = loss; i >= 0; --i) {
    const Node& n = nodes_[i];
    const Tensor& g = grad[i];
    if (g.size() == 0) continue;  // not reachable from the loss
    if (!all_finite(g))
      throw NonFiniteValue("gradient of node " + std::to_string(i) +
                           " is not finite");
    switch (n.op) {
      case Op::Param: {
        if (n.aux < 0 || std::size_t(n.aux) >= param_grads.size())
          throw IndexOutOfRange("parameter id " + std::to_string(n.aux));
        Tensor& pg = param_grads[n.aux];
        if (pg.size() == 0) pg = Tensor(g.rows, g.cols);
        if (!pg.same_shape(g)) shape_error("gradient accumulate", pg, g);
        for (std::size_t k = 0; k < g.size(); ++k) pg.data[k] += g.data[k];
        break;
      }
      case Op::Const:
        break;
      case Op::MatMul: {
        const Tensor& A = val_of(nodes_[n.inputs[0]]);
        const Tensor& B = val_of(nodes_[n.inputs[1]]);
        Tensor& da = slot(n.inputs[0]);
        Tensor& db = slot(n.inputs[1]);
        // dA = G B^T
        for (std::size_t i2 = 0; i2 < A.rows; ++i2)
          for (std::size_t p = 0; p < A.cols; ++p) {
            double s = 0;
            const double* grow = &g.data[i2 * g.cols];
            const double* brow = &B.data[p * B.cols];
            for (std::size_t j = 0; j < B.cols; ++j) s += grow[j] * brow[j];
            da.data[i2 * A.cols + p] += s;
          }
        // dB = A^T G
        for (std::size_t p = 0; p < B.rows; ++p)
          for (std::size_t i2 = 0; i2 < A.rows; ++i2) {
            double av = A.at(i2, p);
            if (av == 0.0) continue;
            const double* grow = &g.data[i2 * g.cols];
            double* drow = &db.data[p * B.cols];
            for (std::size_t j = 0; j < B.cols; ++j) drow[j] += av * grow[j];
          }
        break;
      }
      case Op::Add: {
        for (NodeId in : n.inputs) {
          Tensor& d = slot(in);
          for (std::size_t k = 0; k < g.size(); ++k) d.data[k] += g.data[k];
        }
        break;
      }
      case Op::Mul: {
        const Tensor& A = val_of(nodes_[n.inputs[0]]);
        const Tensor& B = val_of(nodes_[n.inputs[1]]);
        Tensor& da = slot(n.inputs[0]);
        Tensor& db = slot(n.inputs[1]);
        for (std::size_t k = 0; k < g.size(); ++k) {
          da.data[k] += g.data[k] * B.data[k];
          db.data[k] += g.data[k] * A.data[k];
        }
        break;
      }
      case Op::ConcatRows: {
        const Tensor& A = val_of(nodes_[n.inputs[0]]);
        Tensor& da = slot(n.inputs[0]);
        Tensor& db = slot(n.inputs[1]);
        for (std::size_t k = 0; k < A.size(); ++k) da.data[k] += g.data[k];
        for (std::size_t k = 0; k < db.size(); ++k)
          db.data[k] += g.data[A.size() + k];
        break;
      }
      case Op::Tanh: {
        Tensor& d = slot(n.inputs[0]);
        for (std::size_t k = 0; k < g.size(); ++k) {
          double y = n.val.data[k];
          d.data[k] += g.data[k] * (1.0 - y * y);
        }
        break;
      }
      case Op::Sigmoid: {
        Tensor& d = slot(n.inputs[0]);
        for (std::size_t k = 0; k < g.size(); ++k) {
          double y = n.val.data[k];
          d.data[k] += g.data[k] * y * (1.0 - y);
        }
        break;
      }
      case Op::Transpose: {
        Tensor& d = slot(n.inputs[0]);
        const Tensor& A = val_of(nodes_[n.inputs[0]]);
        for (std::size_t i2 = 0; i2 < A.rows; ++i2)
          for (std::size_t j = 0; j < A.cols; ++j)
            d.at(i2, j) += g.at(j, i2);
        break;
      }
      case Op::Scale: {
        Tensor& d = slot(n.inputs[0]);
        for (std::size_t k = 0; k < g.size(); ++k)
          d.data[k] += g.data[k] * n.factor;
        break;
      }
      case Op::StackRows: {
        std::size_t d_cols = n.val.cols;
        for (std::size_t r = 0; r < n.inputs.size(); ++r) {
          Tensor& d = slot(n.inputs[r]);
          for (std::size_t j = 0; j < d_cols; ++j)
            d.data[j] += g.data[r * d_cols + j];
        }
        break;
      }
      case Op::RowLookup: {
        Tensor& d = slot(n.inputs[0]);
        std::size_t cols = d.cols;
        for (std::size_t j = 0; j < cols; ++j)
          d.data[std::size_t(n.aux) * cols + j] += g.data[j];
        break;
      }
      case Op::Softmax: {
        Tensor& d = slot(n.inputs[0]);
        const Tensor& p = n.val;
        double dot = 0;
        for (std::size_t k = 0; k < p.size(); ++k)
          dot += p.data[k] * g.data[k];
        for (std::size_t k = 0; k < p.size(); ++k)
          d.data[k] += p.data[k] * (g.data[k] - dot);
        break;
      }
      case Op::SoftmaxCE: {
        Tensor& d = slot(n.inputs[0]);
        const Tensor& p = n.saved;
        double gs = g.data[0];
        for (std::size_t k = 0; k < p.size(); ++k)
          d.data[k] += gs * (p.data[k] - (int(k) == n.aux ? 1.0 : 0.0));
        break;
      }
      case Op::SumAll: {
        Tensor& d = slot(n.inputs[0]);
        for (std::size_t k = 0; k < d.size(); ++k) d.data[k] += g.data[0];
        break;
      }
    }
  }
}

}  // namespace t2t::autodiff
