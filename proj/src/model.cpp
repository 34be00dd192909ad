#include "t2t/model.hpp"

#include <deque>
#include <functional>
#include <unordered_map>

#include "t2t/errors.hpp"

namespace t2t::model {

using autodiff::Tensor;
using syntax::BinaryTree;
using syntax::CategoryId;
using syntax::GrammarSpec;
using syntax::Tree;

namespace {

// Maps parameter tensors to tape nodes for one forward pass, creating at
// most one Param node per tensor and assigning the stable parameter ids
// (visit order) that backward()/adam_step expect.
class Net {
 public:
  Net(Tape& tape, const ParameterSet& params) : tape_(tape) {
    int id = 0;
    for (const Tensor* t : params.tensors()) ids_[t] = id++;
  }

  NodeId operator()(const Tensor& w) {
    auto hit = cache_.find(&w);
    if (hit != cache_.end()) return hit->second;
    NodeId n = tape_.param(w, ids_.at(&w));
    cache_.emplace(&w, n);
    return n;
  }

 private:
  Tape& tape_;
  std::unordered_map<const Tensor*, int> ids_;
  std::unordered_map<const Tensor*, NodeId> cache_;
};

int eos_row(const GrammarSpec& tg) { return int(tg.vocab_size()); }

}  // namespace

EncodedTree encode(Tape& tape, const ParameterSet& params,
                   const BinaryTree& src) {
  Net net(tape, params);
  const GrammarSpec& sg = syntax::for_grammar();
  std::size_t d = params.combiner.rows;
  NodeId zero = tape.constant(Tensor(d, 1));
  NodeId embed = net(params.src_embed);

  EncodedTree enc;
  std::function<std::pair<NodeId, NodeId>(const BinaryTree&)> walk =
      [&](const BinaryTree& node) -> std::pair<NodeId, NodeId> {
    std::size_t slot = enc.states.size();
    enc.states.emplace_back(-1, -1);  // claim the preorder position
    auto [hl, cl] = node.left ? walk(*node.left) : std::pair(zero, zero);
    auto [hr, cr] = node.right ? walk(*node.right) : std::pair(zero, zero);
    NodeId x = tape.row_lookup(embed, sg.token_id(node.token));
    auto gate = [&](const EncoderGate& g, bool squash_tanh) {
      NodeId pre = tape.add(
          tape.add(tape.matmul(net(g.w), x),
                   tape.add(tape.matmul(net(g.ul), hl),
                            tape.matmul(net(g.ur), hr))),
          net(g.b));
      return squash_tanh ? tape.tanh(pre) : tape.sigmoid(pre);
    };
    NodeId gi = gate(params.encoder.in, false);
    NodeId gfl = gate(params.encoder.fl, false);
    NodeId gfr = gate(params.encoder.fr, false);
    NodeId go = gate(params.encoder.out, false);
    NodeId gu = gate(params.encoder.u, true);
    NodeId c = tape.add(tape.mul(gi, gu),
                        tape.add(tape.mul(gfl, cl), tape.mul(gfr, cr)));
    NodeId h = tape.mul(go, tape.tanh(c));
    enc.states[slot] = {h, c};
    return {h, c};
  };
  walk(src);

  std::vector<NodeId> hiddens;
  hiddens.reserve(enc.states.size());
  for (const auto& [h, c] : enc.states) hiddens.push_back(h);
  enc.h_matrix = tape.stack_rows(hiddens);
  enc.h_matrix_t = tape.transpose(enc.h_matrix);
  return enc;
}

NodeId attention_context(Tape& tape, const EncodedTree& enc, NodeId h) {
  NodeId scores = tape.matmul(enc.h_matrix, h);
  NodeId alpha = tape.softmax(scores);
  return tape.matmul(enc.h_matrix_t, alpha);
}

NodeId combined_embedding(Tape& tape, const ParameterSet& params, NodeId e_s,
                          NodeId h) {
  Net net(tape, params);
  return tape.tanh(tape.matmul(net(params.combiner), tape.concat_rows(e_s, h)));
}

NodeId baseline_logits(Tape& tape, const ParameterSet& params, NodeId e_t) {
  Net net(tape, params);
  return tape.matmul(net(params.out_head), e_t);
}

NodeId grammar_logits(Tape& tape, const ParameterSet& params, NodeId e_t,
                      CategoryId k) {
  if (k < 0 || std::size_t(k) >= params.category_heads.size())
    throw UnknownCategory("category id " + std::to_string(k));
  Net net(tape, params);
  return tape.matmul(net(params.category_heads[std::size_t(k)]), e_t);
}

std::size_t greedy_pick(const Tensor& distribution) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < distribution.size(); ++i)
    if (distribution.data[i] > distribution.data[best]) best = i;
  return best;
}

std::pair<NodeId, NodeId> child_states(Tape& tape, const ParameterSet& params,
                                       NodeId h, NodeId c, int token_row,
                                       NodeId e_t, int child_index) {
  if (child_index < 0 || std::size_t(child_index) >= params.child_cells.size())
    throw IndexOutOfRange("child cell " + std::to_string(child_index) +
                          " of " + std::to_string(params.child_cells.size()));
  Net net(tape, params);
  const ChildCell& cell = params.child_cells[std::size_t(child_index)];
  NodeId x = tape.concat_rows(
      tape.row_lookup(net(params.tgt_embed), token_row), e_t);
  auto gate = [&](const Tensor& w, const Tensor& u, const Tensor& b,
                  bool squash_tanh) {
    NodeId pre = tape.add(
        tape.add(tape.matmul(net(w), x), tape.matmul(net(u), h)), net(b));
    return squash_tanh ? tape.tanh(pre) : tape.sigmoid(pre);
  };
  NodeId gi = gate(cell.wi, cell.ui, cell.bi, false);
  NodeId gf = gate(cell.wf, cell.uf, cell.bf, false);
  NodeId go = gate(cell.wo, cell.uo, cell.bo, false);
  NodeId gu = gate(cell.wu, cell.uu, cell.bu, true);
  NodeId c2 = tape.add(tape.mul(gf, c), tape.mul(gi, gu));
  NodeId h2 = tape.mul(go, tape.tanh(c2));
  return {h2, c2};
}

GrammarDecodeResult decode_grammar(Tape& tape, const ParameterSet& params,
                                   const EncodedTree& enc,
                                   const DecodeLimits& limits) {
  const GrammarSpec& tg = syntax::lambda_grammar();

  struct Slot {
    NodeId h, c;
    CategoryId category;
    int parent;  // index into `flat`, -1 for the root
    std::size_t depth;
  };
  struct Flat {
    std::string token;
    std::vector<int> kids;
  };

  std::deque<Slot> queue;
  queue.push_back(
      {enc.states[0].first, enc.states[0].second, tg.root(), -1, 1});
  std::vector<Flat> flat;

  while (!queue.empty()) {
    Slot item = queue.front();
    queue.pop_front();
    if (flat.size() >= limits.max_nodes || item.depth > limits.max_depth)
      return {Tree(), true};

    NodeId e_s = attention_context(tape, enc, item.h);
    NodeId e_t = combined_embedding(tape, params, e_s, item.h);
    NodeId probs =
        tape.softmax(grammar_logits(tape, params, e_t, item.category));
    std::size_t pick = greedy_pick(tape.value(probs));
    syntax::TokenId token = tg.members(item.category)[pick];

    int self = int(flat.size());
    flat.push_back({tg.token(token).name, {}});
    if (item.parent >= 0) flat[std::size_t(item.parent)].kids.push_back(self);

    const std::vector<CategoryId>& kid_cats = tg.child_categories(token);
    for (std::size_t i = 0; i < kid_cats.size(); ++i) {
      auto [h2, c2] =
          child_states(tape, params, item.h, item.c, token, e_t, int(i));
      queue.push_back({h2, c2, kid_cats[i], self, item.depth + 1});
    }
  }

  std::function<Tree(int)> build = [&](int idx) {
    Tree t(flat[std::size_t(idx)].token);
    for (int kid : flat[std::size_t(idx)].kids)
      t.children.push_back(build(kid));
    return t;
  };
  return {build(0), false};
}

BaselineDecodeResult decode_baseline(Tape& tape, const ParameterSet& params,
                                     const EncodedTree& enc,
                                     const DecodeLimits& limits) {
  const GrammarSpec& tg = syntax::lambda_grammar();
  int eos = eos_row(tg);

  struct Slot {
    NodeId h, c;
    BinaryTree* dest;
    std::size_t depth;
  };

  BaselineDecodeResult result;
  std::deque<Slot> queue;
  queue.push_back(
      {enc.states[0].first, enc.states[0].second, &result.binary, 1});
  std::size_t generated = 0;

  while (!queue.empty()) {
    Slot item = queue.front();
    queue.pop_front();
    if (generated >= limits.max_nodes || item.depth > limits.max_depth) {
      result.overflow = true;
      return result;
    }
    ++generated;

    NodeId e_s = attention_context(tape, enc, item.h);
    NodeId e_t = combined_embedding(tape, params, e_s, item.h);
    NodeId probs = tape.softmax(baseline_logits(tape, params, e_t));
    int pick = int(greedy_pick(tape.value(probs)));

    if (pick == eos) {
      item.dest->token = syntax::kEosToken;
      continue;  // a branch ends at EOS
    }
    item.dest->token = tg.token(pick).name;
    item.dest->left = std::make_unique<BinaryTree>();
    item.dest->right = std::make_unique<BinaryTree>();
    auto [hl, cl] =
        child_states(tape, params, item.h, item.c, pick, e_t, 0);
    auto [hr, cr] =
        child_states(tape, params, item.h, item.c, pick, e_t, 1);
    queue.push_back({hl, cl, item.dest->left.get(), item.depth + 1});
    queue.push_back({hr, cr, item.dest->right.get(), item.depth + 1});
  }

  // Strip EOS leaves back to absent children, then undo the LCRS encoding.
  if (result.binary.token == syntax::kEosToken) return result;  // empty output
  std::function<std::unique_ptr<BinaryTree>(const BinaryTree&)> strip =
      [&](const BinaryTree& b) -> std::unique_ptr<BinaryTree> {
    if (b.token == syntax::kEosToken) return nullptr;
    auto out = std::make_unique<BinaryTree>(b.token);
    if (b.left) out->left = strip(*b.left);
    if (b.right) out->right = strip(*b.right);
    return out;
  };
  std::unique_ptr<BinaryTree> stripped = strip(result.binary);
  try {
    result.tree = syntax::lcrs_unbinarize(*stripped);
  } catch (const RootHasSibling&) {
    return result;  // denotes a forest; flagged invalid
  }
  result.valid = tg.validate(*result.tree).valid;
  return result;
}

LossBreakdown teacher_forced_loss(Tape& tape, const ParameterSet& params,
                                  const corpus::TranslationPair& pair,
                                  DecoderKind kind) {
  const GrammarSpec& tg = syntax::lambda_grammar();
  std::vector<NodeId> losses;
  LossBreakdown out;

  if (kind == DecoderKind::Grammar) {
    struct Slot {
      NodeId h, c;
      CategoryId category;
      const Tree* gold;
    };
    EncodedTree enc = encode(tape, params, syntax::lcrs_binarize(pair.source));
    std::deque<Slot> queue;
    queue.push_back(
        {enc.states[0].first, enc.states[0].second, tg.root(), &pair.target});

    while (!queue.empty()) {
      Slot item = queue.front();
      queue.pop_front();
      NodeId e_s = attention_context(tape, enc, item.h);
      NodeId e_t = combined_embedding(tape, params, e_s, item.h);
      NodeId logits = grammar_logits(tape, params, e_t, item.category);

      syntax::TokenId token = tg.token_id(item.gold->token);
      std::optional<int> member = tg.member_index(item.category, token);
      if (!member)
        throw IllegalTarget("token " + item.gold->token +
                            " is not in category " +
                            tg.category_name(item.category));
      NodeId ce = tape.softmax_cross_entropy(logits, *member);
      losses.push_back(ce);
      out.positions += 1;
      if (greedy_pick(tape.probs(ce)) == std::size_t(*member))
        out.correct += 1;

      const std::vector<CategoryId>& kid_cats = tg.child_categories(token);
      if (kid_cats.size() != item.gold->children.size())
        throw IllegalTarget("arity mismatch at token " + item.gold->token);
      for (std::size_t i = 0; i < kid_cats.size(); ++i) {
        auto [h2, c2] =
            child_states(tape, params, item.h, item.c, token, e_t, int(i));
        queue.push_back({h2, c2, kid_cats[i], &item.gold->children[i]});
      }
    }
  } else {
    BinaryTree gold = syntax::lcrs_binarize(pair.target);
    EncodedTree enc = encode(tape, params, syntax::lcrs_binarize(pair.source));
    int eos = eos_row(tg);

    struct Slot {
      NodeId h, c;
      const BinaryTree* gold;  // nullptr = an EOS position
    };
    std::deque<Slot> queue;
    queue.push_back({enc.states[0].first, enc.states[0].second, &gold});

    while (!queue.empty()) {
      Slot item = queue.front();
      queue.pop_front();
      NodeId e_s = attention_context(tape, enc, item.h);
      NodeId e_t = combined_embedding(tape, params, e_s, item.h);
      NodeId logits = baseline_logits(tape, params, e_t);

      int row = item.gold ? tg.token_id(item.gold->token) : eos;
      NodeId ce = tape.softmax_cross_entropy(logits, row);
      losses.push_back(ce);
      out.positions += 1;
      if (greedy_pick(tape.probs(ce)) == std::size_t(row)) out.correct += 1;
      if (!item.gold) continue;  // EOS slots have no children

      auto [hl, cl] = child_states(tape, params, item.h, item.c, row, e_t, 0);
      auto [hr, cr] = child_states(tape, params, item.h, item.c, row, e_t, 1);
      queue.push_back({hl, cl, item.gold->left.get()});
      queue.push_back({hr, cr, item.gold->right.get()});
    }
  }

  out.loss = tape.scale(tape.sum_all(tape.stack_rows(losses)),
                        1.0 / double(losses.size()));
  return out;
}

}  // namespace t2t::model
