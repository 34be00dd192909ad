#include "t2t/gen.hpp"

#include <cmath>
#include <vector>

#include "t2t/errors.hpp"
#include "t2t/grammar.hpp"
#include "t2t/interp.hpp"
#include "t2t/translate.hpp"

namespace t2t::corpus {

using syntax::Tree;

namespace {

constexpr int kProgramVars = 8;     // generated programs draw from v0..v7
constexpr std::size_t kMaxExprDepth = 12;
constexpr int kMaxAttempts = 1000;

Tree name_leaf(int var) { return Tree(syntax::var_name(var)); }

struct Sampler {
  Rng& rng;
  const GeneratorConfig& cfg;
  int loops_left;
  // Counters of finished loops: FOR leaves them restored while the target
  // program leaves them past the bound, so they stay write- and read-dead
  // forever (a later loop may still rebind one as its own counter).
  std::uint16_t retired = 0;

  int pick_set_bit(std::uint16_t mask) {
    std::vector<int> options;
    for (int v = 0; v < kProgramVars; ++v)
      if ((mask >> v) & 1) options.push_back(v);
    return options[rng.next_below(options.size())];
  }

  // scope: variables readable here. allow_vars toggles the constant-only
  // mode used for loop end bounds.
  Tree expr(std::uint16_t scope, bool allow_vars, std::size_t depth) {
    double op = depth >= kMaxExprDepth
                    ? 0.0
                    : cfg.expr_op_prob * std::pow(cfg.expr_decay, double(depth));
    double leaf = 1.0 - op;
    bool vars_ok = allow_vars && scope != 0;
    std::size_t pick = rng.next_weighted(
        {op / 2, op / 2, vars_ok ? leaf / 2 : 0.0, vars_ok ? leaf / 2 : leaf});
    switch (pick) {
      case 0:
      case 1: {
        Tree a = expr(scope, allow_vars, depth + 1);
        Tree b = expr(scope, allow_vars, depth + 1);
        return Tree(pick == 0 ? "PLUS" : "MINUS", {std::move(a), std::move(b)});
      }
      case 2:
        return Tree("VAR", {name_leaf(pick_set_bit(scope))});
      default:
        return Tree("CONST",
                    {Tree(syntax::const_name(int(rng.next_below(12))))});
    }
  }

  // scope: readable variables (assignments so far plus enclosing counters);
  // counters: enclosing loop counters. Returns the statement and the scope
  // it leaves behind.
  std::pair<Tree, std::uint16_t> stmt(std::uint16_t scope,
                                      std::uint16_t counters,
                                      std::size_t depth) {
    bool recursion_ok = depth < cfg.max_depth;
    std::uint16_t fresh =
        std::uint16_t(~scope) & std::uint16_t((1u << kProgramVars) - 1);
    bool for_ok = recursion_ok && loops_left > 0 && fresh != 0;
    double seq_w = recursion_ok
                       ? cfg.seq_prob * std::pow(cfg.stmt_decay, double(depth))
                       : 0.0;
    std::size_t pick = rng.next_weighted(
        {seq_w, cfg.assign_prob, for_ok ? cfg.for_prob : 0.0, cfg.empty_prob});
    switch (pick) {
      case 0: {
        auto [s1, scope1] = stmt(scope, counters, depth + 1);
        auto [s2, scope2] = stmt(scope1, counters, depth + 1);
        return {Tree("SEQ", {std::move(s1), std::move(s2)}), scope2};
      }
      case 1: {
        // Any program variable that is not an active or finished counter.
        int x = pick_set_bit(std::uint16_t(~(counters | retired)) &
                             std::uint16_t((1u << kProgramVars) - 1));
        Tree e = expr(scope, true, 0);
        return {Tree("ASSIGN", {name_leaf(x), std::move(e)}),
                std::uint16_t(scope | (1u << x))};
      }
      case 2: {
        --loops_left;
        int i = pick_set_bit(fresh);  // not readable here, so no shadowing
        Tree init = expr(scope, true, 0);
        Tree bound = expr(scope, false, 0);
        std::uint16_t bit = std::uint16_t(1u << i);
        retired &= std::uint16_t(~bit);  // rebinding as a counter is fine
        auto [body, body_scope] =
            stmt(std::uint16_t(scope | bit), std::uint16_t(counters | bit),
                 depth + 1);
        retired |= bit;
        // Body assignments persist; the counter stops being readable.
        return {Tree("FOR", {name_leaf(i), std::move(init), std::move(bound),
                             std::move(body)}),
                std::uint16_t(body_scope & ~bit)};
      }
      default:
        return {Tree("EMPTY"), scope};
    }
  }
};

}  // namespace

void validate_config(const GeneratorConfig& config) {
  auto nonneg = [](double w, const char* name) {
    if (!(w >= 0.0))
      throw ConfigError(std::string(name) + " must be non-negative");
  };
  nonneg(config.seq_prob, "seq_prob");
  nonneg(config.assign_prob, "assign_prob");
  nonneg(config.for_prob, "for_prob");
  nonneg(config.empty_prob, "empty_prob");
  nonneg(config.stmt_decay, "stmt_decay");
  nonneg(config.expr_op_prob, "expr_op_prob");
  nonneg(config.expr_decay, "expr_decay");
  if (config.assign_prob + config.empty_prob <= 0.0)
    throw ConfigError("assign_prob + empty_prob must be positive (every "
                      "branch must be able to terminate)");
  if (config.max_loops < 0 || config.max_loops > 4)
    throw ConfigError("max_loops must lie in [0, 4] (fresh-name pool v8..v11)");
  if (config.min_size < 5) throw ConfigError("min_size must be at least 5");
  if (config.max_size < config.min_size)
    throw ConfigError("max_size must be at least min_size");
  if (config.step_limit <= 0) throw ConfigError("step_limit must be positive");
}

Tree generate_for_program(Rng& rng, const GeneratorConfig& config) {
  validate_config(config);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Sampler sampler{rng, config, config.max_loops};
    Tree t = sampler.stmt(0, 0, 0).first;
    std::size_t size = syntax::tree_size(t);
    if (size < config.min_size || size > config.max_size) continue;
    if (!is_legal_source(t)) continue;  // belt over the construction rules
    try {
      eval_for(t, EvalLimits{config.step_limit});
    } catch (const FuelExhausted&) {
      continue;
    } catch (const Overflow&) {
      continue;
    }
    return t;
  }
  throw GenerationExhausted("1000 consecutive rejections; config too tight");
}

}  // namespace t2t::corpus
