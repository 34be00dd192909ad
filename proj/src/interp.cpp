#include "t2t/interp.hpp"

#include <cstdlib>

#include "t2t/errors.hpp"
#include "t2t/grammar.hpp"
#include "t2t/translate.hpp"

namespace t2t::corpus {

using syntax::Tree;

namespace {

struct Fuel {
  std::int64_t left;
  void burn() {
    if (--left < 0) throw FuelExhausted("step limit exceeded");
  }
};

std::int64_t checked(std::int64_t v, std::int64_t max_abs) {
  if (v > max_abs || v < -max_abs)
    throw Overflow("intermediate value " + std::to_string(v) +
                   " outside +-" + std::to_string(max_abs));
  return v;
}

struct ForMachine {
  const EvalLimits& limits;
  Fuel fuel;
  ForEnv env;

  std::int64_t expr(const Tree& e) {
    fuel.burn();
    if (e.token == "CONST") {
      fuel.burn();  // the literal leaf
      return *syntax::const_index(e.children[0].token);
    }
    if (e.token == "VAR") {
      fuel.burn();
      return env.values[*syntax::var_index(e.children[0].token)];
    }
    if (e.token == "PLUS")
      return checked(expr(e.children[0]) + expr(e.children[1]), limits.max_abs);
    if (e.token == "MINUS")
      return checked(expr(e.children[0]) - expr(e.children[1]), limits.max_abs);
    throw TypeMismatch("not a FOR expression: " + e.token);
  }

  void stmt(const Tree& s) {
    fuel.burn();
    if (s.token == "EMPTY") return;
    if (s.token == "SEQ") {
      stmt(s.children[0]);
      stmt(s.children[1]);
      return;
    }
    if (s.token == "ASSIGN") {
      int x = *syntax::var_index(s.children[0].token);
      std::int64_t v = expr(s.children[1]);
      env.values[x] = v;
      env.assigned_mask |= std::uint16_t(1) << x;
      return;
    }
    if (s.token == "FOR") {
      int i = *syntax::var_index(s.children[0].token);
      std::int64_t start = expr(s.children[1]);
      std::int64_t end = expr(s.children[2]);  // evaluated once
      std::int64_t prior = env.values[i];
      for (std::int64_t counter = start; counter <= end;
           counter = checked(counter + 1, limits.max_abs)) {
        env.values[i] = counter;
        stmt(s.children[3]);
      }
      env.values[i] = prior;
      return;
    }
    throw TypeMismatch("not a FOR statement: " + s.token);
  }
};

using EnvPtr = std::shared_ptr<const LambdaEnvNode>;

EnvPtr extend(EnvPtr env, const std::string& name, LambdaValue v) {
  return std::make_shared<LambdaEnvNode>(
      LambdaEnvNode{name, std::move(v), std::move(env)});
}

LambdaValue lookup(const EnvPtr& env, const std::string& name) {
  for (const LambdaEnvNode* n = env.get(); n != nullptr; n = n->next.get())
    if (n->name == name) return n->value;
  return LambdaValue{};  // unbound variables read as 0
}

struct LambdaMachine {
  const EvalLimits& limits;
  Fuel fuel;

  std::int64_t number(const Tree& e, EnvPtr env) {
    LambdaValue v = eval(e, std::move(env));
    if (v.is_closure())
      throw TypeMismatch("expected a number, got a closure at " + e.token);
    return v.number;
  }

  LambdaValue eval(const Tree& start, EnvPtr env) {
    const Tree* e = &start;
    // LET/LETREC bodies, IFLEQ branches and APP into a closure body advance
    // this loop instead of recursing, so loop recursion depth stays flat.
    while (true) {
      fuel.burn();
      const std::string& tok = e->token;
      if (tok == "CONST") {
        fuel.burn();
        return LambdaValue{*syntax::const_index(e->children[0].token), nullptr};
      }
      if (tok == "VAR") {
        fuel.burn();
        return lookup(env, e->children[0].token);
      }
      if (tok == "PLUS") {
        std::int64_t a = number(e->children[0], env);
        std::int64_t b = number(e->children[1], env);
        return LambdaValue{checked(a + b, limits.max_abs), nullptr};
      }
      if (tok == "MINUS") {
        std::int64_t a = number(e->children[0], env);
        std::int64_t b = number(e->children[1], env);
        return LambdaValue{checked(a - b, limits.max_abs), nullptr};
      }
      if (tok == "LAM") {
        auto c = std::make_shared<LambdaClosure>();
        c->param = e->children[0].token;
        c->body = &e->children[1];
        c->env = env;
        return LambdaValue{0, std::move(c)};
      }
      if (tok == "LET") {
        LambdaValue v = eval(e->children[1], env);
        env = extend(std::move(env), e->children[0].token, std::move(v));
        e = &e->children[2];
        continue;
      }
      if (tok == "LETREC") {
        auto c = std::make_shared<LambdaClosure>();
        c->self_name = e->children[0].token;
        c->param = e->children[1].token;
        c->body = &e->children[2];
        c->env = env;
        env = extend(std::move(env), e->children[0].token,
                     LambdaValue{0, std::move(c)});
        e = &e->children[3];
        continue;
      }
      if (tok == "IFLEQ") {
        std::int64_t a = number(e->children[0], env);
        std::int64_t b = number(e->children[1], env);
        e = (a <= b) ? &e->children[2] : &e->children[3];
        continue;
      }
      if (tok == "APP") {
        LambdaValue fn = eval(e->children[0], env);
        if (!fn.is_closure())
          throw TypeMismatch("applying a number");
        LambdaValue arg = eval(e->children[1], env);
        EnvPtr call_env = fn.closure->env;
        if (!fn.closure->self_name.empty())
          call_env = extend(std::move(call_env), fn.closure->self_name, fn);
        env = extend(std::move(call_env), fn.closure->param, std::move(arg));
        e = fn.closure->body;
        continue;
      }
      throw TypeMismatch("not a LAMBDA expression: " + tok);
    }
  }
};

}  // namespace

ForEnv eval_for(const Tree& t, const EvalLimits& limits) {
  ForMachine m{limits, Fuel{limits.max_steps}, ForEnv{}};
  m.stmt(t);
  return m.env;
}

LambdaValue eval_lambda(const Tree& t, const EvalLimits& limits) {
  LambdaMachine m{limits, Fuel{limits.max_steps}};
  return m.eval(t, nullptr);
}

SemanticCheckResult semantic_check(const TranslationPair& p, bool strict,
                                   const CheckLimits& limits) {
  ForEnv env;
  try {
    env = eval_for(p.source, limits.for_limits);
  } catch (const Error& e) {
    return {false, std::string("eval_for failed: ") + e.what(), true};
  }

  std::vector<int> vars = assigned_var_indices(p.source);

  // Right-nested PLUS fold over the assigned variables, with the same
  // overflow discipline the LAMBDA side applies.
  std::int64_t expected = 0;
  try {
    if (!vars.empty()) {
      expected = env.values[vars.back()];
      for (auto it = std::next(vars.rbegin()); it != vars.rend(); ++it)
        expected = checked(env.values[*it] + expected,
                           limits.lambda_limits.max_abs);
    }
  } catch (const Error& e) {
    return {false, std::string("fold overflow: ") + e.what(), true};
  }

  LambdaValue got;
  try {
    got = eval_lambda(p.target, limits.lambda_limits);
  } catch (const FuelExhausted& e) {
    return {false, std::string("eval_lambda failed: ") + e.what(), true};
  } catch (const Overflow& e) {
    return {false, std::string("eval_lambda failed: ") + e.what(), true};
  } catch (const Error& e) {
    return {false, std::string("eval_lambda failed: ") + e.what(), false};
  }
  if (got.is_closure())
    return {false, "target evaluates to a closure, expected " +
                       std::to_string(expected), false};
  if (got.number != expected)
    return {false, "target evaluates to " + std::to_string(got.number) +
                       ", expected " + std::to_string(expected), false};

  if (strict) {
    for (int x : vars) {
      Tree k("VAR", {Tree(syntax::var_name(x))});
      Tree tx;
      try {
        tx = translate_with_continuation(p.source, k);
      } catch (const Error& e) {
        return {false, std::string("re-translation failed: ") + e.what(), false};
      }
      LambdaValue vx;
      try {
        vx = eval_lambda(tx, limits.lambda_limits);
      } catch (const FuelExhausted& e) {
        return {false, std::string("strict eval failed: ") + e.what(), true};
      } catch (const Overflow& e) {
        return {false, std::string("strict eval failed: ") + e.what(), true};
      } catch (const Error& e) {
        return {false, std::string("strict eval failed: ") + e.what(), false};
      }
      if (vx.is_closure() || vx.number != env.values[x])
        return {false, "variable " + syntax::var_name(x) + ": target gives " +
                           (vx.is_closure() ? std::string("a closure")
                                            : std::to_string(vx.number)) +
                           ", source gives " + std::to_string(env.values[x]),
                false};
    }
  }
  return {true, "", false};
}

}  // namespace t2t::corpus
