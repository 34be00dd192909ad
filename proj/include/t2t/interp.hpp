#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "t2t/tree.hpp"

namespace t2t::corpus {

struct EvalLimits {
  std::int64_t max_steps = 10000;
  std::int64_t max_abs = std::int64_t{1} << 31;  // any intermediate beyond this overflows
};

// Store after running a FOR program: v0..v11, all initially 0, plus the set
// of variables that were targets of an executed ASSIGN.
struct ForEnv {
  std::array<std::int64_t, 12> values{};
  std::uint16_t assigned_mask = 0;

  bool assigned(int var) const { return (assigned_mask >> var) & 1; }
};

// Big-step execution of a FOR tree. Loop bounds are evaluated once; the
// loop variable is re-bound to the counter each iteration and its prior
// binding is restored after the loop. Throws FuelExhausted / Overflow.
ForEnv eval_for(const syntax::Tree& t, const EvalLimits& limits = {});

struct LambdaClosure;

struct LambdaValue {
  std::int64_t number = 0;
  std::shared_ptr<const LambdaClosure> closure;  // set iff the value is a closure

  bool is_closure() const { return closure != nullptr; }
};

struct LambdaEnvNode {
  std::string name;
  LambdaValue value;
  std::shared_ptr<const LambdaEnvNode> next;
};

struct LambdaClosure {
  std::string param;
  const syntax::Tree* body;
  std::shared_ptr<const LambdaEnvNode> env;
  std::string self_name;  // non-empty for LETREC-bound closures
};

// Call-by-value evaluation of a LAMBDA tree. Unbound variables read as the
// integer 0, mirroring FOR's zero-initialized store. Iteration-advancing
// positions (LET/LETREC bodies, IFLEQ branches, APP into a closure body)
// are evaluated without growing the C++ stack, so CPS-translated loops run
// in constant stack space. Throws FuelExhausted / Overflow / TypeMismatch.
LambdaValue eval_lambda(const syntax::Tree& t, const EvalLimits& limits = {200000});

struct CheckLimits {
  EvalLimits for_limits{};
  EvalLimits lambda_limits{200000};
};

struct SemanticCheckResult {
  bool ok = false;
  // When !ok: what failed. `resource_failure` marks fuel/overflow outcomes,
  // which are sampling rejections rather than translator defects.
  std::string detail;
  bool resource_failure = false;
};

struct TranslationPair;

// True iff the target evaluates to the PLUS-fold of the source's assigned
// variables. Strict mode additionally re-translates with continuation
// `VAR x` for every assigned x and compares per-variable.
SemanticCheckResult semantic_check(const TranslationPair& p, bool strict = true,
                                   const CheckLimits& limits = {});

struct TranslationPair {
  syntax::Tree source;  // FOR
  syntax::Tree target;  // LAMBDA
};

}  // namespace t2t::corpus
