#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "t2t/dataset.hpp"
#include "t2t/errors.hpp"
#include "t2t/gen.hpp"
#include "t2t/grammar.hpp"
#include "t2t/interp.hpp"
#include "t2t/rng.hpp"
#include "t2t/translate.hpp"
#include "t2t/tree.hpp"

using namespace t2t;
using corpus::EvalLimits;
using corpus::GeneratorConfig;
using corpus::TranslationPair;
using syntax::Tree;

namespace {

namespace fs = std::filesystem;

Tree leaf(const std::string& tok) { return Tree(tok); }
Tree constant(int c) { return Tree("CONST", {leaf("c" + std::to_string(c))}); }
Tree var(int v) { return Tree("VAR", {leaf("v" + std::to_string(v))}); }
Tree assign(int v, Tree e) {
  return Tree("ASSIGN", {leaf("v" + std::to_string(v)), std::move(e)});
}
Tree seq(Tree a, Tree b) { return Tree("SEQ", {std::move(a), std::move(b)}); }
Tree for_loop(int v, Tree init, Tree bound, Tree body) {
  return Tree("FOR", {leaf("v" + std::to_string(v)), std::move(init),
                      std::move(bound), std::move(body)});
}

// The spec pair used throughout: v0 = 2; v1 = v0 + 3.
Tree seq_example() {
  return seq(assign(0, constant(2)),
             assign(1, Tree("PLUS", {var(0), constant(3)})));
}

// for v1 = 1 .. 3 { v0 = v0 + v1 }
Tree for_example() {
  return for_loop(1, constant(1), constant(3),
                  assign(0, Tree("PLUS", {var(0), var(1)})));
}

// Independent big-step interpreter for the imperative language, written
// directly from the stated semantics: zero-initialized store; bounds
// evaluated once; the counter rebinds per iteration and its prior binding
// comes back after the loop. No fuel or overflow accounting — callers keep
// inputs small.
struct MiniEnv {
  std::array<std::int64_t, 12> values{};
};

std::int64_t mini_expr(const Tree& e, const MiniEnv& env) {
  if (e.token == "CONST") return *syntax::const_index(e.children[0].token);
  if (e.token == "VAR") return env.values[*syntax::var_index(e.children[0].token)];
  std::int64_t a = mini_expr(e.children[0], env);
  std::int64_t b = mini_expr(e.children[1], env);
  return e.token == "PLUS" ? a + b : a - b;
}

void mini_stmt(const Tree& s, MiniEnv& env) {
  if (s.token == "EMPTY") return;
  if (s.token == "SEQ") {
    mini_stmt(s.children[0], env);
    mini_stmt(s.children[1], env);
    return;
  }
  if (s.token == "ASSIGN") {
    env.values[*syntax::var_index(s.children[0].token)] =
        mini_expr(s.children[1], env);
    return;
  }
  int i = *syntax::var_index(s.children[0].token);
  std::int64_t saved = env.values[i];
  std::int64_t init = mini_expr(s.children[1], env);
  std::int64_t bound = mini_expr(s.children[2], env);
  for (std::int64_t c = init; c <= bound; ++c) {
    env.values[i] = c;
    mini_stmt(s.children[3], env);
  }
  env.values[i] = saved;
}

MiniEnv mini_eval(const Tree& t) {
  MiniEnv env;
  mini_stmt(t, env);
  return env;
}

int count_token(const Tree& t, const std::string& tok) {
  int n = (t.token == tok) ? 1 : 0;
  for (const auto& c : t.children) n += count_token(c, tok);
  return n;
}

bool contains_token(const Tree& t, const std::string& tok) {
  if (t.token == tok) return true;
  for (const auto& c : t.children)
    if (contains_token(c, tok)) return true;
  return false;
}

void collect_letrec_names(const Tree& t, std::vector<std::string>& out) {
  if (t.token == "LETREC") out.push_back(t.children[0].token);
  for (const auto& c : t.children) collect_letrec_names(c, out);
}

void collect_counters(const Tree& t, std::set<int>& out) {
  if (t.token == "FOR") out.insert(*syntax::var_index(t.children[0].token));
  for (const auto& c : t.children) collect_counters(c, out);
}

bool bound_is_constant_only(const Tree& e) {
  if (e.token == "VAR") return false;
  for (const auto& c : e.children)
    if (!bound_is_constant_only(c)) return false;
  return true;
}

void check_loop_bounds(const Tree& t, bool& ok) {
  if (t.token == "FOR") ok = ok && bound_is_constant_only(t.children[2]);
  for (const auto& c : t.children) check_loop_bounds(c, ok);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("t2t_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("generator configuration is validated") {
  GeneratorConfig ok;
  CHECK_NOTHROW(corpus::validate_config(ok));
  auto broken = [](auto mutate) {
    GeneratorConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(
      corpus::validate_config(broken([](auto& c) { c.seq_prob = -0.1; })),
      ConfigError);
  CHECK_THROWS_AS(
      corpus::validate_config(broken([](auto& c) { c.max_loops = 5; })),
      ConfigError);
  CHECK_THROWS_AS(
      corpus::validate_config(broken([](auto& c) { c.max_loops = -1; })),
      ConfigError);
  CHECK_THROWS_AS(
      corpus::validate_config(broken([](auto& c) { c.min_size = 4; })),
      ConfigError);
  CHECK_THROWS_AS(
      corpus::validate_config(broken([](auto& c) { c.max_size = 4; })),
      ConfigError);
  CHECK_THROWS_AS(
      corpus::validate_config(broken([](auto& c) { c.step_limit = 0; })),
      ConfigError);
}

TEST_CASE("generator is deterministic in the seed") {
  GeneratorConfig cfg;
  Rng a(cfg.seed), b(cfg.seed);
  for (int i = 0; i < 50; ++i)
    CHECK(corpus::generate_for_program(a, cfg) ==
          corpus::generate_for_program(b, cfg));
  Rng c(cfg.seed + 1);
  CHECK(corpus::generate_for_program(a, cfg) !=
        corpus::generate_for_program(c, cfg));
}

TEST_CASE("assignment-only weights force constant-expression assignments") {
  GeneratorConfig cfg;
  cfg.seq_prob = 0;
  cfg.for_prob = 0;
  cfg.empty_prob = 0;
  cfg.assign_prob = 1;
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Tree t = corpus::generate_for_program(rng, cfg);
    CHECK(t.token == "ASSIGN");
    // nothing is in scope before the first statement
    CHECK(!contains_token(t, "VAR"));
    CHECK(syntax::tree_size(t) >= cfg.min_size);
  }
}

TEST_CASE("generated programs satisfy every stated constraint") {
  GeneratorConfig cfg;
  Rng master(303);
  for (int i = 0; i < 2000; ++i) {
    Rng rng = master.split(i);
    Tree t = corpus::generate_for_program(rng, cfg);
    CHECK(syntax::for_grammar().validate(t).valid);
    CHECK(syntax::tree_size(t) >= cfg.min_size);
    CHECK(syntax::tree_size(t) <= cfg.max_size);
    CHECK(count_token(t, "FOR") <= cfg.max_loops);
    bool bounds_ok = true;
    check_loop_bounds(t, bounds_ok);
    CHECK(bounds_ok);
    // v8..v11 belong to the translator's fresh-name pool
    for (int v = 8; v < 12; ++v)
      CHECK(!contains_token(t, "v" + std::to_string(v)));
    std::string why;
    CHECK_MESSAGE(corpus::is_legal_source(t, &why), why);
    // counters and assignment targets never overlap
    std::set<int> counters, assigned;
    collect_counters(t, counters);
    for (int v : corpus::assigned_var_indices(t)) assigned.insert(v);
    for (int v : counters) CHECK(assigned.count(v) == 0);
  }
}

TEST_CASE("10,000 default-config samples land on the target size band") {
  GeneratorConfig cfg;
  Rng master(cfg.seed);
  double total = 0;
  std::size_t min_seen = std::size_t(-1);
  for (int i = 0; i < 10000; ++i) {
    Rng rng = master.split(i);
    std::size_t s = syntax::tree_size(corpus::generate_for_program(rng, cfg));
    total += double(s);
    min_seen = std::min(min_seen, s);
  }
  double mean = total / 10000.0;
  CHECK(mean >= 16.0);
  CHECK(mean <= 28.0);
  CHECK(min_seen >= 5);
}

TEST_CASE("exhausted generators fail loudly") {
  GeneratorConfig cfg;
  // min_size 5 with max_size 5 and assignment-only weights leaves almost
  // no programs; a size-5 assignment needs an operator expression, which
  // the zeroed operator weight forbids.
  cfg.seq_prob = 0;
  cfg.for_prob = 0;
  cfg.empty_prob = 0;
  cfg.assign_prob = 1;
  cfg.expr_op_prob = 0;
  cfg.max_size = 5;
  Rng rng(1);
  CHECK_THROWS_AS((void)corpus::generate_for_program(rng, cfg),
                  GenerationExhausted);
}

TEST_CASE("translation of the empty program is the zero constant") {
  CHECK(corpus::translate_for_to_lambda(leaf("EMPTY")) == constant(0));
}

TEST_CASE("translation of straight-line code chains let-bindings") {
  Tree got = corpus::translate_for_to_lambda(seq_example());
  Tree want("LET", {leaf("v0"), constant(2),
                    Tree("LET", {leaf("v1"), Tree("PLUS", {var(0), constant(3)}),
                                 Tree("PLUS", {var(0), var(1)})})});
  CHECK(got == want);
  CHECK(syntax::lambda_grammar().validate(got).valid);
  corpus::LambdaValue v = corpus::eval_lambda(got);
  CHECK(!v.is_closure());
  CHECK(v.number == 7);
}

TEST_CASE("translation of a loop builds the recursive function") {
  Tree got = corpus::translate_for_to_lambda(for_example());
  // letrec v8 v1 = \v0. if v1 <= 3 then let v0 = v0+v1 in v8 (v1+1) v0
  //                     else v0
  // in v8 1 v0
  Tree recurse("APP", {Tree("APP", {var(8), Tree("PLUS", {var(1), constant(1)})}),
                       var(0)});
  Tree body("LET", {leaf("v0"), Tree("PLUS", {var(0), var(1)}),
                    std::move(recurse)});
  Tree guard("IFLEQ", {var(1), constant(3), std::move(body), var(0)});
  Tree want("LETREC", {leaf("v8"), leaf("v1"),
                       Tree("LAM", {leaf("v0"), std::move(guard)}),
                       Tree("APP", {Tree("APP", {var(8), constant(1)}), var(0)})});
  CHECK(got == want);
  CHECK(syntax::lambda_grammar().validate(got).valid);
  corpus::LambdaValue v = corpus::eval_lambda(got);
  CHECK(!v.is_closure());
  CHECK(v.number == 6);
}

TEST_CASE("translation is pure and respects an explicit continuation") {
  Tree src = seq_example();
  CHECK(corpus::translate_for_to_lambda(src) ==
        corpus::translate_for_to_lambda(src));
  CHECK(corpus::translate_with_continuation(leaf("EMPTY"), var(3)) == var(3));
  Tree just_v1 = corpus::translate_with_continuation(src, var(1));
  corpus::LambdaValue v = corpus::eval_lambda(just_v1);
  CHECK(v.number == 5);
}

TEST_CASE("loop functions are named v8.. in preorder") {
  Tree two_sequential =
      seq(for_loop(0, constant(0), constant(1), leaf("EMPTY")),
          for_loop(1, constant(0), constant(1), leaf("EMPTY")));
  std::vector<std::string> names;
  collect_letrec_names(corpus::translate_for_to_lambda(two_sequential), names);
  CHECK(names == std::vector<std::string>{"v8", "v9"});

  Tree nested = for_loop(
      0, constant(0), constant(1),
      for_loop(1, constant(0), constant(1), assign(2, constant(1))));
  names.clear();
  collect_letrec_names(corpus::translate_for_to_lambda(nested), names);
  CHECK(names == std::vector<std::string>{"v8", "v9"});
}

TEST_CASE("more than four loops exceeds the fresh-name pool") {
  Tree five = for_loop(0, constant(0), constant(0), leaf("EMPTY"));
  for (int v = 1; v <= 4; ++v)
    five = seq(std::move(five),
               for_loop(v, constant(0), constant(0), leaf("EMPTY")));
  CHECK(count_token(five, "FOR") == 5);
  CHECK_THROWS_AS((void)corpus::translate_for_to_lambda(five),
                  LoopBudgetExceeded);
  std::string why;
  CHECK(!corpus::is_legal_source(five, &why));
}

TEST_CASE("illegal sources are rejected with the stated reasons") {
  auto rejects = [](const Tree& t) {
    CHECK_THROWS_AS((void)corpus::translate_for_to_lambda(t), IllegalSource);
    CHECK(!corpus::is_legal_source(t));
  };
  SUBCASE("grammar violation") { rejects(Tree("LETREC")); }
  SUBCASE("variable in the end bound") {
    rejects(seq(assign(1, constant(1)),
                for_loop(0, constant(0), var(1), leaf("EMPTY"))));
  }
  SUBCASE("counter assigned inside its own loop") {
    rejects(for_loop(0, constant(0), constant(3), assign(0, constant(1))));
  }
  SUBCASE("counter shadows an enclosing counter") {
    rejects(for_loop(0, constant(0), constant(3),
                     for_loop(0, constant(0), constant(3), leaf("EMPTY"))));
  }
  SUBCASE("counter already in scope at loop entry") {
    rejects(seq(assign(0, constant(1)),
                for_loop(0, constant(0), constant(2), leaf("EMPTY"))));
  }
  SUBCASE("finished counter is read") {
    rejects(seq(for_loop(0, constant(0), constant(2), assign(1, constant(1))),
                assign(2, var(0))));
  }
  SUBCASE("finished counter is reassigned") {
    rejects(seq(for_loop(0, constant(0), constant(2), assign(1, constant(1))),
                assign(0, constant(1))));
  }
}

TEST_CASE("legal boundary cases of the source constraints") {
  // A finished counter may come back as another loop's counter: both sides
  // rebind it, so the stale value is unobservable.
  Tree reuse = seq(for_loop(0, constant(0), constant(2), assign(1, constant(1))),
                   for_loop(0, constant(0), constant(3), assign(2, var(0))));
  CHECK(corpus::is_legal_source(reuse));
  TranslationPair p{reuse, corpus::translate_for_to_lambda(reuse)};
  CHECK(corpus::semantic_check(p).ok);

  // Loop init expressions may read scope variables; only the end bound is
  // restricted to constants (it is re-evaluated per iteration after the
  // rewrite, so it must be invariant).
  Tree init_reads = seq(assign(1, constant(2)),
                        for_loop(0, var(1), constant(3), assign(2, var(0))));
  CHECK(corpus::is_legal_source(init_reads));
  TranslationPair q{init_reads, corpus::translate_for_to_lambda(init_reads)};
  CHECK(corpus::semantic_check(q).ok);

  // An enclosing counter is readable inside the body.
  Tree reads_counter =
      for_loop(0, constant(1), constant(3), assign(1, var(0)));
  CHECK(corpus::is_legal_source(reads_counter));

  // Reading a variable nothing has assigned is legal and sound: the store
  // starts at zero and an unbound variable reads as zero after translation.
  Tree reads_fresh = assign(0, Tree("PLUS", {var(1), constant(4)}));
  CHECK(corpus::is_legal_source(reads_fresh));
  TranslationPair r{reads_fresh, corpus::translate_for_to_lambda(reads_fresh)};
  CHECK(corpus::semantic_check(r, true).ok);
  CHECK(corpus::eval_lambda(r.target).number == 4);
}

TEST_CASE("assigned_var_indices lists assignment targets in ascending order") {
  CHECK(corpus::assigned_var_indices(leaf("EMPTY")).empty());
  CHECK(corpus::assigned_var_indices(seq_example()) == std::vector<int>{0, 1});
  // the loop counter is not an assignment target
  CHECK(corpus::assigned_var_indices(for_example()) == std::vector<int>{0});
  Tree reordered = seq(assign(5, constant(1)), assign(2, constant(1)));
  CHECK(corpus::assigned_var_indices(reordered) == std::vector<int>{2, 5});
}

TEST_CASE("imperative interpreter spot values") {
  SUBCASE("single assignment") {
    corpus::ForEnv env = corpus::eval_for(assign(0, constant(5)));
    CHECK(env.values[0] == 5);
    CHECK(env.assigned(0));
    for (int v = 1; v < 12; ++v) {
      CHECK(env.values[v] == 0);
      CHECK(!env.assigned(v));
    }
  }
  SUBCASE("sequencing") {
    corpus::ForEnv env = corpus::eval_for(seq_example());
    CHECK(env.values[0] == 2);
    CHECK(env.values[1] == 5);
  }
  SUBCASE("loop sums and restores its counter") {
    corpus::ForEnv env = corpus::eval_for(for_example());
    CHECK(env.values[0] == 6);
    CHECK(env.values[1] == 0);  // counter comes back
    CHECK(env.assigned(0));
    CHECK(!env.assigned(1));  // rebinding is not an assignment
  }
  SUBCASE("zero-iteration loop leaves the store untouched") {
    corpus::ForEnv env = corpus::eval_for(
        for_loop(1, constant(4), constant(2), assign(0, constant(9))));
    CHECK(env.values[0] == 0);
    CHECK(!env.assigned(0));
  }
  SUBCASE("subtraction can go negative") {
    corpus::ForEnv env =
        corpus::eval_for(assign(0, Tree("MINUS", {constant(0), constant(3)})));
    CHECK(env.values[0] == -3);
  }
}

TEST_CASE("imperative interpreter resource limits") {
  SUBCASE("fuel") {
    EvalLimits tight;
    tight.max_steps = 10;
    CHECK_THROWS_AS(
        (void)corpus::eval_for(
            for_loop(0, constant(0), constant(11), assign(1, var(0))), tight),
        FuelExhausted);
  }
  SUBCASE("magnitude") {
    // v0 doubles 11 times per outer iteration: 2^121 without the guard
    Tree doubling =
        seq(assign(0, constant(1)),
            for_loop(1, constant(1), constant(11),
                     for_loop(2, constant(1), constant(11),
                              assign(0, Tree("PLUS", {var(0), var(0)})))));
    CHECK_THROWS_AS((void)corpus::eval_for(doubling), Overflow);
    EvalLimits tiny;
    tiny.max_abs = 20;  // 11 fits, 11+11 does not
    CHECK_THROWS_AS(
        (void)corpus::eval_for(
            seq(assign(0, constant(11)),
                assign(0, Tree("PLUS", {var(0), constant(11)}))),
            tiny),
        Overflow);
  }
}

TEST_CASE("imperative interpreter agrees with an independent oracle") {
  GeneratorConfig cfg;
  Rng master(909);
  for (int i = 0; i < 2000; ++i) {
    Rng rng = master.split(i);
    Tree t = corpus::generate_for_program(rng, cfg);
    corpus::ForEnv got = corpus::eval_for(t);
    MiniEnv want = mini_eval(t);
    for (int v = 0; v < 12; ++v) CHECK(got.values[v] == want.values[v]);
  }
}

TEST_CASE("functional interpreter spot values") {
  CHECK(corpus::eval_lambda(constant(7)).number == 7);
  SUBCASE("beta reduction") {
    Tree app("APP", {Tree("LAM", {leaf("v0"), Tree("PLUS", {var(0), constant(1)})}),
                     constant(4)});
    CHECK(corpus::eval_lambda(app).number == 5);
  }
  SUBCASE("unbound variables read as zero") {
    CHECK(corpus::eval_lambda(var(9)).number == 0);
    CHECK(corpus::eval_lambda(Tree("PLUS", {var(3), constant(2)})).number == 2);
  }
  SUBCASE("let binds, inner shadows outer") {
    Tree t("LET", {leaf("v0"), constant(1),
                   Tree("LET", {leaf("v0"), constant(2), var(0)})});
    CHECK(corpus::eval_lambda(t).number == 2);
  }
  SUBCASE("lambdas are first-class values") {
    CHECK(corpus::eval_lambda(Tree("LAM", {leaf("v0"), var(0)})).is_closure());
  }
  SUBCASE("conditional picks the stated branch") {
    Tree le("IFLEQ", {constant(1), constant(2), constant(3), constant(4)});
    CHECK(corpus::eval_lambda(le).number == 3);
    Tree gt("IFLEQ", {constant(2), constant(1), constant(3), constant(4)});
    CHECK(corpus::eval_lambda(gt).number == 4);
    Tree eq("IFLEQ", {constant(2), constant(2), constant(3), constant(4)});
    CHECK(corpus::eval_lambda(eq).number == 3);
  }
  SUBCASE("letrec supports self-application") {
    // v8 n = if n <= 0 then 5 else v8 (n - 1)
    Tree body("IFLEQ", {var(0), constant(0), constant(5),
                        Tree("APP", {var(8), Tree("MINUS", {var(0), constant(1)})})});
    Tree t("LETREC", {leaf("v8"), leaf("v0"), std::move(body),
                      Tree("APP", {var(8), constant(3)})});
    CHECK(corpus::eval_lambda(t).number == 5);
  }
}

TEST_CASE("functional interpreter error outcomes") {
  SUBCASE("applying an integer") {
    CHECK_THROWS_AS(
        (void)corpus::eval_lambda(Tree("APP", {constant(1), constant(2)})),
        TypeMismatch);
  }
  SUBCASE("arithmetic on a closure") {
    Tree t("PLUS", {Tree("LAM", {leaf("v0"), var(0)}), constant(1)});
    CHECK_THROWS_AS((void)corpus::eval_lambda(t), TypeMismatch);
  }
  SUBCASE("divergence hits the fuel limit") {
    Tree spin("LETREC", {leaf("v8"), leaf("v0"),
                         Tree("APP", {var(8), var(0)}),
                         Tree("APP", {var(8), constant(0)})});
    CHECK_THROWS_AS((void)corpus::eval_lambda(spin), FuelExhausted);
  }
  SUBCASE("overflow guard") {
    EvalLimits tiny;
    tiny.max_abs = 100;
    CHECK_THROWS_AS(
        (void)corpus::eval_lambda(Tree("PLUS", {constant(11), Tree("PLUS", {constant(11), Tree("PLUS", {constant(11), Tree("PLUS", {constant(11), Tree("PLUS", {constant(11), Tree("PLUS", {constant(11), Tree("PLUS", {constant(11), Tree("PLUS", {constant(11), Tree("PLUS", {constant(11), Tree("PLUS", {constant(11), constant(11)})})})})})})})})})}),
                                 tiny),
        Overflow);
  }
}

TEST_CASE("deep loops run without exhausting the machine stack") {
  // 12^4 iterations of CPS recursion; fails fast if application frames pile
  // onto the C++ stack instead of the environment.
  Tree nest = assign(4, constant(0));
  for (int v = 0; v < 4; ++v)
    nest = for_loop(v, constant(0), constant(11),
                    seq(std::move(nest), assign(5, constant(1))));
  EvalLimits roomy;
  roomy.max_steps = 2000000;
  corpus::ForEnv env = corpus::eval_for(nest, roomy);
  CHECK(env.values[5] == 1);
  corpus::CheckLimits limits;
  limits.for_limits = roomy;
  limits.lambda_limits.max_steps = 20000000;
  TranslationPair p{nest, corpus::translate_for_to_lambda(nest)};
  corpus::SemanticCheckResult r = corpus::semantic_check(p, true, limits);
  CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("semantic agreement verdicts") {
  SUBCASE("trivial pair") {
    TranslationPair p{leaf("EMPTY"), constant(0)};
    CHECK(corpus::semantic_check(p).ok);
  }
  SUBCASE("worked pairs") {
    for (const Tree& src : {seq_example(), for_example()}) {
      TranslationPair p{src, corpus::translate_for_to_lambda(src)};
      corpus::SemanticCheckResult r = corpus::semantic_check(p);
      CHECK_MESSAGE(r.ok, r.detail);
      CHECK(!r.resource_failure);
    }
  }
  SUBCASE("value mismatch is a failure, not a resource event") {
    TranslationPair p{leaf("EMPTY"), constant(1)};
    corpus::SemanticCheckResult r = corpus::semantic_check(p);
    CHECK(!r.ok);
    CHECK(!r.resource_failure);
  }
  SUBCASE("a closure-valued target cannot match") {
    TranslationPair p{leaf("EMPTY"), Tree("LAM", {leaf("v0"), var(0)})};
    corpus::SemanticCheckResult r = corpus::semantic_check(p);
    CHECK(!r.ok);
    CHECK(!r.resource_failure);
  }
  SUBCASE("fuel exhaustion is flagged as a resource failure") {
    Tree src = for_loop(0, constant(0), constant(11), assign(1, var(0)));
    TranslationPair p{src, corpus::translate_for_to_lambda(src)};
    corpus::CheckLimits tight;
    tight.for_limits.max_steps = 5;
    corpus::SemanticCheckResult r = corpus::semantic_check(p, true, tight);
    CHECK(!r.ok);
    CHECK(r.resource_failure);
  }
}

TEST_CASE("generated pairs pass the strict semantic oracle") {
  GeneratorConfig cfg;
  Rng master(515);
  for (int i = 0; i < 500; ++i) {
    Rng rng = master.split(i);
    TranslationPair p;
    p.source = corpus::generate_for_program(rng, cfg);
    p.target = corpus::translate_for_to_lambda(p.source);
    CHECK(syntax::lambda_grammar().validate(p.target).valid);
    corpus::SemanticCheckResult r = corpus::semantic_check(p, true);
    if (r.resource_failure) continue;  // sampling rejection, not a defect
    CHECK_MESSAGE(r.ok, (r.detail + "\n  source: " +
                         syntax::serialize_tree(p.source)));
  }
}

TEST_CASE("dataset files") {
  GeneratorConfig cfg;
  cfg.seed = 77;
  cfg.train_count = 10;
  cfg.valid_count = 2;
  cfg.test_count = 2;

  SUBCASE("pairs are unique, deterministic, and thread-count invariant") {
    std::vector<TranslationPair> pairs = corpus::generate_pairs(cfg, 1);
    REQUIRE(pairs.size() == 14);
    std::set<std::string> sources;
    for (const auto& p : pairs) sources.insert(syntax::serialize_tree(p.source));
    CHECK(sources.size() == 14);
    std::vector<TranslationPair> again = corpus::generate_pairs(cfg, 1);
    std::vector<TranslationPair> wide = corpus::generate_pairs(cfg, 4);
    REQUIRE(again.size() == 14);
    REQUIRE(wide.size() == 14);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(pairs[i].source == again[i].source);
      CHECK(pairs[i].target == again[i].target);
      CHECK(pairs[i].source == wide[i].source);
      CHECK(pairs[i].target == wide[i].target);
    }
  }

  SUBCASE("write/read round-trip") {
    TempDir dir("roundtrip");
    std::vector<TranslationPair> pairs = corpus::generate_pairs(cfg, 0);
    fs::path file = dir.path / "pairs.jsonl";
    corpus::write_pairs(file.string(), pairs);
    std::vector<TranslationPair> back = corpus::read_pairs(file.string());
    REQUIRE(back.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(back[i].source == pairs[i].source);
      CHECK(back[i].target == pairs[i].target);
    }
  }

  SUBCASE("rerunning the writer reproduces the bytes") {
    TempDir a("bytes_a"), b("bytes_b");
    corpus::make_dataset(cfg, a.path.string());
    corpus::make_dataset(cfg, b.path.string());
    for (const char* name :
         {"train.jsonl", "valid.jsonl", "test.jsonl", "stats.json"})
      CHECK(slurp(a.path / name) == slurp(b.path / name));
  }

  SUBCASE("stats report the vocabulary and calibration facts") {
    TempDir dir("stats");
    corpus::make_dataset(cfg, dir.path.string());
    nlohmann::json stats = nlohmann::json::parse(slurp(dir.path / "stats.json"));
    CHECK(stats["train_count"] == 10);
    CHECK(stats["valid_count"] == 2);
    CHECK(stats["test_count"] == 2);
    CHECK(stats["for"]["tokens"] == 32);
    CHECK(stats["lambda"]["tokens"] == 33);
    CHECK(stats["for"]["min_size"].get<int>() >= 5);
    CHECK(stats["generator"]["seed"] == 77);
    CHECK(stats["for_grammar_fingerprint"] ==
          syntax::for_grammar().fingerprint());
    CHECK(stats["lambda_grammar_fingerprint"] ==
          syntax::lambda_grammar().fingerprint());
  }

  SUBCASE("reader reports the offending line") {
    TempDir dir("badline");
    fs::path file = dir.path / "bad.jsonl";
    {
      std::ofstream f(file);
      f << R"({"for":["EMPTY",[]],"lambda":["CONST",[["c0",[]]]]})" << "\n";
      f << "not json\n";
    }
    CHECK_THROWS_WITH_AS((void)corpus::read_pairs(file.string()),
                         doctest::Contains("line 2"), ParseError);
    {
      std::ofstream f(file);
      f << R"({"for":["EMPTY",[]],"lambda":["CONST",[["c0",[]]]]})" << "\n";
      f << R"({"for":["EMPTY",[]]})" << "\n";
    }
    CHECK_THROWS_WITH_AS((void)corpus::read_pairs(file.string()),
                         doctest::Contains("line 2"), ParseError);
    {
      // grammar violation inside an otherwise well-formed line
      std::ofstream f(file);
      f << R"({"for":["EMPTY",[]],"lambda":["CONST",[["v0",[]]]]})" << "\n";
    }
    CHECK_THROWS_WITH_AS((void)corpus::read_pairs(file.string()),
                         doctest::Contains("line 1"), ParseError);
    CHECK_THROWS_AS((void)corpus::read_pairs((dir.path / "absent.jsonl").string()),
                    IoError);
  }
}
