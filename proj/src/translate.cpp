#include "t2t/translate.hpp"

#include <map>
#include <set>

#include "t2t/errors.hpp"
#include "t2t/grammar.hpp"

namespace t2t::corpus {

using syntax::Tree;

namespace {

constexpr int kMaxLoops = 4;
constexpr int kFirstLoopFnVar = 8;  // loop functions draw names v8..v11

void collect_assigned(const Tree& t, std::set<int>& out) {
  if (t.token == "ASSIGN") {
    out.insert(*syntax::var_index(t.children[0].token));
  }
  for (const Tree& c : t.children) collect_assigned(c, out);
}

int count_loops(const Tree& t) {
  int n = (t.token == "FOR") ? 1 : 0;
  for (const Tree& c : t.children) n += count_loops(c);
  return n;
}

using VarMask = std::uint32_t;

// Reading a variable that was never assigned is fine: the store starts at
// zero and unbound target-language variables read as zero too, so both sides
// agree. The one poisoned read is a finished loop counter — the interpreter
// restores it while the rewrite leaves the failing bound value in scope.
void check_expr(const Tree& e, VarMask retired, bool allow_vars) {
  if (e.token == "VAR") {
    if (!allow_vars)
      throw IllegalSource("loop end bound references a variable");
    int v = *syntax::var_index(e.children[0].token);
    if ((retired >> v) & 1)
      throw IllegalSource("finished loop counter " + e.children[0].token +
                          " is read");
    return;
  }
  if (e.token == "PLUS" || e.token == "MINUS") {
    check_expr(e.children[0], retired, allow_vars);
    check_expr(e.children[1], retired, allow_vars);
  }
  // CONST needs no checks
}

// Returns the scope mask after the statement. `counters` = enclosing loop
// counters, readable but not assignable. `retired` accumulates variables
// whose loop has finished; a loop leaves its counter at the value that
// failed the bound test, while an executed FOR restores it, so a retired
// variable may never be read or assigned again (it may serve as a fresh
// counter, which rebinds it on both sides).
VarMask check_stmt(const Tree& s, VarMask scope, VarMask counters,
                   VarMask& retired) {
  if (s.token == "EMPTY") return scope;
  if (s.token == "SEQ") {
    VarMask mid = check_stmt(s.children[0], scope, counters, retired);
    return check_stmt(s.children[1], mid, counters, retired);
  }
  if (s.token == "ASSIGN") {
    int x = *syntax::var_index(s.children[0].token);
    if ((counters >> x) & 1)
      throw IllegalSource("loop counter " + s.children[0].token +
                          " is an assignment target inside its loop");
    if ((retired >> x) & 1)
      throw IllegalSource("finished loop counter " + s.children[0].token +
                          " is an assignment target");
    check_expr(s.children[1], retired, true);
    return scope | (VarMask{1} << x);
  }
  if (s.token == "FOR") {
    int i = *syntax::var_index(s.children[0].token);
    if ((scope >> i) & 1)
      throw IllegalSource("loop counter " + s.children[0].token +
                          " is already in scope at loop entry");
    if ((counters >> i) & 1)
      throw IllegalSource("loop counter " + s.children[0].token +
                          " shadows an enclosing loop counter");
    check_expr(s.children[1], retired, true);  // init
    check_expr(s.children[2], 0, false);       // end bound, constants only
    retired &= ~(VarMask{1} << i);  // reuse as a counter rebinds it
    VarMask after_body =
        check_stmt(s.children[3], scope, counters | (VarMask{1} << i), retired);
    retired |= VarMask{1} << i;
    // body assignments persist; the counter itself does not re-enter scope
    return after_body & ~(VarMask{1} << i);
  }
  throw IllegalSource("unexpected statement token " + s.token);
}

void assign_loop_fn_names(const Tree& t, std::map<const Tree*, int>& names,
                          int& next) {
  if (t.token == "FOR") {
    if (next >= kFirstLoopFnVar + kMaxLoops)
      throw LoopBudgetExceeded("more than " + std::to_string(kMaxLoops) +
                               " FOR nodes");
    names[&t] = next++;
  }
  for (const Tree& c : t.children) assign_loop_fn_names(c, names, next);
}

Tree var_leaf(int idx) { return Tree(syntax::var_name(idx)); }

Tree var_expr(int idx) { return Tree("VAR", {var_leaf(idx)}); }

Tree copy_expr(const Tree& e) { return e; }  // expression tokens map one-for-one

struct Translator {
  std::map<const Tree*, int> loop_fn;

  Tree stmt(const Tree& s, Tree k) const {
    if (s.token == "EMPTY") return k;
    if (s.token == "SEQ")
      return stmt(s.children[0], stmt(s.children[1], std::move(k)));
    if (s.token == "ASSIGN")
      return Tree("LET", {s.children[0], copy_expr(s.children[1]), std::move(k)});
    // FOR(i, a, b, body)
    int f = loop_fn.at(&s);
    const Tree& counter = s.children[0];
    int i = *syntax::var_index(counter.token);

    std::set<int> body_assigned;
    collect_assigned(s.children[3], body_assigned);

    // Recursive call: f applied to the incremented counter, then to the
    // current value of each threaded variable in ascending order.
    Tree rec("APP", {var_expr(f),
                     Tree("PLUS", {var_expr(i), Tree("CONST", {Tree("c1")})})});
    for (int m : body_assigned) rec = Tree("APP", {std::move(rec), var_expr(m)});

    Tree guard("IFLEQ", {var_expr(i), copy_expr(s.children[2]),
                         stmt(s.children[3], std::move(rec)), std::move(k)});

    // LAM(m1, LAM(m2, ... guard)) — wrap from the innermost variable out.
    Tree lam = std::move(guard);
    for (auto it = body_assigned.rbegin(); it != body_assigned.rend(); ++it)
      lam = Tree("LAM", {var_leaf(*it), std::move(lam)});

    Tree entry("APP", {var_expr(f), copy_expr(s.children[1])});
    for (int m : body_assigned) entry = Tree("APP", {std::move(entry), var_expr(m)});

    return Tree("LETREC", {var_leaf(f), counter, std::move(lam), std::move(entry)});
  }
};

}  // namespace

std::vector<int> assigned_var_indices(const Tree& src) {
  std::set<int> s;
  collect_assigned(src, s);
  return {s.begin(), s.end()};
}

void check_source(const Tree& src) {
  auto report = syntax::for_grammar().validate(src);
  if (!report.valid)
    throw IllegalSource("not a valid FOR tree: " + report.reason + " at " +
                        report.path);
  if (count_loops(src) > kMaxLoops)
    throw LoopBudgetExceeded("more than " + std::to_string(kMaxLoops) +
                             " FOR nodes");
  VarMask retired = 0;
  check_stmt(src, 0, 0, retired);
}

bool is_legal_source(const Tree& src, std::string* why) {
  try {
    check_source(src);
    return true;
  } catch (const Error& e) {
    if (why) *why = e.what();
    return false;
  }
}

Tree translate_with_continuation(const Tree& src, const Tree& k) {
  check_source(src);
  Translator tr;
  int next = kFirstLoopFnVar;
  assign_loop_fn_names(src, tr.loop_fn, next);
  return tr.stmt(src, k);
}

Tree translate_for_to_lambda(const Tree& src) {
  std::vector<int> vars = assigned_var_indices(src);
  Tree k0("CONST", {Tree("c0")});
  if (!vars.empty()) {
    k0 = var_expr(vars.back());
    for (auto it = std::next(vars.rbegin()); it != vars.rend(); ++it)
      k0 = Tree("PLUS", {var_expr(*it), std::move(k0)});
  }
  return translate_with_continuation(src, k0);
}

}  // namespace t2t::corpus
