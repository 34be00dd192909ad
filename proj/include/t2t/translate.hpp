#pragma once

#include <string>
#include <vector>

#include "t2t/tree.hpp"

namespace t2t::corpus {

// Ascending indices of variables that appear as ASSIGN targets anywhere in
// the program. Loop counters do not qualify by themselves.
std::vector<int> assigned_var_indices(const syntax::Tree& src);

// Verifies the source-program constraints the translator relies on:
//  - grammar-valid FOR tree
//  - loop end bounds contain no variables
//  - a loop counter is not in scope at loop entry, does not shadow an
//    enclosing counter, and is never an ASSIGN target while its loop runs
//  - once a loop finishes, its counter is never read or assigned again
//    (a FOR restores the counter, the rewrite leaves it past the bound);
//    a later loop may still claim it as its own counter
//  - at most 4 FOR nodes (fresh-name pool v8..v11)
// Reading a variable before (or without) any assignment is legal: the store
// starts at zero and unbound variables on the functional side read as zero.
// Throws IllegalSource / LoopBudgetExceeded.
void check_source(const syntax::Tree& src);

// Non-throwing variant; fills `why` when the source is rejected.
bool is_legal_source(const syntax::Tree& src, std::string* why = nullptr);

// Deterministic continuation-passing rewrite into LAMBDA, with `k` as the
// top-level continuation expression.
syntax::Tree translate_with_continuation(const syntax::Tree& src,
                                         const syntax::Tree& k);

// translate_with_continuation with the default continuation: a right-nested
// PLUS fold over the assigned variables in ascending order (CONST c0 when
// the program assigns nothing).
syntax::Tree translate_for_to_lambda(const syntax::Tree& src);

}  // namespace t2t::corpus
