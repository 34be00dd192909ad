#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "t2t/tree.hpp"

namespace t2t::syntax {

enum class TokenKind { Structural, Variable, Constant, Eos };

struct Token {
  std::string name;
  TokenKind kind;
};

using TokenId = int;
using CategoryId = int;

struct ValidityReport {
  bool valid = true;
  std::string path;    // first violating path, e.g. "/0/2"
  std::string reason;  // human-readable cause
};

// A grammar: a fixed token vocabulary, named categories (sets of tokens
// admissible at a child slot), one category signature per token (one entry
// per child slot), and a root category. Immutable after construction.
class GrammarSpec {
 public:
  GrammarSpec(std::string name, std::vector<Token> vocabulary,
              std::vector<std::string> category_names,
              std::vector<std::vector<TokenId>> categories,
              std::vector<std::vector<CategoryId>> signatures, CategoryId root);

  const std::string& name() const { return name_; }
  const std::vector<Token>& vocabulary() const { return vocab_; }
  std::size_t vocab_size() const { return vocab_.size(); }

  TokenId token_id(const std::string& name) const;  // throws UnknownToken
  std::optional<TokenId> find_token(const std::string& name) const;
  const Token& token(TokenId id) const { return vocab_.at(id); }

  std::size_t category_count() const { return categories_.size(); }
  const std::string& category_name(CategoryId k) const;
  CategoryId category_by_name(const std::string& name) const;  // throws UnknownCategory
  const std::vector<TokenId>& members(CategoryId k) const;
  // Position of a token inside a category's member list, if present.
  std::optional<int> member_index(CategoryId k, TokenId t) const;

  // The per-child-slot categories a token generates. Empty for terminals.
  const std::vector<CategoryId>& child_categories(TokenId t) const;
  const std::vector<CategoryId>& child_categories(const std::string& token) const;

  CategoryId root() const { return root_; }

  // True iff `t`'s token belongs to `k`s member set.
  bool in_category(CategoryId k, TokenId t) const;

  ValidityReport validate(const Tree& t) const;

  // Stable hash of vocabulary + categories + signatures + root; used to
  // guard checkpoints against corpora from a different grammar.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  std::string name_;
  std::vector<Token> vocab_;
  std::vector<std::string> category_names_;
  std::vector<std::vector<TokenId>> categories_;
  std::vector<std::vector<CategoryId>> signatures_;
  CategoryId root_;
  std::unordered_map<std::string, TokenId> by_name_;
  std::vector<std::vector<char>> category_mask_;  // [category][token]
  std::uint64_t fingerprint_ = 0;
};

// The imperative source language. 32 tokens.
const GrammarSpec& for_grammar();
// The functional target language. 33 tokens (EOS is not part of the grammar).
const GrammarSpec& lambda_grammar();

// Baseline decoder vocabulary = lambda vocabulary + EOS, in that order.
inline constexpr const char* kEosToken = "EOS";

// Token name helpers shared by the generator/translator.
std::string var_name(int i);    // v0..v11
std::string const_name(int i);  // c0..c11
// Index of a v*/c* token name, or nullopt for structural tokens.
std::optional<int> var_index(const std::string& name);
std::optional<int> const_index(const std::string& name);

}  // namespace t2t::syntax
