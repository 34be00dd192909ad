#include "t2t/grammar.hpp"

#include "t2t/errors.hpp"

namespace t2t::syntax {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  h ^= 0xFF;
  h *= 0x100000001B3ULL;
  return h;
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

GrammarSpec::GrammarSpec(std::string name, std::vector<Token> vocabulary,
                         std::vector<std::string> category_names,
                         std::vector<std::vector<TokenId>> categories,
                         std::vector<std::vector<CategoryId>> signatures,
                         CategoryId root)
    : name_(std::move(name)),
      vocab_(std::move(vocabulary)),
      category_names_(std::move(category_names)),
      categories_(std::move(categories)),
      signatures_(std::move(signatures)),
      root_(root) {
  for (std::size_t i = 0; i < vocab_.size(); ++i)
    by_name_[vocab_[i].name] = static_cast<TokenId>(i);

  category_mask_.assign(categories_.size(),
                        std::vector<char>(vocab_.size(), 0));
  for (std::size_t k = 0; k < categories_.size(); ++k)
    for (TokenId t : categories_[k]) category_mask_[k][t] = 1;

  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = fnv1a(h, name_);
  for (const Token& t : vocab_) {
    h = fnv1a(h, t.name);
    h = fnv1a(h, static_cast<std::uint64_t>(t.kind));
  }
  for (std::size_t k = 0; k < categories_.size(); ++k) {
    h = fnv1a(h, category_names_[k]);
    for (TokenId t : categories_[k]) h = fnv1a(h, static_cast<std::uint64_t>(t));
  }
  for (const auto& sig : signatures_) {
    h = fnv1a(h, static_cast<std::uint64_t>(sig.size()));
    for (CategoryId k : sig) h = fnv1a(h, static_cast<std::uint64_t>(k));
  }
  h = fnv1a(h, static_cast<std::uint64_t>(root_));
  fingerprint_ = h;
}

TokenId GrammarSpec::token_id(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw UnknownToken(name);
  return it->second;
}

std::optional<TokenId> GrammarSpec::find_token(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

const std::string& GrammarSpec::category_name(CategoryId k) const {
  return category_names_.at(k);
}

CategoryId GrammarSpec::category_by_name(const std::string& name) const {
  for (std::size_t k = 0; k < category_names_.size(); ++k)
    if (category_names_[k] == name) return static_cast<CategoryId>(k);
  throw UnknownCategory(name);
}

const std::vector<TokenId>& GrammarSpec::members(CategoryId k) const {
  if (k < 0 || static_cast<std::size_t>(k) >= categories_.size())
    throw UnknownCategory(std::to_string(k));
  return categories_[k];
}

std::optional<int> GrammarSpec::member_index(CategoryId k, TokenId t) const {
  const auto& m = members(k);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] == t) return static_cast<int>(i);
  return std::nullopt;
}

const std::vector<CategoryId>& GrammarSpec::child_categories(TokenId t) const {
  if (t < 0 || static_cast<std::size_t>(t) >= vocab_.size())
    throw UnknownToken(std::to_string(t));
  return signatures_[t];
}

const std::vector<CategoryId>& GrammarSpec::child_categories(
    const std::string& token) const {
  return child_categories(token_id(token));
}

bool GrammarSpec::in_category(CategoryId k, TokenId t) const {
  if (k < 0 || static_cast<std::size_t>(k) >= categories_.size())
    throw UnknownCategory(std::to_string(k));
  return category_mask_[k][t] != 0;
}

namespace {

bool validate_rec(const GrammarSpec& g, const Tree& t, CategoryId slot,
                  std::string& path, ValidityReport& out) {
  auto id = g.find_token(t.token);
  if (!id) {
    out = {false, path.empty() ? "/" : path, "token '" + t.token + "' not in vocabulary"};
    return false;
  }
  if (!g.in_category(slot, *id)) {
    out = {false, path.empty() ? "/" : path,
           "token '" + t.token + "' not in category " + g.category_name(slot)};
    return false;
  }
  const auto& sig = g.child_categories(*id);
  if (sig.size() != t.children.size()) {
    out = {false, path.empty() ? "/" : path,
           "token '" + t.token + "' expects " + std::to_string(sig.size()) +
               " children, has " + std::to_string(t.children.size())};
    return false;
  }
  for (std::size_t i = 0; i < sig.size(); ++i) {
    std::size_t mark = path.size();
    path += '/';
    path += std::to_string(i);
    if (!validate_rec(g, t.children[i], sig[i], path, out)) return false;
    path.resize(mark);
  }
  return true;
}

}  // namespace

ValidityReport GrammarSpec::validate(const Tree& t) const {
  ValidityReport out;
  std::string path;
  validate_rec(*this, t, root_, path, out);
  return out;
}

std::string var_name(int i) { return "v" + std::to_string(i); }
std::string const_name(int i) { return "c" + std::to_string(i); }

std::optional<int> var_index(const std::string& name) {
  if (name.size() < 2 || name[0] != 'v') return std::nullopt;
  for (std::size_t i = 1; i < name.size(); ++i)
    if (name[i] < '0' || name[i] > '9') return std::nullopt;
  int v = std::stoi(name.substr(1));
  if (v < 0 || v > 11) return std::nullopt;
  return v;
}

std::optional<int> const_index(const std::string& name) {
  if (name.size() < 2 || name[0] != 'c') return std::nullopt;
  for (std::size_t i = 1; i < name.size(); ++i)
    if (name[i] < '0' || name[i] > '9') return std::nullopt;
  int v = std::stoi(name.substr(1));
  if (v < 0 || v > 11) return std::nullopt;
  return v;
}

namespace {

constexpr int kNumVars = 12;
constexpr int kNumConsts = 12;

GrammarSpec build_for_grammar() {
  std::vector<Token> vocab;
  for (const char* s : {"SEQ", "ASSIGN", "FOR", "EMPTY", "PLUS", "MINUS", "VAR", "CONST"})
    vocab.push_back({s, TokenKind::Structural});
  for (int i = 0; i < kNumVars; ++i) vocab.push_back({var_name(i), TokenKind::Variable});
  for (int i = 0; i < kNumConsts; ++i) vocab.push_back({const_name(i), TokenKind::Constant});

  // Category ids: 0 Stmt, 1 Expr, 2 Name, 3 Number.
  std::vector<std::string> cat_names = {"Stmt", "Expr", "Name", "Number"};
  std::vector<std::vector<TokenId>> cats(4);
  cats[0] = {0, 1, 2, 3};  // SEQ ASSIGN FOR EMPTY
  cats[1] = {4, 5, 6, 7};  // PLUS MINUS VAR CONST
  for (int i = 0; i < kNumVars; ++i) cats[2].push_back(8 + i);
  for (int i = 0; i < kNumConsts; ++i) cats[3].push_back(8 + kNumVars + i);

  std::vector<std::vector<CategoryId>> sig(vocab.size());
  sig[0] = {0, 0};        // SEQ
  sig[1] = {2, 1};        // ASSIGN
  sig[2] = {2, 1, 1, 0};  // FOR
  sig[3] = {};            // EMPTY
  sig[4] = {1, 1};        // PLUS
  sig[5] = {1, 1};        // MINUS
  sig[6] = {2};           // VAR
  sig[7] = {3};           // CONST
  return GrammarSpec("FOR", std::move(vocab), std::move(cat_names),
                     std::move(cats), std::move(sig), 0);
}

GrammarSpec build_lambda_grammar() {
  std::vector<Token> vocab;
  for (const char* s : {"LET", "LETREC", "LAM", "APP", "IFLEQ", "PLUS", "MINUS", "VAR", "CONST"})
    vocab.push_back({s, TokenKind::Structural});
  for (int i = 0; i < kNumVars; ++i) vocab.push_back({var_name(i), TokenKind::Variable});
  for (int i = 0; i < kNumConsts; ++i) vocab.push_back({const_name(i), TokenKind::Constant});

  // Category ids: 0 Expr, 1 Name, 2 Number.
  std::vector<std::string> cat_names = {"Expr", "Name", "Number"};
  std::vector<std::vector<TokenId>> cats(3);
  cats[0] = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  for (int i = 0; i < kNumVars; ++i) cats[1].push_back(9 + i);
  for (int i = 0; i < kNumConsts; ++i) cats[2].push_back(9 + kNumVars + i);

  std::vector<std::vector<CategoryId>> sig(vocab.size());
  sig[0] = {1, 0, 0};     // LET
  sig[1] = {1, 1, 0, 0};  // LETREC
  sig[2] = {1, 0};        // LAM
  sig[3] = {0, 0};        // APP
  sig[4] = {0, 0, 0, 0};  // IFLEQ
  sig[5] = {0, 0};        // PLUS
  sig[6] = {0, 0};        // MINUS
  sig[7] = {1};           // VAR
  sig[8] = {2};           // CONST
  return GrammarSpec("LAMBDA", std::move(vocab), std::move(cat_names),
                     std::move(cats), std::move(sig), 0);
}

}  // namespace

const GrammarSpec& for_grammar() {
  static const GrammarSpec g = build_for_grammar();
  return g;
}

const GrammarSpec& lambda_grammar() {
  static const GrammarSpec g = build_lambda_grammar();
  return g;
}

}  // namespace t2t::syntax
