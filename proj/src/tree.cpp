#include "t2t/tree.hpp"

#include <algorithm>

#include "t2t/errors.hpp"

namespace t2t::syntax {

namespace {

std::unique_ptr<BinaryTree> binarize_list(const std::vector<Tree>& siblings,
                                          std::size_t at) {
  if (at >= siblings.size()) return nullptr;
  auto node = std::make_unique<BinaryTree>(siblings[at].token);
  node->left = binarize_list(siblings[at].children, 0);
  node->right = binarize_list(siblings, at + 1);
  return node;
}

void unbinarize_into(const BinaryTree* b, std::vector<Tree>& out) {
  while (b != nullptr) {
    Tree t(b->token);
    unbinarize_into(b->left.get(), t.children);
    out.push_back(std::move(t));
    b = b->right.get();
  }
}

}  // namespace

BinaryTree lcrs_binarize(const Tree& t) {
  BinaryTree root(t.token);
  root.left = binarize_list(t.children, 0);
  return root;
}

Tree lcrs_unbinarize(const BinaryTree& b) {
  if (b.right != nullptr) throw RootHasSibling();
  Tree t(b.token);
  unbinarize_into(b.left.get(), t.children);
  return t;
}

std::size_t tree_size(const Tree& t) {
  std::size_t n = 1;
  for (const Tree& c : t.children) n += tree_size(c);
  return n;
}

std::size_t tree_depth(const Tree& t) {
  std::size_t d = 0;
  for (const Tree& c : t.children) d = std::max(d, tree_depth(c));
  return d + 1;
}

std::size_t tree_size(const BinaryTree& b) {
  std::size_t n = 1;
  if (b.left) n += tree_size(*b.left);
  if (b.right) n += tree_size(*b.right);
  return n;
}

namespace {

void serialize_into(const Tree& t, std::string& out) {
  out += "[\"";
  out += t.token;  // tokens are plain identifiers, no escaping needed
  out += "\",[";
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    if (i > 0) out += ',';
    serialize_into(t.children[i], out);
  }
  out += "]]";
}

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  void expect(char c) {
    skip_ws();
    if (pos >= s.size() || s[pos] != c)
      throw ParseError(std::string("expected '") + c + "'", pos);
    ++pos;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos < s.size() && s[pos] == c;
  }

  std::string parse_string() {
    expect('"');
    std::size_t start = pos;
    while (pos < s.size() && s[pos] != '"') {
      char c = s[pos];
      bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                (c >= '0' && c <= '9') || c == '_' || c == '<' || c == '>';
      if (!ok) throw ParseError("invalid token character", pos);
      ++pos;
    }
    if (pos >= s.size()) throw ParseError("unterminated string", pos);
    std::string tok = s.substr(start, pos - start);
    if (tok.empty()) throw ParseError("empty token", start);
    ++pos;  // closing quote
    return tok;
  }

  Tree parse_node() {
    expect('[');
    Tree t(parse_string());
    expect(',');
    expect('[');
    if (!peek_is(']')) {
      while (true) {
        t.children.push_back(parse_node());
        if (peek_is(',')) {
          ++pos;
          continue;
        }
        break;
      }
    }
    expect(']');
    expect(']');
    return t;
  }
};

}  // namespace

std::string serialize_tree(const Tree& t) {
  std::string out;
  serialize_into(t, out);
  return out;
}

Tree parse_tree(const std::string& line) {
  Parser p{line};
  Tree t = p.parse_node();
  p.skip_ws();
  if (p.pos != line.size()) throw ParseError("trailing bytes after tree", p.pos);
  return t;
}

}  // namespace t2t::syntax
