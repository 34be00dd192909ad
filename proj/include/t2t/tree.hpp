#pragma once

#include <memory>
#include <string>
#include <vector>

namespace t2t::syntax {

// N-ary abstract syntax tree. The only program representation: both
// languages are trees of tokens, no surface syntax exists.
struct Tree {
  std::string token;
  std::vector<Tree> children;

  Tree() = default;
  explicit Tree(std::string tok) : token(std::move(tok)) {}
  Tree(std::string tok, std::vector<Tree> kids)
      : token(std::move(tok)), children(std::move(kids)) {}

  bool operator==(const Tree& o) const {
    return token == o.token && children == o.children;
  }
};

// Left-Child Right-Sibling encoding: left = first child, right = next sibling.
struct BinaryTree {
  std::string token;
  std::unique_ptr<BinaryTree> left;
  std::unique_ptr<BinaryTree> right;

  BinaryTree() = default;
  explicit BinaryTree(std::string tok) : token(std::move(tok)) {}
};

BinaryTree lcrs_binarize(const Tree& t);

// Inverse of lcrs_binarize. Throws RootHasSibling if the root carries a
// right link (the encoding would denote a forest, not a tree).
Tree lcrs_unbinarize(const BinaryTree& b);

std::size_t tree_size(const Tree& t);
std::size_t tree_depth(const Tree& t);  // leaf has depth 1
std::size_t tree_size(const BinaryTree& b);

// Canonical text form: a recursive two-element JSON array
// ["token",[child,...]] with no whitespace. One exact byte sequence per tree.
std::string serialize_tree(const Tree& t);

// Parses the canonical form (whitespace between elements is tolerated).
// Throws ParseError with the byte offset of the first violation.
Tree parse_tree(const std::string& line);

}  // namespace t2t::syntax
