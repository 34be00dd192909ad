#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace t2t {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tree text format violations; `offset` is the byte position in the input.
struct ParseError : Error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off)
      : Error(msg + " at byte " + std::to_string(off)), offset(off) {}
};

struct UnknownToken : Error {
  explicit UnknownToken(const std::string& tok) : Error("unknown token: " + tok) {}
};

struct UnknownCategory : Error {
  explicit UnknownCategory(const std::string& msg) : Error("unknown category: " + msg) {}
};

struct RootHasSibling : Error {
  RootHasSibling() : Error("binary tree root has a right sibling") {}
};

struct GenerationExhausted : Error {
  explicit GenerationExhausted(const std::string& msg) : Error(msg) {}
};

struct LoopBudgetExceeded : Error {
  explicit LoopBudgetExceeded(const std::string& msg) : Error(msg) {}
};

struct IllegalSource : Error {
  explicit IllegalSource(const std::string& msg) : Error(msg) {}
};

struct FuelExhausted : Error {
  explicit FuelExhausted(const std::string& msg) : Error(msg) {}
};

struct Overflow : Error {
  explicit Overflow(const std::string& msg) : Error(msg) {}
};

struct TypeMismatch : Error {
  explicit TypeMismatch(const std::string& msg) : Error(msg) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

struct NonFiniteValue : Error {
  explicit NonFiniteValue(const std::string& msg) : Error(msg) {}
};

struct IndexOutOfRange : Error {
  explicit IndexOutOfRange(const std::string& msg) : Error(msg) {}
};

struct IllegalTarget : Error {
  explicit IllegalTarget(const std::string& msg) : Error(msg) {}
};

struct VersionMismatch : Error {
  explicit VersionMismatch(const std::string& msg) : Error(msg) {}
};

struct CorruptCheckpoint : Error {
  explicit CorruptCheckpoint(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace t2t
