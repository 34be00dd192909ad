#pragma once

#include <string>
#include <vector>

#include "t2t/gen.hpp"
#include "t2t/interp.hpp"

namespace t2t::corpus {

// All counts' worth of pairs, deduplicated by canonical source
// serialization, in a deterministic order that depends only on the config
// (not on the thread count). Every pair passes validate on both grammars
// and strict semantic_check. Index i's randomness comes from stream
// split(seed, i), so examples can be produced in parallel.
std::vector<TranslationPair> generate_pairs(const GeneratorConfig& config,
                                            int threads = 0);

// One {"for": <tree>, "lambda": <tree>} object per line, LF-terminated,
// trees in the canonical ["token",[children]] encoding.
void write_pairs(const std::string& path,
                 const std::vector<TranslationPair>& pairs);

// Throws ParseError with a "line N:" prefix, IoError if unreadable.
// Parsed trees are grammar-validated.
std::vector<TranslationPair> read_pairs(const std::string& path);

// Writes train.jsonl / valid.jsonl / test.jsonl / stats.json into out_dir
// (created if missing). stats.json carries the per-split counts, size
// statistics and vocabulary size per language, the resolved generator
// config, and both grammar fingerprints.
void make_dataset(const GeneratorConfig& config, const std::string& out_dir,
                  int threads = 0);

}  // namespace t2t::corpus
