#include "t2t/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "json.hpp"
#include "t2t/errors.hpp"
#include "t2t/grammar.hpp"
#include "t2t/parallel.hpp"
#include "t2t/translate.hpp"

namespace t2t::corpus {

using nlohmann::json;
using syntax::Tree;

namespace {

constexpr int kMaxSemanticRejections = 1000;

// One fully vetted pair drawn from `rng`: generator acceptance, then
// translation, then strict semantic_check. Resource blowups (fuel or
// overflow in the oracle) reject the sample; a value mismatch is a
// translator defect and aborts loudly.
TranslationPair next_pair(Rng& rng, const GeneratorConfig& config) {
  for (int attempt = 0; attempt < kMaxSemanticRejections; ++attempt) {
    TranslationPair pair;
    pair.source = generate_for_program(rng, config);
    pair.target = translate_for_to_lambda(pair.source);
    SemanticCheckResult check = semantic_check(pair, /*strict=*/true);
    if (check.ok) return pair;
    if (!check.resource_failure)
      throw Error("translator produced a wrong program: " + check.detail +
                  "\n  source: " + syntax::serialize_tree(pair.source));
  }
  throw GenerationExhausted(
      "1000 consecutive semantic rejections; config too tight");
}

Tree json_to_tree(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_array())
    throw ParseError("tree must be [\"token\",[children]]", 0);
  Tree t(j[0].get<std::string>());
  t.children.reserve(j[1].size());
  for (const json& c : j[1]) t.children.push_back(json_to_tree(c));
  return t;
}

json size_stats(const std::vector<TranslationPair>& pairs,
                const Tree TranslationPair::* side, std::size_t vocab) {
  std::size_t min_size = std::numeric_limits<std::size_t>::max();
  std::size_t max_size = 0;
  double total = 0;
  for (const TranslationPair& p : pairs) {
    std::size_t s = syntax::tree_size(p.*side);
    min_size = std::min(min_size, s);
    max_size = std::max(max_size, s);
    total += double(s);
  }
  return json{{"tokens", vocab},
              {"mean_size", pairs.empty() ? 0.0 : total / double(pairs.size())},
              {"min_size", pairs.empty() ? 0 : min_size},
              {"max_size", max_size}};
}

json config_json(const GeneratorConfig& c) {
  return json{{"seed", c.seed},
              {"train_count", c.train_count},
              {"valid_count", c.valid_count},
              {"test_count", c.test_count},
              {"max_depth", c.max_depth},
              {"max_loops", c.max_loops},
              {"seq_prob", c.seq_prob},
              {"assign_prob", c.assign_prob},
              {"for_prob", c.for_prob},
              {"empty_prob", c.empty_prob},
              {"stmt_decay", c.stmt_decay},
              {"expr_op_prob", c.expr_op_prob},
              {"expr_decay", c.expr_decay},
              {"min_size", c.min_size},
              {"max_size", c.max_size},
              {"step_limit", c.step_limit}};
}

}  // namespace

std::vector<TranslationPair> generate_pairs(const GeneratorConfig& config,
                                            int threads) {
  validate_config(config);
  std::size_t total =
      config.train_count + config.valid_count + config.test_count;
  Rng master(config.seed);
  std::vector<TranslationPair> candidates(total);
  std::vector<Rng> streams(total, Rng(0));

  // Each index draws from its own split stream, so this phase is pure in
  // (seed, index) and safe to run across threads.
  parallel_for(total, threads, [&](std::size_t i) {
    streams[i] = master.split(i);
    candidates[i] = next_pair(streams[i], config);
  });

  // Serial dedup in index order; a collision keeps drawing from the
  // colliding index's own stream, so the result is thread-count invariant.
  std::unordered_set<std::string> seen;
  seen.reserve(total * 2);
  std::vector<TranslationPair> out;
  out.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    TranslationPair pair = std::move(candidates[i]);
    int rejections = 0;
    while (!seen.insert(syntax::serialize_tree(pair.source)).second) {
      if (++rejections > kMaxSemanticRejections)
        throw GenerationExhausted(
            "1000 consecutive duplicates; corpus larger than the "
            "program space the config reaches");
      pair = next_pair(streams[i], config);
    }
    out.push_back(std::move(pair));
  }
  return out;
}

void write_pairs(const std::string& path,
                 const std::vector<TranslationPair>& pairs) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  for (const TranslationPair& p : pairs)
    f << "{\"for\":" << syntax::serialize_tree(p.source)
      << ",\"lambda\":" << syntax::serialize_tree(p.target) << "}\n";
  if (!f) throw IoError("write failed on " + path);
}

std::vector<TranslationPair> read_pairs(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<TranslationPair> pairs;
  std::string line;
  for (std::size_t line_no = 1; std::getline(f, line); ++line_no) {
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw ParseError(path + " line " + std::to_string(line_no) + ": " + why,
                       0);
    };
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) fail("not valid JSON");
    if (!j.is_object() || !j.contains("for") || !j.contains("lambda"))
      fail("expected {\"for\": tree, \"lambda\": tree}");
    TranslationPair p;
    try {
      p.source = json_to_tree(j["for"]);
      p.target = json_to_tree(j["lambda"]);
    } catch (const ParseError& e) {
      fail(e.what());
    }
    syntax::ValidityReport r = syntax::for_grammar().validate(p.source);
    if (!r.valid) fail("source tree invalid at " + r.path + ": " + r.reason);
    r = syntax::lambda_grammar().validate(p.target);
    if (!r.valid) fail("target tree invalid at " + r.path + ": " + r.reason);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void make_dataset(const GeneratorConfig& config, const std::string& out_dir,
                  int threads) {
  std::vector<TranslationPair> all = generate_pairs(config, threads);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  auto at = all.begin();
  std::vector<TranslationPair> train(at, at + config.train_count);
  at += config.train_count;
  std::vector<TranslationPair> valid(at, at + config.valid_count);
  at += config.valid_count;
  std::vector<TranslationPair> test(at, at + config.test_count);

  std::filesystem::path dir(out_dir);
  write_pairs((dir / "train.jsonl").string(), train);
  write_pairs((dir / "valid.jsonl").string(), valid);
  write_pairs((dir / "test.jsonl").string(), test);

  json stats{
      {"train_count", train.size()},
      {"valid_count", valid.size()},
      {"test_count", test.size()},
      {"for", size_stats(all, &TranslationPair::source,
                         syntax::for_grammar().vocab_size())},
      {"lambda", size_stats(all, &TranslationPair::target,
                            syntax::lambda_grammar().vocab_size())},
      {"generator", config_json(config)},
      {"for_grammar_fingerprint", syntax::for_grammar().fingerprint()},
      {"lambda_grammar_fingerprint", syntax::lambda_grammar().fingerprint()},
  };
  std::ofstream f(dir / "stats.json", std::ios::binary);
  if (!f) throw IoError("cannot open stats.json for writing");
  f << stats.dump(2) << "\n";
  if (!f) throw IoError("write failed on stats.json");
}

}  // namespace t2t::corpus
