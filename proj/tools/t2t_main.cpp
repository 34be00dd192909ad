#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "t2t/dataset.hpp"
#include "t2t/errors.hpp"
#include "t2t/gen.hpp"
#include "t2t/grammar.hpp"
#include "t2t/interp.hpp"
#include "t2t/model.hpp"
#include "t2t/optim.hpp"
#include "t2t/parallel.hpp"
#include "t2t/train.hpp"
#include "t2t/translate.hpp"

namespace {

using t2t::Rng;
namespace corpus = t2t::corpus;
namespace learning = t2t::learning;
namespace model = t2t::model;
namespace syntax = t2t::syntax;

// Default verbosity 1; the T2T_VERBOSE environment variable overrides it
// (0 silences progress, 2 adds detail).
int verbosity() {
  static int level = [] {
    const char* env = std::getenv("T2T_VERBOSE");
    return env ? std::atoi(env) : 1;
  }();
  return level;
}

void say(int level, const std::string& msg) {
  if (verbosity() >= level) std::cerr << msg << "\n";
}

void add_generator_flags(CLI::App* cmd, corpus::GeneratorConfig& g) {
  cmd->add_option("--count", g.train_count, "Training pairs")
      ->capture_default_str();
  cmd->add_option("--valid", g.valid_count, "Validation pairs")
      ->capture_default_str();
  cmd->add_option("--test", g.test_count, "Test pairs")->capture_default_str();
  cmd->add_option("--seed", g.seed, "Corpus seed")->capture_default_str();
  cmd->add_option("--max-depth", g.max_depth, "Statement recursion bound")
      ->capture_default_str();
  cmd->add_option("--max-loops", g.max_loops, "Loops per program (at most 4)")
      ->capture_default_str();
  cmd->add_option("--seq-prob", g.seq_prob, "SEQ weight")->capture_default_str();
  cmd->add_option("--assign-prob", g.assign_prob, "ASSIGN weight")
      ->capture_default_str();
  cmd->add_option("--for-prob", g.for_prob, "FOR weight")->capture_default_str();
  cmd->add_option("--empty-prob", g.empty_prob, "EMPTY weight")
      ->capture_default_str();
  cmd->add_option("--stmt-decay", g.stmt_decay, "Per-depth SEQ decay")
      ->capture_default_str();
  cmd->add_option("--expr-op-prob", g.expr_op_prob, "PLUS/MINUS weight")
      ->capture_default_str();
  cmd->add_option("--expr-decay", g.expr_decay, "Per-depth operator decay")
      ->capture_default_str();
  cmd->add_option("--min-size", g.min_size, "Smallest accepted program")
      ->capture_default_str();
  cmd->add_option("--max-size", g.max_size, "Largest accepted program")
      ->capture_default_str();
  cmd->add_option("--step-limit", g.step_limit, "Interpreter fuel")
      ->capture_default_str();
}

std::string tree_or_null(const syntax::Tree* t) {
  return t ? syntax::serialize_tree(*t) : "null";
}

// Refuse evaluating/translating against data generated under a different
// grammar: a stats.json sitting beside the data file carries fingerprints.
void check_data_provenance(const std::string& data_path) {
  std::filesystem::path stats =
      std::filesystem::path(data_path).parent_path() / "stats.json";
  std::ifstream f(stats);
  if (!f) return;  // bare files carry no provenance; tree validation still applies
  nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
  if (j.is_discarded()) return;
  if (!j.contains("for_grammar_fingerprint")) return;
  if (j["for_grammar_fingerprint"].get<std::uint64_t>() !=
          syntax::for_grammar().fingerprint() ||
      j["lambda_grammar_fingerprint"].get<std::uint64_t>() !=
          syntax::lambda_grammar().fingerprint())
    throw t2t::ConfigError(stats.string() +
                           " records a different grammar than this build");
}

int run_gen(const corpus::GeneratorConfig& g, const std::string& out_dir,
            int threads) {
  corpus::make_dataset(g, out_dir, threads);
  say(1, "wrote train/valid/test JSONL and stats.json under " + out_dir);
  return 0;
}

int run_train(learning::TrainConfig& config) {
  learning::TrainResult res = learning::train(config);
  say(1, "trained " + std::to_string(res.epochs_run) + " epoch(s); best "
             "validation accuracy " + std::to_string(res.best_val_accuracy) +
             " at epoch " + std::to_string(res.best_epoch));
  say(1, "checkpoints: " + res.best_checkpoint + " (best), " +
             res.final_checkpoint + " (final); log: " + res.log_path);
  return 0;
}

int run_translate(const std::string& ckpt_path, const std::string& input,
                  const std::string& output) {
  learning::Checkpoint ckpt = learning::load_checkpoint(ckpt_path);
  check_data_provenance(input);

  std::ifstream in(input, std::ios::binary);
  if (!in) throw t2t::IoError("cannot open " + input);
  std::ofstream out(output, std::ios::binary);
  if (!out) throw t2t::IoError("cannot open " + output + " for writing");

  std::string line;
  std::size_t line_no = 0;
  std::size_t done = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("for"))
      throw t2t::ParseError(input + " line " + std::to_string(line_no) +
                                ": expected {\"for\": tree}",
                            0);
    syntax::Tree src;
    try {
      src = syntax::parse_tree(j["for"].dump());
    } catch (const t2t::ParseError& e) {
      throw t2t::ParseError(
          input + " line " + std::to_string(line_no) + ": " + e.what(), 0);
    }
    syntax::ValidityReport rep = syntax::for_grammar().validate(src);
    if (!rep.valid)
      throw t2t::ParseError(input + " line " + std::to_string(line_no) +
                                ": invalid source at " + rep.path + ": " +
                                rep.reason,
                            0);

    t2t::autodiff::Tape tape;
    model::EncodedTree enc =
        model::encode(tape, ckpt.params, syntax::lcrs_binarize(src));
    const syntax::Tree* predicted = nullptr;
    bool valid = false, overflow = false;
    syntax::Tree tree;
    if (ckpt.config.decoder == model::DecoderKind::Grammar) {
      model::GrammarDecodeResult res =
          model::decode_grammar(tape, ckpt.params, enc, ckpt.config.limits);
      overflow = res.overflow;
      if (!overflow) {
        tree = std::move(res.tree);
        predicted = &tree;
        valid = syntax::lambda_grammar().validate(tree).valid;
      }
    } else {
      model::BaselineDecodeResult res =
          model::decode_baseline(tape, ckpt.params, enc, ckpt.config.limits);
      overflow = res.overflow;
      valid = res.valid;
      if (res.tree) {
        tree = std::move(*res.tree);
        predicted = &tree;
      }
    }
    out << "{\"for\":" << syntax::serialize_tree(src)
        << ",\"predicted\":" << tree_or_null(predicted)
        << ",\"valid\":" << (valid ? "true" : "false")
        << ",\"overflow\":" << (overflow ? "true" : "false") << "}\n";
    ++done;
  }
  if (!out) throw t2t::IoError("write failed on " + output);
  say(1, "translated " + std::to_string(done) + " program(s) into " + output);
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data,
             const std::string& report_path, const std::string& expect_decoder,
             int threads) {
  learning::Checkpoint ckpt = learning::load_checkpoint(ckpt_path);
  if (!expect_decoder.empty() &&
      model::decoder_kind_from_name(expect_decoder) != ckpt.config.decoder)
    throw t2t::ConfigError("checkpoint holds a " +
                           model::decoder_kind_name(ckpt.config.decoder) +
                           " decoder, not " + expect_decoder);
  check_data_provenance(data);
  std::vector<corpus::TranslationPair> pairs = corpus::read_pairs(data);
  learning::EvalReport report =
      learning::evaluate(ckpt.params, ckpt.config, pairs, threads);
  std::string rendered = learning::eval_report_to_json(report);
  if (!report_path.empty()) {
    std::ofstream f(report_path, std::ios::binary);
    if (!f) throw t2t::IoError("cannot open " + report_path + " for writing");
    f << rendered << "\n";
    if (!f) throw t2t::IoError("write failed on " + report_path);
  }
  std::cout << rendered << "\n";
  return 0;
}

bool selftest_check(const std::string& name, bool ok) {
  std::cout << (ok ? "PASS" : "FAIL") << " " << name << "\n";
  return ok;
}

int run_selftest() {
  bool all = true;

  {
    corpus::GeneratorConfig g;
    g.seed = 2024;
    Rng rng(g.seed);
    bool ok = true;
    for (int i = 0; i < 500 && ok; ++i) {
      syntax::Tree t = corpus::generate_for_program(rng, g);
      syntax::BinaryTree b = syntax::lcrs_binarize(t);
      ok = syntax::lcrs_unbinarize(b) == t &&
           syntax::tree_size(b) == syntax::tree_size(t);
    }
    all &= selftest_check("binarization round-trip on 500 programs", ok);
  }

  {
    using syntax::Tree;
    Tree seq("SEQ",
             {Tree("ASSIGN", {Tree("v0"), Tree("CONST", {Tree("c2")})}),
              Tree("ASSIGN", {Tree("v1"), Tree("PLUS", {Tree("VAR", {Tree("v0")}),
                                                        Tree("CONST", {Tree("c3")})})})});
    corpus::ForEnv env = corpus::eval_for(seq);
    bool ok = env.values[0] == 2 && env.values[1] == 5;
    corpus::TranslationPair p{seq, corpus::translate_for_to_lambda(seq)};
    corpus::LambdaValue v = corpus::eval_lambda(p.target);
    ok = ok && !v.is_closure() && v.number == 7 &&
         corpus::semantic_check(p).ok;
    all &= selftest_check("interpreter and translator spot values", ok);
  }

  {
    corpus::GeneratorConfig g;
    g.seed = 7;
    Rng rng(g.seed);
    bool ok = true;
    for (int i = 0; i < 200 && ok; ++i) {
      corpus::TranslationPair p;
      p.source = corpus::generate_for_program(rng, g);
      p.target = corpus::translate_for_to_lambda(p.source);
      corpus::SemanticCheckResult r = corpus::semantic_check(p);
      if (!r.ok && !r.resource_failure) ok = false;
    }
    all &= selftest_check("strict semantic agreement on 200 fresh pairs", ok);
  }

  for (model::DecoderKind kind :
       {model::DecoderKind::Grammar, model::DecoderKind::Baseline}) {
    model::ModelConfig mc;
    mc.hidden_size = 8;
    mc.embed_size = 8;
    mc.decoder = kind;
    Rng rng(99);
    model::ParameterSet params = model::init_params(mc, rng);
    std::vector<t2t::autodiff::Tensor*> tensors = params.tensors();

    corpus::GeneratorConfig g;
    g.seed = 5;
    g.max_size = 12;
    Rng grng(g.seed);
    corpus::TranslationPair pair;
    pair.source = corpus::generate_for_program(grng, g);
    pair.target = corpus::translate_for_to_lambda(pair.source);

    auto builder = [&](std::vector<t2t::autodiff::Tensor>* grads) {
      t2t::autodiff::Tape tape;
      model::LossBreakdown lb =
          model::teacher_forced_loss(tape, params, pair, kind);
      if (grads) tape.backward(lb.loss, *grads);
      return tape.value(lb.loss).data[0];
    };
    // Central differences of a ~2-nat loss carry ~1e-11 round-off, and some
    // parameter entries have genuine gradients below the 1e-8 denominator
    // floor; eps balances that round-off against O(eps^2) truncation.
    double err = t2t::autodiff::grad_check(builder, tensors, 3e-3);
    all &= selftest_check("gradient fidelity (" +
                              model::decoder_kind_name(kind) +
                              "), max relative error " + std::to_string(err),
                          err <= 1e-4);
  }

  if (!all) throw t2t::Error("self-test found failures");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-to-tree neural program translator"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (0 = all available; results are identical "
                 "for any value)")
      ->capture_default_str();

  corpus::GeneratorConfig gen_cfg;
  std::string gen_out = "data";
  CLI::App* gen = app.add_subcommand("gen", "Generate a translation corpus");
  add_generator_flags(gen, gen_cfg);
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();
  gen->set_config("--config", "", "Config file (INI/TOML keys mirror flags)");

  learning::TrainConfig train_cfg;
  std::string train_decoder = "grammar";
  CLI::App* train = app.add_subcommand("train", "Train a translator");
  train->add_option("--data", train_cfg.data_dir,
                    "Directory with train.jsonl and valid.jsonl")
      ->required();
  train->add_option("--decoder", train_decoder, "grammar | baseline")
      ->capture_default_str();
  train->add_option("--hidden", train_cfg.model.hidden_size, "Hidden size d")
      ->capture_default_str();
  train->add_option("--embed", train_cfg.model.embed_size, "Embedding size e")
      ->capture_default_str();
  train->add_option("--epochs", train_cfg.epochs, "Training epochs")
      ->capture_default_str();
  train->add_option("--seed", train_cfg.seed, "Initialization/shuffle seed")
      ->capture_default_str();
  train->add_option("--accum", train_cfg.accumulation,
                    "Examples per optimizer step")
      ->capture_default_str();
  train->add_option("--out", train_cfg.out_dir, "Output directory")
      ->required();
  train->add_option("--patience", train_cfg.patience,
                    "Stop after this many epochs without a new best "
                    "validation accuracy (0 = off)")
      ->capture_default_str();
  train->add_option("--stop-at-accuracy", train_cfg.stop_at_accuracy,
                    "Stop once validation accuracy reaches this value "
                    "(negative = off)")
      ->capture_default_str();
  train->add_option("--init-scale", train_cfg.model.init_scale,
                    "Uniform init bound")
      ->capture_default_str();
  train->add_option("--max-nodes", train_cfg.model.limits.max_nodes,
                    "Decode node limit")
      ->capture_default_str();
  train->add_option("--max-depth", train_cfg.model.limits.max_depth,
                    "Decode depth limit")
      ->capture_default_str();
  train->set_config("--config", "", "Config file (INI/TOML keys mirror flags)");

  std::string tr_model, tr_input, tr_output;
  CLI::App* translate =
      app.add_subcommand("translate", "Translate source programs");
  translate->add_option("--model", tr_model, "Checkpoint file")->required();
  translate->add_option("--input", tr_input, "JSONL of {\"for\": tree}")
      ->required();
  translate->add_option("--out", tr_output, "Output JSONL")->required();

  std::string ev_model, ev_data, ev_report, ev_decoder;
  CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint on a split");
  eval->add_option("--model", ev_model, "Checkpoint file")->required();
  eval->add_option("--data", ev_data, "JSONL of {\"for\",\"lambda\"} pairs")
      ->required();
  eval->add_option("--report", ev_report, "Where to write the JSON report");
  eval->add_option("--decoder", ev_decoder,
                   "Refuse checkpoints of the other decoder kind");

  CLI::App* selftest =
      app.add_subcommand("selftest", "Run built-in verification suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return run_gen(gen_cfg, gen_out, threads);
    if (train->parsed()) {
      train_cfg.model.decoder = model::decoder_kind_from_name(train_decoder);
      train_cfg.threads = threads;
      return run_train(train_cfg);
    }
    if (translate->parsed()) return run_translate(tr_model, tr_input, tr_output);
    if (eval->parsed())
      return run_eval(ev_model, ev_data, ev_report, ev_decoder, threads);
    if (selftest->parsed()) return run_selftest();
  } catch (const t2t::NonFiniteValue& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const t2t::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
