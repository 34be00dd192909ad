#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "t2t/dataset.hpp"
#include "t2t/grammar.hpp"
#include "t2t/model.hpp"
#include "t2t/parallel.hpp"
#include "t2t/train.hpp"

// Times the example-parallel kernels against their serial reference path
// (threads = 1) and confirms the outputs are identical, which is the whole
// point of the split-stream / ordered-merge design.

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::string corpus_digest(const std::vector<t2t::corpus::TranslationPair>& v) {
  std::string all;
  for (const auto& p : v) {
    all += t2t::syntax::serialize_tree(p.source);
    all += '\n';
    all += t2t::syntax::serialize_tree(p.target);
    all += '\n';
  }
  return all;
}

void row(const char* task, double serial, double parallel, bool identical) {
  std::printf("%-24s %10.3fs %10.3fs %8.2fx   %s\n", task, serial, parallel,
              parallel > 0 ? serial / parallel : 0.0,
              identical ? "identical" : "DIFFERENT");
}

}  // namespace

int main() {
  int max_threads = t2t::hardware_threads();
  std::printf("hardware threads: %d\n", max_threads);
  std::printf("%-24s %11s %11s %9s   %s\n", "task", "serial", "parallel",
              "speedup", "outputs");

  t2t::corpus::GeneratorConfig g;
  g.seed = 11;
  g.train_count = 300;
  g.valid_count = 0;
  g.test_count = 0;

  auto t0 = Clock::now();
  auto serial_pairs = t2t::corpus::generate_pairs(g, 1);
  auto t1 = Clock::now();
  auto parallel_pairs = t2t::corpus::generate_pairs(g, max_threads);
  auto t2 = Clock::now();
  row("corpus generation", seconds(t0, t1), seconds(t1, t2),
      corpus_digest(serial_pairs) == corpus_digest(parallel_pairs));

  t2t::model::ModelConfig mc;
  mc.hidden_size = 32;
  mc.embed_size = 32;
  t2t::Rng rng(3);
  t2t::model::ParameterSet params = t2t::model::init_params(mc, rng);
  std::vector<t2t::corpus::TranslationPair> subset(
      serial_pairs.begin(), serial_pairs.begin() + 100);

  t0 = Clock::now();
  t2t::learning::EvalReport serial_report =
      t2t::learning::evaluate(params, mc, subset, 1);
  t1 = Clock::now();
  t2t::learning::EvalReport parallel_report =
      t2t::learning::evaluate(params, mc, subset, max_threads);
  t2 = Clock::now();
  bool same =
      t2t::learning::eval_report_to_json(serial_report) ==
      t2t::learning::eval_report_to_json(parallel_report);
  row("model evaluation", seconds(t0, t1), seconds(t1, t2), same);

  return 0;
}
