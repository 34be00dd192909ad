#include "t2t/train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "t2t/dataset.hpp"
#include "t2t/errors.hpp"
#include "t2t/model.hpp"
#include "t2t/optim.hpp"
#include "t2t/parallel.hpp"

namespace t2t::learning {

using autodiff::Tape;
using autodiff::Tensor;
using corpus::TranslationPair;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json report_json(const EvalReport& r) {
  return json{{"program_accuracy", r.program_accuracy},
              {"validity_rate", r.validity_rate},
              {"token_accuracy", r.token_accuracy},
              {"overflow_count", r.overflow_count},
              {"example_count", r.example_count}};
}

json train_config_json(const TrainConfig& c) {
  return json{{"data_dir", c.data_dir},
              {"hidden_size", c.model.hidden_size},
              {"embed_size", c.model.embed_size},
              {"decoder", model::decoder_kind_name(c.model.decoder)},
              {"max_nodes", c.model.limits.max_nodes},
              {"max_depth", c.model.limits.max_depth},
              {"init_scale", c.model.init_scale},
              {"epochs", c.epochs},
              {"accumulation", c.accumulation},
              {"seed", c.seed},
              {"out_dir", c.out_dir},
              {"patience", c.patience},
              {"stop_at_accuracy", c.stop_at_accuracy},
              {"threads", c.threads}};
}

void shuffle_indices(std::vector<std::size_t>& order, Rng rng) {
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.next_below(i)]);
}

}  // namespace

EvalReport evaluate(const model::ParameterSet& params,
                    const model::ModelConfig& config,
                    const std::vector<TranslationPair>& pairs, int threads) {
  struct Row {
    bool correct = false;
    bool valid = false;
    bool overflow = false;
    std::size_t tok_correct = 0;
    std::size_t tok_positions = 0;
  };
  std::vector<Row> rows(pairs.size());

  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const TranslationPair& p = pairs[i];
    Row& r = rows[i];
    Tape tape;
    model::EncodedTree enc =
        model::encode(tape, params, syntax::lcrs_binarize(p.source));
    if (config.decoder == model::DecoderKind::Grammar) {
      model::GrammarDecodeResult res =
          model::decode_grammar(tape, params, enc, config.limits);
      r.overflow = res.overflow;
      if (!res.overflow) {
        r.valid = syntax::lambda_grammar().validate(res.tree).valid;
        r.correct = res.tree == p.target;
      }
    } else {
      model::BaselineDecodeResult res =
          model::decode_baseline(tape, params, enc, config.limits);
      r.overflow = res.overflow;
      r.valid = res.valid;
      r.correct = res.tree.has_value() && *res.tree == p.target;
    }
    model::LossBreakdown lb =
        model::teacher_forced_loss(tape, params, p, config.decoder);
    r.tok_correct = lb.correct;
    r.tok_positions = lb.positions;
  });

  EvalReport out;
  out.example_count = pairs.size();
  std::size_t tok_correct = 0, tok_positions = 0, correct = 0, valid = 0;
  for (const Row& r : rows) {
    correct += r.correct;
    valid += r.valid;
    out.overflow_count += r.overflow;
    tok_correct += r.tok_correct;
    tok_positions += r.tok_positions;
  }
  if (!pairs.empty()) {
    out.program_accuracy = double(correct) / double(pairs.size());
    out.validity_rate = double(valid) / double(pairs.size());
  }
  if (tok_positions > 0)
    out.token_accuracy = double(tok_correct) / double(tok_positions);
  return out;
}

TrainResult train(const TrainConfig& config) {
  if (config.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (config.accumulation < 1)
    throw ConfigError("accumulation must be at least 1");
  model::validate_model_config(config.model);

  std::filesystem::path data(config.data_dir);
  std::vector<TranslationPair> train_pairs =
      corpus::read_pairs((data / "train.jsonl").string());
  std::vector<TranslationPair> valid_pairs =
      corpus::read_pairs((data / "valid.jsonl").string());
  if (train_pairs.empty()) throw ConfigError("training split is empty");

  std::error_code ec;
  std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + config.out_dir + ": " + ec.message());
  {
    std::ofstream f(out_dir / "train_config.json", std::ios::binary);
    if (!f) throw IoError("cannot write train_config.json");
    f << train_config_json(config).dump(2) << "\n";
  }

  Rng master(config.seed);
  Rng init_rng = master.split(0);
  model::ParameterSet params = model::init_params(config.model, init_rng);
  std::vector<Tensor*> tensors = params.tensors();
  autodiff::OptimizerState opt(autodiff::AdamConfig{}, tensors);

  TrainResult result;
  result.log_path = (out_dir / "train_log.csv").string();
  result.best_checkpoint = (out_dir / "best.json").string();
  result.final_checkpoint = (out_dir / "final.json").string();

  std::ofstream log(result.log_path, std::ios::binary);
  if (!log) throw IoError("cannot write " + result.log_path);
  log << "epoch,train_loss,val_program_accuracy,val_validity_rate,"
         "overflow_count\n";

  double best_accuracy = -1.0;
  int epochs_since_best = 0;

  std::vector<std::size_t> order(train_pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_indices(order, master.split(std::uint64_t(epoch)));
    double loss_sum = 0.0;

    std::size_t window = std::size_t(config.accumulation);
    for (std::size_t start = 0; start < order.size(); start += window) {
      std::size_t count = std::min(window, order.size() - start);
      std::vector<std::vector<Tensor>> local(
          count, std::vector<Tensor>(tensors.size()));
      std::vector<double> losses(count, 0.0);

      parallel_for(count, config.threads, [&](std::size_t k) {
        std::size_t example = order[start + k];
        try {
          Tape tape;
          model::LossBreakdown lb = model::teacher_forced_loss(
              tape, params, train_pairs[example], config.model.decoder);
          losses[k] = tape.value(lb.loss).data[0];
          tape.backward(lb.loss, local[k]);
        } catch (const NonFiniteValue& e) {
          throw NonFiniteValue("training example " + std::to_string(example) +
                               ": " + e.what());
        }
      });

      // Ordered merge keeps the update identical for any thread count.
      std::vector<Tensor> grads(tensors.size());
      for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t t = 0; t < tensors.size(); ++t) {
          if (local[k][t].size() == 0) continue;
          Tensor& g = grads[t];
          if (g.size() == 0) g = Tensor(local[k][t].rows, local[k][t].cols);
          for (std::size_t v = 0; v < g.size(); ++v)
            g.data[v] += local[k][t].data[v];
        }
        loss_sum += losses[k];
      }
      for (Tensor& g : grads)
        for (double& v : g.data) v /= double(count);

      autodiff::adam_step(tensors, grads, opt);
    }

    double train_loss = loss_sum / double(train_pairs.size());
    EvalReport val =
        evaluate(params, config.model, valid_pairs, config.threads);
    log << epoch << "," << fmt_double(train_loss) << ","
        << fmt_double(val.program_accuracy) << ","
        << fmt_double(val.validity_rate) << "," << val.overflow_count << "\n";
    log.flush();

    result.epochs_run = epoch;
    if (val.program_accuracy > best_accuracy) {
      best_accuracy = val.program_accuracy;
      result.best_epoch = epoch;
      result.best_val_accuracy = best_accuracy;
      epochs_since_best = 0;
      save_checkpoint(params, config.model, result.best_checkpoint);
    } else {
      ++epochs_since_best;
    }

    if (config.stop_at_accuracy >= 0.0 &&
        val.program_accuracy >= config.stop_at_accuracy)
      break;
    if (config.patience > 0 && epochs_since_best >= config.patience) break;
  }

  save_checkpoint(params, config.model, result.final_checkpoint);
  if (!log) throw IoError("write failed on " + result.log_path);
  return result;
}

RunSummary aggregate_runs(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw ConfigError("aggregate_runs needs at least one report");
  RunSummary s;
  s.runs = reports;
  double n = double(reports.size());
  for (const EvalReport& r : reports) {
    s.mean_program_accuracy += r.program_accuracy / n;
    s.mean_validity_rate += r.validity_rate / n;
    s.mean_token_accuracy += r.token_accuracy / n;
    s.mean_overflow += double(r.overflow_count) / n;
  }
  if (reports.size() >= 2) {
    auto sd = [&](auto pick, double mean) {
      double acc = 0;
      for (const EvalReport& r : reports) {
        double d = pick(r) - mean;
        acc += d * d;
      }
      return std::sqrt(acc / (n - 1.0));
    };
    s.sd_program_accuracy =
        sd([](const EvalReport& r) { return r.program_accuracy; },
           s.mean_program_accuracy);
    s.sd_validity_rate = sd(
        [](const EvalReport& r) { return r.validity_rate; },
        s.mean_validity_rate);
    s.sd_token_accuracy = sd(
        [](const EvalReport& r) { return r.token_accuracy; },
        s.mean_token_accuracy);
  }
  return s;
}

std::string eval_report_to_json(const EvalReport& report) {
  return report_json(report).dump(2);
}

std::string run_summary_to_json(const RunSummary& summary) {
  json runs = json::array();
  for (const EvalReport& r : summary.runs) runs.push_back(report_json(r));
  json mean{{"program_accuracy", summary.mean_program_accuracy},
            {"validity_rate", summary.mean_validity_rate},
            {"token_accuracy", summary.mean_token_accuracy},
            {"overflow_count", summary.mean_overflow}};
  json sd;
  if (summary.sd_program_accuracy) {
    sd = json{{"program_accuracy", *summary.sd_program_accuracy},
              {"validity_rate", *summary.sd_validity_rate},
              {"token_accuracy", *summary.sd_token_accuracy}};
  } else {
    sd = nullptr;
  }
  return json{{"runs", runs}, {"mean", mean}, {"stddev", sd}}.dump(2);
}

}  // namespace t2t::learning
