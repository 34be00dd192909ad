#include "t2t/params.hpp"

#include "t2t/errors.hpp"
#include "t2t/grammar.hpp"

namespace t2t::model {

using autodiff::Tensor;

std::string decoder_kind_name(DecoderKind k) {
  return k == DecoderKind::Grammar ? "grammar" : "baseline";
}

DecoderKind decoder_kind_from_name(const std::string& name) {
  if (name == "grammar") return DecoderKind::Grammar;
  if (name == "baseline") return DecoderKind::Baseline;
  throw ConfigError("unknown decoder kind '" + name +
                    "' (expected grammar or baseline)");
}

void validate_model_config(const ModelConfig& config) {
  if (config.hidden_size <= 0) throw ConfigError("hidden_size must be positive");
  if (config.embed_size <= 0) throw ConfigError("embed_size must be positive");
  if (config.init_scale < 0) throw ConfigError("init_scale must be >= 0");
  if (config.limits.max_nodes == 0 || config.limits.max_depth == 0)
    throw ConfigError("decode limits must be positive");
}

void ParameterSet::visit(
    const std::function<void(const std::string&, Tensor&)>& fn) {
  fn("src_embed", src_embed);
  const char* gate_names[] = {"in", "fl", "fr", "out", "u"};
  EncoderGate* gates[] = {&encoder.in, &encoder.fl, &encoder.fr, &encoder.out,
                          &encoder.u};
  for (int g = 0; g < 5; ++g) {
    std::string base = std::string("enc_") + gate_names[g];
    fn(base + "_w", gates[g]->w);
    fn(base + "_ul", gates[g]->ul);
    fn(base + "_ur", gates[g]->ur);
    fn(base + "_b", gates[g]->b);
  }
  fn("combiner", combiner);
  fn("out_head", out_head);
  fn("tgt_embed", tgt_embed);
  const syntax::GrammarSpec& tg = syntax::lambda_grammar();
  for (std::size_t k = 0; k < category_heads.size(); ++k)
    fn("head_" + tg.category_name(int(k)), category_heads[k]);
  for (std::size_t i = 0; i < child_cells.size(); ++i) {
    std::string base = "cell" + std::to_string(i) + "_";
    ChildCell& c = child_cells[i];
    fn(base + "wi", c.wi);
    fn(base + "ui", c.ui);
    fn(base + "bi", c.bi);
    fn(base + "wf", c.wf);
    fn(base + "uf", c.uf);
    fn(base + "bf", c.bf);
    fn(base + "wo", c.wo);
    fn(base + "uo", c.uo);
    fn(base + "bo", c.bo);
    fn(base + "wu", c.wu);
    fn(base + "uu", c.uu);
    fn(base + "bu", c.bu);
  }
}

std::vector<Tensor*> ParameterSet::tensors() {
  std::vector<Tensor*> out;
  visit([&](const std::string&, Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> ParameterSet::tensors() const {
  // visit() only hands out references; nothing below writes through them.
  std::vector<const Tensor*> out;
  for (Tensor* t : const_cast<ParameterSet*>(this)->tensors())
    out.push_back(t);
  return out;
}

std::vector<std::string> ParameterSet::tensor_names() {
  std::vector<std::string> out;
  visit([&](const std::string& n, Tensor&) { out.push_back(n); });
  return out;
}

ParameterSet init_params(const ModelConfig& config, Rng& rng) {
  validate_model_config(config);
  std::size_t d = std::size_t(config.hidden_size);
  std::size_t e = std::size_t(config.embed_size);
  std::size_t src_vocab = syntax::for_grammar().vocab_size();
  // The baseline predicts over the target vocabulary plus EOS; the extra
  // row simply goes unused by the grammar decoder.
  std::size_t out_vocab = syntax::lambda_grammar().vocab_size() + 1;

  ParameterSet p;
  p.src_embed = Tensor(src_vocab, e);
  auto gate = [&](EncoderGate& g) {
    g.w = Tensor(d, e);
    g.ul = Tensor(d, d);
    g.ur = Tensor(d, d);
    g.b = Tensor(d, 1);
  };
  gate(p.encoder.in);
  gate(p.encoder.fl);
  gate(p.encoder.fr);
  gate(p.encoder.out);
  gate(p.encoder.u);
  p.combiner = Tensor(d, 2 * d);
  p.out_head = Tensor(out_vocab, d);
  p.tgt_embed = Tensor(out_vocab, e);
  const syntax::GrammarSpec& tg = syntax::lambda_grammar();
  for (std::size_t k = 0; k < tg.category_count(); ++k)
    p.category_heads.emplace_back(tg.members(int(k)).size(), d);
  p.child_cells.resize(std::size_t(config.max_children()));
  for (ChildCell& c : p.child_cells) {
    c.wi = Tensor(d, e + d);
    c.ui = Tensor(d, d);
    c.bi = Tensor(d, 1);
    c.wf = Tensor(d, e + d);
    c.uf = Tensor(d, d);
    c.bf = Tensor(d, 1);
    c.wo = Tensor(d, e + d);
    c.uo = Tensor(d, d);
    c.bo = Tensor(d, 1);
    c.wu = Tensor(d, e + d);
    c.uu = Tensor(d, d);
    c.bu = Tensor(d, 1);
  }

  p.visit([&](const std::string& name, Tensor& t) {
    bool bias = name.size() >= 2 &&
                (name.ends_with("_b") || name.ends_with("bi") ||
                 name.ends_with("bf") || name.ends_with("bo") ||
                 name.ends_with("bu"));
    if (bias) return;  // biases start at zero
    for (double& v : t.data)
      v = rng.next_uniform(-config.init_scale, config.init_scale);
  });
  return p;
}

}  // namespace t2t::model
