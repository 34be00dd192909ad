#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "t2t/errors.hpp"
#include "t2t/grammar.hpp"
#include "t2t/train.hpp"

namespace t2t::learning {

using autodiff::Tensor;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json model_config_json(const model::ModelConfig& c) {
  return json{{"hidden_size", c.hidden_size},
              {"embed_size", c.embed_size},
              {"decoder", model::decoder_kind_name(c.decoder)},
              {"max_nodes", c.limits.max_nodes},
              {"max_depth", c.limits.max_depth},
              {"init_scale", c.init_scale}};
}

model::ModelConfig model_config_from_json(const json& j) {
  model::ModelConfig c;
  c.hidden_size = j.at("hidden_size").get<int>();
  c.embed_size = j.at("embed_size").get<int>();
  c.decoder = model::decoder_kind_from_name(j.at("decoder").get<std::string>());
  c.limits.max_nodes = j.at("max_nodes").get<std::size_t>();
  c.limits.max_depth = j.at("max_depth").get<std::size_t>();
  c.init_scale = j.at("init_scale").get<double>();
  return c;
}

}  // namespace

void save_checkpoint(const model::ParameterSet& params,
                     const model::ModelConfig& config,
                     const std::string& path) {
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["model_config"] = model_config_json(config);
  doc["generator_provenance"] =
      json{{"for_grammar_fingerprint", syntax::for_grammar().fingerprint()},
           {"lambda_grammar_fingerprint",
            syntax::lambda_grammar().fingerprint()}};
  json p = json::object();
  const_cast<model::ParameterSet&>(params).visit(
      [&](const std::string& name, Tensor& t) {
        p[name] = json{{"shape", json::array({t.rows, t.cols})},
                       {"data", t.data}};
      });
  doc["params"] = std::move(p);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << doc.dump() << "\n";
  if (!f) throw IoError("write failed on " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  json doc = json::parse(f, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded())
    throw CorruptCheckpoint(path + " is not a complete JSON document");

  if (!doc.contains("format_version") ||
      !doc["format_version"].is_number_integer())
    throw CorruptCheckpoint(path + " has no format_version");
  int version = doc["format_version"].get<int>();
  if (version != kFormatVersion)
    throw VersionMismatch("checkpoint format " + std::to_string(version) +
                          ", this build reads " +
                          std::to_string(kFormatVersion));

  // Inside this block any structural surprise nlohmann reports (missing
  // key, wrong value type) means a damaged file, not a config problem.
  try {
    const json& prov = doc.at("generator_provenance");
    if (prov.at("for_grammar_fingerprint").get<std::uint64_t>() !=
            syntax::for_grammar().fingerprint() ||
        prov.at("lambda_grammar_fingerprint").get<std::uint64_t>() !=
            syntax::lambda_grammar().fingerprint())
      throw ConfigError(path +
                        " was produced against a different grammar; refusing");

    Checkpoint out;
    out.config = model_config_from_json(doc.at("model_config"));
    model::validate_model_config(out.config);

    // Build correctly shaped storage, then overwrite every value.
    model::ModelConfig shape_cfg = out.config;
    shape_cfg.init_scale = 0.0;
    Rng dummy(0);
    out.params = model::init_params(shape_cfg, dummy);

    const json& p = doc.at("params");
    std::size_t expected = 0;
    out.params.visit([&](const std::string& name, Tensor& t) {
      ++expected;
      if (!p.contains(name))
        throw CorruptCheckpoint(path + " is missing parameter " + name);
      const json& entry = p.at(name);
      const json& shape = entry.at("shape");
      if (shape.size() != 2 || shape[0].get<std::size_t>() != t.rows ||
          shape[1].get<std::size_t>() != t.cols)
        throw CorruptCheckpoint(path + ": parameter " + name +
                                " has shape " + shape.dump() + ", expected " +
                                shape_string(t));
      const json& data = entry.at("data");
      if (data.size() != t.size())
        throw CorruptCheckpoint(path + ": parameter " + name + " has " +
                                std::to_string(data.size()) +
                                " values, needs " + std::to_string(t.size()));
      for (std::size_t i = 0; i < t.size(); ++i)
        t.data[i] = data[i].get<double>();
      if (!all_finite(t))
        throw CorruptCheckpoint(path + ": parameter " + name +
                                " contains non-finite values");
    });
    if (p.size() != expected)
      throw CorruptCheckpoint(path + " carries " + std::to_string(p.size()) +
                              " parameters, expected " +
                              std::to_string(expected));
    return out;
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(path + " is malformed: " + e.what());
  }
}

}  // namespace t2t::learning
